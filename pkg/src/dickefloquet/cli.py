"""Command-line front end: parameter sweeps, figure recipes and CSV/JSON output.

Every command takes a flat ``key = value`` config file and/or ``--key value``
flags (flags win)::

    dickefloquet evolve --config run.cfg --frequencies 20,50
    dickefloquet run fig4 --output fig4.csv
    dickefloquet recipes

Each output file starts with ``#``-prefixed lines holding the fully resolved
config and the package version; with the leading ``# `` stripped those lines
are a valid config file again.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import functools
import io
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CUTS,
    FitKind,
    SectorPolicy,
    bandwidth,
    critical_line,
    default_plateau_levels,
    fit,
    heating_time,
    ipr_ground_state,
    floquet_quasienergies_by_sector,
    late_time_slope,
    level_stats_quasienergies,
    level_stats_static,
    saturation_value,
)
from .drives import DriveKind
from .dynamics import (
    BOSON_NUMBER,
    EFFECTIVE,
    ENTROPY,
    evolve_ensembles,
    infinite_temperature_refs,
    prepare_initial_states,
)
from .floquet import NumericalFailure
from .hilbert import build_basis
from .model import DriveParams, MagnusRegimeWarning, ModelParams, effective_hamiltonian, static_hamiltonian

log = logging.getLogger("dickefloquet")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("phase-diagram", "level-stats", "evolve", "heating", "convergence")
PROTOCOLS = tuple(k.value for k in DriveKind) + (EFFECTIVE,)
POLICY_ORDER = (SectorPolicy.PER_PARITY_SECTOR, SectorPolicy.FULL)
DEFAULT_DEPTH = {"periodic": 10**6, EFFECTIVE: 10**6, "thue_morse": 36, "fibonacci": 72}


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str = ""
    # model
    omega: float = 1.0
    omega0: float = 1.0
    g1: float = 0.0
    g2: float = 0.0
    # drive: either a list of frequencies or a single period
    amplitude: float = 1.0
    frequencies: tuple = ()
    period: float | None = None
    # sizes
    N: int = 10
    n_max: int = 199
    # protocol; depth is periods (periodic/effective) or the maximal level
    protocol: str = "periodic"
    depth: int | None = None
    # ensembles
    energies: tuple = (3.48,)
    count: int = 50
    # analysis knobs
    trim_fraction: float = 0.1
    sector_policy: str = "per_parity_sector"
    cut: str = "widest_gap"
    plateau_levels: tuple | None = None
    g1_grid: tuple = ()
    g2_grid: tuple = ()
    sweep: str = "frequency"
    pipeline: str = "evolve"
    delta_n_max: int = 50
    per_state: bool = False
    use_sectors: bool = True
    # output
    output: str = "-"
    format: str = "csv"
    workers: int = 1

    @property
    def resolved_depth(self) -> int:
        return self.depth if self.depth is not None else DEFAULT_DEPTH[self.protocol]

    def model(self) -> ModelParams:
        return ModelParams(self.omega, self.omega0, self.g1, self.g2)

    def drives(self) -> list[DriveParams]:
        if self.frequencies:
            return [DriveParams.from_frequency(self.amplitude, w) for w in self.frequencies]
        if self.period is not None:
            return [DriveParams(self.amplitude, self.period)]
        raise ConfigError("set either 'frequencies' or 'period'")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


def _grid(text: str) -> tuple:
    """``start:stop:num`` (inclusive, like linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:num, got {text!r}")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise ValueError("grid needs at least one point")
        return tuple(float(x) for x in np.linspace(start, stop, num))
    return _floats(text)


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none") else conv(text)

    return parse


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _levels(text: str) -> tuple:
    vals = tuple(int(x) for x in text.replace(" ", "").split(","))
    if len(vals) != 2:
        raise ValueError("plateau_levels needs two integers 'lo,hi'")
    return vals


PARSERS = {
    "command": str,
    "omega": float,
    "omega0": float,
    "g1": float,
    "g2": float,
    "amplitude": float,
    "frequencies": _floats,
    "period": _optional(float),
    "N": int,
    "n_max": int,
    "protocol": str,
    "depth": _optional(lambda s: int(float(s))),
    "energies": _floats,
    "count": int,
    "trim_fraction": float,
    "sector_policy": str,
    "cut": str,
    "plateau_levels": _optional(_levels),
    "g1_grid": _grid,
    "g2_grid": _grid,
    "sweep": str,
    "pipeline": str,
    "delta_n_max": int,
    "per_state": _bool,
    "use_sectors": _bool,
    "output": str,
    "format": str,
    "workers": int,
}


def format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def read_config_text(text: str) -> dict:
    """Parse flat ``key = value`` text into raw strings keyed by field name."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    raw = dict(cp["run"])
    unknown = sorted(set(raw) - set(PARSERS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return raw


def recipe_names() -> list[str]:
    folder = resources.files("dickefloquet") / "recipes"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".cfg"))


def recipe_text(name: str) -> str:
    if name not in recipe_names():
        raise ConfigError(f"unknown recipe {name!r}; available: {', '.join(recipe_names())}")
    return (resources.files("dickefloquet") / "recipes" / f"{name}.cfg").read_text()


def build_config(layers) -> RunConfig:
    """Apply raw ``{key: text}`` layers in order (later wins) and validate."""
    values = {}
    for raw in layers:
        for key, text in raw.items():
            if key not in PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                values[key] = PARSERS[key](text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from exc
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Check every precondition before any heavy computation; raises ConfigError."""

    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.command in COMMANDS, f"command must be one of {', '.join(COMMANDS)}")
    need(cfg.protocol in PROTOCOLS, f"protocol must be one of {', '.join(PROTOCOLS)}")
    need(cfg.sector_policy in [p.value for p in SectorPolicy], "sector_policy must be full or per_parity_sector")
    need(cfg.cut in CUTS, f"cut must be one of {', '.join(CUTS)}")
    need(cfg.format in ("csv", "json"), "format must be csv or json")
    need(cfg.workers >= 1, "workers must be >= 1")
    need(cfg.count >= 1, "count must be >= 1")
    need(0 <= cfg.trim_fraction < 0.5, "trim_fraction must lie in [0, 0.5)")
    need(cfg.sweep in ("frequency", "energy"), "sweep must be frequency or energy")
    need(cfg.pipeline in ("evolve", "level-stats"), "pipeline must be evolve or level-stats")
    need(cfg.delta_n_max >= 1, "delta_n_max must be >= 1")
    need(cfg.depth is None or cfg.depth >= 1, "depth must be >= 1")
    need(len(cfg.energies) >= 1, "energies must not be empty")
    need(all(math.isfinite(w) and w > 0 for w in cfg.frequencies), "frequencies must be positive")
    if cfg.plateau_levels is not None:
        need(1 <= cfg.plateau_levels[0] <= cfg.plateau_levels[1], "plateau_levels must satisfy 1 <= lo <= hi")
    try:
        cfg.model()
        basis = build_basis(cfg.N, cfg.n_max)
        if cfg.period is not None or cfg.frequencies:
            cfg.drives()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.command in ("evolve", "heating") or (cfg.command == "convergence" and cfg.pipeline == "evolve"):
        need(cfg.count <= basis.dim, f"count exceeds the basis dimension {basis.dim}")

    if cfg.command == "phase-diagram":
        need(cfg.g1_grid and cfg.g2_grid, "phase-diagram needs g1_grid and g2_grid")
        need(all(g >= 0 for g in cfg.g1_grid + cfg.g2_grid), "couplings must be non-negative")
        need(len(cfg.drives()) == 1, "phase-diagram takes a single drive (one period or frequency)")
    else:
        cfg.drives()
    if cfg.command == "heating":
        need(cfg.protocol in ("thue_morse", "fibonacci"), "heating needs a thue_morse or fibonacci protocol")
        if cfg.plateau_levels is not None:
            need(cfg.plateau_levels[1] <= cfg.resolved_depth, "plateau window extends beyond depth")
    if cfg.command == "level-stats" or (cfg.command == "convergence" and cfg.pipeline == "level-stats"):
        need(all(d.amplitude >= 0 for d in cfg.drives()), "amplitude must be >= 0")


# --------------------------------------------------------------------------
# results and writers
# --------------------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list
    suffix: str = ""
    notes: list = field(default_factory=list)


@dataclass
class Document:
    body: dict
    suffix: str = ""


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def metadata_lines(cfg: RunConfig) -> list[str]:
    lines = [f"version = {__version__}"]
    lines += [f"{k} = {format_value(v)}" for k, v in cfg.as_dict().items()]
    return lines


def render_table(table: Table, cfg: RunConfig) -> str:
    if cfg.format == "json":
        body = {
            "metadata": {"version": __version__, "config": cfg.as_dict()},
            "notes": table.notes,
            "columns": table.columns,
            "rows": [[_clean(v) for v in row] for row in table.rows],
        }
        return json.dumps(body, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    for line in metadata_lines(cfg):
        buf.write(f"# {line}\n")
    for note in table.notes:
        buf.write(f"# note: {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_clean(v) for v in row])
    return buf.getvalue()


def render_document(doc: Document, cfg: RunConfig) -> str:
    body = {"metadata": {"version": __version__, "config": cfg.as_dict()}, **doc.body}
    return json.dumps(body, indent=2, default=_clean, allow_nan=True) + "\n"


def output_path(cfg: RunConfig, suffix: str, ext: str) -> Path | None:
    if cfg.output in ("", "-"):
        return None
    base = Path(cfg.output)
    if not suffix:
        return base
    return base.with_name(f"{base.stem}{suffix}{ext}")


def write_outputs(results, cfg: RunConfig, stdout=None) -> list[Path]:
    stdout = stdout or sys.stdout
    written = []
    for item in results:
        if isinstance(item, Table):
            text = render_table(item, cfg)
            path = output_path(cfg, item.suffix, "." + cfg.format)
        else:
            text = render_document(item, cfg)
            path = output_path(cfg, item.suffix, ".json")
        if path is None:
            stdout.write(text)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            written.append(path)
    return written


def _pmap(fn, items, workers: int) -> list:
    """Ordered map, in-process for one worker, over a process pool otherwise."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _ipr_point(point, cfg: RunConfig):
    g1, g2 = point
    basis = build_basis(cfg.N, cfg.n_max)
    p = ModelParams(cfg.omega, cfg.omega0, g1, g2)
    d = cfg.drives()[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MagnusRegimeWarning)
        H = effective_hamiltonian(p, d, basis)
    return ipr_ground_state(H, basis)


def cmd_phase_diagram(cfg: RunConfig):
    """IPR of the effective ground state on a (g1, g2) grid plus the critical line."""
    d = cfg.drives()[0]
    points = [(g1, g2) for g1 in cfg.g1_grid for g2 in cfg.g2_grid]
    iprs = _pmap(functools.partial(_ipr_point, cfg=cfg), points, cfg.workers)
    notes = []
    if d.magnus_parameter >= 1:
        notes.append(f"T^2 Omega^2 = {d.magnus_parameter:.3g} >= 1: outside the high-frequency regime")
    grid = Table(["g1", "g2", "ipr"], [[g1, g2, v] for (g1, g2), v in zip(points, iprs)], notes=notes)
    p = cfg.model()
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MagnusRegimeWarning)
        for g1 in cfg.g1_grid:
            undriven = math.sqrt(p.omega * p.omega0) - g1
            rows.append([g1, critical_line(g1, p, d), undriven])
    line = Table(["g1", "g2_critical", "g2_undriven"], rows, suffix="_critical")
    return [grid, line]


def _level_stats_point(d: DriveParams, cfg: RunConfig):
    basis = build_basis(cfg.N, cfg.n_max)
    sectors = floquet_quasienergies_by_sector(cfg.model(), d, basis)
    return [
        level_stats_quasienergies(sectors, d.frequency, pol, cfg.trim_fraction, cfg.cut).mean_r
        for pol in POLICY_ORDER
    ]


def cmd_level_stats(cfg: RunConfig):
    """Mean spacing ratio of the quasienergies for every drive frequency.

    Both sector policies are reported; the last row is the undriven spectrum,
    the infinite-frequency limit of the effective Hamiltonian.
    """
    basis = build_basis(cfg.N, cfg.n_max)
    H = static_hamiltonian(cfg.model(), basis)
    delta = bandwidth(H)
    drives = cfg.drives()
    values = _pmap(functools.partial(_level_stats_point, cfg=cfg), drives, cfg.workers)
    ref = [level_stats_static(H, basis, pol, cfg.trim_fraction).mean_r for pol in POLICY_ORDER]
    chosen = POLICY_ORDER.index(SectorPolicy(cfg.sector_policy))
    cols = ["kind", "omega_d", "omega_d_over_delta", "period", "mean_r", "mean_r_per_parity_sector", "mean_r_full"]
    rows = [["floquet", d.frequency, d.frequency / delta, d.period, v[chosen], *v] for d, v in zip(drives, values)]
    rows.append(["static", math.inf, math.inf, 0.0, ref[chosen], *ref])
    notes = [f"bandwidth Delta = {delta!r} (undriven H, couplings included)"]
    return [Table(cols, rows, notes=notes)]


def _evolve_point(d: DriveParams, cfg: RunConfig):
    basis = build_basis(cfg.N, cfg.n_max)
    p = cfg.model()
    ensembles = [prepare_initial_states(p, basis, E, cfg.count) for E in cfg.energies]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MagnusRegimeWarning)
        return evolve_ensembles(
            cfg.protocol, p, d, basis, ensembles, cfg.resolved_depth, use_sectors=cfg.use_sectors
        )


def _run_evolutions(cfg: RunConfig):
    drives = cfg.drives()
    return drives, _pmap(functools.partial(_evolve_point, cfg=cfg), drives, cfg.workers)


def _evolve_tables(cfg: RunConfig, drives, runs):
    n_inf, s_page = infinite_temperature_refs(cfg.N, cfg.n_max)
    cols = ["omega_d", "target_energy", "mean_energy", "step", "time", "n_av", "entropy"]
    if cfg.per_state:
        cols += [f"n_av_{i}" for i in range(cfg.count)] + [f"entropy_{i}" for i in range(cfg.count)]
    rows, sat_rows, notes = [], [], [f"n_inf = {n_inf!r}", f"s_page = {s_page!r}"]
    for d, run in zip(drives, runs):
        for res in run:
            nb, S = res[BOSON_NUMBER], res[ENTROPY]
            meta = S.metadata
            for w in S.warnings:
                notes.append(f"omega_d={d.frequency:g} E={meta['target_energy']:g}: {w}")
            n_mean, s_mean = nb.mean, S.mean
            for i in range(len(S)):
                row = [d.frequency, meta["target_energy"], meta["mean_energy"], S.steps[i], S.times[i], n_mean[i], s_mean[i]]
                if cfg.per_state:
                    row += list(nb.per_state[:, i]) + list(S.per_state[:, i])
                rows.append(row)
            try:
                n_sat, s_sat = saturation_value(nb), saturation_value(S)
            except ValueError:
                n_sat = s_sat = math.nan
            try:
                slope, err = late_time_slope(S)
            except ValueError:
                slope = err = math.nan
            sat_rows.append(
                [d.frequency, meta["target_energy"], meta["mean_energy"], n_sat, s_sat, slope, err,
                 n_inf, s_page, meta["max_top_fock_weight"]]
            )
    series = Table(cols, rows, notes=notes)
    sat_cols = ["omega_d", "target_energy", "mean_energy", "n_av_saturation", "entropy_saturation",
                "entropy_late_slope", "entropy_late_slope_stderr", "n_inf", "s_page", "max_top_fock_weight"]
    return [series, Table(sat_cols, sat_rows, suffix="_saturation", notes=notes[:2])]


def cmd_evolve(cfg: RunConfig):
    """Ensemble-averaged boson number and entropy along the drive, plus saturation values."""
    drives, runs = _run_evolutions(cfg)
    return _evolve_tables(cfg, drives, runs)


def _fit_kind(cfg: RunConfig) -> FitKind:
    if cfg.sweep == "energy":
        return FitKind.POWER_LAW
    return FitKind.LOG_VS_SQRT_FREQ if cfg.protocol == "thue_morse" else FitKind.LOG_VS_FREQ


def cmd_heating(cfg: RunConfig):
    """Heating times over a frequency or energy sweep and the matching fit."""
    _, s_page = infinite_temperature_refs(cfg.N, cfg.n_max)
    window = cfg.plateau_levels or default_plateau_levels(cfg.protocol)
    if window[1] > cfg.resolved_depth:
        raise ConfigError(f"plateau window {window} extends beyond depth {cfg.resolved_depth}")
    drives, runs = _run_evolutions(cfg)
    cols = ["omega_d", "target_energy", "mean_energy", "plateau", "threshold", "tau_star", "heated", "flag"]
    rows = []
    for d, run in zip(drives, runs):
        for res in run:
            h = heating_time(res[ENTROPY], s_page, window)
            m = res[ENTROPY].metadata
            rows.append([d.frequency, m["target_energy"], m["mean_energy"], h.plateau_value, h.threshold,
                         h.tau_star, h.heated, h.flag])
    kind = _fit_kind(cfg)
    fits = []
    if cfg.sweep == "frequency":
        groups = {E: [r for r in rows if r[1] == E] for E in cfg.energies}
        xcol, fixed = 0, "target_energy"
    else:
        groups = {d.frequency: [r for r in rows if r[0] == d.frequency] for d in drives}
        xcol, fixed = 2, "omega_d"
    for key, group in groups.items():
        used = [r for r in group if r[6]]
        entry = {fixed: key, "excluded": [r[xcol] for r in group if not r[6]]}
        if len(used) < 3:
            entry["flag"] = f"only {len(used)} heated point(s); at least 3 are needed for a fit"
        else:
            entry.update(fit(kind, [r[xcol] for r in used], [r[5] for r in used]).as_dict())
        fits.append(entry)
    notes = [f"s_page = {s_page!r}", f"plateau_levels = {window[0]},{window[1]}"]
    return [Table(cols, rows, notes=notes), Document({"sweep": cfg.sweep, "fits": fits}, suffix="_fit")]


def _final_values(cfg: RunConfig) -> tuple[dict, list]:
    if cfg.pipeline == "level-stats":
        (table,) = cmd_level_stats(cfg)
        vals = {f"{r[0]}:{r[1]:g}:{c}": r[i] for r in table.rows for i, c in ((5, "per_sector"), (6, "full"))}
        return vals, table.notes
    drives, runs = _run_evolutions(cfg)
    vals, warns = {}, []
    for d, run in zip(drives, runs):
        for res in run:
            key = f"{d.frequency:g}:{res[ENTROPY].metadata['target_energy']:g}"
            vals[f"{key}:n_av"] = float(res[BOSON_NUMBER].mean[-1])
            vals[f"{key}:entropy"] = float(res[ENTROPY].mean[-1])
            warns += res[ENTROPY].warnings
    return vals, warns


def cmd_convergence(cfg: RunConfig):
    """Rerun ``pipeline`` at ``n_max`` and ``n_max + delta_n_max`` and compare final values."""
    cutoffs = (cfg.n_max, cfg.n_max + cfg.delta_n_max)
    results = [_final_values(dataclasses.replace(cfg, n_max=n)) for n in cutoffs]
    (base, warn_a), (big, warn_b) = results
    rows, worst = [], 0.0
    for key in base:
        a, b = base[key], big[key]
        dev = abs(a - b) / max(abs(b), 1e-300) if a != b else 0.0
        worst = max(worst, dev)
        rows.append({"quantity": key, "base": a, "raised": b, "relative_deviation": dev})
    body = {
        "pipeline": cfg.pipeline,
        "n_max_values": list(cutoffs),
        "max_relative_deviation": worst,
        "rows": rows,
        "warnings": {str(cutoffs[0]): list(warn_a), str(cutoffs[1]): list(warn_b)},
    }
    return [Document(body)]


COMMAND_FUNCS = {
    "phase-diagram": cmd_phase_diagram,
    "level-stats": cmd_level_stats,
    "evolve": cmd_evolve,
    "heating": cmd_heating,
    "convergence": cmd_convergence,
}


COMMAND_HELP = {
    "phase-diagram": "ground-state IPR on a (g1, g2) grid and the critical line",
    "level-stats": "quasienergy spacing ratio against drive frequency",
    "evolve": "boson number and entanglement entropy along the drive",
    "heating": "heating times over a frequency or energy sweep, with fits",
    "convergence": "compare a pipeline at two boson cutoffs",
}


def run_config(cfg: RunConfig):
    return COMMAND_FUNCS[cfg.command](cfg)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _add_overrides(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    for name in PARSERS:
        if name == "command":
            continue
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, metavar="VALUE")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dickefloquet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        _add_overrides(sub.add_parser(name, help=COMMAND_HELP[name]))
    run = sub.add_parser("run", help="run a bundled figure recipe")
    run.add_argument("recipe")
    _add_overrides(run)
    sub.add_parser("recipes", help="list bundled figure recipes")
    show = sub.add_parser("show", help="print a recipe's config")
    show.add_argument("recipe")
    return parser


def resolve_args(args) -> RunConfig:
    layers = []
    if args.subcommand == "run":
        layers.append(read_config_text(recipe_text(args.recipe)))
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        layers.append(read_config_text(text))
    flags = {k: getattr(args, k) for k in PARSERS if k != "command" and getattr(args, k, None) is not None}
    if args.subcommand != "run":
        flags["command"] = args.subcommand
    layers.append(flags)
    return build_config(layers)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "recipes":
        print("\n".join(recipe_names()))
        return EXIT_OK
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.subcommand == "show":
            sys.stdout.write(recipe_text(args.recipe))
            return EXIT_OK
        cfg = resolve_args(args)
        results = run_config(cfg)
        for path in write_outputs(results, cfg):
            log.info("wrote %s", path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
