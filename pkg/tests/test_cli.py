import csv
import io
import json
import math

import numpy as np
import pytest

from dickefloquet import __version__
from dickefloquet.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    ConfigError,
    build_config,
    main,
    read_config_text,
    recipe_names,
    recipe_text,
    run_config,
    write_outputs,
)

SMALL = {"N": "2", "n_max": "12", "count": "4"}


def load_csv(path):
    lines = path.read_text().splitlines()
    meta = [l[2:] for l in lines if l.startswith("# ")]
    rows = list(csv.reader([l for l in lines if not l.startswith("#")]))
    return meta, rows[0], rows[1:]


def config(**kw):
    raw = dict(SMALL)
    raw.update({k: str(v) for k, v in kw.items()})
    return build_config([raw])


def test_recipes_cover_all_figures():
    assert recipe_names() == ["fig1a", "fig2d", "fig3", "fig4", "fig5", "figB", "figC", "figC_frequency"]
    for name in recipe_names():
        cfg = build_config([read_config_text(recipe_text(name))])
        assert cfg.N == 10 and cfg.n_max == 199 and cfg.count == 50
        assert cfg.omega == 1.0 and cfg.omega0 == 1.0


def test_fig1a_recipe_values():
    cfg = build_config([read_config_text(recipe_text("fig1a"))])
    assert cfg.period == 0.15 and cfg.amplitude == 3.0


def test_config_errors():
    with pytest.raises(ConfigError):
        read_config_text("bogus = 1")
    with pytest.raises(ConfigError):
        config(command="evolve")  # no drive
    with pytest.raises(ConfigError):
        config(command="evolve", period=0.1, protocol="random")
    with pytest.raises(ConfigError):
        config(command="evolve", period=0.1, g1=-1)
    with pytest.raises(ConfigError):
        config(command="evolve", period=0.1, count=10**6)
    with pytest.raises(ConfigError):
        config(command="heating", period=0.1, protocol="periodic")
    with pytest.raises(ConfigError):
        config(command="phase-diagram", period=0.1)
    with pytest.raises(ConfigError):
        config(command="evolve", period="abc")


def test_exit_codes(tmp_path, capsys):
    assert main(["evolve", "--g1", "0.5"]) == EXIT_CONFIG
    assert main(["run", "nofig"]) == EXIT_CONFIG
    assert main(["recipes"]) == EXIT_OK
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("period = 0.1\nwhatever = 2\n")
    assert main(["evolve", "--config", str(cfg)]) == EXIT_CONFIG


def test_numerical_failure_exit_code(monkeypatch):
    from dickefloquet import cli
    from dickefloquet.floquet import NumericalFailure

    def boom(cfg):
        raise NumericalFailure("unitarity lost")

    monkeypatch.setitem(cli.COMMAND_FUNCS, "evolve", boom)
    assert main(["evolve", "--period", "0.1"]) == EXIT_NUMERICAL


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("period = 0.1\ng1 = 0.3\nN = 2\nn_max = 12\ncount = 2\ndepth = 5\n")
    out = tmp_path / "out.csv"
    assert main(["evolve", "--config", str(cfg), "--g1", "0.4", "--output", str(out)]) == EXIT_OK
    meta, header, rows = load_csv(out)
    assert "g1 = 0.4" in meta and f"version = {__version__}" in meta
    assert header[:7] == ["omega_d", "target_energy", "mean_energy", "step", "time", "n_av", "entropy"]
    assert len(rows) == 6  # steps 0..5
    assert (tmp_path / "out_saturation.csv").exists()


def test_metadata_header_is_a_config(tmp_path):
    out = tmp_path / "p.csv"
    main(["phase-diagram", "--N", "2", "--n-max", "10", "--period", "0.2", "--amplitude", "1",
          "--g1-grid", "0.5", "--g2-grid", "0.5", "--output", str(out)])
    meta, _, _ = load_csv(out)
    text = "\n".join(l for l in meta if not l.startswith("version"))
    cfg = build_config([read_config_text(text)])
    assert cfg.g1_grid == (0.5,) and cfg.N == 2


def test_phase_diagram_single_point_and_undriven_line(tmp_path):
    tables = run_config(config(command="phase-diagram", period=0.1, amplitude=0, g1_grid="0.3", g2_grid="0.2"))
    grid, line = tables
    assert len(grid.rows) == 1
    assert line.rows[0][1] == pytest.approx(0.7)
    assert line.rows[0][2] == pytest.approx(0.7)


def test_phase_diagram_deterministic_order():
    cfg = config(command="phase-diagram", period=0.1, g1_grid="0:1:2", g2_grid="0:1:3")
    grid, _ = run_config(cfg)
    assert [tuple(r[:2]) for r in grid.rows] == [(g1, g2) for g1 in (0.0, 1.0) for g2 in (0.0, 0.5, 1.0)]


def test_level_stats_rows():
    cfg = config(command="level-stats", N=4, n_max=30, g1=1.25, g2=1.0, frequencies="50")
    (table,) = run_config(cfg)
    assert [r[0] for r in table.rows] == ["floquet", "static"]
    row = table.rows[0]
    assert row[1] == pytest.approx(50)
    assert 0 < row[4] < 1
    assert row[4] == row[5]  # configured policy is per_parity_sector


def test_evolve_decoupled_eigenstates_are_flat():
    cfg = config(command="evolve", amplitude=0, period=0.3, depth=50, energies="2,5", per_state="true")
    series, sat = run_config(cfg)
    ent = np.array([r[6] for r in series.rows])
    nav = np.array([[r[5] for r in series.rows if r[1] == E] for E in (2.0, 5.0)])
    assert np.allclose(ent, 0, atol=1e-12)
    assert np.allclose(nav - nav[:, :1], 0, atol=1e-12)
    assert len(series.columns) == 7 + 2 * 4
    assert len(sat.rows) == 2


def test_heating_single_point_has_no_fit(tmp_path):
    cfg = config(command="heating", protocol="thue_morse", frequencies="5", depth=12,
                 output=str(tmp_path / "h.csv"))
    written = write_outputs(run_config(cfg), cfg)
    doc = json.loads((tmp_path / "h_fit.json").read_text())
    assert "at least 3" in doc["fits"][0]["flag"]
    assert doc["metadata"]["version"] == __version__
    assert len(written) == 2


def test_heating_fit_round_trip():
    cfg = config(command="heating", protocol="thue_morse", N=2, n_max=20, frequencies="2,3,4,6",
                 depth=14, g1=0.7, g2=0.5)
    table, doc = run_config(cfg)
    assert len(table.rows) == 4
    fit = doc.body["fits"][0]
    assert all(r[6] for r in table.rows)
    assert fit["kind"] == "log_vs_sqrt_freq"
    assert fit["n_points"] == 4
    taus = np.array([r[5] for r in table.rows])
    resid = np.log(taus) - (fit["slope"] * np.sqrt([2, 3, 4, 6]) + fit["intercept"])
    assert np.allclose(resid, fit["residuals"])


def test_convergence_decoupled_is_exact():
    cfg = config(command="convergence", amplitude=0, period=0.2, depth=30, delta_n_max=4)
    (doc,) = run_config(cfg)
    assert doc.body["n_max_values"] == [12, 16]
    assert doc.body["max_relative_deviation"] < 1e-12


def test_convergence_flags_truncation():
    cfg = config(command="convergence", N=2, n_max=6, period=1.0, amplitude=2.0, g1=1.0, g2=1.0,
                 protocol="thue_morse", depth=8, energies="4", delta_n_max=2)
    (doc,) = run_config(cfg)
    assert doc.body["warnings"]["6"]


def test_output_bit_reproducible(tmp_path):
    args = ["evolve", "--N", "2", "--n-max", "10", "--count", "3", "--period", "0.2", "--g1", "0.5",
            "--protocol", "fibonacci", "--depth", "10"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(args + ["--output", str(a)])
    main(args + ["--output", str(b)])
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# output")]
    assert strip(a) == strip(b)


def test_workers_give_identical_numbers(tmp_path):
    base = config(command="level-stats", N=3, n_max=20, g1=1.0, g2=0.5, frequencies="10,40")
    par = config(command="level-stats", N=3, n_max=20, g1=1.0, g2=0.5, frequencies="10,40", workers=2)
    (a,) = run_config(base)
    (b,) = run_config(par)
    assert np.allclose(np.array([r[4:] for r in a.rows], float), np.array([r[4:] for r in b.rows], float),
                       atol=1e-12, rtol=0)


def test_json_format(tmp_path):
    out = tmp_path / "o.json"
    cfg = config(command="evolve", period=0.2, depth=3, format="json", output=str(out))
    write_outputs(run_config(cfg), cfg)
    body = json.loads(out.read_text())
    assert body["columns"][0] == "omega_d"
    assert len(body["rows"]) == 4
