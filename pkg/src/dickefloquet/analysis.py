"""Diagnostics: ground-state IPR, critical line, level statistics, heating times, fits."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import stats

from .drives import DriveKind, fibonacci_number
from .dynamics import ObservableSeries
from .floquet import HermitianPropagator, floquet_spectrum
from .hilbert import ProductBasis, parity_partition
from .model import (
    DriveParams,
    MagnusRegimeWarning,
    ModelParams,
    effective_hamiltonian,
    static_hamiltonian,
    step_hamiltonians,
)

POISSON_MEAN_R = 2 * math.log(2) - 1  # 0.3863
GOE_MEAN_R = 0.5359
COE_MEAN_R = 0.527

DEGENERACY_GUARD = 1e-12
CUTS = ("widest_gap", "zone_edge")


class SectorPolicy(str, enum.Enum):
    FULL = "full"
    PER_PARITY_SECTOR = "per_parity_sector"


# --------------------------------------------------------------------------
# ground state and phase boundary
# --------------------------------------------------------------------------


def ground_state(H: np.ndarray, basis: ProductBasis | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of ``H``.

    With ``basis`` the problem is solved in each parity sector and the lower
    of the two sector ground states is returned, so the state has definite
    parity even when the sectors are (nearly) degenerate; exact ties go to
    the even sector.
    """
    if basis is None:
        w, v = sla.eigh(H, subset_by_index=[0, 0])
        return float(w[0]), v[:, 0]
    best = None
    for idx in parity_partition(basis):
        if not len(idx):
            continue
        w, v = sla.eigh(H[np.ix_(idx, idx)], subset_by_index=[0, 0])
        if best is None or w[0] < best[0]:
            psi = np.zeros(basis.dim, dtype=v.dtype)
            psi[idx] = v[:, 0]
            best = (float(w[0]), psi)
    return best


def ipr(psi: np.ndarray) -> float:
    """Inverse participation ratio sum |c|^4 of a normalised vector."""
    return float(np.sum(np.abs(psi) ** 4))


def ipr_ground_state(H: np.ndarray, basis: ProductBasis | None = None) -> float:
    return ipr(ground_state(H, basis)[1])


def critical_line(g1: float, p: ModelParams, d: DriveParams) -> float:
    """Counter-rotating coupling at the normal/superradiant boundary of the driven model.

    With ``delta = T^2 Omega^2 / 3`` and ``delta~ = (delta/2)(w/w0 + w0/w)``::

        g2 = (1 + delta~)/(1 - delta) sqrt(w w0) - (1 + delta)/(1 - delta) g1
    """
    if d.magnus_parameter >= 1:
        warnings.warn(
            f"T^2 Omega^2 = {d.magnus_parameter:.3g} >= 1: critical line outside its regime",
            MagnusRegimeWarning,
            stacklevel=2,
        )
    delta = d.magnus_parameter / 3
    if delta == 1:
        raise ValueError("T^2 Omega^2 = 3 makes the critical line singular")
    delta_t = delta / 2 * (p.omega / p.omega0 + p.omega0 / p.omega)
    chi = (1 + delta) / (1 - delta)
    chi_t = (1 + delta_t) / (1 - delta)
    return chi_t * math.sqrt(p.omega * p.omega0) - chi * g1


def locate_ipr_drop(
    g1: float,
    p: ModelParams,
    d: DriveParams | None,
    basis: ProductBasis,
    threshold: float = 0.5,
    g2_max: float = 3.0,
    coarse_step: float = 0.1,
    tol: float = 1e-3,
) -> float:
    """Smallest g2 at which the ground-state IPR falls below ``threshold``.

    Scans g2 upward from 0 in ``coarse_step`` increments, then bisects the
    bracketing interval to ``tol``. Uses the effective Hamiltonian when ``d``
    is given, the undriven one otherwise. Returns ``nan`` if no drop is found
    below ``g2_max``.
    """

    def value(g2):
        q = ModelParams(p.omega, p.omega0, g1, g2)
        H = effective_hamiltonian(q, d, basis) if d is not None else static_hamiltonian(q, basis)
        return ipr_ground_state(H, basis)

    lo = 0.0
    if value(lo) < threshold:
        return 0.0
    hi = None
    g2 = coarse_step
    while g2 <= g2_max + 1e-12:
        if value(g2) < threshold:
            hi = g2
            break
        lo = g2
        g2 += coarse_step
    if hi is None:
        return float("nan")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if value(mid) < threshold:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


# --------------------------------------------------------------------------
# level statistics
# --------------------------------------------------------------------------


@dataclass
class LevelStatsResult:
    r_values: np.ndarray
    mean_r: float
    trim_fraction: float
    sector_policy: SectorPolicy = SectorPolicy.FULL
    sector_means: list = field(default_factory=list)
    sector_sizes: list = field(default_factory=list)


def r_statistic(levels, trim_fraction: float = 0.1) -> LevelStatsResult:
    """Ratios of consecutive level spacings ``min(s_{i-1}, s_i) / max(s_{i-1}, s_i)``.

    ``trim_fraction`` of the levels is discarded at each edge of the sorted
    spectrum, and spacings below 1e-12 are dropped as exact degeneracies.
    """
    if not 0 <= trim_fraction < 0.5:
        raise ValueError("trim_fraction must lie in [0, 0.5)")
    e = np.sort(np.asarray(levels, dtype=float))
    cut = int(math.floor(trim_fraction * len(e)))
    e = e[cut : len(e) - cut]
    if len(e) < 10:
        raise ValueError(f"need at least 10 levels after trimming, have {len(e)}")
    s = np.diff(e)
    s = s[s > DEGENERACY_GUARD]
    if len(s) < 2:
        raise ValueError("spectrum is fully degenerate; no spacing ratios")
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    return LevelStatsResult(r, float(np.mean(r)), trim_fraction)


def open_circular_spectrum(quasienergies, frequency: float) -> np.ndarray:
    """Unroll quasienergies so the zone boundary sits in the widest gap.

    Quasienergies live on a circle of circumference ``frequency``. Edge trimming
    needs an open interval; cutting the circle at its widest gap keeps a band
    that fits inside one zone (high frequencies) in one piece.
    """
    e = np.sort(np.asarray(quasienergies, dtype=float))
    if len(e) < 2:
        return e
    gaps = np.diff(e)
    wrap = e[0] + frequency - e[-1]
    i = int(np.argmax(gaps))
    if wrap >= gaps[i]:
        return e
    return np.concatenate([e[i + 1 :], e[: i + 1] + frequency])


def _combine(per_sector, trim_fraction, policy):
    if policy is SectorPolicy.FULL:
        res = r_statistic(np.concatenate(per_sector), trim_fraction)
        res.sector_policy = policy
        return res
    results = [r_statistic(levels, trim_fraction) for levels in per_sector]
    sizes = [len(levels) for levels in per_sector]
    mean = float(np.dot([r.mean_r for r in results], sizes) / np.sum(sizes))
    return LevelStatsResult(
        np.concatenate([r.r_values for r in results]),
        mean,
        trim_fraction,
        policy,
        [r.mean_r for r in results],
        sizes,
    )


def floquet_quasienergies_by_sector(p: ModelParams, d: DriveParams, basis: ProductBasis) -> list[np.ndarray]:
    """Folded quasienergies of the one-period operator, one array per parity sector."""
    HA, HB = step_hamiltonians(p, d, basis)
    out = []
    for idx in parity_partition(basis):
        if not len(idx):
            continue
        sub = np.ix_(idx, idx)
        U = HermitianPropagator(HB[sub])(d.period / 2) @ HermitianPropagator(HA[sub])(d.period / 2)
        out.append(floquet_spectrum(U, d.period).quasienergies)
    return out


def level_stats_floquet(
    p: ModelParams,
    d: DriveParams,
    basis: ProductBasis,
    sector_policy: SectorPolicy | str = SectorPolicy.PER_PARITY_SECTOR,
    trim_fraction: float = 0.1,
    cut: str = "widest_gap",
) -> LevelStatsResult:
    """Mean spacing ratio of the quasienergies of the one-period operator.

    ``cut="widest_gap"`` opens the quasienergy circle at its widest gap before
    trimming (see ``open_circular_spectrum``); ``cut="zone_edge"`` uses the
    folded values in ``[-w/2, w/2)`` as they are.
    """
    if cut not in CUTS:
        raise ValueError(f"unknown cut {cut!r}")
    SectorPolicy(sector_policy)
    sectors = floquet_quasienergies_by_sector(p, d, basis)
    return level_stats_quasienergies(sectors, d.frequency, sector_policy, trim_fraction, cut)


def level_stats_quasienergies(
    sectors,
    frequency: float,
    sector_policy: SectorPolicy | str = SectorPolicy.PER_PARITY_SECTOR,
    trim_fraction: float = 0.1,
    cut: str = "widest_gap",
) -> LevelStatsResult:
    """``level_stats_floquet`` for precomputed per-sector quasienergies."""
    policy = SectorPolicy(sector_policy)
    w = frequency
    if cut == "widest_gap":
        if policy is SectorPolicy.FULL:
            joint = open_circular_spectrum(np.concatenate(sectors), w)
            return _combine([joint], trim_fraction, policy)
        sectors = [open_circular_spectrum(e, w) for e in sectors]
    elif cut != "zone_edge":
        raise ValueError(f"unknown cut {cut!r}")
    return _combine(sectors, trim_fraction, policy)


def level_stats_static(
    H: np.ndarray,
    basis: ProductBasis,
    sector_policy: SectorPolicy | str = SectorPolicy.PER_PARITY_SECTOR,
    trim_fraction: float = 0.1,
) -> LevelStatsResult:
    """Mean spacing ratio of a parity-conserving Hamiltonian's spectrum."""
    policy = SectorPolicy(sector_policy)
    sectors = [np.linalg.eigvalsh(H[np.ix_(idx, idx)]) for idx in parity_partition(basis) if len(idx)]
    return _combine(sectors, trim_fraction, policy)


def bandwidth(H: np.ndarray) -> float:
    """Spread between the largest and smallest eigenvalue."""
    w = np.linalg.eigvalsh(H)
    return float(w[-1] - w[0])


# --------------------------------------------------------------------------
# time series
# --------------------------------------------------------------------------


def saturation_window(series: ObservableSeries, fraction: float = 0.25) -> slice:
    n = len(series.times)
    if n < 4:
        raise ValueError("need at least 4 samples to define a saturation value")
    return slice(n - max(1, int(math.ceil(fraction * n))), n)


def saturation_value(series: ObservableSeries, fraction: float = 0.25) -> float:
    """Mean of the ensemble average over the final quarter of the recorded samples."""
    return float(np.mean(series.mean[saturation_window(series, fraction)]))


def late_time_slope(series: ObservableSeries, decades: float = 2.0):
    """Least-squares slope of the ensemble mean against log10(t) over the last ``decades``.

    Returns ``(slope, stderr)``.
    """
    t = np.asarray(series.times, dtype=float)
    y = series.mean
    keep = t >= t[-1] / 10**decades
    keep &= t > 0
    if keep.sum() < 3:
        raise ValueError("fewer than 3 samples in the late-time window")
    res = stats.linregress(np.log10(t[keep]), y[keep])
    return float(res.slope), float(res.stderr)


@dataclass
class HeatingResult:
    plateau_value: float
    page_value: float
    threshold: float
    tau_star: float
    heated: bool
    plateau_levels: tuple
    crossing_index: int | None = None
    bracket: tuple | None = None
    flag: str = ""


# drive periods elapsed over the plateau window; Thue-Morse levels 5..10
PLATEAU_PERIODS = (32, 1024)


def default_plateau_levels(kind: DriveKind | str, periods: tuple[int, int] = PLATEAU_PERIODS) -> tuple[int, int]:
    """Sequence levels whose duration, in drive periods, lies within ``periods``.

    Gives (5, 10) for Thue-Morse and (8, 15) for Fibonacci. Fibonacci levels
    grow by the golden ratio rather than by 2, so its levels 5..10 would end
    after fewer than 10 periods, before the initial relaxation is over.
    """
    kind = DriveKind(kind)
    lo, hi = periods
    if kind is DriveKind.THUE_MORSE:
        length = lambda n: 2**n
    elif kind is DriveKind.FIBONACCI:
        length = lambda n: fibonacci_number(n + 1)
    else:
        raise ValueError("plateau windows are defined for sequence drives only")
    levels = [n for n in range(1, 200) if lo <= length(n) <= hi]
    if not levels:
        raise ValueError(f"no level lasts between {lo} and {hi} periods")
    return levels[0], levels[-1]


def heating_time(
    series: ObservableSeries,
    page_value: float,
    plateau_levels: tuple[int, int] | None = None,
) -> HeatingResult:
    """Time at which the ensemble-mean entropy first reaches halfway from plateau to Page value.

    The plateau value is the mean over the sequence levels ``plateau_levels``
    (inclusive), by default ``default_plateau_levels(series.kind)``. The crossing is searched between samples from the start of
    that window on and interpolated linearly in log time between the bracketing samples.
    """
    if plateau_levels is None:
        plateau_levels = default_plateau_levels(series.kind)
    lo, hi = plateau_levels
    steps = np.asarray(series.steps)
    window = (steps >= lo) & (steps <= hi)
    if lo > hi or not window.any() or steps.max() < hi or steps.min() > lo:
        raise ValueError(f"plateau window {plateau_levels} is outside the series levels")
    S = series.mean
    t = np.asarray(series.times, dtype=float)
    plateau = float(np.mean(S[window]))
    threshold = plateau + (page_value - plateau) / 2
    start = int(np.argmax(window))
    for i in range(start + 1, len(S)):
        if S[i] >= threshold > S[i - 1]:
            frac = (threshold - S[i - 1]) / (S[i] - S[i - 1])
            if t[i - 1] > 0:
                tau = math.exp(math.log(t[i - 1]) + frac * (math.log(t[i]) - math.log(t[i - 1])))
            else:
                tau = t[i - 1] + frac * (t[i] - t[i - 1])
            return HeatingResult(plateau, page_value, threshold, tau, True, (lo, hi), i, (t[i - 1], t[i]))
    if S[start] >= threshold:
        return HeatingResult(
            plateau, page_value, threshold, float("nan"), False, (lo, hi),
            flag="threshold already exceeded at the start of the plateau window",
        )
    return HeatingResult(
        plateau, page_value, threshold, float("nan"), False, (lo, hi), flag="no heating observed"
    )


# --------------------------------------------------------------------------
# fits
# --------------------------------------------------------------------------


class FitKind(str, enum.Enum):
    LOG_VS_SQRT_FREQ = "log_vs_sqrt_freq"  # ln y = a sqrt(x) + b
    LOG_VS_FREQ = "log_vs_freq"  # ln y = a x + b
    POWER_LAW = "power_law"  # ln y = a ln x + b


@dataclass
class FitResult:
    kind: FitKind
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    residuals: np.ndarray
    n_points: int

    @property
    def rms_residual(self) -> float:
        return float(np.sqrt(np.mean(self.residuals**2)))

    @property
    def prefactor(self) -> float:
        """``exp(intercept)``: the amplitude of the fitted exponential or power law."""
        return math.exp(self.intercept)

    def predict(self, x):
        return np.exp(self.slope * _transform_x(self.kind, np.asarray(x, float)) + self.intercept)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "r_squared": self.r_squared,
            "rms_residual": self.rms_residual,
            "residuals": [float(r) for r in self.residuals],
            "n_points": self.n_points,
        }


def _transform_x(kind: FitKind, x: np.ndarray) -> np.ndarray:
    if kind is FitKind.LOG_VS_SQRT_FREQ:
        return np.sqrt(x)
    if kind is FitKind.LOG_VS_FREQ:
        return x
    return np.log(x)


def fit(kind: FitKind | str, xs, ys) -> FitResult:
    """Ordinary least squares of ``ln y`` against the transformed ``x``."""
    kind = FitKind(kind)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if len(xs) < 3:
        raise ValueError("need at least 3 points to fit")
    if np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise ValueError("log fits need finite positive ys")
    if kind is not FitKind.LOG_VS_FREQ and np.any(xs <= 0):
        raise ValueError("this fit needs positive xs")
    if np.ptp(xs) == 0:
        raise ValueError("all xs are equal; the fit is degenerate")
    X = _transform_x(kind, xs)
    Y = np.log(ys)
    res = stats.linregress(X, Y)
    resid = Y - (res.slope * X + res.intercept)
    return FitResult(
        kind, float(res.slope), float(res.intercept), float(res.stderr), float(res.rvalue**2), resid, len(xs)
    )
