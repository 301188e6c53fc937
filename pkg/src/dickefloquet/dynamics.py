"""Initial-state ensembles, driven evolution and the two recorded observables.

Observables are the average boson number ``<a'a>`` and the von Neumann entropy
of the spin reduced density matrix (bosons traced out). Evolution is carried
out independently in the two parity sectors, which every Hamiltonian of the
model conserves; this is exact and makes each dense product four times cheaper.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .drives import (
    DriveKind,
    PeriodicStroboscope,
    iter_sequence_unitaries,
    log_sampled_steps,
    periodic_times,
    sequence_levels,
    sequence_times,
)
from .floquet import HermitianPropagator
from .hilbert import ProductBasis, parity_partition
from .model import DriveParams, ModelParams, effective_hamiltonian, step_hamiltonians

log = logging.getLogger(__name__)

BOSON_NUMBER = "boson_number"
ENTROPY = "entanglement_entropy"
OBSERVABLES = (BOSON_NUMBER, ENTROPY)

ENTROPY_CUTOFF = 1e-14
TRUNCATION_THRESHOLD = 1e-3

# stroboscopic evolution under the effective Hamiltonian (the w_d -> infinity reference)
EFFECTIVE = "effective"


@dataclass(frozen=True)
class InitialEnsemble:
    """Decoupled eigenstates (basis vectors) chosen around a target energy."""

    basis: ProductBasis
    indices: np.ndarray
    energies: np.ndarray
    target_energy: float

    @property
    def count(self) -> int:
        return len(self.indices)

    @property
    def mean_energy(self) -> float:
        return float(np.mean(self.energies))

    @property
    def states(self) -> np.ndarray:
        """Columns are the normalised initial state vectors."""
        psi = np.zeros((self.basis.dim, self.count), dtype=complex)
        psi[self.indices, np.arange(self.count)] = 1.0
        return psi

    def labels(self) -> list[tuple[int, float]]:
        return [self.basis.labels(k) for k in self.indices]


def prepare_initial_states(
    p: ModelParams, basis: ProductBasis, target_energy: float, count: int
) -> InitialEnsemble:
    """The ``count`` basis states whose decoupled energy is closest to ``target_energy``.

    Ties are broken by smaller Fock number, then smaller spin projection.
    """
    if count < 1 or count > basis.dim:
        raise ValueError(f"count must be in [1, {basis.dim}], got {count}")
    energies = p.omega * basis.n_of_k + p.omega0 * basis.m_of_k
    dist = np.abs(energies - target_energy)
    # lexsort: last key is primary
    order = np.lexsort((basis.m_of_k, basis.n_of_k, dist))[:count]
    return InitialEnsemble(basis, order, energies[order], float(target_energy))


def boson_number(psi: np.ndarray, basis: ProductBasis):
    """``<psi| a'a |psi>``; ``psi`` may hold one state per column."""
    w = np.abs(np.asarray(psi)) ** 2
    return basis.n_of_k @ w


def spin_density_matrices(psi: np.ndarray, basis: ProductBasis) -> np.ndarray:
    """Reduced density matrices of the spins, one per column of ``psi``."""
    psi = np.asarray(psi)
    single = psi.ndim == 1
    cols = psi.reshape(basis.dim, -1)
    # boson-major: coefficient psi[n * (N+1) + s] -> blocks[c, n, s]
    blocks = cols.T.reshape(-1, basis.boson.dim, basis.spin.dim)
    rho = np.einsum("cns,cnt->cst", blocks, blocks.conj())
    return rho[0] if single else rho


def entanglement_entropy(psi: np.ndarray, basis: ProductBasis, cutoff: float = ENTROPY_CUTOFF):
    """Spin-boson entanglement entropy (natural log) of each column of ``psi``."""
    psi = np.asarray(psi)
    rho = spin_density_matrices(psi, basis)
    lam = np.linalg.eigvalsh(rho)
    lam = np.where(lam > cutoff, lam, 1.0)  # 1 ln 1 = 0 drops sub-cutoff weights
    S = -np.sum(lam * np.log(lam), axis=-1)
    return float(S) if psi.ndim == 1 else S


def infinite_temperature_refs(N: int, n_max: int) -> tuple[float, float]:
    """Boson number and Page entropy of the maximally mixed truncated state."""
    if N < 1 or n_max < 1:
        raise ValueError("N and n_max must be >= 1")
    return n_max / 2, math.log(N + 1) - (N + 1) / (2 * (n_max + 1))


def top_fock_weight(psi: np.ndarray, basis: ProductBasis, fraction: float = 0.1):
    """Probability carried by the highest ``fraction`` of Fock states."""
    n_top = max(1, math.ceil(fraction * basis.boson.dim))
    mask = basis.n_of_k >= basis.boson.dim - n_top
    return mask.astype(float) @ (np.abs(np.asarray(psi)) ** 2)


@dataclass
class ObservableSeries:
    """One observable along a time grid for every member of an ensemble.

    ``per_state`` has shape ``(count, len(times))``. ``steps`` holds the
    stroboscopic step (periodic and effective runs) or the sequence level
    (Thue-Morse, Fibonacci) of each time.
    """

    observable: str
    kind: str
    times: np.ndarray
    steps: np.ndarray
    per_state: np.ndarray
    metadata: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def mean(self) -> np.ndarray:
        # explicit row-by-row accumulation keeps the summation order fixed
        acc = np.zeros(self.per_state.shape[1])
        for row in self.per_state:
            acc += row
        return acc / self.per_state.shape[0]

    def __len__(self):
        return len(self.times)


class _SectorSplit:
    def __init__(self, basis: ProductBasis, use_sectors: bool):
        self.dim = basis.dim
        if use_sectors:
            self.blocks = [idx for idx in parity_partition(basis) if len(idx)]
        else:
            self.blocks = [np.arange(basis.dim)]

    def restrict(self, M: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return M[np.ix_(idx, idx)]


class _Recorder:
    def __init__(self, basis: ProductBasis, count: int):
        self.basis = basis
        self.columns = {name: [] for name in OBSERVABLES}
        self.top_weight = np.zeros(count)
        self.norm_defect = 0.0

    def __call__(self, psi: np.ndarray):
        self.columns[BOSON_NUMBER].append(boson_number(psi, self.basis))
        self.columns[ENTROPY].append(entanglement_entropy(psi, self.basis))
        self.top_weight = np.maximum(self.top_weight, top_fock_weight(psi, self.basis))
        norms = np.linalg.norm(psi, axis=0)
        self.norm_defect = max(self.norm_defect, float(np.max(np.abs(norms - 1))))

    def arrays(self):
        return {k: np.column_stack(v) for k, v in self.columns.items()}


def _step_propagators(kind, p, d, basis, split):
    HA, HB = step_hamiltonians(p, d, basis)
    T = d.period
    if kind is DriveKind.PERIODIC:
        return [
            HermitianPropagator(split.restrict(HB, idx))(T / 2)
            @ HermitianPropagator(split.restrict(HA, idx))(T / 2)
            for idx in split.blocks
        ]
    return [
        (HermitianPropagator(split.restrict(HA, idx))(T), HermitianPropagator(split.restrict(HB, idx))(T))
        for idx in split.blocks
    ]


def evolve_states(
    kind,
    p: ModelParams,
    d: DriveParams,
    basis: ProductBasis,
    psi0: np.ndarray,
    depth: int,
    steps=None,
    use_sectors: bool = True,
):
    """Evolve the columns of ``psi0`` and record both observables.

    ``depth`` is the number of drive periods for the periodic and effective
    protocols (sampled at ``steps``, default ``log_sampled_steps(depth)``) and
    the maximal sequence level for Thue-Morse and Fibonacci.

    Returns ``(times, steps, values, diagnostics)`` where ``values`` maps each
    observable to a ``(count, len(times))`` array.
    """
    effective = kind == EFFECTIVE
    kind = DriveKind.PERIODIC if effective else DriveKind(kind)
    psi0 = np.asarray(psi0, dtype=complex).reshape(basis.dim, -1)
    split = _SectorSplit(basis, use_sectors)
    rec = _Recorder(basis, psi0.shape[1])

    if kind is DriveKind.PERIODIC:
        steps = log_sampled_steps(depth) if steps is None else np.asarray(steps, dtype=np.int64)
        if effective:
            Heff = effective_hamiltonian(p, d, basis)
            cycles = [HermitianPropagator(split.restrict(Heff, idx))(d.period) for idx in split.blocks]
        else:
            cycles = _step_propagators(kind, p, d, basis, split)
        iters = [
            PeriodicStroboscope(U).iter_powers(psi0[idx], steps)
            for U, idx in zip(cycles, split.blocks)
        ]
        for parts in zip(*iters):
            psi = np.zeros_like(psi0)
            for (_, block), idx in zip(parts, split.blocks):
                psi[idx] = block
            rec(psi)
        times = periodic_times(steps, d.period)
    else:
        levels = sequence_levels(kind, depth)
        pairs = _step_propagators(kind, p, d, basis, split)
        iters = [iter_sequence_unitaries(kind, depth, Up, Um) for Up, Um in pairs]
        for parts in zip(*iters):
            level = parts[0][0]
            if level < levels[0]:
                continue
            psi = np.zeros_like(psi0)
            for (_, U), idx in zip(parts, split.blocks):
                psi[idx] = U @ psi0[idx]
            rec(psi)
            log.debug("%s level %d done", kind.value, level)
        steps = levels
        times = sequence_times(kind, depth, d.period)

    diagnostics = {"top_fock_weight": rec.top_weight, "norm_defect": rec.norm_defect}
    return times, np.asarray(steps), rec.arrays(), diagnostics


def evolve_ensembles(
    kind,
    p: ModelParams,
    d: DriveParams,
    basis: ProductBasis,
    ensembles,
    depth: int,
    steps=None,
    use_sectors: bool = True,
    truncation_threshold: float = TRUNCATION_THRESHOLD,
) -> list[dict[str, ObservableSeries]]:
    """Evolve several ensembles under one shared set of propagators."""
    ensembles = list(ensembles)
    psi0 = np.hstack([e.states for e in ensembles])
    times, steps, values, diag = evolve_states(kind, p, d, basis, psi0, depth, steps, use_sectors)
    kind_name = kind if kind == EFFECTIVE else DriveKind(kind).value
    out, start = [], 0
    for ens in ensembles:
        sl = slice(start, start + ens.count)
        start += ens.count
        warns = []
        top = float(np.max(diag["top_fock_weight"][sl]))
        if top > truncation_threshold:
            warns.append(
                f"truncation: up to {top:.3g} of the weight reached the top 10% of Fock states "
                f"(threshold {truncation_threshold:g}); raise n_max to check convergence"
            )
        meta = {
            "kind": kind_name,
            "omega": p.omega,
            "omega0": p.omega0,
            "g1": p.g1,
            "g2": p.g2,
            "amplitude": d.amplitude,
            "period": d.period,
            "frequency": d.frequency,
            "N": basis.N,
            "n_max": basis.n_max,
            "depth": depth,
            "count": ens.count,
            "target_energy": ens.target_energy,
            "mean_energy": ens.mean_energy,
            "max_top_fock_weight": top,
            "norm_defect": diag["norm_defect"],
        }
        out.append(
            {
                name: ObservableSeries(name, kind_name, times, steps, values[name][sl], dict(meta), list(warns))
                for name in OBSERVABLES
            }
        )
    return out


def evolve_and_record(kind, p, d, basis, ensemble: InitialEnsemble, depth: int, **kwargs):
    """Series of both observables for one ensemble (see ``evolve_ensembles``)."""
    return evolve_ensembles(kind, p, d, basis, [ensemble], depth, **kwargs)[0]
