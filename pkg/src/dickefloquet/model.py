"""Hamiltonians of the (driven) anisotropic Dicke model on a ProductBasis."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import ProductBasis, boson_operators, collective_spin_operators, embed


class MagnusRegimeWarning(UserWarning):
    """Raised (as a warning) when T^2 Omega^2 >= 1, outside the high-frequency regime."""


@dataclass(frozen=True)
class ModelParams:
    omega: float = 1.0
    omega0: float = 1.0
    g1: float = 0.0
    g2: float = 0.0

    def __post_init__(self):
        if not self.omega > 0 or not self.omega0 > 0:
            raise ValueError("omega and omega0 must be positive")
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("couplings g1, g2 must be non-negative")


@dataclass(frozen=True)
class DriveParams:
    """Square-wave drive of amplitude ``amplitude`` and period ``period``."""

    amplitude: float
    period: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("drive amplitude must be non-negative")
        if not self.period > 0:
            raise ValueError("drive period must be positive")

    @classmethod
    def from_frequency(cls, amplitude: float, frequency: float) -> "DriveParams":
        if not frequency > 0:
            raise ValueError("drive frequency must be positive")
        return cls(amplitude, 2 * math.pi / frequency)

    @property
    def frequency(self) -> float:
        return 2 * math.pi / self.period

    @property
    def magnus_parameter(self) -> float:
        """T^2 Omega^2; the effective description needs this below one."""
        return (self.period * self.amplitude) ** 2


def static_hamiltonian(p: ModelParams, basis: ProductBasis) -> np.ndarray:
    """omega a'a + omega0 Jz + g1/sqrt(N) (a'J- + aJ+) + g2/sqrt(N) (a'J+ + aJ-)."""
    a, a_dag, number = boson_operators(basis.boson)
    Jz, Jp, Jm, _, _ = collective_spin_operators(basis.spin)
    ib = np.eye(basis.boson.dim)
    i_s = np.eye(basis.spin.dim)
    H = p.omega * embed(number, i_s, basis) + p.omega0 * embed(ib, Jz, basis)
    root = math.sqrt(basis.N)
    if p.g1:
        H += (p.g1 / root) * (embed(a_dag, Jm, basis) + embed(a, Jp, basis))
    if p.g2:
        H += (p.g2 / root) * (embed(a_dag, Jp, basis) + embed(a, Jm, basis))
    return H


def _couplings_only(g1: float, g2: float, basis: ProductBasis) -> np.ndarray:
    # same as static_hamiltonian at omega = omega0 = 0, which ModelParams forbids
    a, a_dag, _ = boson_operators(basis.boson)
    _, Jp, Jm, _, _ = collective_spin_operators(basis.spin)
    root = math.sqrt(basis.N)
    rot = embed(a_dag, Jm, basis) + embed(a, Jp, basis)
    counter = embed(a_dag, Jp, basis) + embed(a, Jm, basis)
    return (g1 / root) * rot + (g2 / root) * counter


def drive_operator(d: DriveParams, basis: ProductBasis) -> np.ndarray:
    """V: the coupling part of the Hamiltonian with both couplings set to the amplitude."""
    return _couplings_only(d.amplitude, d.amplitude, basis)


def step_hamiltonians(p: ModelParams, d: DriveParams, basis: ProductBasis):
    """Return ``(H_A, H_B) = (H + V, H - V)``, the two halves of a drive period."""
    H = static_hamiltonian(p, basis)
    V = drive_operator(d, basis)
    return H + V, H - V


def decoupled_hamiltonian(p: ModelParams, basis: ProductBasis) -> np.ndarray:
    return np.diag(p.omega * basis.n_of_k + p.omega0 * basis.m_of_k).astype(float)


def second_order_correction(
    p: ModelParams, d: DriveParams, basis: ProductBasis, cubic_sign: float = -1.0
) -> np.ndarray:
    """Double commutator [[X, Y], V] of the two-step protocol in closed form.

    ``X = (H - V)/2`` and ``Y = (H + V)/2``. Boson factors are multiplied in the
    written left-to-right order on the truncated Fock space.

    ``cubic_sign`` multiplies the ``(a'-a)(a'+a)^2 (J+ - J-)`` term. The default
    -1 is the value for which the closed form agrees with the numerically
    evaluated double commutator below the cutoff; +1 flips that term.

    The ordered boson products are Hermitian only up to the truncation, which
    spoils the top two Fock levels; the Hermitian part is returned.
    """
    a, a_dag, _ = boson_operators(basis.boson)
    Jz, Jp, Jm, Jx, _ = collective_spin_operators(basis.spin)
    N = basis.N
    W2 = d.amplitude**2
    xq = a_dag + a
    pq = a_dag - a
    ib = np.eye(basis.boson.dim)

    out = (-4 * p.omega * W2 / N) * embed(ib, Jx @ Jx, basis)
    out += (2 * p.omega0 * W2 / N) * embed(xq @ xq, Jz, basis)
    dg = p.g1 - p.g2
    if dg:
        pref = dg * W2 / (N * math.sqrt(N))
        out += pref * 8 * embed(xq, Jx @ Jz, basis)
        out += pref * cubic_sign * embed(pq @ xq @ xq, Jp - Jm, basis)
    return (out + out.T) / 2


def effective_hamiltonian(
    p: ModelParams, d: DriveParams, basis: ProductBasis, cubic_sign: float = -1.0
) -> np.ndarray:
    """Time-reversal-symmetric second-order high-frequency Hamiltonian.

    ``H - (T^2 / 12) [[X, Y], V]``; the first-order (imaginary, T-odd) term is
    dropped. A ``MagnusRegimeWarning`` is emitted when ``T^2 Omega^2 >= 1``.
    """
    if d.magnus_parameter >= 1:
        warnings.warn(
            f"T^2 Omega^2 = {d.magnus_parameter:.3g} >= 1: high-frequency expansion not controlled",
            MagnusRegimeWarning,
            stacklevel=2,
        )
    H = static_hamiltonian(p, basis)
    if d.amplitude == 0:
        return H
    return H - (d.period**2 / 12) * second_order_correction(p, d, basis, cubic_sign)
