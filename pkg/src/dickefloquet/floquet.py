"""Unitary propagators, one-cycle Floquet operators and quasienergy spectra."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .hilbert import hermiticity_defect, unitarity_defect

DRIFT_TOL = 1e-8


class NumericalFailure(RuntimeError):
    """A propagator could not be kept unitary within tolerance."""


class HermitianPropagator:
    """Caches the spectral decomposition of a Hermitian ``H`` to evaluate ``exp(-i H tau)``."""

    def __init__(self, H: np.ndarray, tol: float = 1e-10):
        H = np.asarray(H)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {H.shape}")
        scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
        if hermiticity_defect(H) > tol * scale:
            raise ValueError("generator is not Hermitian")
        self.energies, self.vectors = np.linalg.eigh(H)
        self.energies.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def __call__(self, tau: float) -> np.ndarray:
        W = self.vectors
        return (W * np.exp(-1j * self.energies * tau)) @ W.conj().T


def expm_hermitian(H: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i H tau)`` for Hermitian ``H`` by spectral decomposition."""
    return HermitianPropagator(H)(tau)


def floquet_operator(H_A: np.ndarray, H_B: np.ndarray, T: float) -> np.ndarray:
    """One period: half a period under ``H_A`` followed by half under ``H_B``."""
    if np.shape(H_A) != np.shape(H_B):
        raise ValueError(f"dimension mismatch: {np.shape(H_A)} vs {np.shape(H_B)}")
    if not T > 0:
        raise ValueError("period must be positive")
    return expm_hermitian(H_B, T / 2) @ expm_hermitian(H_A, T / 2)


def reunitarize(U: np.ndarray) -> np.ndarray:
    """Nearest unitary matrix (polar factor)."""
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


def control_drift(U: np.ndarray, tol: float = DRIFT_TOL) -> np.ndarray:
    """Return ``U`` unchanged if its unitarity defect is below ``tol``, else its polar factor.

    Raises ``NumericalFailure`` if the polar factor itself misses ``tol``.
    """
    if unitarity_defect(U) <= tol:
        return U
    V = reunitarize(U)
    if not unitarity_defect(V) <= tol:
        raise NumericalFailure(f"unitarity defect {unitarity_defect(V):.3g} after re-projection")
    return V


def fold_quasienergies(energies, frequency: float) -> np.ndarray:
    """Map quasienergies into the principal zone ``[-frequency/2, frequency/2)``."""
    e = np.asarray(energies, dtype=float)
    half = frequency / 2
    folded = np.mod(e + half, frequency) - half
    # np.mod can round up to exactly `frequency`
    folded[folded >= half] -= frequency
    return folded


@dataclass(frozen=True)
class FloquetSpectrum:
    """Eigen-data of a one-cycle unitary ``U = sum_nu exp(-i phi_nu) |nu><nu|``.

    ``quasienergies`` are ``phases / period`` folded into ``[-w/2, w/2)`` with
    ``w = 2 pi / period`` and sorted ascending; ``phases`` and the columns of
    ``modes`` follow the same order.
    """

    phases: np.ndarray
    quasienergies: np.ndarray
    modes: np.ndarray
    period: float

    @property
    def frequency(self) -> float:
        return 2 * math.pi / self.period

    @property
    def positive_quasienergies(self) -> np.ndarray:
        """The ``mod(phi, 2 pi) / T`` convention, values in ``[0, w)``."""
        return np.mod(self.phases, 2 * math.pi) / self.period

    def __len__(self):
        return len(self.phases)


def unitary_eigh(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of a unitary matrix.

    Uses the complex Schur form, which is diagonal for a normal matrix and
    therefore yields an orthonormal basis also inside degenerate subspaces.
    """
    T, Z = sla.schur(U, output="complex")
    return np.diag(T).copy(), Z


def floquet_spectrum(U: np.ndarray, T: float, tol: float = 1e-10) -> FloquetSpectrum:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    if not T > 0:
        raise ValueError("period must be positive")
    if unitarity_defect(U) > tol:
        raise ValueError("Floquet operator is not unitary")
    lam, Z = unitary_eigh(U)
    phases = -np.angle(lam)
    phases[phases <= -math.pi] += 2 * math.pi  # (-pi, pi]
    quasi = fold_quasienergies(phases / T, 2 * math.pi / T)
    order = np.argsort(quasi, kind="stable")
    return FloquetSpectrum(phases[order], quasi[order], Z[:, order], float(T))
