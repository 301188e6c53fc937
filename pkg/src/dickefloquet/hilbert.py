"""Truncated boson (x) collective-spin product space and its elementary operators.

Basis states are ordered boson-major: ``k = n * (N + 1) + (m + j)`` so that the
spin block belonging to a fixed Fock number ``n`` is contiguous. All operators
are plain dense ``numpy`` arrays; the builders only ever return real matrices
because every operator needed by the model is real in this basis (``Jy`` is the
exception and is returned complex).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class BosonSpace:
    """Fock space truncated at ``n_max`` quanta."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class SpinSpace:
    """Symmetric (Dicke) subspace of ``N`` two-level atoms, pseudospin ``j = N/2``."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")

    @property
    def j(self) -> float:
        return self.N / 2

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.j


@dataclass(frozen=True)
class ProductBasis:
    boson: BosonSpace
    spin: SpinSpace

    @property
    def N(self) -> int:
        return self.spin.N

    @property
    def n_max(self) -> int:
        return self.boson.n_max

    @property
    def j(self) -> float:
        return self.spin.j

    @property
    def dim(self) -> int:
        return self.boson.dim * self.spin.dim

    def index(self, n: int, m: float) -> int:
        """Composite index of ``|n> (x) |j, m>``."""
        s = m + self.j
        if not (0 <= n <= self.n_max) or s != int(s) or not (0 <= s <= self.N):
            raise ValueError(f"(n={n}, m={m}) is not a label of this basis")
        return int(n) * self.spin.dim + int(s)

    def labels(self, k: int) -> tuple[int, float]:
        if not 0 <= k < self.dim:
            raise ValueError(f"index {k} out of range for dim {self.dim}")
        n, s = divmod(int(k), self.spin.dim)
        return n, s - self.j

    @cached_property
    def n_of_k(self) -> np.ndarray:
        """Fock number of every basis index."""
        return np.repeat(np.arange(self.boson.dim), self.spin.dim)

    @cached_property
    def m_of_k(self) -> np.ndarray:
        """Spin projection of every basis index."""
        return np.tile(self.spin.m_values, self.boson.dim)

    def basis_state(self, n: int, m: float) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(n, m)] = 1.0
        return psi


def build_basis(N: int, n_max: int) -> ProductBasis:
    """Product basis for ``N`` atoms and a boson cutoff ``n_max``.

    >>> build_basis(10, 199).dim
    2200
    """
    return ProductBasis(BosonSpace(n_max), SpinSpace(N))


def boson_operators(b: BosonSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation, creation and number operators with a hard cutoff.

    ``a_dag`` maps the top Fock state to zero, so ``[a, a_dag]`` equals the
    identity everywhere except its ``(n_max, n_max)`` entry, which is ``-n_max``.
    """
    a = np.diag(np.sqrt(np.arange(1, b.dim, dtype=float)), k=1)
    a_dag = a.T.copy()
    number = np.diag(np.arange(b.dim, dtype=float))
    return a, a_dag, number


def collective_spin_operators(s: SpinSpace):
    """Return ``(Jz, Jp, Jm, Jx, Jy)`` in the ``|j, m>`` basis, ``m`` ascending."""
    j = s.j
    m = s.m_values
    Jz = np.diag(m)
    # <m+1|J+|m> for m = -j .. j-1
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    Jp = np.diag(ladder, k=-1)
    Jm = Jp.T.copy()
    Jx = (Jp + Jm) / 2
    Jy = (Jp - Jm) / 2j
    return Jz, Jp, Jm, Jx, Jy


def embed(boson_op: np.ndarray, spin_op: np.ndarray, basis: ProductBasis) -> np.ndarray:
    """Lift ``boson_op (x) spin_op`` onto the boson-major product basis."""
    boson_op = np.asarray(boson_op)
    spin_op = np.asarray(spin_op)
    if boson_op.shape != (basis.boson.dim,) * 2:
        raise ValueError(
            f"boson operator has shape {boson_op.shape}, expected {(basis.boson.dim,) * 2}"
        )
    if spin_op.shape != (basis.spin.dim,) * 2:
        raise ValueError(
            f"spin operator has shape {spin_op.shape}, expected {(basis.spin.dim,) * 2}"
        )
    return np.kron(boson_op, spin_op)


def parity_of_k(basis: ProductBasis) -> np.ndarray:
    """Parity ``(n + m + j) mod 2`` of every basis index."""
    s = np.rint(basis.m_of_k + basis.j).astype(int)
    return (basis.n_of_k + s) % 2


def parity_partition(basis: ProductBasis) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the even and odd parity sectors, each sorted ascending."""
    p = parity_of_k(basis)
    return np.flatnonzero(p == 0), np.flatnonzero(p == 1)


def hermiticity_defect(A: np.ndarray) -> float:
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def unitarity_defect(U: np.ndarray) -> float:
    if not U.size:
        return 0.0
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and hermiticity_defect(A) < tol


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and unitarity_defect(U) < tol
