"""Periodic, Thue-Morse and Fibonacci drive sequences.

Convention: token lists are chronological (first applied first) while operator
products are read right to left, so ``U_1 = U_- U_+`` is the token list
``[PLUS, MINUS]``. A PLUS token evolves for one period ``T`` under ``H + V``, a
MINUS token under ``H - V``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .floquet import DRIFT_TOL, control_drift, unitary_eigh
from .hilbert import unitarity_defect


class Token(str, enum.Enum):
    PLUS = "+"
    MINUS = "-"

    def flipped(self) -> "Token":
        return Token.MINUS if self is Token.PLUS else Token.PLUS


PLUS, MINUS = Token.PLUS, Token.MINUS


class DriveKind(str, enum.Enum):
    PERIODIC = "periodic"
    THUE_MORSE = "thue_morse"
    FIBONACCI = "fibonacci"


def thue_morse_tokens(level: int) -> list[Token]:
    """Tokens of ``U_level`` built by ``U_{n+1} = U~_n U_n`` from ``U_1 = U_- U_+``."""
    if level < 1:
        raise ValueError("Thue-Morse level must be >= 1")
    seq = [PLUS, MINUS]
    for _ in range(level - 1):
        seq = seq + [t.flipped() for t in seq]
    return seq


def fibonacci_tokens(level: int) -> list[Token]:
    """Tokens of ``U_level`` with ``U_n = U_{n-2} U_{n-1}``, ``U_0 = U_+``, ``U_1 = U_-``."""
    if level < 0:
        raise ValueError("Fibonacci level must be >= 0")
    prev, cur = [PLUS], [MINUS]
    if level == 0:
        return prev
    for _ in range(level - 1):
        prev, cur = cur, cur + prev
    return cur


def periodic_tokens(n_periods: int) -> list[Token]:
    """Half-period tokens of ``n_periods`` cycles of the square wave."""
    if n_periods < 0:
        raise ValueError("number of periods must be >= 0")
    return [PLUS, MINUS] * n_periods


def tokens_to_string(tokens) -> str:
    return "".join(Token(t).value for t in tokens)


def tokens_from_string(text: str) -> list[Token]:
    return [Token(c) for c in text]


@dataclass(frozen=True)
class DriveProtocol:
    kind: DriveKind
    level: int

    def __post_init__(self):
        object.__setattr__(self, "kind", DriveKind(self.kind))

    @property
    def tokens(self) -> list[Token]:
        if self.kind is DriveKind.THUE_MORSE:
            return thue_morse_tokens(self.level)
        if self.kind is DriveKind.FIBONACCI:
            return fibonacci_tokens(self.level)
        return periodic_tokens(self.level)


def fibonacci_number(k: int) -> int:
    """``F_k`` with ``F_1 = F_2 = 1``."""
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def sequence_levels(kind: DriveKind | str, max_level: int) -> np.ndarray:
    """Levels recorded along one trajectory.

    Every Thue-Morse and Fibonacci level from 1 on is a prefix of the next one,
    so these levels are successive times of a single evolution. Fibonacci level
    0 (a lone PLUS) is not a prefix of level 1 and is left out.
    """
    kind = DriveKind(kind)
    if kind is DriveKind.PERIODIC:
        raise ValueError("periodic drives are sampled by step, not by level")
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    return np.arange(1, max_level + 1)


def sequence_times(kind: DriveKind | str, max_level: int, T: float) -> np.ndarray:
    """``t_n = 2^n T`` (Thue-Morse) or ``t_n = t_{n-1} + t_{n-2}`` (Fibonacci), levels 1..max."""
    kind = DriveKind(kind)
    levels = sequence_levels(kind, max_level)
    if kind is DriveKind.THUE_MORSE:
        return np.array([2.0**n * T for n in levels])
    times = [T, T]  # levels 0 and 1 each last one period
    for _ in range(2, max_level + 1):
        times.append(times[-1] + times[-2])
    return np.array(times[1:])


def periodic_times(steps, T: float) -> np.ndarray:
    return np.asarray(steps, dtype=float) * T


def iter_sequence_unitaries(
    kind: DriveKind | str,
    max_level: int,
    U_plus: np.ndarray,
    U_minus: np.ndarray,
    check_every: int = 4,
    drift_tol: float = DRIFT_TOL,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(level, U_level)`` by repeated composition, never expanding tokens.

    Thue-Morse yields levels ``1..max_level`` and keeps the pair ``(U_n, U~_n)``;
    Fibonacci yields ``0..max_level``. Every ``check_every`` levels the unitarity
    defect is measured and the running matrices are re-projected onto the
    unitary group if it exceeds ``drift_tol``.
    """
    kind = DriveKind(kind)
    if kind is DriveKind.PERIODIC:
        raise ValueError("use periodic_stroboscope for the periodic drive")
    U_plus = np.asarray(U_plus)
    U_minus = np.asarray(U_minus)
    if U_plus.shape != U_minus.shape or U_plus.ndim != 2 or U_plus.shape[0] != U_plus.shape[1]:
        raise ValueError("U_plus and U_minus must be square matrices of equal shape")
    for U in (U_plus, U_minus):
        if unitarity_defect(U) > 1e-10:
            raise ValueError("input blocks must be unitary")

    def maybe_fix(level, *mats):
        if check_every and level % check_every == 0:
            return tuple(control_drift(M, drift_tol) for M in mats)
        return mats

    if kind is DriveKind.THUE_MORSE:
        if max_level < 1:
            raise ValueError("Thue-Morse max_level must be >= 1")
        U, Ut = U_plus, U_minus  # level 0
        for level in range(1, max_level + 1):
            U, Ut = Ut @ U, U @ Ut
            U, Ut = maybe_fix(level, U, Ut)
            yield level, U
    else:
        if max_level < 0:
            raise ValueError("Fibonacci max_level must be >= 0")
        prev, cur = U_plus, U_minus
        yield 0, prev
        for level in range(1, max_level + 1):
            if level >= 2:
                prev, cur = cur, prev @ cur
                (cur,) = maybe_fix(level, cur)
            yield level, cur


def sequence_unitaries(kind, max_level, U_plus, U_minus, **kwargs) -> list[np.ndarray]:
    """All composed unitaries up to ``max_level`` (see ``iter_sequence_unitaries``)."""
    return [U for _, U in iter_sequence_unitaries(kind, max_level, U_plus, U_minus, **kwargs)]


def token_product(tokens, U_plus: np.ndarray, U_minus: np.ndarray) -> np.ndarray:
    """Brute-force product over a chronological token list."""
    out = np.eye(U_plus.shape[0], dtype=complex)
    for t in tokens:
        out = (U_plus if Token(t) is PLUS else U_minus) @ out
    return out


class PeriodicStroboscope:
    """Applies powers of a one-cycle unitary to (blocks of) state vectors.

    For ``n > dim`` the unitary is diagonalised once and powers are applied as
    phases; smaller powers use repeated matrix-vector products.
    """

    def __init__(self, U_cycle: np.ndarray):
        self.U = np.asarray(U_cycle)
        if unitarity_defect(self.U) > 1e-10:
            raise ValueError("cycle operator must be unitary")
        self._eig = None

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    def _spectral(self):
        if self._eig is None:
            lam, Z = unitary_eigh(self.U)
            self._eig = (np.angle(lam), Z)
        return self._eig

    @staticmethod
    def _phases(theta, n, coeff):
        # exp(i n theta) keeps unit modulus where lam**n would drift for large n
        ph = np.exp(1j * n * theta)
        return ph if coeff.ndim == 1 else ph[:, None]

    def apply(self, psi: np.ndarray, n: int, method: str = "auto") -> np.ndarray:
        if n < 0:
            raise ValueError("power must be non-negative")
        if method == "auto":
            method = "spectral" if n > self.dim else "repeated"
        if method == "repeated":
            out = np.array(psi, dtype=complex)
            for _ in range(n):
                out = self.U @ out
            return out
        theta, Z = self._spectral()
        coeff = Z.conj().T @ psi
        return Z @ (self._phases(theta, n, coeff) * coeff)

    def iter_powers(self, psi: np.ndarray, steps) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(n, U^n psi)`` for the non-decreasing integer ``steps``."""
        steps = [int(s) for s in steps]
        if any(b < a for a, b in zip(steps, steps[1:])) or (steps and steps[0] < 0):
            raise ValueError("steps must be non-negative and non-decreasing")
        if not steps:
            return
        if steps[-1] > self.dim:
            theta, Z = self._spectral()
            coeff = Z.conj().T @ psi
            for n in steps:
                yield n, Z @ (self._phases(theta, n, coeff) * coeff)
        else:
            cur, at = np.array(psi, dtype=complex), 0
            for n in steps:
                for _ in range(n - at):
                    cur = self.U @ cur
                at = n
                yield n, cur


def periodic_stroboscope(U_cycle: np.ndarray) -> PeriodicStroboscope:
    return PeriodicStroboscope(U_cycle)


def log_sampled_steps(max_steps: int, linear_until: int = 100, per_decade: int = 30) -> np.ndarray:
    """Every step up to ``linear_until``, then ``per_decade`` log-spaced steps per decade."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    head = np.arange(0, min(max_steps, linear_until) + 1)
    if max_steps <= linear_until:
        return head
    decades = np.log10(max_steps) - np.log10(linear_until)
    n = max(2, int(np.ceil(decades * per_decade)) + 1)
    tail = np.unique(np.rint(np.logspace(np.log10(linear_until), np.log10(max_steps), n)).astype(np.int64))
    return np.unique(np.concatenate([head, tail]))
