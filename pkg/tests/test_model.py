import math
import warnings

import numpy as np
import pytest

from dickefloquet.floquet import expm_hermitian, floquet_operator
from dickefloquet.hilbert import build_basis, is_hermitian, parity_partition
from dickefloquet.model import (
    DriveParams,
    MagnusRegimeWarning,
    ModelParams,
    decoupled_hamiltonian,
    drive_operator,
    effective_hamiltonian,
    second_order_correction,
    static_hamiltonian,
    step_hamiltonians,
)


def comm(A, B):
    return A @ B - B @ A


def off_sector_norm(M, basis):
    even, odd = parity_partition(basis)
    return np.abs(M[np.ix_(even, odd)]).max()


def test_param_validation():
    with pytest.raises(ValueError):
        ModelParams(omega=0)
    with pytest.raises(ValueError):
        ModelParams(g1=-0.1)
    with pytest.raises(ValueError):
        DriveParams(1.0, 0.0)
    with pytest.raises(ValueError):
        DriveParams(-1.0, 1.0)
    d = DriveParams.from_frequency(1.0, 20.0)
    assert d.period == pytest.approx(2 * math.pi / 20)
    assert d.frequency == pytest.approx(20.0)
    assert d.magnus_parameter == pytest.approx(d.period**2)


def test_static_hamiltonian_matrix_elements(small_basis):
    b = small_basis
    p = ModelParams(1.3, 0.8, 0.7, 0.2)
    H = static_hamiltonian(p, b)
    assert is_hermitian(H)
    k = b.index(3, 0)
    assert H[k, k] == pytest.approx(1.3 * 3)
    # rotating term: a' J- takes (3, 0) to (4, -1)
    j = b.j
    el = 0.7 / math.sqrt(b.N) * math.sqrt(4) * math.sqrt(j * (j + 1) - 0 * (0 - 1))
    assert H[b.index(4, -1), k] == pytest.approx(el)
    # counter-rotating: a' J+ takes (3, 0) to (4, 1)
    el = 0.2 / math.sqrt(b.N) * math.sqrt(4) * math.sqrt(j * (j + 1) - 0 * (0 + 1))
    assert H[b.index(4, 1), k] == pytest.approx(el)


def test_decoupled_limit(small_basis):
    p = ModelParams(1.0, 2.0)
    assert np.allclose(static_hamiltonian(p, small_basis), decoupled_hamiltonian(p, small_basis))


def test_drive_operator_is_coupling_at_amplitude(small_basis):
    d = DriveParams(0.6, 0.1)
    V = drive_operator(d, small_basis)
    H = static_hamiltonian(ModelParams(1.0, 1.0, 0.6, 0.6), small_basis)
    H0 = decoupled_hamiltonian(ModelParams(1.0, 1.0), small_basis)
    assert np.allclose(V, H - H0)
    HA, HB = step_hamiltonians(ModelParams(1.0, 1.0, 0.3, 0.1), d, small_basis)
    assert np.allclose(HA - HB, 2 * V)


def test_parity_conserved(small_basis, params, drive):
    for M in (
        static_hamiltonian(params, small_basis),
        drive_operator(drive, small_basis),
        effective_hamiltonian(params, drive, small_basis),
    ):
        assert off_sector_norm(M, small_basis) == 0.0


def test_effective_hamiltonian_hermitian_and_real(small_basis, params, drive):
    Heff = effective_hamiltonian(params, drive, small_basis)
    assert is_hermitian(Heff)
    assert np.isrealobj(Heff)


def test_double_commutator_closed_form(small_basis, params, drive):
    # below the cutoff the closed form equals [[X, Y], V] evaluated numerically
    b = small_basis
    H = static_hamiltonian(params, b)
    V = drive_operator(drive, b)
    X, Y = (H - V) / 2, (H + V) / 2
    numeric = comm(comm(X, Y), V)
    keep = np.ix_(b.n_of_k <= 15, b.n_of_k <= 15)
    closed = second_order_correction(params, drive, b)
    assert np.abs((closed - numeric)[keep]).max() < 1e-10
    flipped = second_order_correction(params, drive, b, cubic_sign=+1.0)
    assert np.abs((flipped - numeric)[keep]).max() > 1.0


def test_correction_vanishes_for_equal_couplings_cubic(small_basis, drive):
    p = ModelParams(1.0, 1.0, 0.5, 0.5)
    a = second_order_correction(p, drive, small_basis, cubic_sign=1.0)
    b = second_order_correction(p, drive, small_basis, cubic_sign=-1.0)
    assert np.array_equal(a, b)


def test_zero_amplitude_gives_static(small_basis, params):
    d = DriveParams(0.0, 0.1)
    assert np.array_equal(effective_hamiltonian(params, d, small_basis), static_hamiltonian(params, small_basis))


def test_magnus_regime_warning(small_basis, params):
    with pytest.warns(MagnusRegimeWarning):
        effective_hamiltonian(params, DriveParams(2.0, 1.0), small_basis)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        effective_hamiltonian(params, DriveParams(1.0, 0.5), small_basis)


def _bch_defects(p, basis, periods, first_order, cubic_sign=-1.0, block=None):
    H = static_hamiltonian(p, basis)
    out = []
    for T in periods:
        d = DriveParams(1.0, T)
        HA, HB = step_hamiltonians(p, d, basis)
        U = floquet_operator(HA, HB, T)
        Heff = effective_hamiltonian(p, d, basis, cubic_sign=cubic_sign)
        if first_order:
            V = drive_operator(d, basis)
            Heff = Heff - 0.25j * T * comm(H, V)
        D = U - expm_hermitian(Heff, T)
        if block is not None:
            D = D[np.ix_(block, block)]
        out.append(np.abs(D).max())
    return np.array(out)


def test_second_order_terms_with_first_order_restored(small_basis, params):
    # adding back the first-order term leaves a T^4 defect on the converged
    # low-Fock block; a wrong sign in any second-order term would leave T^3
    periods = (0.1, 0.05, 0.025)
    block = small_basis.n_of_k <= 10
    good = _bch_defects(params, small_basis, periods, True, -1.0, block)
    ratios = good[:-1] / good[1:]
    assert np.all(np.abs(ratios - 16) < 2.5), ratios
    bad = _bch_defects(params, small_basis, periods, True, +1.0, block)
    assert np.all(np.abs(bad[:-1] / bad[1:] - 8) < 1.5)


def test_dropped_first_order_term_dominates(small_basis, params):
    d = _bch_defects(params, small_basis, (0.1, 0.05, 0.025), False)
    assert np.all(np.abs(d[:-1] / d[1:] - 4) < 0.5)
