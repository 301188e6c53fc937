import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from dickefloquet.floquet import (
    HermitianPropagator,
    control_drift,
    expm_hermitian,
    floquet_operator,
    floquet_spectrum,
    fold_quasienergies,
    reunitarize,
    unitary_eigh,
)
from dickefloquet.hilbert import build_basis, is_unitary, unitarity_defect
from dickefloquet.model import DriveParams, ModelParams, effective_hamiltonian, static_hamiltonian, step_hamiltonians


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_expm_matches_scipy(rng):
    H = random_hermitian(rng, 12)
    assert np.allclose(expm_hermitian(H, 0.37), sla.expm(-0.37j * H), atol=1e-12)


def test_propagator_group_property(rng):
    prop = HermitianPropagator(random_hermitian(rng, 10))
    assert np.allclose(prop(0.3) @ prop(0.4), prop(0.7), atol=1e-12)
    assert np.allclose(prop(0.0), np.eye(10))


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianPropagator(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        HermitianPropagator(np.ones((2, 3)))


def test_floquet_operator_unitary(small_basis, params, drive):
    HA, HB = step_hamiltonians(params, drive, small_basis)
    U = floquet_operator(HA, HB, drive.period)
    assert unitarity_defect(U) < 1e-10
    with pytest.raises(ValueError):
        floquet_operator(HA, HB[:-1, :-1], 0.1)
    with pytest.raises(ValueError):
        floquet_operator(HA, HB, 0.0)


def test_undriven_floquet_operator_is_static_evolution(small_basis, params):
    d = DriveParams(0.0, 0.2)
    HA, HB = step_hamiltonians(params, d, small_basis)
    H = static_hamiltonian(params, small_basis)
    assert np.allclose(floquet_operator(HA, HB, 0.2), expm_hermitian(H, 0.2), atol=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20), st.floats(0.5, 50.0))
def test_fold_range_and_congruence(values, w):
    e = np.array(values)
    f = fold_quasienergies(e, w)
    assert np.all(f >= -w / 2) and np.all(f < w / 2)
    k = (e - f) / w
    assert np.allclose(k, np.rint(k), atol=1e-6)


def test_spectrum_reconstructs_operator(tiny_basis, params, drive):
    HA, HB = step_hamiltonians(params, drive, tiny_basis)
    U = floquet_operator(HA, HB, drive.period)
    spec = floquet_spectrum(U, drive.period)
    Z = spec.modes
    assert np.allclose(Z.conj().T @ Z, np.eye(len(spec)), atol=1e-10)
    assert np.allclose((Z * np.exp(-1j * spec.phases)) @ Z.conj().T, U, atol=1e-10)
    assert np.all(np.diff(spec.quasienergies) >= 0)
    assert np.all(spec.positive_quasienergies >= 0)
    assert np.all(spec.positive_quasienergies < spec.frequency)


def test_unitary_eigh_degenerate():
    U = np.diag([1j, 1j, -1.0, 1.0]).astype(complex)
    Q = sla.qr(np.random.default_rng(0).normal(size=(4, 4)))[0]
    lam, Z = unitary_eigh(Q @ U @ Q.T)
    assert np.allclose(Z.conj().T @ Z, np.eye(4), atol=1e-12)
    assert np.allclose(np.sort_complex(lam), np.sort_complex(np.diag(U)))


def test_spectrum_rejects_non_unitary():
    with pytest.raises(ValueError):
        floquet_spectrum(2 * np.eye(3), 1.0)


def test_reunitarize_and_drift_control(rng):
    Q = sla.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0]
    noisy = Q + 1e-6 * rng.normal(size=(6, 6))
    fixed = reunitarize(noisy)
    assert is_unitary(fixed)
    assert np.abs(fixed - Q).max() < 1e-5
    assert control_drift(Q) is Q
    assert is_unitary(control_drift(noisy))


def test_high_frequency_quasienergies_approach_effective_spectrum(tiny_basis):
    # the dropped first-order term shifts the spectrum at O(T^2)
    p = ModelParams(1.0, 1.0, 0.7, 0.2)
    diffs = []
    for T in (0.02, 0.01):
        d = DriveParams(1.0, T)
        HA, HB = step_hamiltonians(p, d, tiny_basis)
        quasi = np.sort(floquet_spectrum(floquet_operator(HA, HB, T), T).quasienergies)[:10]
        eff = np.linalg.eigvalsh(effective_hamiltonian(p, d, tiny_basis))[:10]
        diffs.append(np.abs(quasi - eff).max())
    assert diffs[1] < 1e-4
    assert diffs[0] / diffs[1] == pytest.approx(4.0, abs=0.5)
