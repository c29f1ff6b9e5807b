import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from sqht import linalg
from sqht.errors import DimensionOverflowError, DomainError, NonFiniteError, NotHermitianError

X = np.array([[0, 1], [1, 0]], dtype=complex)


def random_hermitian(seed, d):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def test_eig_identity():
    eig = linalg.hermitian_eig(np.eye(2))
    assert np.allclose(eig.eigenvalues, [1, 1])
    v = eig.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(2))


def test_eig_diagonal():
    assert np.allclose(linalg.hermitian_eig(np.diag([0.3, 0.7])).eigenvalues, [0.3, 0.7])


def test_eig_pauli_x():
    assert np.allclose(linalg.hermitian_eig(X).eigenvalues, [-1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError) as exc:
        linalg.hermitian_eig(np.array([[0, 1], [0, 0]]))
    assert exc.value.invariant == "hermitian"


def test_eig_rejects_nan():
    with pytest.raises(NonFiniteError):
        linalg.hermitian_eig(np.array([[np.nan, 0], [0, 1]]))


def test_spectral_map_identity_function():
    h = random_hermitian(3, 4)
    assert np.allclose(linalg.spectral_map(h, lambda w: w), h, atol=1e-10)


def test_log_of_diagonal():
    assert np.allclose(linalg.logm_h(np.diag([1, np.e])), np.diag([0, 1]), atol=1e-12)


def test_log_of_singular_raises():
    m = 0.5 * np.ones((2, 2)) + 1e-16 * np.eye(2)
    with pytest.raises(DomainError):
        linalg.logm_h(m)


def test_log_matches_scipy():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    p = g @ g.conj().T + 0.1 * np.eye(3)
    assert np.allclose(linalg.logm_h(p), logm(p), atol=1e-10)


def test_kron_identities():
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    k = linalg.kron(np.diag([0.6, 0.4]), np.diag([0.6, 0.4]))
    assert np.allclose(k, np.diag([0.36, 0.24, 0.24, 0.16]))


def test_kron_cap_boundary():
    assert linalg.kron(np.eye(8), np.eye(8), cap=64).shape == (64, 64)
    with pytest.raises(DimensionOverflowError):
        linalg.kron(np.eye(8), np.eye(16), cap=64)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_reconstruction_property(seed, d):
    h = random_hermitian(seed, d)
    eig = linalg.hermitian_eig(h)
    assert np.allclose(eig.reconstruct(), h, atol=1e-10)
    assert np.all(np.diff(eig.eigenvalues) >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_expm_matches_scipy(seed, d):
    h = random_hermitian(seed, d)
    assert np.allclose(linalg.expm_h(h), expm(1j * h), atol=1e-10)
