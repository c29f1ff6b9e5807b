"""Small dense complex-matrix kernel.

Everything here works on plain ``numpy`` arrays. Matrices are never mutated
in place; functions return fresh arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionOverflowError,
    DomainError,
    NonFiniteError,
    NotHermitianError,
)

HERMITIAN_TOL = 1e-10
ZERO_EIG_TOL = 1e-12
DEFAULT_DIM_CAP = 64


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m):
    """Return ``m`` as a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix has NaN or Inf entries")
    return a


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_defect(m):
    return np.linalg.norm(m - dagger(m))


def symmetrize(m, tol=HERMITIAN_TOL):
    """Check that ``m`` is Hermitian within ``tol`` (relative) and return (m + m^H)/2."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"matrix is not square: {a.shape}")
    scale = max(1.0, np.linalg.norm(a))
    defect = hermitian_defect(a)
    if defect > tol * scale:
        raise NotHermitianError(f"||m - m^H||_F = {defect:.3e}")
    return 0.5 * (a + dagger(a))


def hermitian_eig(m):
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues."""
    a = symmetrize(m)
    w, v = np.linalg.eigh(a)
    return HermitianEig(w, v)


def spectral_map(m, f, domain_min=None):
    """Apply the scalar function ``f`` to the spectrum of Hermitian ``m``.

    Returns ``V diag(f(w)) V^H``. When ``domain_min`` is given, every
    eigenvalue must exceed it, otherwise :class:`DomainError` is raised.
    """
    eig = hermitian_eig(m)
    w = eig.eigenvalues
    if domain_min is not None and np.any(w <= domain_min):
        raise DomainError(f"eigenvalue {w.min():.3e} outside domain (> {domain_min:g})")
    with np.errstate(all="raise"):
        try:
            fw = np.asarray(f(w), dtype=float)
        except FloatingPointError as exc:
            raise DomainError(str(exc)) from exc
    if not np.all(np.isfinite(fw)):
        raise DomainError("function is not finite on the spectrum")
    v = eig.eigenvectors
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + dagger(out))


def logm_h(m):
    """Natural matrix log of a positive definite Hermitian matrix."""
    return spectral_map(m, np.log, domain_min=ZERO_EIG_TOL)


def sqrtm_h(m):
    return spectral_map(m, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def inv_sqrtm_h(m):
    return spectral_map(m, lambda w: 1.0 / np.sqrt(w), domain_min=ZERO_EIG_TOL)


def kron(a, b, cap=DEFAULT_DIM_CAP):
    """Kronecker product, refusing results larger than ``cap`` in either dimension."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > cap or cols > cap:
        raise DimensionOverflowError(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def commutator(a, b):
    return a @ b - b @ a


def expm_h(h, scale=1j):
    """exp(scale * H) for Hermitian ``H`` via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)) @ v.conj().T
