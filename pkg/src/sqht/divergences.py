"""Quantum, measured and max relative entropies (all in nats).

The measured relative entropy and the weighted two-sided objective ``g`` are
computed by multi-start gradient ascent (see :mod:`sqht.optimize`); the
qubit grid oracle is an independent brute-force check for ``d = 2``.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatchError,
    NotFullSupportError,
    SupportViolationError,
    WrongDimensionError,
)
from .optimize import (
    OptimizerMeta,
    OptimizerOptions,
    ascend_isometry,
    ascend_pvm,
    run_restarts,
)
from .states import Povm, born_distribution

ZERO_PROB = 1e-14


@dataclass(frozen=True)
class IncrementBound:
    c: float


@dataclass
class MeasuredResult:
    value: float
    povm: Povm
    meta: OptimizerMeta


@dataclass
class DivergenceReport:
    d_quantum: float
    d_measured: float
    d_max: float
    optimal_pvm: Povm
    optimizer_meta: OptimizerMeta


def _require_full_support(*states):
    for rho in states:
        if not rho.full_support:
            raise NotFullSupportError(f"min eigenvalue {rho.min_eigenvalue:.3e}")


def classical_kl(p, q):
    """KL(p || q) in nats with the convention 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"lengths differ: {p.shape} vs {q.shape}")
    live = p > 0
    if np.any(q[live] <= 0):
        raise SupportViolationError("q vanishes where p > 0")
    return float(np.sum(p[live] * np.log(p[live] / q[live])))


def quantum_relative_entropy(pair):
    """Tr[rho0 (log rho0 - log rho1)]."""
    _require_full_support(pair.rho0, pair.rho1)
    r0 = pair.rho0.matrix
    diff = linalg.logm_h(r0) - linalg.logm_h(pair.rho1.matrix)
    return max(0.0, float(np.trace(r0 @ diff).real))


def max_relative_entropy(rho0, rho1):
    """log of the largest eigenvalue of rho1^{-1/2} rho0 rho1^{-1/2}."""
    _require_full_support(rho0, rho1)
    s = linalg.inv_sqrtm_h(rho1.matrix)
    w = np.linalg.eigvalsh(linalg.symmetrize(s @ rho0.matrix @ s, tol=1e-8))
    return max(0.0, float(np.log(w[-1])))


def increment_bound(pair):
    return IncrementBound(max(max_relative_entropy(pair.rho0, pair.rho1),
                              max_relative_entropy(pair.rho1, pair.rho0)))


def weighted_objective(m, pair, t0, t1):
    """t0 * KL(P_{rho1,m} || P_{rho0,m}) + t1 * KL(P_{rho0,m} || P_{rho1,m})."""
    if m.dim != pair.dim:
        raise DimensionMismatchError(f"POVM is {m.dim}-dim, states are {pair.dim}-dim")
    p = born_distribution(pair.rho0, m)
    q = born_distribution(pair.rho1, m)
    live = (p > ZERO_PROB) | (q > ZERO_PROB)
    p, q = p[live], q[live]
    total = 0.0
    if t1:
        total += t1 * classical_kl(p, q)
    if t0:
        total += t0 * classical_kl(q, p)
    return total


def _log_ratio_basis(pair):
    """Eigenbasis of log rho0 - log rho1 as PVM rows; exact for commuting pairs."""
    h = linalg.logm_h(pair.rho0.matrix) - linalg.logm_h(pair.rho1.matrix)
    _, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return v.conj().T


def measured_relative_entropy(pair, opts=None, warm_starts=()):
    """Largest KL(P_{rho0,m} || P_{rho1,m}) over rank-1 PVMs with ``d`` outcomes.

    ``warm_starts`` are extra initial PVMs given as unitary row matrices;
    they run before the random restarts.
    """
    opts = opts or OptimizerOptions()
    _require_full_support(pair.rho0, pair.rho1)
    d = pair.dim
    starts = [_log_ratio_basis(pair), *warm_starts]
    best, meta = run_restarts(ascend_pvm, starts, opts.restarts, (d, d),
                              pair.rho0.matrix, pair.rho1.matrix, 0.0, 1.0, opts)
    povm = Povm.from_isometry(best.rows)
    value = weighted_objective(povm, pair, 0.0, 1.0)
    return MeasuredResult(max(0.0, value), povm, meta)


def optimize_g(pair, t0, t1, opts=None, warm_starts=None):
    """Maximise the weighted objective over rank-1 POVMs with ``d**2`` outcomes.

    Returns ``(value, povm, meta)``. Unless ``warm_starts`` is given, the
    optimal PVMs for both divergence directions are padded with zero
    elements and used as initial points, which makes the best single PVM a
    floor for the result.
    """
    opts = opts or OptimizerOptions()
    if t0 < 0 or t1 < 0:
        raise ValueError("weights must be nonnegative")
    _require_full_support(pair.rho0, pair.rho1)
    d = pair.dim
    n = d * d
    if warm_starts is None:
        warm_starts = [_log_ratio_basis(pair), _log_ratio_basis(pair.swapped())]
        for direction in (pair, pair.swapped()):
            res = measured_relative_entropy(direction, opts)
            warm_starts.append(_rows_of(res.povm))
    starts = [_pad_rows(k, n) for k in warm_starts]
    best, meta = run_restarts(ascend_isometry, starts, opts.restarts, (n, d),
                              pair.rho0.matrix, pair.rho1.matrix, t0, t1, opts)
    povm = Povm.from_isometry(best.rows)
    return weighted_objective(povm, pair, t0, t1), povm, meta


def _rows_of(pvm):
    """Recover unit rows k_x with m(x) = k_x^H k_x from a rank-1 measurement."""
    rows = []
    for e in pvm.elements:
        w, v = np.linalg.eigh(e)
        rows.append(np.sqrt(max(w[-1], 0.0)) * v[:, -1].conj())
    return np.array(rows)


def _pad_rows(k, n):
    k = np.asarray(k, dtype=complex)
    out = np.zeros((n, k.shape[1]), dtype=complex)
    out[: k.shape[0]] = k
    return out


def divergence_report(pair, opts=None):
    res = measured_relative_entropy(pair, opts)
    return DivergenceReport(
        d_quantum=quantum_relative_entropy(pair),
        d_measured=res.value,
        d_max=max_relative_entropy(pair.rho0, pair.rho1),
        optimal_pvm=res.povm,
        optimizer_meta=res.meta,
    )


# qubit oracle -----------------------------------------------------------------

def bloch_vector(rho):
    m = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho)
    return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])


def _binary_kl_along(a, b, axes):
    """KL between the two-outcome distributions of projective measurements along ``axes``."""
    pa = np.clip(0.5 * (1 + axes @ a), 0.0, 1.0)
    pb = np.clip(0.5 * (1 + axes @ b), 0.0, 1.0)

    def term(x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, x * np.log(x / y), 0.0)

    return term(pa, pb) + term(1 - pa, 1 - pb)


def _circle(e1, e2, psi):
    return np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2


def qubit_grid_oracle(pair, resolution=100_000):
    """Brute-force D_M(rho0 || rho1) for qubits.

    Sweeps ``resolution`` equally spaced measurement axes on three great
    circles of the Bloch sphere (the x-z circle, the y-z circle and the
    circle through both Bloch vectors), then refines the best angle with a
    golden-section search.
    """
    if pair.dim != 2:
        raise WrongDimensionError(f"oracle needs d = 2, got {pair.dim}")
    a = bloch_vector(pair.rho0)
    b = bloch_vector(pair.rho1)
    x, y, z = np.eye(3)
    circles = [(z, x), (z, y)]
    plane = _plane_through(a, b)
    if plane is not None:
        circles.append(plane)
    psi = np.arange(resolution) * (np.pi / resolution)
    best_val, best = -np.inf, None
    for e1, e2 in circles:
        vals = _binary_kl_along(a, b, _circle(e1, e2, psi))
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best = float(vals[j]), (e1, e2, psi[j])
    e1, e2, psi0 = best
    h = np.pi / resolution

    def f(t):
        return float(_binary_kl_along(a, b, _circle(e1, e2, np.array([t])))[0])

    refined = _golden_max(f, psi0 - h, psi0 + h)
    return max(best_val, refined)


def _plane_through(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-15 and nb < 1e-15:
        return None
    e1 = a / na if na >= nb else b / nb
    other = b if na >= nb else a
    perp = other - (other @ e1) * e1
    if np.linalg.norm(perp) < 1e-12:
        # collinear: any circle through e1 works
        trial = np.eye(3)[int(np.argmin(np.abs(e1)))]
        perp = trial - (trial @ e1) * e1
    return e1, perp / np.linalg.norm(perp)


def _golden_max(f, lo, hi, iters=200):
    g = (np.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    best = max(fc, fd)
    for _ in range(iters):
        if hi - lo < 1e-15:
            break
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
        best = max(best, fc, fd)
    return best
