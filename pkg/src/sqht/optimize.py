"""Gradient ascent over rank-1 measurements.

Two measurement manifolds are used:

* rank-1 PVMs, written as the rows of ``exp(iH) V0`` for Hermitian ``H``
  (``d**2`` real coordinates, re-centred after every accepted step);
* rank-1 POVMs with ``N`` outcomes, written as the rows of an ``N x d``
  isometry ``K`` (``K^H K = I``), moved with a polar retraction.

Both maximise the weighted divergence

    t0 * KL(Q || P) + t1 * KL(P || Q),   P_x = k_x rho0 k_x^H,  Q_x = k_x rho1 k_x^H.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.optimize._linesearch import LineSearchWarning

ZERO_PROB = 1e-14
PVM_ASCENT_ITER = 200

# BFGS line-search stalls at the optimum are expected; catch_warnings is not thread-safe
warnings.filterwarnings("ignore", category=LineSearchWarning)


@dataclass(frozen=True)
class OptimizerOptions:
    restarts: int = 20
    tol: float = 1e-10
    window: int = 50
    max_iter: int = 20000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def scaled(self, factor):
        return OptimizerOptions(self.restarts * factor, self.tol, self.window,
                                self.max_iter, self.seed, self.workers)


@dataclass
class AscentResult:
    value: float
    rows: np.ndarray
    converged: bool
    grad_norm: float
    iterations: int
    start: int = 0


@dataclass
class OptimizerMeta:
    restarts: int
    converged: bool
    grad_norm: float
    best_start: int
    values: list = field(default_factory=list)

    def as_dict(self):
        return {
            "restarts": self.restarts,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "best_start": self.best_start,
        }


def weighted_value_grad(k, rho0, rho1, t0, t1):
    """Objective value and Euclidean gradient with respect to the rows ``k``.

    The gradient ``G`` satisfies ``dF = Re Tr(G^H dK)``.
    """
    kr0 = k @ rho0
    kr1 = k @ rho1
    p = np.einsum("xi,xi->x", kr0, k.conj()).real
    q = np.einsum("xi,xi->x", kr1, k.conj()).real
    live = (p > ZERO_PROB) | (q > ZERO_PROB)
    p = np.where(live, np.maximum(p, 1e-300), 1.0)
    q = np.where(live, np.maximum(q, 1e-300), 1.0)
    lr = np.log(p / q)
    value = float(np.sum(np.where(live, t1 * p * lr - t0 * q * lr, 0.0)))
    dp = np.where(live, t1 * (lr + 1.0) - t0 * q / p, 0.0)
    dq = np.where(live, t0 * (1.0 - lr) - t1 * p / q, 0.0)
    grad = 2.0 * (dp[:, None] * kr0 + dq[:, None] * kr1)
    return value, grad


# Hermitian coordinates ------------------------------------------------------

def hermitian_from_params(theta, d):
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = theta[:d]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = theta[d:d + m] + 1j * theta[d + m:d + 2 * m]
    h[(iu[1], iu[0])] = theta[d:d + m] - 1j * theta[d + m:d + 2 * m]
    return h


def params_from_matrix_grad(z, d):
    """Map ``Z`` to the coordinate gradient of ``Re Tr(Z^H i E)`` over the Hermitian basis."""
    iu = np.triu_indices(d, 1)
    diag = np.diag(z).imag
    re = z[iu].imag + z[(iu[1], iu[0])].imag
    im = -z[iu].real + z[(iu[1], iu[0])].real
    return np.concatenate([diag, re, im])


def pvm_value_grad(theta, v0, rho0, rho1, t0, t1):
    """Objective and exact coordinate gradient for rows ``exp(i H(theta)) @ v0``."""
    d = v0.shape[0]
    h = hermitian_from_params(theta, d)
    lam, w = np.linalg.eigh(h)
    e = np.exp(1j * lam)
    v = (w * e) @ w.conj().T @ v0
    value, g = weighted_value_grad(v, rho0, rho1, t0, t1)
    # divided differences of exp(i x) on the spectrum of H
    dl = lam[:, None] - lam[None, :]
    close = np.abs(dl) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(close, e[:, None], (e[:, None] - e[None, :]) / (1j * np.where(close, 1.0, dl)))
    m = w.conj().T @ g @ v0.conj().T @ w
    z = w @ (m * phi.conj()) @ w.conj().T
    return value, params_from_matrix_grad(z, d), v


# ascent loops -----------------------------------------------------------------

def _converged(history, window, tol):
    return len(history) > window and history[-1] - history[-1 - window] < tol


def _bb_step(s, y, fallback):
    """Barzilai-Borwein step length from a displacement ``s`` and gradient change ``y``."""
    sy = abs(np.vdot(s, y).real)
    if sy < 1e-300:
        return fallback * 2.0
    return min(max(np.vdot(s, s).real / sy, 1e-8), 100.0)


def _ascend(point, value, grad, move, opts):
    """Backtracking gradient ascent with Barzilai-Borwein step lengths.

    ``move(point, direction, step)`` returns the candidate point, its value,
    its ascent direction and the displacement used by the step rule.
    """
    step = 0.1
    history = [value]
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        if np.linalg.norm(grad) < 1e-13:
            converged = True
            break
        gain_floor = 1e-16 * max(1.0, abs(value))
        while True:
            cand, cand_value, cand_grad, disp = move(point, grad, step)
            # stop once the first-order gain is below float resolution
            if cand_value > value or step * np.vdot(grad, grad).real < gain_floor:
                break
            step *= 0.5
        if cand_value <= value:
            converged = True
            break
        step = _bb_step(disp, cand_grad - grad, step)
        point, value, grad = cand, cand_value, cand_grad
        history.append(value)
        if _converged(history, opts.window, opts.tol):
            converged = True
            break
    return AscentResult(value, point, converged, float(np.linalg.norm(grad)), it)


def ascend_pvm(v0, rho0, rho1, t0, t1, opts):
    """Ascent over unitary rows ``exp(i H) v``.

    A short Barzilai-Borwein phase (steps ``v <- exp(i H(step * grad)) v``)
    is followed by a BFGS polish in the same coordinates around its end
    point; plain gradient steps stall on the flat ridges of tensor-power
    problems.
    """
    d = v0.shape[0]
    zero = np.zeros(d * d)
    v = _reorthonormalize(np.asarray(v0, dtype=complex))
    value, grad, _ = pvm_value_grad(zero, v, rho0, rho1, t0, t1)

    def move(v, grad, step):
        _, _, cand = pvm_value_grad(step * grad, v, rho0, rho1, t0, t1)
        cand = _reorthonormalize(cand)
        cv, cg, _ = pvm_value_grad(zero, cand, rho0, rho1, t0, t1)
        return cand, cv, cg, step * grad

    phase = replace(opts, max_iter=min(opts.max_iter, PVM_ASCENT_ITER))
    first = _ascend(v, value, grad, move, phase)
    base = first.rows

    def neg(theta):
        val, g, _ = pvm_value_grad(theta, base, rho0, rho1, t0, t1)
        return -val, -g

    res = minimize(neg, zero, jac=True, method="BFGS",
                   options={"gtol": 1e-10, "maxiter": opts.max_iter})
    if -res.fun <= first.value:
        return first
    val, g, rows = pvm_value_grad(res.x, base, rho0, rho1, t0, t1)
    rows = _reorthonormalize(rows)
    gnorm = float(np.linalg.norm(g))
    return AscentResult(val, rows, bool(res.success or gnorm < 1e-6), gnorm,
                        first.iterations + int(res.nit))


def _reorthonormalize(v):
    q, r = np.linalg.qr(v.T)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q.T


def riemannian_grad(k, g):
    a = k.conj().T @ g
    return g - k @ (0.5 * (a + a.conj().T))


def polar_retract(y):
    u, _, vh = np.linalg.svd(y, full_matrices=False)
    return u @ vh


def ascend_isometry(k0, rho0, rho1, t0, t1, opts):
    """Ascent over N x d isometries with the polar retraction."""
    k = polar_retract(np.asarray(k0, dtype=complex))
    value, g = weighted_value_grad(k, rho0, rho1, t0, t1)

    def move(k, xi, step):
        cand = polar_retract(k + step * xi)
        cv, cg = weighted_value_grad(cand, rho0, rho1, t0, t1)
        return cand, cv, riemannian_grad(cand, cg), cand - k

    return _ascend(k, value, riemannian_grad(k, g), move, opts)


def haar_isometry(rng, n, d):
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def run_restarts(ascend, starts, n_random, shape, rho0, rho1, t0, t1, opts):
    """Run deterministic warm starts plus ``n_random`` Haar-random starts and keep the best.

    Restart ``j`` draws its initial point from ``default_rng([seed, j])``.
    """
    n, d = shape

    def job(j):
        if j < len(starts):
            k0 = np.asarray(starts[j], dtype=complex)
        else:
            k0 = haar_isometry(np.random.default_rng([opts.seed, j]), n, d)
        res = ascend(k0, rho0, rho1, t0, t1, opts)
        res.start = j
        return res

    total = len(starts) + n_random
    if opts.workers > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            results = list(pool.map(job, range(total)))
    else:
        results = [job(j) for j in range(total)]
    best = max(results, key=lambda r: (r.value, -r.start))
    meta = OptimizerMeta(total, best.converged, best.grad_norm, best.start,
                         [r.value for r in results])
    return best, meta
