"""Sequential quantum probability ratio tests.

A test measures one copy per step with a POVM chosen by a :class:`Strategy`,
accumulates the log-likelihood ratio ``S_k = sum_j Z_j`` with
``Z_j = log Tr[rho0 M_j(X_j)] - log Tr[rho1 M_j(X_j)]`` and stops at the
first ``k`` with ``S_k >= B`` (decide 0) or ``S_k <= -A`` (decide 1).

:func:`run_trial` runs a single test step by step. :func:`simulate_trials`
runs many tests at once with numpy; both draw from the same counter-based
stream, so trial ``i`` of a batch equals ``run_trial`` with
``TrialStream(seed, hypothesis, i)``.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .divergences import classical_kl, measured_relative_entropy
from .errors import (
    DimensionMismatchError,
    NotDistinguishableError,
    TauTooLargeError,
    ValidationError,
    ZeroProbabilityOutcomeError,
)
from .rng import step_uniforms
from .states import born_distribution

ZERO_ELEMENT = 1e-14
DEFAULT_T_MAX = 10_000


class Decision(enum.IntEnum):
    TRUNCATED = -1
    H0 = 0
    H1 = 1


@dataclass(frozen=True)
class SqprtParams:
    a: float
    b: float
    t_max: int = DEFAULT_T_MAX

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValidationError("thresholds", f"A={self.a}, B={self.b} must be positive")
        if self.t_max < 1:
            raise ValidationError("t_max", "step cap must be >= 1")


@dataclass(frozen=True)
class Strategy:
    """Measurement policy.

    ``kind`` is ``"adaptive_two_point"`` (``povms = (m*_0, m*_1)``),
    ``"fixed"`` (one POVM) or ``"cyclic"`` (POVMs used in blocks of
    ``counts[j]`` consecutive steps). ``rates`` is the exponent pair
    (R0, R1) the strategy targets, used to set thresholds.
    """

    kind: str
    povms: tuple
    counts: tuple = ()
    rates: tuple = None

    def __post_init__(self):
        if self.kind not in ("adaptive_two_point", "fixed", "cyclic"):
            raise ValidationError("strategy", f"unknown kind {self.kind!r}")
        dims = {m.dim for m in self.povms}
        if len(dims) != 1:
            raise DimensionMismatchError("strategy POVMs differ in dimension")
        if self.kind == "adaptive_two_point" and len(self.povms) != 2:
            raise ValidationError("strategy", "adaptive strategy needs two POVMs")
        if self.kind == "fixed" and len(self.povms) != 1:
            raise ValidationError("strategy", "fixed strategy needs one POVM")
        if self.kind == "cyclic":
            if len(self.counts) != len(self.povms):
                raise ValidationError("strategy", "one count per cyclic POVM")
            if any(int(r) != r or r < 1 for r in self.counts):
                raise ValidationError("strategy", "cyclic counts must be positive integers")

    @property
    def dim(self):
        return self.povms[0].dim

    @property
    def period(self):
        return int(sum(self.counts)) if self.kind == "cyclic" else 1

    @classmethod
    def fixed(cls, povm, pair=None):
        s = cls("fixed", (povm,))
        return s.with_rates(pair) if pair is not None else s

    @classmethod
    def cyclic(cls, blocks, pair=None):
        povms = tuple(m for m, _ in blocks)
        counts = tuple(int(r) for _, r in blocks)
        s = cls("cyclic", povms, counts)
        return s.with_rates(pair) if pair is not None else s

    @classmethod
    def adaptive(cls, m_star_0, m_star_1, rates=None):
        return cls("adaptive_two_point", (m_star_0, m_star_1), (), rates)

    def with_rates(self, pair):
        return Strategy(self.kind, self.povms, self.counts, strategy_rates(self, pair))

    def block_index(self, k):
        """Cyclic block used at step ``k``; remainder 0 maps to the last block."""
        rem = k % self.period
        if rem == 0:
            return len(self.counts) - 1
        return int(np.searchsorted(np.cumsum(self.counts), rem, side="left"))


def strategy_rates(strategy, pair):
    """Exponent pair (R0, R1) = (KL(P1 || P0), KL(P0 || P1)), time-averaged for cyclic schedules."""
    per = []
    for m in strategy.povms:
        p = born_distribution(pair.rho0, m)
        q = born_distribution(pair.rho1, m)
        per.append((classical_kl(q, p), classical_kl(p, q)))
    per = np.array(per)
    if strategy.kind == "cyclic":
        w = np.array(strategy.counts, dtype=float) / strategy.period
        return tuple(float(x) for x in w @ per)
    if strategy.kind == "fixed":
        return tuple(float(x) for x in per[0])
    # adaptive: m*_1 maximises KL(P1||P0), m*_0 maximises KL(P0||P1)
    return float(per[1, 0]), float(per[0, 1])


def build_adaptive_strategy(pair, opts=None):
    """Two-point adaptive strategy from the optimal PVMs of both divergence directions."""
    if np.linalg.norm(pair.rho0.matrix - pair.rho1.matrix) < 1e-12:
        raise NotDistinguishableError("rho0 equals rho1")
    res01 = measured_relative_entropy(pair, opts)
    res10 = measured_relative_entropy(pair.swapped(), opts)
    m0 = res01.povm.relabel("a")
    m1 = res10.povm.relabel("b")
    return Strategy.adaptive(m0, m1, rates=(res10.value, res01.value))


def thresholds_for(n, tau, d_m_10, d_m_01):
    """A_n = n (D10 - tau), B_n = n (D01 - tau) with the default step cap."""
    if not tau > 0:
        raise TauTooLargeError(f"tau must be positive, got {tau}")
    if tau >= min(d_m_10, d_m_01):
        raise TauTooLargeError(f"tau={tau} >= min(D10={d_m_10:.6g}, D01={d_m_01:.6g})")
    a = n * (d_m_10 - tau)
    b = n * (d_m_01 - tau)
    d_m = max(min(d_m_10, d_m_01), 1e-6)
    t_max = max(DEFAULT_T_MAX, math.ceil(50 * max(a, b) / d_m))
    return SqprtParams(a, b, t_max)


def next_povm_index(strategy, k, s_prev, coin):
    if strategy.kind == "fixed":
        return 0
    if strategy.kind == "cyclic":
        return strategy.block_index(k)
    if k == 1:
        return 0 if coin < 0.5 else 1
    return 0 if s_prev >= 0 else 1


def next_povm(strategy, k, s_prev, rng):
    """POVM to use at step ``k`` given ``S_{k-1}``; adaptive step 1 flips a fair coin."""
    coin = rng.coin() if (strategy.kind == "adaptive_two_point" and k == 1) else 0.0
    return strategy.povms[next_povm_index(strategy, k, s_prev, coin)]


def increment(povm, outcome, pair):
    """Log-likelihood ratio contributed by observing ``outcome`` of ``povm``."""
    x = povm.index(outcome)
    if np.linalg.norm(povm.elements[x]) < ZERO_ELEMENT:
        raise ZeroProbabilityOutcomeError(f"element {outcome!r} is zero")
    p0 = np.trace(pair.rho0.matrix @ povm.elements[x]).real
    p1 = np.trace(pair.rho1.matrix @ povm.elements[x]).real
    return float(np.log(p0) - np.log(p1))


class Tables:
    """Per-POVM sampling CDFs (under the true state) and increments (against the pair)."""

    def __init__(self, true_state, pair, strategy):
        if true_state.dim != pair.dim or strategy.dim != pair.dim:
            raise DimensionMismatchError("state, pair and strategy dimensions differ")
        width = max(len(m) for m in strategy.povms)
        n = len(strategy.povms)
        self.cdf = np.ones((n, width))
        self.z = np.zeros((n, width))
        self.labels = []
        for j, m in enumerate(strategy.povms):
            p = born_distribution(true_state, m)
            cdf = np.cumsum(p)
            cdf[-1] = 1.0
            self.cdf[j, : len(m)] = cdf
            p0 = born_distribution(pair.rho0, m)
            p1 = born_distribution(pair.rho1, m)
            live = (p0 > 0) & (p1 > 0)
            self.z[j, : len(m)][live] = np.log(p0[live]) - np.log(p1[live])
            self.labels.append(m.outcomes)

    def sample(self, idx, u):
        """Inverse-CDF outcome index for POVM(s) ``idx`` and uniform(s) ``u``."""
        return np.sum(np.asarray(u)[..., None] >= self.cdf[idx], axis=-1)


class Step(NamedTuple):
    povm_index: int
    outcome: str
    z: float
    s: float


@dataclass
class TrialOutcome:
    stopping_time: int
    decision: Decision
    terminal_statistic: float
    hit_cap: bool
    trajectory: list = field(default=None, repr=False)


def run_trial(true_state, pair, strategy, params, rng, record_trajectory=False, tables=None):
    """Run one sequential test to its stopping time or the step cap."""
    tables = tables or Tables(true_state, pair, strategy)
    s = 0.0
    traj = [] if record_trajectory else None
    for k in range(1, params.t_max + 1):
        coin = rng.coin() if (strategy.kind == "adaptive_two_point" and k == 1) else 0.0
        j = next_povm_index(strategy, k, s, coin)
        x = int(tables.sample(j, rng.uniform(k)))
        z = tables.z[j, x]
        s = s + z
        if traj is not None:
            traj.append(Step(j, tables.labels[j][x], float(z), float(s)))
        if s >= params.b:
            return TrialOutcome(k, Decision.H0, float(s), False, traj)
        if s <= -params.a:
            return TrialOutcome(k, Decision.H1, float(s), False, traj)
    return TrialOutcome(params.t_max, Decision.TRUNCATED, float(s), True, traj)


@dataclass
class BlockResult:
    """Per-trial arrays from :func:`simulate_trials` plus monitor counts."""

    stopping_time: np.ndarray
    decision: np.ndarray
    terminal_statistic: np.ndarray
    violations: dict
    trajectories: list = None


def simulate_trials(tables, strategy, params, seed, hypothesis, trial_ids, c_bound=None,
                    record_trajectories=False):
    """Vectorised equivalent of running :func:`run_trial` for each id in ``trial_ids``.

    When ``c_bound`` is given, increments, policy choices, the stopping rule
    and the overshoot are checked at every step and violations counted.
    """
    trial_ids = np.asarray(trial_ids, dtype=np.uint64)
    n = len(trial_ids)
    s = np.zeros(n)
    t = np.full(n, params.t_max, dtype=np.int64)
    dec = np.full(n, int(Decision.TRUNCATED), dtype=np.int64)
    active = np.arange(n)
    viol = {"increment": 0, "policy": 0, "stopping": 0, "overshoot": 0}
    steps = [] if record_trajectories else None
    adaptive = strategy.kind == "adaptive_two_point"
    for k in range(1, params.t_max + 1):
        if active.size == 0:
            break
        u, coin = step_uniforms(seed, hypothesis, trial_ids[active], k)
        s_prev = s[active]
        if adaptive:
            idx = np.where(coin < 0.5, 0, 1) if k == 1 else np.where(s_prev >= 0, 0, 1)
        else:
            idx = np.full(active.size, next_povm_index(strategy, k, 0.0, 0.0))
        x = tables.sample(idx, u)
        z = tables.z[idx, x]
        s_new = s_prev + z
        s[active] = s_new
        if c_bound is not None:
            viol["increment"] += int(np.sum(np.abs(z) > c_bound + 1e-9))
            if adaptive and k >= 2:
                viol["policy"] += int(np.sum(idx != np.where(s_prev >= 0, 0, 1)))
            viol["stopping"] += int(np.sum((s_prev >= params.b) | (s_prev <= -params.a)))
        if steps is not None:
            steps.append((active, idx, x, z, s_new))
        up = s_new >= params.b
        down = s_new <= -params.a
        stop = up | down
        if np.any(stop):
            hit = active[stop]
            t[hit] = k
            dec[hit] = np.where(up[stop], int(Decision.H0), int(Decision.H1))
            if c_bound is not None:
                viol["overshoot"] += int(np.sum(s_new[up] > params.b + c_bound + 1e-9))
                viol["overshoot"] += int(np.sum(s_new[down] < -params.a - c_bound - 1e-9))
            active = active[~stop]
    trajectories = None
    if steps is not None:
        trajectories = [[] for _ in range(n)]
        for act, idx, x, z, s_new in steps:
            for i, j, xi, zi, si in zip(act, idx, x, z, s_new):
                trajectories[i].append(Step(int(j), tables.labels[j][xi], float(zi), float(si)))
    return BlockResult(t, dec, s, viol, trajectories)
