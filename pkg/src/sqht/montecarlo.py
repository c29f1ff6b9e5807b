"""Batched trial execution, error estimators and invariant monitors."""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .divergences import increment_bound
from .engine import Decision, Tables, TrialOutcome, simulate_trials, thresholds_for
from .errors import EmptyInputError, NoTrajectoriesError, TruncatedPresentError

BLOCK_SIZE = 8192
MIN_EFFECTIVE_EVENTS = 100
SWEEP_HEADER = ["n", "a", "b", "alpha_is", "alpha_is_se", "beta_is", "beta_is_se",
                "mean_t0", "mean_t1", "exceed0", "exceed1", "truncated"]


@dataclass(frozen=True)
class BatchConfig:
    trials: int
    seed: int = 0
    n: int = 1
    tau: float = 0.0
    strategy: str = "adaptive"
    record_trajectories: bool = False
    hypothesis: str = "both"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.hypothesis not in ("0", "1", "both"):
            raise ValueError("hypothesis must be '0', '1' or 'both'")

    @property
    def hypotheses(self):
        return (0, 1) if self.hypothesis == "both" else (int(self.hypothesis),)


@dataclass
class Estimate:
    value: float
    se: float
    events: int = 0
    wilson: tuple = None

    def rel_se(self):
        return self.se / self.value if self.value > 0 else 0.0


@dataclass
class BatchEstimate:
    trials: int
    alpha_hat: Estimate = None
    beta_hat: Estimate = None
    alpha_hat_is: Estimate = None
    beta_hat_is: Estimate = None
    mean_t0: float = None
    mean_t1: float = None
    exceedance_0: float = None
    exceedance_1: float = None
    truncated_count: int = 0
    violations: dict = field(default_factory=dict)
    usable: bool = True
    outcomes: dict = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("outcomes")
        return d


def wilson_interval(k, n, z=1.96):
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (float(max(0.0, centre - half)), float(min(1.0, centre + half)))


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    se = float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(np.mean(x)), se


def _direct(indicator):
    k = int(np.sum(indicator))
    n = len(indicator)
    value, se = _mean_se(indicator)
    return Estimate(value, se, k, wilson_interval(k, n))


def _is_from_arrays(decision, stat, under):
    """Change-of-measure estimate from stopped trials simulated under hypothesis ``under``.

    Under rho0: beta = E0[1{d=0} exp(-S_T)]. Under rho1: alpha = E1[1{d=1} exp(S_T)].
    """
    if len(decision) == 0:
        raise EmptyInputError("no trials")
    if np.any(decision == int(Decision.TRUNCATED)):
        raise TruncatedPresentError("truncated trials present")
    if under == 0:
        hit = decision == int(Decision.H0)
        w = np.where(hit, np.exp(-np.where(hit, stat, 0.0)), 0.0)
    else:
        hit = decision == int(Decision.H1)
        w = np.where(hit, np.exp(np.where(hit, stat, 0.0)), 0.0)
    value, se = _mean_se(w)
    return Estimate(value, se, int(np.sum(hit)))


def importance_estimate(outcomes, under=0):
    """Error estimate of the *other* hypothesis from trials run under ``under``.

    Trials under rho0 give beta-hat; trials under rho1 give alpha-hat.
    """
    outcomes = list(outcomes)
    dec = np.array([int(o.decision) for o in outcomes], dtype=np.int64)
    stat = np.array([o.terminal_statistic for o in outcomes], dtype=float)
    return _is_from_arrays(dec, stat, under)


def _simulate(pair, strategy, params, config, h, c_bound):
    true = pair.rho0 if h == 0 else pair.rho1
    tables = Tables(true, pair, strategy)
    blocks = [np.arange(i, min(i + BLOCK_SIZE, config.trials))
              for i in range(0, config.trials, BLOCK_SIZE)]

    def job(ids):
        return simulate_trials(tables, strategy, params, config.seed, h, ids, c_bound,
                               config.record_trajectories)

    if config.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(b) for b in blocks]
    t = np.concatenate([p.stopping_time for p in parts])
    dec = np.concatenate([p.decision for p in parts])
    stat = np.concatenate([p.terminal_statistic for p in parts])
    viol = {key: sum(p.violations[key] for p in parts) for key in parts[0].violations}
    outcomes = None
    if config.record_trajectories:
        trajs = [tr for p in parts for tr in p.trajectories]
        outcomes = [TrialOutcome(int(t[i]), Decision(int(dec[i])), float(stat[i]),
                                 bool(dec[i] == int(Decision.TRUNCATED)), trajs[i])
                    for i in range(len(t))]
    return t, dec, stat, viol, outcomes


def run_batch(pair, strategy, params, config):
    """Run ``config.trials`` independent trials under each requested hypothesis.

    Trial ``i`` under hypothesis ``h`` draws from the counter-based stream
    keyed by ``(config.seed, h, i)``; results do not depend on ``workers``.
    """
    c_bound = increment_bound(pair).c
    est = BatchEstimate(trials=config.trials, violations={})
    outcomes = {}
    truncated = 0
    for h in config.hypotheses:
        t, dec, stat, viol, outs = _simulate(pair, strategy, params, config, h, c_bound)
        for key, v in viol.items():
            est.violations[key] = est.violations.get(key, 0) + v
        if outs is not None:
            outcomes[h] = outs
        trunc = dec == int(Decision.TRUNCATED)
        truncated += int(np.sum(trunc))
        stopped = ~trunc
        is_est = None
        if np.any(stopped):
            is_est = _is_from_arrays(dec[stopped], stat[stopped], h)
        if h == 0:
            est.alpha_hat = _direct(dec == int(Decision.H1))
            est.beta_hat_is = is_est
            est.mean_t0 = float(np.mean(t))
            est.exceedance_0 = float(np.mean(t > config.n))
        else:
            est.beta_hat = _direct(dec == int(Decision.H0))
            est.alpha_hat_is = is_est
            est.mean_t1 = float(np.mean(t))
            est.exceedance_1 = float(np.mean(t > config.n))
    est.truncated_count = truncated
    est.usable = truncated < config.trials * len(config.hypotheses)
    if config.record_trajectories:
        est.outcomes = outcomes
    return est


def monitor_invariants(outcomes, pair, strategy, params, c_bound=None):
    """Count invariant violations in recorded trajectories.

    Keys: ``increment`` (|Z_k| > C), ``policy`` (adaptive step k >= 2 not
    using m*_0 exactly when S_{k-1} >= 0), ``stopping`` (not the first exit
    from (-A, B), or a decision inconsistent with S_T) and ``overshoot``
    (S_T beyond the boundary by more than C).
    """
    if c_bound is None:
        c_bound = increment_bound(pair).c
    report = {"increment": 0, "policy": 0, "stopping": 0, "overshoot": 0}
    outcomes = list(outcomes)
    if not outcomes or any(o.trajectory is None for o in outcomes):
        raise NoTrajectoriesError("monitor needs recorded trajectories")
    a, b = params.a, params.b
    for o in outcomes:
        traj = o.trajectory
        s_prev = 0.0
        for k, step in enumerate(traj, start=1):
            if abs(step.z) > c_bound + 1e-9:
                report["increment"] += 1
            if strategy.kind == "adaptive_two_point" and k >= 2:
                if step.povm_index != (0 if s_prev >= 0 else 1):
                    report["policy"] += 1
            if strategy.kind == "cyclic" and step.povm_index != strategy.block_index(k):
                report["policy"] += 1
            if k < len(traj) and not (-a < step.s < b):
                report["stopping"] += 1
            s_prev = step.s
        last = traj[-1].s if traj else 0.0
        if len(traj) != o.stopping_time or last != o.terminal_statistic:
            report["stopping"] += 1
        if o.decision == Decision.H0:
            report["stopping"] += int(last < b)
            report["overshoot"] += int(last > b + c_bound + 1e-9)
        elif o.decision == Decision.H1:
            report["stopping"] += int(last > -a)
            report["overshoot"] += int(last < -a - c_bound - 1e-9)
        else:
            report["stopping"] += int(not (-a < last < b))
    return report


@dataclass
class SweepRow:
    n: int
    a: float
    b: float
    estimate: BatchEstimate

    @property
    def slope_0(self):
        """log(1/beta_IS) / E0[T]."""
        e = self.estimate
        if not e.beta_hat_is or e.beta_hat_is.value <= 0:
            return float("nan")
        return float(np.log(1 / e.beta_hat_is.value) / e.mean_t0)

    @property
    def slope_1(self):
        """log(1/alpha_IS) / E1[T]."""
        e = self.estimate
        if not e.alpha_hat_is or e.alpha_hat_is.value <= 0:
            return float("nan")
        return float(np.log(1 / e.alpha_hat_is.value) / e.mean_t1)

    def csv_row(self):
        e = self.estimate

        def v(x, attr):
            return getattr(x, attr) if x is not None else float("nan")

        return [self.n, self.a, self.b, v(e.alpha_hat_is, "value"), v(e.alpha_hat_is, "se"),
                v(e.beta_hat_is, "value"), v(e.beta_hat_is, "se"), e.mean_t0, e.mean_t1,
                e.exceedance_0, e.exceedance_1, e.truncated_count]


def exponent_sweep(pair, strategy, n_values, tau, trials, seed=0, workers=1):
    """One batch per ``n`` with thresholds A_n, B_n from the strategy's exponent pair."""
    n_values = list(n_values)
    if n_values != sorted(n_values):
        raise ValueError("n_values must be ascending")
    rows = []
    for n in n_values:
        params = thresholds_for(n, tau, *strategy.rates)
        cfg = BatchConfig(trials=trials, seed=seed, n=n, tau=tau, workers=workers)
        rows.append(SweepRow(n, params.a, params.b, run_batch(pair, strategy, params, cfg)))
    return rows


def _fmt(x):
    return x if isinstance(x, (int, np.integer)) else f"{x:.12g}"


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([_fmt(x) for x in r.csv_row()])
    return buf.getvalue()


def trajectories_csv(outcomes):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial_id", "k", "povm_index", "outcome", "z_k", "s_k"])
    for i, o in enumerate(outcomes):
        for k, st in enumerate(o.trajectory or (), start=1):
            w.writerow([i, k, st.povm_index, st.outcome, f"{st.z:.17g}", f"{st.s:.17g}"])
    return buf.getvalue()


def batch_json_dict(estimate, config, params, pair_label=""):
    return {
        "version": __version__,
        "config": asdict(config),
        "pair": pair_label,
        "thresholds": {"A_n": params.a, "B_n": params.b, "t_max": params.t_max},
        "estimate": estimate.to_dict(),
    }
