import numpy as np
import pytest

from sqht import (
    BatchConfig,
    Decision,
    OptimizerOptions,
    Povm,
    StatePair,
    Strategy,
    build_adaptive_strategy,
    exponent_sweep,
    run_batch,
    thresholds_for,
)
from sqht.engine import SqprtParams, Step, TrialOutcome
from sqht.errors import EmptyInputError, NoTrajectoriesError, TruncatedPresentError
from sqht.montecarlo import (
    SWEEP_HEADER,
    batch_json_dict,
    importance_estimate,
    monitor_invariants,
    sweep_csv,
    wilson_interval,
)

# frozen from the first validated run (seed 42, 1e5 trials per hypothesis)
REG_ALPHA_IS = 0.0037419583365649193
REG_BETA_IS = 0.0024923474019935203
REG_MEAN_T0 = 31.01807


@pytest.fixture(scope="module")
def fixed_diag(diag_pair):
    return Strategy.fixed(Povm.computational(2), diag_pair)


def test_single_trial_batch(diag_pair, fixed_diag):
    params = thresholds_for(5, 0.05, *fixed_diag.rates)
    est = run_batch(diag_pair, fixed_diag, params, BatchConfig(trials=1, seed=3, n=5, tau=0.05))
    assert est.alpha_hat.se == 0 and est.beta_hat.se == 0
    assert est.alpha_hat.value in (0.0, 1.0)
    assert est.mean_t0 == int(est.mean_t0)


def test_degenerate_pair_all_truncated(diag_pair):
    same = StatePair(diag_pair.rho0, diag_pair.rho0)
    s = Strategy.fixed(Povm.computational(2))
    est = run_batch(same, s, SqprtParams(1.0, 1.0, t_max=50), BatchConfig(trials=20, seed=0))
    assert est.truncated_count == 40
    assert not est.usable
    assert est.alpha_hat_is is None and est.beta_hat_is is None


def test_regression_fixture(diag_pair, fixed_diag):
    params = thresholds_for(40, 0.05, *fixed_diag.rates)
    est = run_batch(diag_pair, fixed_diag, params, BatchConfig(trials=100_000, seed=42, n=40, tau=0.05))
    a, b = est.alpha_hat_is, est.beta_hat_is
    assert a.value <= np.exp(-params.a) * (1 + 3 * a.rel_se())
    assert b.value <= np.exp(-params.b) * (1 + 3 * b.rel_se())
    assert a.value == pytest.approx(REG_ALPHA_IS, rel=1e-12)
    assert b.value == pytest.approx(REG_BETA_IS, rel=1e-12)
    assert est.mean_t0 == REG_MEAN_T0
    assert sum(est.violations.values()) == 0
    # direct and change-of-measure estimates of the same error agree
    for direct, is_ in ((est.alpha_hat, a), (est.beta_hat, b)):
        assert abs(direct.value - is_.value) <= 3 * np.hypot(direct.se, is_.se)


def test_workers_do_not_change_result(diag_pair, fixed_diag):
    params = thresholds_for(20, 0.05, *fixed_diag.rates)
    one = run_batch(diag_pair, fixed_diag, params, BatchConfig(trials=20_000, seed=1, n=20, tau=0.05))
    many = run_batch(diag_pair, fixed_diag, params,
                     BatchConfig(trials=20_000, seed=1, n=20, tau=0.05, workers=4))
    assert one.to_dict() == many.to_dict()


def _outcome(decision, s_t):
    return TrialOutcome(1, Decision(decision), s_t, False, [Step(0, "0", s_t, s_t)])


def test_importance_estimate_edges():
    assert importance_estimate([_outcome(1, -3.0)] * 5, under=0).value == 0
    assert importance_estimate([_outcome(0, 2.5)], under=0).value == pytest.approx(np.exp(-2.5))
    with pytest.raises(EmptyInputError):
        importance_estimate([], under=0)
    with pytest.raises(TruncatedPresentError):
        importance_estimate([TrialOutcome(9, Decision.TRUNCATED, 0.0, True)], under=0)


def test_is_terms_never_exceed_threshold_bound(diag_pair, fixed_diag):
    params = thresholds_for(10, 0.05, *fixed_diag.rates)
    est = run_batch(diag_pair, fixed_diag, params,
                    BatchConfig(trials=3000, seed=2, n=10, tau=0.05, record_trajectories=True))
    w = [np.exp(-o.terminal_statistic) for o in est.outcomes[0] if o.decision == Decision.H0]
    assert max(w) <= np.exp(-params.b)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


@pytest.fixture(scope="module")
def recorded(qubit_pair):
    s = build_adaptive_strategy(qubit_pair, OptimizerOptions(restarts=4))
    params = thresholds_for(5, 0.2, *s.rates)
    est = run_batch(qubit_pair, s, params,
                    BatchConfig(trials=500, seed=4, n=5, tau=0.2, record_trajectories=True))
    return s, params, est


def test_monitor_clean(qubit_pair, recorded):
    s, params, est = recorded
    for outs in est.outcomes.values():
        assert monitor_invariants(outs, qubit_pair, s, params) == {
            "increment": 0, "policy": 0, "stopping": 0, "overshoot": 0}


def test_monitor_detects_edited_statistic(qubit_pair, recorded):
    s, params, est = recorded
    o = est.outcomes[0][0]
    bad = list(o.trajectory)
    bad[0] = bad[0]._replace(s=params.b + 1.0)
    corrupt = TrialOutcome(o.stopping_time, o.decision, o.terminal_statistic, o.hit_cap, bad)
    if len(bad) == 1:
        corrupt = TrialOutcome(o.stopping_time, o.decision, o.terminal_statistic + 1.0, False, bad)
    assert monitor_invariants([corrupt], qubit_pair, s, params)["stopping"] >= 1


def test_monitor_detects_wrong_bound(qubit_pair, recorded, diag_pair):
    s, params, est = recorded
    from sqht.divergences import increment_bound
    wrong_c = increment_bound(diag_pair).c
    assert monitor_invariants(est.outcomes[1], qubit_pair, s, params, c_bound=wrong_c)["increment"] > 0


def test_monitor_detects_policy_breach(qubit_pair, recorded):
    s, params, est = recorded
    o = next(o for o in est.outcomes[0] if o.stopping_time >= 3)
    bad = list(o.trajectory)
    bad[1] = bad[1]._replace(povm_index=1 - bad[1].povm_index)
    corrupt = TrialOutcome(o.stopping_time, o.decision, o.terminal_statistic, o.hit_cap, bad)
    assert monitor_invariants([corrupt], qubit_pair, s, params)["policy"] == 1


def test_monitor_needs_trajectories(qubit_pair, recorded):
    s, params, _ = recorded
    with pytest.raises(NoTrajectoriesError):
        monitor_invariants([TrialOutcome(1, Decision.H0, 9.0, False)], qubit_pair, s, params)


def test_sweep_single_row_matches_batch(diag_pair, fixed_diag):
    rows = exponent_sweep(diag_pair, fixed_diag, [15], 0.05, 5000, seed=8)
    params = thresholds_for(15, 0.05, *fixed_diag.rates)
    direct = run_batch(diag_pair, fixed_diag, params, BatchConfig(trials=5000, seed=8, n=15, tau=0.05))
    assert rows[0].estimate.to_dict() == direct.to_dict()
    text = sweep_csv(rows)
    assert text.splitlines()[0].split(",") == SWEEP_HEADER
    assert len(text.splitlines()) == 2
    doc = batch_json_dict(direct, BatchConfig(trials=5000), params)
    assert doc["thresholds"]["A_n"] == params.a


def test_commuting_sweep_slope(diag_pair, fixed_diag):
    kl01 = fixed_diag.rates[1]
    rows = exponent_sweep(diag_pair, fixed_diag, [20, 40, 80], 0.02, 20_000, seed=5)
    assert abs(rows[-1].slope_0 - kl01) / kl01 < 0.15
    assert abs(rows[-1].slope_1 - fixed_diag.rates[0]) / fixed_diag.rates[0] < 0.15


def test_sweep_rejects_unsorted(diag_pair, fixed_diag):
    with pytest.raises(ValueError):
        exponent_sweep(diag_pair, fixed_diag, [40, 20], 0.05, 10)
