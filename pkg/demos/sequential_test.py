"""Sequential test on the qubit example with the adaptive two-point strategy.

Thresholds scale with n, so the error probabilities fall like
exp(-n (D_M - tau)) while the mean stopping time stays below n. The errors
are far too small to observe directly; the change-of-measure estimators
recover them from trials that were run under the other hypothesis.
"""

import numpy as np

from sqht import OptimizerOptions, build_adaptive_strategy, exponent_sweep, qubit_family

pair = qubit_family(0.98, 0.98, 1.57)
strategy = build_adaptive_strategy(pair, OptimizerOptions(seed=0))
r0, r1 = strategy.rates
tau = 0.1 * min(strategy.rates)

rows = exponent_sweep(pair, strategy, [10, 20, 40, 80], tau, trials=50_000, seed=1)
print(f"target exponents R0={r0:.4f} R1={r1:.4f}, tau={tau:.4f}")
print(f"{'n':>4} {'A_n':>8} {'alpha_IS':>11} {'e^-A_n':>11} {'E0[T]':>7} {'slope0':>7} {'P(T>n)':>7}")
for r in rows:
    e = r.estimate
    print(f"{r.n:>4} {r.a:8.2f} {e.alpha_hat_is.value:11.3e} {np.exp(-r.a):11.3e} "
          f"{e.mean_t0:7.2f} {r.slope_0:7.4f} {e.exceedance_0:7.3f}")
print("monitor violations:", sum(sum(r.estimate.violations.values()) for r in rows))
