"""Counter-based random numbers (Philox4x32-10), vectorised over numpy arrays.

Every uniform is a pure function of ``(seed, hypothesis, trial, step)``, so
trials can be simulated in any order, in any batch size and on any number
of workers with bit-identical results.
"""

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def philox4x32(counter, key, rounds=10):
    """Philox4x32 block function.

    ``counter`` is a sequence of four uint32-valued arrays (broadcastable),
    ``key`` a pair of uint32 values. Returns four uint64 arrays holding
    32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in counter)
    k0 = np.uint64(key[0]) & _MASK
    k1 = np.uint64(key[1]) & _MASK
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT, p0 & _MASK
        hi1, lo1 = p1 >> _SHIFT, p1 & _MASK
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _to_unit(hi, lo):
    """53-bit uniform in [0, 1) from two 32-bit words."""
    return ((hi >> np.uint64(5)).astype(np.float64) * 67108864.0
            + (lo >> np.uint64(6)).astype(np.float64)) / 9007199254740992.0


def split_seed(seed):
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return seed & 0xFFFFFFFF, seed >> 32


def step_uniforms(seed, hypothesis, trials, step):
    """Two independent uniforms per trial for sequential step ``step`` (1-based).

    Returns ``(u_outcome, u_coin)``; the coin is only consumed at step 1.
    """
    trials = np.asarray(trials, dtype=np.uint64)
    c0 = np.full(trials.shape, step, dtype=np.uint64)
    c1 = trials & _MASK
    c2 = trials >> _SHIFT
    c3 = np.full(trials.shape, hypothesis, dtype=np.uint64)
    w0, w1, w2, w3 = philox4x32((c0, c1, c2, c3), split_seed(seed))
    return _to_unit(w0, w1), _to_unit(w2, w3)


class TrialStream:
    """Random source of one trial: ``uniform(k)`` and ``coin()`` draws.

    Identical to the batched path in :func:`step_uniforms`.
    """

    def __init__(self, seed, hypothesis=0, trial=0):
        self.seed = seed
        self.hypothesis = hypothesis
        self.trial = trial

    def _draw(self, k):
        u, c = step_uniforms(self.seed, self.hypothesis, np.array([self.trial]), k)
        return float(u[0]), float(c[0])

    def uniform(self, k):
        return self._draw(k)[0]

    def coin(self):
        return self._draw(1)[1]


class FixedStream:
    """Scripted stream for tests: replays the given uniforms."""

    def __init__(self, uniforms, coin=0.25):
        self.uniforms = list(uniforms)
        self._coin = coin

    def uniform(self, k):
        return self.uniforms[(k - 1) % len(self.uniforms)]

    def coin(self):
        return self._coin
