"""Achievable error-exponent regions and the qubit sum-rate curves.

Regions live in the (R0, R1) plane, in nats per sample. The adaptive region
is a rectangle; the non-adaptive region is the intersection of the
half-planes ``t0 R0 + t1 R1 <= g(t0, t1)`` with the nonnegative quadrant.
"""

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .divergences import (
    _rows_of,
    measured_relative_entropy,
    optimize_g,
    quantum_relative_entropy,
)
from .errors import DegenerateRegionError
from .optimize import OptimizerOptions
from .states import qubit_family

EDGE_TOL = 1e-12


@dataclass
class RegionPolygon:
    kind: str
    vertices: np.ndarray  # (k, 2), counterclockwise, starting at the origin
    supports: list = None  # (t0, t1, g) triples

    @property
    def area(self):
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, point, tol=1e-6):
        """True when ``point`` lies inside the polygon up to ``tol``."""
        v = self.vertices
        p = np.asarray(point, dtype=float)
        if len(v) == 1:
            return bool(np.linalg.norm(p - v[0]) <= tol)
        if np.any(p < -tol):
            return False
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            edge = b - a
            length = np.linalg.norm(edge)
            if length < EDGE_TOL:
                continue
            cross = edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])
            if cross / length < -tol:
                return False
        return True

    def support_margin(self, point):
        """Largest amount by which ``point`` violates a stored support."""
        if not self.supports:
            return 0.0
        p = np.asarray(point, dtype=float)
        return max(t0 * p[0] + t1 * p[1] - g for t0, t1, g in self.supports)


@dataclass(frozen=True)
class BlockRates:
    l: int
    rate_01: float
    rate_10: float
    ceiling_01: float
    ceiling_10: float


def _rectangle(r0, r1):
    pts = [(0.0, 0.0), (r0, 0.0), (r0, r1), (0.0, r1)]
    return _clean(np.array(pts, dtype=float))


def _clean(v):
    """Drop repeated and collinear vertices, keeping counterclockwise order."""
    out = []
    for p in v:
        if not out or np.linalg.norm(p - out[-1]) > EDGE_TOL:
            out.append(p)
    while len(out) > 1 and np.linalg.norm(out[0] - out[-1]) <= EDGE_TOL:
        out.pop()
    changed = True
    while changed and len(out) > 2:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if abs(cross) <= EDGE_TOL * max(1.0, np.linalg.norm(c - a)):
                out.pop(i)
                changed = True
                break
    return np.array(out, dtype=float).reshape(-1, 2)


def clip_halfplane(vertices, t0, t1, g):
    """Sutherland-Hodgman clip of a convex polygon by ``t0 x + t1 y <= g``."""
    out = []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        fp = t0 * p[0] + t1 * p[1] - g
        fq = t0 * q[0] + t1 * q[1] - g
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append(p + s * (q - p))
    if not out:
        return np.zeros((0, 2))
    return _clean(np.array(out))


def adaptive_region(pair, opts=None):
    """Rectangle with corner (D_M(rho1||rho0), D_M(rho0||rho1))."""
    r0 = measured_relative_entropy(pair.swapped(), opts).value
    r1 = measured_relative_entropy(pair, opts).value
    return RegionPolygon("adaptive_rectangle", _rectangle(r0, r1))


def hull_angles(n_angles):
    """Support directions as exact fractions of pi/2: ``i / n_angles`` for i = 0..n_angles.

    Endpoints 0 and 1 are the axis-aligned supports. Grids whose sizes divide
    each other are nested, so refining never drops a direction.
    """
    return [Fraction(i, n_angles) for i in range(n_angles + 1)]


def _angle_seed(seed, frac):
    state = np.random.SeedSequence([seed, frac.numerator, frac.denominator]).generate_state(1)
    return int(state[0])


def nonadaptive_region(pair, n_angles=64, opts=None):
    """Intersection of the supporting half-planes of the non-adaptive region.

    ``g(cos a, sin a)`` is evaluated at ``n_angles - 1`` interior directions
    plus both axes. The optimizer seed at each direction depends only on the
    direction, so grids of different sizes agree where they overlap.
    """
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    opts = opts or OptimizerOptions()
    res01 = measured_relative_entropy(pair, opts)
    res10 = measured_relative_entropy(pair.swapped(), opts)
    warm = [_rows_of(res01.povm), _rows_of(res10.povm)]
    supports = []
    for frac in hull_angles(n_angles):
        ang = float(frac) * np.pi / 2
        t0 = 1.0 if frac == 0 else float(np.cos(ang))
        t1 = 1.0 if frac == 1 else (0.0 if frac == 0 else float(np.sin(ang)))
        if frac == 1:
            t0 = 0.0
        o = OptimizerOptions(opts.restarts, opts.tol, opts.window, opts.max_iter,
                             _angle_seed(opts.seed, frac), opts.workers)
        g, _, _ = optimize_g(pair, t0, t1, o, warm_starts=warm)
        supports.append((t0, t1, g))
    gs = np.array([s[2] for s in supports])
    if np.all(gs < 1e-9):
        if np.linalg.norm(pair.rho0.matrix - pair.rho1.matrix) < 1e-12:
            return RegionPolygon("nonadaptive_hull", np.zeros((1, 2)), supports)
        raise DegenerateRegionError("all support values vanish")
    poly = _rectangle(supports[0][2], supports[-1][2])
    for t0, t1, g in supports[1:-1]:
        poly = clip_halfplane(poly, t0, t1, g)
    return RegionPolygon("nonadaptive_hull", poly, supports)


def block_rates(pair, l, opts=None):
    """Per-copy measured relative entropies of the l-fold tensor powers.

    Calls on tensor powers use twice the restarts, and the l-fold product of
    the single-copy optimal PVMs is a warm start.
    """
    opts = opts or OptimizerOptions()
    ceiling_01 = quantum_relative_entropy(pair)
    ceiling_10 = quantum_relative_entropy(pair.swapped())
    if l == 1:
        return BlockRates(1, measured_relative_entropy(pair, opts).value,
                          measured_relative_entropy(pair.swapped(), opts).value,
                          ceiling_01, ceiling_10)
    big = pair.tensor_power(l)
    rates = []
    for single, multi in ((pair, big), (pair.swapped(), big.swapped())):
        base = _rows_of(measured_relative_entropy(single, opts).povm)
        rows = base
        for _ in range(l - 1):
            rows = np.kron(rows, base)
        res = measured_relative_entropy(multi, opts.scaled(2), warm_starts=[rows])
        rates.append(res.value / l)
    return BlockRates(l, rates[0], rates[1], ceiling_01, ceiling_10)


@dataclass(frozen=True)
class SumRatePoint:
    theta: float
    f: float
    g: float


def sumrate_point(r0, r1, theta, opts=None):
    """f = D_M(rho1||rho0) + D_M(rho0||rho1) and g = g(1, 1) for one qubit pair."""
    opts = opts or OptimizerOptions()
    pair = qubit_family(r0, r1, theta)
    res01 = measured_relative_entropy(pair, opts)
    res10 = measured_relative_entropy(pair.swapped(), opts)
    warm = [_rows_of(res01.povm), _rows_of(res10.povm)]
    g, _, _ = optimize_g(pair, 1.0, 1.0, opts, warm_starts=warm)
    return SumRatePoint(float(theta), res01.value + res10.value, g)


def sumrate_sweep(r0, r1, theta_grid, opts=None):
    return [sumrate_point(r0, r1, th, opts) for th in theta_grid]


# CSV writers --------------------------------------------------------------------

def _fmt(x):
    return f"{x:.12g}"


def _write(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def region_csv(*regions):
    rows = [[reg.kind, i, _fmt(v[0]), _fmt(v[1])]
            for reg in regions for i, v in enumerate(reg.vertices)]
    return _write(rows, ["kind", "vertex_index", "r0", "r1"])


def supports_csv(region):
    return _write([[_fmt(t0), _fmt(t1), _fmt(g)] for t0, t1, g in region.supports or ()],
                  ["t0", "t1", "g"])


def sumrate_csv(points):
    return _write([[_fmt(p.theta), _fmt(p.f), _fmt(p.g)] for p in points], ["theta", "f", "g"])
