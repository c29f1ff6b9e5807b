import numpy as np
import pytest

from sqht import StatePair
from sqht.regions import (
    adaptive_region,
    block_rates,
    clip_halfplane,
    hull_angles,
    nonadaptive_region,
    region_csv,
    sumrate_csv,
    sumrate_point,
    supports_csv,
)

KL_DIAG = 0.6 * np.log(2) + 0.4 * np.log(4 / 7)
KL_DIAG_REV = 0.3 * np.log(0.5) + 0.7 * np.log(7 / 4)
QUBIT_DM = 1.72347196182902


def test_adaptive_rectangle(diag_pair, qubit_pair, fast_opts):
    rect = adaptive_region(diag_pair, fast_opts)
    assert len(rect.vertices) == 4
    assert np.allclose(rect.vertices[2], [KL_DIAG_REV, KL_DIAG], atol=1e-6)
    rect = adaptive_region(qubit_pair, fast_opts)
    assert np.allclose(rect.vertices[2], [QUBIT_DM, QUBIT_DM], atol=1e-9)


def test_equal_states_collapse(diag_pair, fast_opts):
    same = StatePair(diag_pair.rho0, diag_pair.rho0)
    assert np.allclose(adaptive_region(same, fast_opts).vertices, 0)
    hull = nonadaptive_region(same, 8, fast_opts)
    assert hull.vertices.shape == (1, 2) and np.allclose(hull.vertices, 0)


def test_commuting_hull_is_rectangle(diag_pair, fast_opts):
    hull = nonadaptive_region(diag_pair, 8, fast_opts)
    rect = adaptive_region(diag_pair, fast_opts)
    assert hull.area == pytest.approx(rect.area, abs=1e-6)
    assert hull.support_margin(rect.vertices[2]) < 1e-6


def test_qubit_hull_strictly_inside(qubit_pair, fast_opts):
    hull = nonadaptive_region(qubit_pair, 16, fast_opts)
    rect = adaptive_region(qubit_pair, fast_opts)
    assert all(rect.contains(v, tol=1e-9) for v in hull.vertices)
    assert hull.support_margin(rect.vertices[2]) > 0.1
    assert hull.area < rect.area
    # convex and counterclockwise
    v = hull.vertices
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    assert np.all(cross >= -1e-12)


def test_angle_grid_nested():
    assert set(hull_angles(16)) <= set(hull_angles(64))
    with pytest.raises(ValueError):
        nonadaptive_region(None, 4)


def test_clip_halfplane():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    tri = clip_halfplane(sq, 1, 1, 1)
    assert len(tri) == 3
    assert np.allclose(clip_halfplane(sq, 1, 1, 5), sq)


def test_block_rates(diag_pair, fast_opts):
    one = block_rates(diag_pair, 1, fast_opts)
    assert one.rate_01 == pytest.approx(KL_DIAG, abs=1e-6)
    two = block_rates(diag_pair, 2, fast_opts)
    assert two.rate_01 == pytest.approx(KL_DIAG, abs=1e-6)
    assert two.rate_10 == pytest.approx(KL_DIAG_REV, abs=1e-6)


def test_sumrate_small_theta(fast_opts):
    p = sumrate_point(0.98, 0.98, 1e-3, fast_opts)
    assert 0 <= p.g <= p.f + 1e-9
    assert p.f < 1e-5


def test_csv_writers(qubit_pair, fast_opts):
    rect = adaptive_region(qubit_pair, fast_opts)
    lines = region_csv(rect).splitlines()
    assert lines[0] == "kind,vertex_index,r0,r1" and len(lines) == 5
    assert supports_csv(rect).splitlines() == ["t0,t1,g"]
    p = sumrate_point(0.98, 0.98, 1.57, fast_opts)
    assert sumrate_csv([p]).splitlines()[1].startswith("1.57,3.44694392366,2.53341297783")
