"""Metric substrate: distance oracles, balls, doubling and measure checks."""

import numpy as np
import pytest

from fractal_lab import (Ball, InvalidInputError, SpaceSample, ball_points,
                         check_ahlfors_regularity, check_homogeneity,
                         estimate_doubling_constant)
from fractal_lab.generators import generate, parse_space_token

from oracles import scan_ball, weighted_ball_mass


# -- metric axioms ------------------------------------------------------------

@pytest.mark.parametrize("token", ["grid:1001", "cantor:8", "snowflake:0.5:grid:401"])
def test_metric_axioms_on_random_triples(token):
    space = generate(parse_space_token(token))
    rng = np.random.default_rng(12)
    idx = rng.integers(0, space.n, size=(10_000, 3))
    a, b, c = idx[:, 0], idx[:, 1], idx[:, 2]
    d_ab = space.pair_distances(a, b)
    d_ba = space.pair_distances(b, a)
    d_bc = space.pair_distances(b, c)
    d_ac = space.pair_distances(a, c)
    assert np.array_equal(d_ab, d_ba)
    assert np.all(d_ab[a != b] > 0)
    assert np.all(space.pair_distances(a, a) == 0.0)
    assert np.all(d_ac <= d_ab + d_bc + 1e-12)


def test_duplicate_points_rejected():
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="euclidean", coords=[[0.0], [0.0], [1.0]])


def test_table_validation():
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="table", table=[[0.0, 1.0], [2.0, 0.0]])   # asymmetric
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="table", table=[[0.5, 1.0], [1.0, 0.0]])   # diagonal
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="table", table=[[0.0, 0.0], [0.0, 0.0]])   # zero off-diag
    sp = SpaceSample(kind="table", table=[[0.0, 2.0], [2.0, 0.0]])
    assert sp.dist(0, 1) == 2.0


def test_weights_validation():
    coords = [[0.0], [1.0]]
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="euclidean", coords=coords, weights=[1.0])
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="euclidean", coords=coords, weights=[-1.0, 1.0])
    with pytest.raises(InvalidInputError):
        SpaceSample(kind="euclidean", coords=coords, weights=[0.0, 0.0])


# -- balls --------------------------------------------------------------------

def test_ball_points_interval_fixture(grid1001):
    # Exact-radius comparisons are float-sensitive by design, so the fixture
    # perturbs the radius; 199 points lie strictly inside (0.4, 0.6).
    members = ball_points(grid1001, Ball(500, 0.1 - 1e-9))
    assert members.size == 199
    assert members.tolist() == scan_ball(grid1001, 500, 0.1 - 1e-9)


def test_ball_points_agrees_with_scan_at_exact_radius(grid1001):
    members = ball_points(grid1001, Ball(500, 0.1))
    assert members.tolist() == scan_ball(grid1001, 500, 0.1)


def test_ball_radius_beyond_diameter_returns_everything(cantor8):
    members = ball_points(cantor8, Ball(0, cantor8.diameter() + 1.0))
    assert members.size == cantor8.n


def test_ball_on_singleton():
    sp = SpaceSample(kind="euclidean", coords=[[3.0]])
    assert ball_points(sp, Ball(0, 0.5)).tolist() == [0]


def test_ball_unknown_center(grid1001):
    with pytest.raises(InvalidInputError):
        ball_points(grid1001, Ball(10_000, 0.1))
    with pytest.raises(InvalidInputError):
        Ball(0, -1.0)


def test_ball_monotone_in_radius(cantor8):
    rng = np.random.default_rng(5)
    for _ in range(50):
        c = int(rng.integers(0, cantor8.n))
        r1, r2 = sorted(rng.uniform(0.01, 1.0, size=2))
        small = set(ball_points(cantor8, Ball(c, r1)).tolist())
        big = set(ball_points(cantor8, Ball(c, r2)).tolist())
        assert small <= big


def test_subset_diameter_matches_pairwise(cantor8):
    rng = np.random.default_rng(9)
    idx = rng.choice(cantor8.n, size=40, replace=False)
    exact = max(cantor8.dist(i, j) for i in idx for j in idx)
    assert cantor8.subset_diameter(idx) == pytest.approx(exact, abs=0)


# -- doubling constant ---------------------------------------------------------

def test_doubling_interval_at_most_four(grid1001):
    est = estimate_doubling_constant(grid1001, [0.1, 0.05, 0.02],
                                     grid1001.all_points()[::97])
    assert 1.0 <= est.constant <= 4.0
    assert est.max_cover_count == est.constant


def test_doubling_square_at_most_sixteen(grid2_100):
    est = estimate_doubling_constant(grid2_100, [0.1, 0.05],
                                     grid2_100.all_points()[::311])
    assert 1.0 <= est.constant <= 16.0


def test_doubling_singleton():
    sp = SpaceSample(kind="euclidean", coords=[[0.0]])
    est = estimate_doubling_constant(sp, [0.5], [0])
    assert est.constant == 1.0


def test_doubling_requires_scales_and_centers(grid1001):
    with pytest.raises(InvalidInputError):
        estimate_doubling_constant(grid1001, [], [0])
    with pytest.raises(InvalidInputError):
        estimate_doubling_constant(grid1001, [0.1], [])
    with pytest.raises(InvalidInputError):
        estimate_doubling_constant(grid1001, [-0.1], [0])


def test_doubling_reproducible(grid1001):
    args = ([0.1, 0.03], grid1001.all_points()[::211])
    a = estimate_doubling_constant(grid1001, *args)
    b = estimate_doubling_constant(grid1001, *args)
    assert a.constant == b.constant and a.scales_tested == b.scales_tested


# -- homogeneity / regularity ---------------------------------------------------

def test_homogeneity_uniform_square():
    sp = generate(parse_space_token("weighted:unit:0:grid2:100"))
    # scales of at least 10 grid steps (gap ~ 1/99)
    report = check_homogeneity(sp, 2.0, sp.all_points()[::997],
                               [(0.11, 0.33), (0.15, 0.30), (0.12, 0.48)])
    assert 0.0 < report.worst_constant <= 4.0
    assert not report.violations


def test_homogeneity_power_weight_at_origin():
    sp = generate(parse_space_token("weighted:power:1:grid:201:-1:1"))
    center = int(np.argmin(np.abs(sp.coords[:, 0])))
    # mass of B(0, r) under |x| dx is ~ r^2, so the Q=2 ratio constant is ~1
    report = check_homogeneity(sp, 2.0, [center], [(0.2, 0.4), (0.25, 0.5)])
    assert report.worst_constant == pytest.approx(1.0, abs=0.15)
    mass = weighted_ball_mass(sp.coords, sp.weights, sp.coords[center], 0.4)
    assert mass == pytest.approx(0.16, abs=0.02)


def test_homogeneity_equal_weights_ratio_is_count_ratio(grid1001):
    sp = grid1001.with_weights(np.full(grid1001.n, 0.25))
    report = check_homogeneity(sp, 1.0, [500], [(0.1, 0.2)])
    n1 = ball_points(sp, Ball(500, 0.1)).size
    n2 = ball_points(sp, Ball(500, 0.2)).size
    assert report.worst_constant == pytest.approx((n2 / n1) * 0.5, rel=1e-12)


def test_homogeneity_r1_equal_r2_rejected(grid1001):
    sp = grid1001.with_weights(np.ones(grid1001.n))
    with pytest.raises(InvalidInputError):
        check_homogeneity(sp, 1.0, [0], [(0.2, 0.2)])


def test_homogeneity_requires_weights(grid1001):
    with pytest.raises(InvalidInputError):
        check_homogeneity(grid1001, 1.0, [0], [(0.1, 0.2)])


def test_homogeneity_zero_mass_ball_is_diagnostic_not_crash():
    coords = np.asarray([[0.0], [0.5], [1.0]])
    sp = SpaceSample(kind="euclidean", coords=coords, weights=[0.0, 1.0, 1.0])
    report = check_homogeneity(sp, 1.0, [0], [(0.1, 0.6)])
    assert report.degenerate and report.degenerate[0]["center"] == 0


def test_ahlfors_interval_unit_weights():
    sp = generate(parse_space_token("weighted:unit:0:grid:1000"))
    report = check_ahlfors_regularity(sp, 1.0, sp.all_points()[::173],
                                      [0.1, 0.2, 0.3])
    assert 1.0 <= report.c_a_estimate <= 4.0
    assert not report.failed


def test_ahlfors_cantor_self_similar_weights():
    sp = generate(parse_space_token("weighted:unit:0:cantor:8"))
    q = np.log(2.0) / np.log(3.0)
    report = check_ahlfors_regularity(sp, q, sp.all_points()[::37],
                                      [3.0 ** -j for j in range(1, 6)])
    assert report.c_a_estimate <= 4.0


def test_ahlfors_flags_overlarge_exponent():
    sp = generate(parse_space_token("weighted:unit:0:grid:1000"))
    report = check_ahlfors_regularity(sp, 5.0, sp.all_points()[::173],
                                      [0.01, 0.05, 0.1], threshold=100.0)
    assert report.failed
    assert report.upper_constant > 100.0
