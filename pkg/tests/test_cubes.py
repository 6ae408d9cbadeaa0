"""Dyadic cube systems: nets, construction, verification, counting."""

import copy

import numpy as np
import pytest

from fractal_lab import (CubeParams, InvalidInputError, SpaceSample,
                         ball_points, build_net, build_system,
                         cubes_intersecting, verify_system)
from fractal_lab.greedy import farthest_first
from fractal_lab.spaces import Ball


def test_params_validation():
    CubeParams()                                   # defaults: 12*2/24 = 1 <= 1
    CubeParams(delta=1 / 12, c0=1.0, C0=1.0, k_max=0)
    with pytest.raises(InvalidInputError):
        CubeParams(delta=0.0417, c0=1.0, C0=2.0)   # 12*2*0.0417 > 1
    with pytest.raises(InvalidInputError):
        CubeParams(delta=0.0, c0=1.0, C0=1.0)
    with pytest.raises(InvalidInputError):
        CubeParams(delta=1 / 24, c0=2.0, C0=1.0)   # c0 > C0
    with pytest.raises(InvalidInputError):
        CubeParams(delta=1 / 24, c0=1.0, C0=2.0, k_max=-1)


def test_net_singleton():
    sp = SpaceSample(kind="euclidean", coords=[[7.0]])
    params = CubeParams(delta=1 / 24, c0=1.0, C0=2.0, k_max=1)
    assert build_net(sp, 0, params).tolist() == [0]
    assert build_net(sp, 1, params).tolist() == [0]


def test_net_interval_quarter_separation(grid1001):
    # c0 * delta^0 = 0.25 with a valid parameter set (12 * 0.25 / 12 = 0.25).
    params = CubeParams(delta=1 / 12, c0=0.25, C0=0.25, k_max=0)
    net = build_net(grid1001, 0, params)
    assert net.size == 5
    assert sorted(grid1001.coords[net, 0].tolist()) == [0.0, 0.25, 0.5, 0.75, 1.0]


@pytest.mark.parametrize("k", [0, 1, 2])
def test_net_guarantees(cantor8, acceptance_params, k):
    net = build_net(cantor8, k, acceptance_params)
    sep = acceptance_params.separation(k)
    gaps = cantor8.pairwise(net, net)
    iu = np.triu_indices(net.size, k=1)
    assert np.all(gaps[iu] >= sep)                          # separation
    nearest = cantor8.pairwise(net, cantor8.all_points()).min(axis=0)
    assert np.all(nearest < acceptance_params.C0 * acceptance_params.delta ** k)


def test_net_determinism(grid1000, acceptance_params):
    a = build_net(grid1000, 1, acceptance_params)
    b = build_net(grid1000, 1, acceptance_params)
    assert np.array_equal(a, b)


def test_build_singleton_system():
    sp = SpaceSample(kind="euclidean", coords=[[0.0]])
    system = build_system(sp, CubeParams(k_max=2))
    for level in system.levels:
        assert len(level) == 1 and level[0].members.tolist() == [0]
    assert verify_system(system, sp) == []


def test_two_points_one_cube_when_separation_exceeds_gap():
    sp = SpaceSample(kind="euclidean", coords=[[0.0], [1.0]])
    params = CubeParams(delta=1 / 12, c0=2.0, C0=2.0, k_max=0)
    system = build_system(sp, params)
    assert len(system.levels[0]) == 1
    cube = system.levels[0][0]
    assert cube.members.tolist() == [0, 1]
    assert sp.dist(cube.center, 1) < params.outer_radius(0)


@pytest.mark.parametrize("fixture", ["system_grid1000", "system_cantor8"])
def test_verify_reports_nothing_on_built_systems(fixture, request):
    system = request.getfixturevalue(fixture)
    assert verify_system(system, system.space) == []


def test_verify_detects_duplicated_point(system_cantor8, cantor8):
    corrupted = copy.deepcopy(system_cantor8)
    level = corrupted.levels[2]
    victim = int(level[0].members[0])
    level[1].members = np.append(level[1].members, victim)
    violations = verify_system(corrupted, cantor8)
    assert any(v["property"] == "ii" for v in violations)


def test_verify_detects_moved_point(system_cantor8, cantor8):
    corrupted = copy.deepcopy(system_cantor8)
    level = corrupted.levels[1]
    donor, receiver = level[0], level[1]
    victim = int(donor.members[0])
    donor.members = donor.members[1:]
    receiver.members = np.sort(np.append(receiver.members, victim))
    violations = verify_system(corrupted, cantor8)
    assert violations
    assert {v["property"] for v in violations} & {"i", "iii-inner"}


def test_inner_balls_disjoint_within_levels(system_grid1000):
    space = system_grid1000.space
    for k, level in enumerate(system_grid1000.levels):
        radius = system_grid1000.params.inner_radius(k)
        owners = np.zeros(space.n, dtype=np.int64)
        for cube in level:
            hits = space.dists_from(cube.center) < radius
            owners[hits] += 1
        assert owners.max() <= 1


def test_fanout_bounded_by_packing_witness(system_cantor8):
    # A maximal (s/2)-separated subset of the parent's outer ball dominates
    # the cardinality of any s-separated family there, children included.
    system = system_cantor8
    space = system.space
    params = system.params
    for k in range(params.k_max):
        child_sep = params.separation(k + 1)
        for cube in system.levels[k]:
            pool = ball_points(space, Ball(cube.center, params.outer_radius(k)))
            witness = farthest_first(space, pool, child_sep / 2.0)
            assert len(cube.children) <= witness.size


def test_max_children_consistent(system_grid1000):
    fan = max(len(c.children) for level in system_grid1000.levels for c in level)
    assert system_grid1000.max_children == fan


def test_build_determinism(cantor8, acceptance_params):
    a = build_system(cantor8, acceptance_params)
    b = build_system(cantor8, acceptance_params)
    for la, lb in zip(a.levels, b.levels):
        assert len(la) == len(lb)
        for ca, cb in zip(la, lb):
            assert ca.center == cb.center
            assert np.array_equal(ca.members, cb.members)
            assert ca.parent == cb.parent


def test_cubes_intersecting_whole_and_empty(system_grid1000, grid1000):
    for k in range(system_grid1000.n_levels):
        count, ids = cubes_intersecting(system_grid1000, k, grid1000.all_points())
        assert count == len(system_grid1000.levels[k]) == ids.size
    count, ids = cubes_intersecting(system_grid1000, 1, [])
    assert count == 0 and ids.size == 0


def test_cubes_intersecting_singleton_partition(system_cantor8):
    for k in range(system_cantor8.n_levels):
        count, _ = cubes_intersecting(system_cantor8, k, [17])
        assert count == 1


def test_cubes_intersecting_validates(system_cantor8):
    with pytest.raises(InvalidInputError):
        cubes_intersecting(system_cantor8, 99, [0])
    with pytest.raises(InvalidInputError):
        cubes_intersecting(system_cantor8, 0, [10_000])


def test_cantor_counts_scale_like_the_triadic_structure(cantor8):
    # delta = 1/27 jumps three triadic levels at a time: counts grow ~ 8x.
    params = CubeParams(delta=1 / 27, c0=1.0, C0=2.0, k_max=2)
    system = build_system(cantor8, params)
    counts = [cubes_intersecting(system, k, cantor8.all_points())[0]
              for k in range(3)]
    assert counts[0] < counts[1] < counts[2]
    assert 4.0 <= counts[1] / counts[0] <= 16.0
    assert 4.0 <= counts[2] / counts[1] <= 16.0


def test_every_intersected_cube_has_an_intersected_child(system_cantor8, cantor8):
    rng = np.random.default_rng(3)
    e_points = rng.choice(cantor8.n, size=60, replace=False)
    in_e = np.zeros(cantor8.n, dtype=bool)
    in_e[e_points] = True
    system = system_cantor8
    for k in range(system.params.k_max):
        _, hit = cubes_intersecting(system, k, e_points)
        for j in hit.tolist():
            children = system.levels[k][j].children
            assert any(in_e[system.levels[k + 1][c].members].any()
                       for c in children)


def test_export_schema(system_cantor8, cantor8):
    doc = system_cantor8.to_dict()
    assert set(doc) == {"params", "levels", "max_children"}
    assert [lvl["k"] for lvl in doc["levels"]] == list(range(4))
    level1 = doc["levels"][1]["cubes"]
    assert all(set(c) == {"center", "members", "parent"} for c in level1)
    members = sorted(m for cube in level1 for m in cube["members"])
    assert members == list(range(cantor8.n))
    assert all(c["parent"] is None for c in doc["levels"][0]["cubes"])
