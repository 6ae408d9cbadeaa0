"""Dyadic cube systems on doubling metric samples.

Builds a nested partition hierarchy at scales delta^k, k = 0..k_max:

1. At each level a maximal (c0 * delta^k)-separated net is chosen by greedy
   farthest-point traversal seeded at the lowest point index. Maximality puts
   every point within c0 * delta^k <= C0 * delta^k of some center, so the net
   satisfies both the separation and covering requirements.
2. Every point is assigned to its nearest net center (ties to the lowest
   center position).
3. A top-down repair pass walks levels 1..k_max and moves each child cube
   wholesale into the cube containing its center, realigning the moved
   points' coarser assignments along the new ancestor chain. The margin
   enforced by 12 * C0 * delta <= c0 keeps repairs rare and keeps centers
   inside their own cubes, so the pass cannot orphan a cube.

The resulting system satisfies, on the sample: exact partition per level,
nested-or-disjoint cubes across levels, and the inner/outer ball sandwich
B(z, c0 delta^k / 3) \\subseteq Q \\subseteq B(z, 2 C0 delta^k). ``verify_system``
re-checks all of it exhaustively and returns the violations it finds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, InvalidInputError
from .greedy import farthest_first
from .spaces import SpaceSample

#: Defaults satisfy 12 * C0 * delta <= c0 with slack and keep few levels per
#: desk-scale resolution.
DEFAULT_DELTA = 1.0 / 24.0
DEFAULT_C0_SMALL = 1.0
DEFAULT_C0_BIG = 2.0

# Tolerance absorbing float roundoff in 12*C0*delta <= c0 (e.g. delta = 1/24).
_CONSTRAINT_SLACK = 1e-12


@dataclass(frozen=True)
class CubeParams:
    """Scale ratio and ball constants for a dyadic cube system.

    Requires 12 * C0 * delta <= c0, 0 < c0 <= C0 and delta in (0, 1); the
    constraint is what makes the nested construction work, so it is enforced
    here rather than downstream.
    """

    delta: float = DEFAULT_DELTA
    c0: float = DEFAULT_C0_SMALL
    C0: float = DEFAULT_C0_BIG
    k_max: int = 3

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise InvalidInputError("delta must lie in (0, 1)")
        if not (0.0 < self.c0 <= self.C0):
            raise InvalidInputError("constants must satisfy 0 < c0 <= C0")
        if not (isinstance(self.k_max, (int, np.integer)) and self.k_max >= 0):
            raise InvalidInputError("k_max must be an integer >= 0")
        if 12.0 * self.C0 * self.delta > self.c0 * (1.0 + _CONSTRAINT_SLACK):
            raise InvalidInputError(
                f"need 12*C0*delta <= c0; got {12.0 * self.C0 * self.delta} > {self.c0}")

    def separation(self, k: int) -> float:
        return self.c0 * self.delta ** k

    def inner_radius(self, k: int) -> float:
        return self.c0 * self.delta ** k / 3.0

    def outer_radius(self, k: int) -> float:
        return 2.0 * self.C0 * self.delta ** k

    def to_dict(self) -> dict:
        return {"delta": self.delta, "c0": self.c0, "C0": self.C0, "k_max": self.k_max}


@dataclass
class Cube:
    """One cube: a center point, its member points, and hierarchy links."""

    level: int
    index: int
    center: int
    members: np.ndarray
    parent: int | None = None
    children: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.members.size)


class DyadicSystem:
    """A built cube hierarchy over a space sample."""

    def __init__(self, space: SpaceSample, params: CubeParams,
                 nets: list, assignments: list, levels: list):
        self.space = space
        self.params = params
        self.nets = nets                # per level: array of center point indices
        self.assignments = assignments  # per level: point index -> cube index
        self.levels = levels            # per level: list[Cube]
        self.max_children = max(
            (len(c.children) for level in levels for c in level), default=0)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def check_level(self, k) -> int:
        k = int(k)
        if not 0 <= k <= self.params.k_max:
            raise InvalidInputError(f"level {k} outside 0..{self.params.k_max}")
        return k

    def cubes(self, k: int) -> list:
        return self.levels[self.check_level(k)]

    def assignment(self, k: int) -> np.ndarray:
        return self.assignments[self.check_level(k)]

    def to_dict(self) -> dict:
        ids = self.space.ids
        out_levels = []
        for k, level in enumerate(self.levels):
            cubes = []
            for cube in level:
                parent_id = None
                if cube.parent is not None:
                    parent_id = ids[self.levels[k - 1][cube.parent].center]
                cubes.append({
                    "center": ids[cube.center],
                    "members": [ids[m] for m in cube.members.tolist()],
                    "parent": parent_id,
                })
            out_levels.append({"k": k, "cubes": cubes})
        return {"params": self.params.to_dict(), "levels": out_levels,
                "max_children": self.max_children}


def build_net(space: SpaceSample, k: int, params: CubeParams) -> np.ndarray:
    """Maximal (c0 * delta^k)-separated net by farthest-point traversal.

    Centers are pairwise >= c0 * delta^k apart and every sample point lies
    within < c0 * delta^k <= C0 * delta^k of some center.
    """
    if space.n == 0:
        raise InvalidInputError("space must be nonempty")
    k = int(k)
    if k < 0:
        raise InvalidInputError("levels are non-negative")
    return farthest_first(space, space.all_points(), params.separation(k))


def _nearest_center(space: SpaceSample, centers: np.ndarray):
    """Nearest-center assignment with ties to the lowest center position."""
    n = space.n
    if centers.size == n and np.array_equal(centers, space.all_points()):
        return np.arange(n, dtype=np.intp), np.zeros(n)
    best_d = np.full(n, np.inf)
    best_i = np.zeros(n, dtype=np.intp)
    block = max(1, 4_000_000 // max(1, n))
    for start in range(0, centers.size, block):
        rows = space.pairwise(centers[start:start + block])
        local = np.argmin(rows, axis=0)          # first minimum: lowest position
        local_d = rows[local, np.arange(n)]
        better = local_d < best_d                # strict: earlier blocks win ties
        best_d[better] = local_d[better]
        best_i[better] = local[better] + start
    return best_i, best_d


def build_system(space: SpaceSample, params: CubeParams) -> DyadicSystem:
    """Construct the full cube hierarchy for levels 0..k_max."""
    n = space.n
    if n == 0:
        raise InvalidInputError("space must be nonempty")
    nets = [build_net(space, k, params) for k in range(params.k_max + 1)]
    assignments = [_nearest_center(space, net)[0] for net in nets]

    # Top-down repair: move each child cube wholesale into the cube holding
    # its center, then realign the moved points' coarser levels along the new
    # ancestor chain. Levels 0..k-1 stay mutually consistent throughout.
    for k in range(1, params.k_max + 1):
        for j in range(nets[k].size):
            members = np.flatnonzero(assignments[k] == j)
            parent = assignments[k - 1][nets[k][j]]
            assignments[k - 1][members] = parent
            for lvl in range(k - 2, -1, -1):
                chain_centers = nets[lvl + 1][assignments[lvl + 1][members]]
                assignments[lvl][members] = assignments[lvl][chain_centers]

    levels: list[list[Cube]] = []
    for k in range(params.k_max + 1):
        cubes = []
        for j in range(nets[k].size):
            members = np.flatnonzero(assignments[k] == j).astype(np.intp)
            center = int(nets[k][j])
            if members.size == 0 or int(assignments[k][center]) != j:
                raise ConstructionError(
                    f"cube {j} at level {k} lost its center during repair",
                    level=k, cube=j)
            parent = int(assignments[k - 1][center]) if k > 0 else None
            cubes.append(Cube(level=k, index=j, center=center,
                              members=members, parent=parent))
        levels.append(cubes)
    for k in range(1, params.k_max + 1):
        for cube in levels[k]:
            levels[k - 1][cube.parent].children.append(cube.index)

    return DyadicSystem(space, params, nets, assignments, levels)


def verify_system(system: DyadicSystem, space: SpaceSample) -> list:
    """Exhaustively check the cube-system properties; returns found violations.

    Checks, on the sample: (i) nested-or-disjoint across every level pair,
    (ii) exact partition per level, (iii) the inner/outer ball sandwich per
    cube, (iv) dilated outer balls of nested cubes nest as point sets.
    Always completes; an empty list means a clean system.
    """
    violations = []
    params = system.params
    n = space.n
    n_levels = system.n_levels

    # (ii) partition: every point in exactly one cube per level.
    for k in range(n_levels):
        seen = np.zeros(n, dtype=np.int64)
        for cube in system.levels[k]:
            seen[cube.members] += 1
        bad = np.flatnonzero(seen != 1)
        for point in bad.tolist():
            violations.append({"property": "ii", "level": k, "cube": None,
                               "detail": f"point {point} covered {int(seen[point])} times"})

    # Membership maps reconstructed from the cube lists (not the internal
    # assignment arrays) so corrupted member sets are caught.
    member_of = []
    for k in range(n_levels):
        m = np.full(n, -1, dtype=np.intp)
        for cube in system.levels[k]:
            m[cube.members] = cube.index
        member_of.append(m)

    # (i) nested or disjoint for every pair of levels k < l.
    for k in range(n_levels):
        for l in range(k + 1, n_levels):
            for cube in system.levels[l]:
                owners = np.unique(member_of[k][cube.members])
                owners = owners[owners >= 0]
                if owners.size > 1:
                    violations.append({
                        "property": "i", "level": l, "cube": cube.index,
                        "detail": f"straddles level-{k} cubes {owners.tolist()}"})

    # (iii) ball sandwich per cube.
    for k in range(n_levels):
        inner_r = params.inner_radius(k)
        outer_r = params.outer_radius(k)
        centers = np.asarray([c.center for c in system.levels[k]], dtype=np.intp)
        if inner_r > space.min_gap():
            nearest_i, nearest_d = _nearest_center(space, centers)
            hits = np.flatnonzero(nearest_d < inner_r)
            for point in hits.tolist():
                if member_of[k][point] != nearest_i[point]:
                    violations.append({
                        "property": "iii-inner", "level": k,
                        "cube": int(nearest_i[point]),
                        "detail": f"point {point} inside inner ball but assigned elsewhere"})
        else:
            # Inner balls hold only their centers at this resolution.
            for cube in system.levels[k]:
                if member_of[k][cube.center] != cube.index:
                    violations.append({
                        "property": "iii-inner", "level": k, "cube": cube.index,
                        "detail": "center not a member of its own cube"})
        for cube in system.levels[k]:
            d = space.dists_from(cube.center)[cube.members]
            if d.size and float(d.max()) >= outer_r:
                violations.append({
                    "property": "iii-outer", "level": k, "cube": cube.index,
                    "detail": f"member at distance {float(d.max())} >= {outer_r}"})

    # (iv) dilated-ball nesting along ancestor chains. The cheap triangle
    # test d(z_anc, z_desc) + outer_l <= outer_k certifies containment; only
    # failures need the exact sample check.
    for l in range(1, n_levels):
        for cube in system.levels[l]:
            anc = cube
            anc_level = l
            while anc.parent is not None:
                anc_level -= 1
                anc = system.levels[anc_level][anc.parent]
                d_cc = space.dist(anc.center, cube.center)
                if d_cc + params.outer_radius(l) <= params.outer_radius(anc_level):
                    continue
                inner_ball = space.dists_from(cube.center) < params.outer_radius(l)
                outer_ball = space.dists_from(anc.center) < params.outer_radius(anc_level)
                if np.any(inner_ball & ~outer_ball):
                    violations.append({
                        "property": "iv", "level": l, "cube": cube.index,
                        "detail": f"dilated ball escapes level-{anc_level} ancestor {anc.index}"})
    return violations


def cubes_intersecting(system: DyadicSystem, k: int, e_points):
    """Count and list the level-k cubes meeting the point set E."""
    k = system.check_level(k)
    e_points = np.asarray(e_points, dtype=np.intp)
    if e_points.size == 0:
        return 0, np.asarray([], dtype=np.intp)
    if e_points.min() < 0 or e_points.max() >= system.space.n:
        raise InvalidInputError("E contains unknown point indices")
    hit = np.unique(system.assignments[k][e_points])
    return int(hit.size), hit
