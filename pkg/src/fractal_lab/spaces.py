"""Finite metric-space substrate: distance oracles, balls, doubling and measure checks.

Spaces are finite point samples; every "set" is a subset of sample points,
handled as an integer index array. The metric comes either from a closed-form
evaluator on coordinates (Euclidean, or a snowflake power of it) or from an
explicit symmetric distance table; the evaluator form avoids O(n^2) storage.
Balls are open (strict inequality), and distances are compared exactly as
computed: scale-sensitive callers perturb radii, never comparisons.

The minimum inter-point gap is a first-class quantity: no finite sample can
resolve scales below it, so measure checks report degenerate-scale
diagnostics there instead of failing. Finite samples are trivially proper and
separable, so no completeness bookkeeping is carried around.

Instances are immutable after construction; all operations are pure functions
of their inputs and safe to call concurrently on shared data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import InvalidInputError
from .greedy import farthest_first

EUCLIDEAN = "euclidean"
SNOWFLAKE = "snowflake"
TABLE = "table"

_KINDS = (EUCLIDEAN, SNOWFLAKE, TABLE)


class SpaceSample:
    """A finite sample of a compact metric space with a distance oracle.

    Parameters
    ----------
    kind : "euclidean" | "snowflake" | "table"
    coords : (n, d) array, required for euclidean/snowflake kinds
    alpha : snowflake exponent in (0, 1); distance = euclidean ** alpha
    table : (n, n) symmetric distance matrix, required for table kind
    weights : optional (n,) nonnegative masses with positive total
    ids : optional point identifiers (default 0..n-1)
    label : free text
    """

    def __init__(self, *, kind, coords=None, alpha=None, table=None,
                 weights=None, ids=None, label=""):
        if kind not in _KINDS:
            raise InvalidInputError(f"unknown space kind {kind!r}")
        self.kind = kind
        self.alpha = None
        self.coords = None
        self.table = None

        if kind in (EUCLIDEAN, SNOWFLAKE):
            if coords is None:
                raise InvalidInputError(f"{kind} space requires coordinates")
            coords = np.atleast_2d(np.asarray(coords, dtype=float))
            if coords.ndim != 2 or coords.shape[0] < 1:
                raise InvalidInputError("coordinates must form a nonempty (n, d) array")
            if not np.all(np.isfinite(coords)):
                raise InvalidInputError("coordinates must be finite")
            if np.unique(coords, axis=0).shape[0] != coords.shape[0]:
                raise InvalidInputError("duplicate points: distinct points must have positive distance")
            self.coords = coords
            if kind == SNOWFLAKE:
                if alpha is None or not (0.0 < alpha < 1.0):
                    raise InvalidInputError("snowflake exponent must lie in (0, 1)")
                self.alpha = float(alpha)
        else:
            if table is None:
                raise InvalidInputError("table space requires a distance matrix")
            table = np.asarray(table, dtype=float)
            if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
                raise InvalidInputError("distance table must be square and nonempty")
            if not np.all(np.isfinite(table)):
                raise InvalidInputError("distance table must be finite")
            if not np.array_equal(table, table.T):
                raise InvalidInputError("distance table must be exactly symmetric")
            if np.any(np.diag(table) != 0.0):
                raise InvalidInputError("distance table diagonal must be zero")
            off = table[~np.eye(table.shape[0], dtype=bool)]
            if off.size and np.any(off <= 0.0):
                raise InvalidInputError("distinct points must have positive distance")
            self.table = table

        n = self.n
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != (n,):
                raise InvalidInputError(f"weights must have shape ({n},)")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
                raise InvalidInputError("weights must be finite and nonnegative")
            if weights.sum() <= 0.0:
                raise InvalidInputError("weights must have positive total mass")
        self.weights = weights

        if ids is None:
            ids = list(range(n))
        elif len(ids) != n:
            raise InvalidInputError("ids must match the number of points")
        self.ids = list(ids)
        self.label = label

        self._min_gap = None
        self._diameter = None
        self._kdtree = None

    # -- basic queries ------------------------------------------------------

    @property
    def n(self) -> int:
        if self.coords is not None:
            return self.coords.shape[0]
        return self.table.shape[0]

    def __len__(self) -> int:
        return self.n

    def all_points(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.intp)

    def check_index(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise InvalidInputError(f"unknown point identifier {i} (n={self.n})")
        return i

    def dist(self, i, j) -> float:
        if self.table is not None:
            return float(self.table[i, j])
        d = float(np.linalg.norm(self.coords[i] - self.coords[j]))
        if self.kind == SNOWFLAKE:
            d = d ** self.alpha
        return d

    def dists_from(self, i) -> np.ndarray:
        """Distances from point ``i`` to every sample point, as one row."""
        if self.table is not None:
            return self.table[i].copy()
        diff = self.coords - self.coords[i]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if self.kind == SNOWFLAKE:
            d **= self.alpha
        return d

    def pair_distances(self, i_arr, j_arr) -> np.ndarray:
        """Elementwise distances d(i_arr[k], j_arr[k])."""
        i_arr = np.asarray(i_arr, dtype=np.intp)
        j_arr = np.asarray(j_arr, dtype=np.intp)
        if self.table is not None:
            return self.table[i_arr, j_arr]
        diff = self.coords[i_arr] - self.coords[j_arr]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if self.kind == SNOWFLAKE:
            d **= self.alpha
        return d

    def pairwise(self, rows, cols=None) -> np.ndarray:
        """Distance matrix between two index sets (cols=None means all points)."""
        rows = np.asarray(rows, dtype=np.intp)
        if self.table is not None:
            if cols is None:
                return self.table[rows]
            return self.table[np.ix_(rows, np.asarray(cols, dtype=np.intp))]
        a = self.coords[rows]
        b = self.coords if cols is None else self.coords[np.asarray(cols, dtype=np.intp)]
        d = cdist(a, b)
        if self.kind == SNOWFLAKE:
            d **= self.alpha
        return d

    def subset_diameter(self, indices) -> float:
        """Exact diameter of a point subset (0 for fewer than two points)."""
        indices = np.asarray(indices, dtype=np.intp)
        if indices.size < 2:
            return 0.0
        if self.table is not None:
            return float(self.table[np.ix_(indices, indices)].max())
        pts = self.coords[indices]
        if pts.shape[1] == 1:
            d = float(pts.max() - pts.min())
        else:
            d = 0.0
            block = max(1, 4_000_000 // max(1, indices.size))
            for start in range(0, indices.size, block):
                d = max(d, float(cdist(pts[start:start + block], pts).max()))
        if self.kind == SNOWFLAKE:
            d = d ** self.alpha
        return d

    def diameter(self) -> float:
        if self._diameter is None:
            self._diameter = self.subset_diameter(self.all_points())
        return self._diameter

    def _tree(self):
        if self._kdtree is None:
            self._kdtree = cKDTree(self.coords)
        return self._kdtree

    def min_gap(self) -> float:
        """Minimum distance between distinct sample points (cached)."""
        if self._min_gap is None:
            if self.n == 1:
                self._min_gap = float("inf")
            elif self.table is not None:
                off = self.table[~np.eye(self.n, dtype=bool)]
                self._min_gap = float(off.min())
            else:
                d, _ = self._tree().query(self.coords, k=2)
                gap = float(d[:, 1].min())
                if self.kind == SNOWFLAKE:
                    gap = gap ** self.alpha
                self._min_gap = gap
        return self._min_gap

    def neighbors_within(self, i, radius: float) -> np.ndarray:
        """Indices with dist(i, .) <= radius (closed ball), ascending."""
        if self.table is not None:
            return np.flatnonzero(self.table[i] <= radius).astype(np.intp)
        r_euc = radius if self.kind == EUCLIDEAN else radius ** (1.0 / self.alpha)
        hits = self._tree().query_ball_point(self.coords[i], r_euc)
        return np.sort(np.asarray(hits, dtype=np.intp))

    def neighbors_within_many(self, points, radius: float) -> list:
        """Closed-ball neighbor lists for several query points at once."""
        points = np.asarray(points, dtype=np.intp)
        if self.table is not None:
            return [np.flatnonzero(self.table[i] <= radius).astype(np.intp)
                    for i in points]
        r_euc = radius if self.kind == EUCLIDEAN else radius ** (1.0 / self.alpha)
        lists = self._tree().query_ball_point(self.coords[points], r_euc)
        return [np.asarray(lst, dtype=np.intp) for lst in lists]

    def with_weights(self, weights) -> "SpaceSample":
        return SpaceSample(kind=self.kind, coords=self.coords, alpha=self.alpha,
                           table=self.table, weights=weights, ids=self.ids,
                           label=self.label)

    def __repr__(self) -> str:
        extra = f", alpha={self.alpha}" if self.kind == SNOWFLAKE else ""
        return f"SpaceSample(kind={self.kind!r}, n={self.n}{extra}, label={self.label!r})"


@dataclass(frozen=True)
class Ball:
    """Open metric ball: membership is dist(center, .) < radius, strictly."""

    center: int
    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0.0):
            raise InvalidInputError("ball radius must be finite and positive")


def ball_points(space: SpaceSample, ball: Ball) -> np.ndarray:
    """Indices of sample points strictly inside the ball, ascending."""
    center = space.check_index(ball.center)
    return np.flatnonzero(space.dists_from(center) < ball.radius).astype(np.intp)


@dataclass
class DoublingEstimate:
    """Greedy witness for the doubling constant of a sample.

    The constant upper-bounds, over every tested (center, r), the size of a
    greedy cover of B(center, 2r) by radius-r balls centered at sample points;
    greedy covers upper-bound the optimum, so this is a valid witness.
    """

    constant: float
    scales_tested: list
    max_cover_count: int

    def to_dict(self) -> dict:
        return {
            "constant": float(self.constant),
            "scales_tested": [float(s) for s in self.scales_tested],
            "max_cover_count": int(self.max_cover_count),
        }


def estimate_doubling_constant(space: SpaceSample, scales, centers) -> DoublingEstimate:
    """Greedy doubling-constant witness over the given centers and scales."""
    scales = [float(s) for s in scales]
    if not scales:
        raise InvalidInputError("at least one scale is required")
    if any(s <= 0 for s in scales):
        raise InvalidInputError("scales must be positive")
    centers = np.asarray(centers, dtype=np.intp)
    if centers.size == 0:
        raise InvalidInputError("at least one center is required")
    worst = 1
    for c in centers:
        c = space.check_index(c)
        for r in scales:
            pool = ball_points(space, Ball(c, 2.0 * r))
            count = farthest_first(space, pool, r).size
            worst = max(worst, int(count))
    return DoublingEstimate(constant=float(worst), scales_tested=scales,
                            max_cover_count=worst)


def _ball_mass(space: SpaceSample, row: np.ndarray, r: float) -> float:
    return float(space.weights[row < r].sum())


@dataclass
class HomogeneityReport:
    """Worst constants for the two-scale mass-ratio bound mu(B(x,r2))/mu(B(x,r1)) <= C (r2/r1)^Q."""

    exponent: float
    worst_constant: float
    lower_bound_constant: float
    tested: int
    degenerate: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "worst_constant": self.worst_constant,
            "lower_bound_constant": self.lower_bound_constant,
            "tested": self.tested,
            "degenerate": self.degenerate,
            "violations": self.violations,
        }


def check_homogeneity(space: SpaceSample, q: float, region, scale_pairs,
                      *, threshold=None) -> HomogeneityReport:
    """Empirical local homogeneity check on weighted samples.

    For each tested center x and scale pair r1 < r2, forms the normalized
    mass ratio [mu(B(x,r2)) / mu(B(x,r1))] * (r1/r2)^q and reports the worst
    value, alongside the worst constant C with r^q / C <= mu(B(x,r)) on the
    same scales. Zero-mass inner balls are reported as degenerate scales (the
    sample cannot resolve r1), never raised.
    """
    if space.weights is None:
        raise InvalidInputError("homogeneity checks require per-point weights")
    if q <= 0:
        raise InvalidInputError("homogeneity exponent must be positive")
    region = np.asarray(region, dtype=np.intp)
    if region.size == 0:
        raise InvalidInputError("region must be nonempty")
    pairs = [(float(r1), float(r2)) for r1, r2 in scale_pairs]
    if not pairs:
        raise InvalidInputError("at least one scale pair is required")
    for r1, r2 in pairs:
        if not (0.0 < r1 < r2):
            raise InvalidInputError(f"scale pairs need 0 < r1 < r2, got ({r1}, {r2})")

    worst = 0.0
    lower_c = 0.0
    degenerate = []
    violations = []
    tested = 0
    radii = sorted({r for pair in pairs for r in pair})
    for x in region:
        x = space.check_index(x)
        row = space.dists_from(x)
        mass = {r: _ball_mass(space, row, r) for r in radii}
        for r in radii:
            if mass[r] > 0.0:
                lower_c = max(lower_c, r ** q / mass[r])
            else:
                degenerate.append({"center": x, "radius": r, "reason": "zero-mass ball"})
        for r1, r2 in pairs:
            if mass[r1] <= 0.0:
                continue
            tested += 1
            const = (mass[r2] / mass[r1]) * (r1 / r2) ** q
            worst = max(worst, const)
            if threshold is not None and const > threshold:
                violations.append({"center": x, "r1": r1, "r2": r2, "constant": const})
    return HomogeneityReport(exponent=q, worst_constant=worst,
                             lower_bound_constant=lower_c, tested=tested,
                             degenerate=degenerate, violations=violations)


@dataclass
class AhlforsReport:
    """Two-sided fit of mu(B(x,r)) against r^Q: smallest C_A >= 1 covering both sides."""

    exponent: float
    c_a_estimate: float
    lower_constant: float
    upper_constant: float
    tested: int
    failed: bool = False
    degenerate: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "c_a_estimate": self.c_a_estimate,
            "lower_constant": self.lower_constant,
            "upper_constant": self.upper_constant,
            "tested": self.tested,
            "failed": self.failed,
            "degenerate": self.degenerate,
            "violations": self.violations,
        }


def check_ahlfors_regularity(space: SpaceSample, q: float, region, scales,
                             *, threshold=None) -> AhlforsReport:
    """Fit the smallest C_A >= 1 with r^q/C_A <= mu(B(x,r)) <= C_A r^q over tested points and scales."""
    if space.weights is None:
        raise InvalidInputError("regularity checks require per-point weights")
    if q <= 0:
        raise InvalidInputError("regularity exponent must be positive")
    region = np.asarray(region, dtype=np.intp)
    if region.size == 0:
        raise InvalidInputError("region must be nonempty")
    scales = [float(r) for r in scales]
    if not scales or any(r <= 0 for r in scales):
        raise InvalidInputError("scales must be nonempty and positive")

    lower_c = 0.0
    upper_c = 0.0
    degenerate = []
    violations = []
    tested = 0
    for x in region:
        x = space.check_index(x)
        row = space.dists_from(x)
        for r in scales:
            mass = _ball_mass(space, row, r)
            if mass <= 0.0:
                degenerate.append({"center": x, "radius": r, "reason": "zero-mass ball"})
                continue
            tested += 1
            lo = r ** q / mass
            hi = mass / r ** q
            lower_c = max(lower_c, lo)
            upper_c = max(upper_c, hi)
            if threshold is not None and max(lo, hi) > threshold:
                violations.append({"center": x, "radius": r, "constant": max(lo, hi)})
    c_a = max(1.0, lower_c, upper_c)
    failed = threshold is not None and c_a > threshold
    return AhlforsReport(exponent=q, c_a_estimate=c_a, lower_constant=lower_c,
                         upper_constant=upper_c, tested=tested, failed=failed,
                         degenerate=degenerate, violations=violations)
