"""Covering/packing counts, dyadic cube counts and log-log dimension estimation.

True covering numbers are computationally hard, so every count is bracketed:
a greedy ball cover gives an upper bound, a strictly-separated greedy packing
a lower bound, and both share the scaling exponent that the box-counting
slope estimates. The fit window policy discards the coarsest scales (boundary
effects) and every scale under five minimum inter-point gaps (finite-sample
saturation); the slope is a least-squares fit in natural logs with the worst
log deviation reported so non-linearity stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._threads import thread_map
from .cubes import DyadicSystem, cubes_intersecting
from .errors import InvalidInputError
from .greedy import greedy_cover_size, packing_size
from .spaces import SpaceSample

#: Fine-scale floor: scales below this many minimum gaps are saturated.
FLOOR_GAPS = 5.0
#: Coarse scales dropped by default before fitting a cover-count sequence.
DROP_COARSEST = 2


@dataclass
class CoverReport:
    """Bracket for the covering number N(E, r) at one scale.

    ``upper`` is the smaller of two genuine covers of E by diameter-<= r
    sets: a greedy coverage-maximizing cover by open radius-r/2 balls
    centered at E-points, and (on coordinate-backed spaces) the best aligned
    grid of cubes with diameter r over a few deterministic offsets.
    ``lower`` is the size of a greedy maximal strictly-r-separated subset of
    E, no two points of which fit in one diameter-r set. Hence
    lower <= N(E, r) <= upper.
    """

    scale: float
    lower: int
    upper: int
    notes: str = ""

    def to_dict(self) -> dict:
        return {"scale": self.scale, "lower": self.lower, "upper": self.upper,
                "notes": self.notes}


def _cell_cover_size(space: SpaceSample, e_points, r: float, offsets=3):
    """Occupied-cell count for an aligned cube grid of diameter r.

    Cubes of side s have Euclidean diameter s*sqrt(dim); for snowflake
    metrics the side is chosen so the snowflaked diameter is r. Minimized
    over ``offsets`` deterministic grid shifts per axis. Returns None for
    table-backed spaces (no coordinates to grid).
    """
    if space.coords is None:
        return None
    dim = space.coords.shape[1]
    r_euc = r if space.alpha is None else r ** (1.0 / space.alpha)
    side = r_euc / math.sqrt(dim)
    pts = space.coords[e_points]
    spread = pts.max(axis=0) - pts.min(axis=0)
    if np.any(spread / side > 1e7):
        return None                    # grid would overflow useful index range
    best = None
    shifts = np.linspace(0.0, side, offsets, endpoint=False)
    for shift in np.stack(np.meshgrid(*([shifts] * dim)), axis=-1).reshape(-1, dim):
        cells = np.floor((pts - shift) / side).astype(np.int64)
        count = np.unique(cells, axis=0).shape[0]
        if best is None or count < best:
            best = count
    return int(best)


def covering_number_bounds(space: SpaceSample, e_points, r: float) -> CoverReport:
    """Two-sided bracket of the covering number of E at scale r."""
    if not (np.isfinite(r) and r > 0.0):
        raise InvalidInputError("scale r must be positive and finite")
    e_points = np.asarray(e_points, dtype=np.intp)
    if e_points.size == 0:
        return CoverReport(scale=float(r), lower=0, upper=0, notes="empty set")
    upper = greedy_cover_size(space, e_points, r / 2.0)
    notes = "greedy r/2-ball cover"
    cells = _cell_cover_size(space, e_points, r)
    if cells is not None and cells < upper:
        upper = cells
        notes = "aligned diameter-r cell cover"
    lower = packing_size(space, e_points, r, strict=True)
    return CoverReport(scale=float(r), lower=int(lower), upper=int(upper),
                       notes=notes + " / strict r-packing")


def cube_counts(system: DyadicSystem, e_points, k_range=None) -> list:
    """Per-level counts of cubes meeting E, as (level, count) pairs."""
    if k_range is None:
        k_range = range(system.n_levels)
    out = []
    for k in k_range:
        count, _ = cubes_intersecting(system, k, e_points)
        out.append((int(k), count))
    return out


@dataclass
class DimensionEstimate:
    """Least-squares box-counting slope with its fit window and residual."""

    slope: float
    intercept: float
    residual: float
    fit_window: dict
    count_source: str = "covers"

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "residual": self.residual, "fit_window": self.fit_window,
                "count_source": self.count_source}


def estimate_dim_box(counts, *, min_scale: float = 0.0,
                     drop_coarsest: int = DROP_COARSEST,
                     count_source: str = "covers",
                     k_start=None) -> DimensionEstimate:
    """Fit log(count) against log(1/scale) over the usable scale window.

    ``counts`` is a sequence of (scale, count) pairs with strictly decreasing
    positive scales and positive counts. The window drops the ``drop_coarsest``
    largest scales and everything below ``min_scale``; at least three scales
    must survive.
    """
    pairs = [(float(s), float(c)) for s, c in counts]
    if len(pairs) < 3:
        raise InvalidInputError("at least three (scale, count) pairs are required")
    scales = np.asarray([s for s, _ in pairs])
    values = np.asarray([c for _, c in pairs])
    if np.any(scales <= 0) or np.any(values <= 0):
        raise InvalidInputError("scales and counts must be positive")
    if np.any(np.diff(scales) >= 0):
        raise InvalidInputError("scales must be strictly decreasing")

    keep = np.arange(len(pairs)) >= int(drop_coarsest)
    keep &= scales >= min_scale
    if keep.sum() < 3:
        raise InvalidInputError(
            f"fewer than 3 usable scales after windowing ({int(keep.sum())} left)")
    x = np.log(1.0 / scales[keep])
    y = np.log(values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    window = {
        "max_scale": float(scales[keep].max()),
        "min_scale": float(scales[keep].min()),
        "n_scales": int(keep.sum()),
        "dropped_coarsest": int(drop_coarsest),
        "floor": float(min_scale),
    }
    if k_start is not None:
        window["k_start"] = int(k_start)
    return DimensionEstimate(slope=float(max(slope, 0.0)), intercept=float(intercept),
                             residual=residual, fit_window=window,
                             count_source=count_source)


def c_prime(c_d: float, c0: float, big_c0: float) -> float:
    """Constant relating cube counts to covering numbers: N_k(E) <= C' N(E, delta^k).

    C' = C_d * (c0 / (3 * (4*C0 + 1))) ** (-log2 C_d): disjoint inner balls of
    radius c0/3 (times delta^k) packed in a radius-(4*C0+1) ball are at most
    that many, by doubling.
    """
    if not c_d >= 1.0:
        raise InvalidInputError("doubling constant must be >= 1")
    if not (c0 > 0.0 and big_c0 > 0.0):
        raise InvalidInputError("cube constants must be positive")
    base = c0 / (3.0 * (4.0 * big_c0 + 1.0))
    return float(c_d * base ** (-math.log2(c_d)))


@dataclass
class SandwichReport:
    """Level-k check that cube counts and covering numbers sandwich each other."""

    level: int
    n_k: int
    cover_upper: int
    c_prime_value: float
    max_cube_diameter: float
    diameter_cap: float
    diam_bound_ok: bool
    count_bound_ok: bool

    @property
    def passed(self) -> bool:
        return self.diam_bound_ok and self.count_bound_ok

    def to_dict(self) -> dict:
        return {"level": self.level, "n_k": self.n_k, "cover_upper": self.cover_upper,
                "c_prime": self.c_prime_value,
                "max_cube_diameter": self.max_cube_diameter,
                "diameter_cap": self.diameter_cap,
                "diam_bound_ok": self.diam_bound_ok,
                "count_bound_ok": self.count_bound_ok,
                "passed": self.passed}


def sandwich_check(system: DyadicSystem, space: SpaceSample, e_points,
                   k: int, c_d: float) -> SandwichReport:
    """Verify the two scale-k sandwich proxies for a point set E.

    (a) every level-k cube has diameter <= 4*C0*delta^k, so the cubes meeting
    E form a small-diameter cover of E of size N_k(E), witnessing that the
    minimal cover at that diameter is no larger; (b) N_k(E) does not exceed
    C' times the greedy covering upper bound at scale delta^k.
    """
    k = system.check_level(k)
    e_points = np.asarray(e_points, dtype=np.intp)
    if e_points.size == 0:
        raise InvalidInputError("E must be nonempty")
    params = system.params
    cap = 4.0 * params.C0 * params.delta ** k

    max_diam = 0.0
    for cube in system.levels[k]:
        center_reach = space.dists_from(cube.center)[cube.members]
        reach = float(center_reach.max()) if center_reach.size else 0.0
        if 2.0 * reach <= cap:
            max_diam = max(max_diam, min(2.0 * reach, cap) if reach else 0.0)
            continue
        max_diam = max(max_diam, space.subset_diameter(cube.members))

    n_k, _ = cubes_intersecting(system, k, e_points)
    report = covering_number_bounds(space, e_points, params.delta ** k)
    cp = c_prime(c_d, params.c0, params.C0)
    return SandwichReport(level=k, n_k=n_k, cover_upper=report.upper,
                          c_prime_value=cp, max_cube_diameter=max_diam,
                          diameter_cap=cap,
                          diam_bound_ok=max_diam <= cap,
                          count_bound_ok=n_k <= cp * report.upper)


# -- estimation pipelines ----------------------------------------------------

def scale_schedule(space: SpaceSample, e_points=None, *, r0=None, ratio=0.5,
                   count=None, floor_factor=FLOOR_GAPS, max_scales=24) -> list:
    """Geometric scale schedule from r0 down to the saturation floor."""
    if not (0.0 < ratio < 1.0):
        raise InvalidInputError("schedule ratio must lie in (0, 1)")
    if e_points is None:
        e_points = space.all_points()
    diam = space.subset_diameter(e_points)
    if diam <= 0.0:
        raise InvalidInputError("point set has zero diameter")
    r = float(r0) if r0 is not None else diam / 2.0
    floor = floor_factor * space.min_gap()
    scales = []
    while len(scales) < max_scales:
        if count is not None:
            if len(scales) >= count:
                break
        elif r < floor:
            break
        scales.append(r)
        r *= ratio
    if len(scales) < 3:
        raise InvalidInputError("schedule would contain fewer than 3 scales")
    return scales


def dimension_from_covers(space: SpaceSample, e_points=None, scales=None, *,
                          ratio=0.5, r0=None, drop_coarsest=DROP_COARSEST):
    """Covering counts over a scale schedule plus the fitted dimension."""
    if e_points is None:
        e_points = space.all_points()
    e_points = np.asarray(e_points, dtype=np.intp)
    if scales is None:
        scales = scale_schedule(space, e_points, r0=r0, ratio=ratio)
    reports = thread_map(lambda r: covering_number_bounds(space, e_points, r), scales)
    counts = [(rep.scale, rep.upper) for rep in reports]
    estimate = estimate_dim_box(counts, min_scale=FLOOR_GAPS * space.min_gap(),
                                drop_coarsest=drop_coarsest, count_source="covers")
    return reports, estimate


def start_level(system: DyadicSystem, e_points=None) -> int:
    """Smallest level k >= 0 with delta^k <= diam E (capped at k_max)."""
    space = system.space
    if e_points is None:
        e_points = space.all_points()
    diam = space.subset_diameter(np.asarray(e_points, dtype=np.intp))
    if diam <= 0.0:
        raise InvalidInputError("point set has zero diameter")
    k = 0
    while system.params.delta ** k > diam and k < system.params.k_max:
        k += 1
    return k


def dimension_from_cubes(system: DyadicSystem, e_points=None, *,
                         drop_coarsest=0):
    """Cube counts per level plus the fitted dimension (scale = delta^k).

    The coarse end starts at the first level whose scale is at most diam E
    (optionally dropping further boundary-affected levels); the fine end
    obeys the same saturation floor as cover counts.
    """
    space = system.space
    if e_points is None:
        e_points = space.all_points()
    e_points = np.asarray(e_points, dtype=np.intp)
    k_start = start_level(system, e_points)
    counts = cube_counts(system, e_points, range(k_start, system.n_levels))
    delta = system.params.delta
    scaled = [(delta ** k, c) for k, c in counts if c > 0]
    estimate = estimate_dim_box(scaled, min_scale=FLOOR_GAPS * space.min_gap(),
                                drop_coarsest=drop_coarsest, count_source="cubes",
                                k_start=k_start)
    return counts, estimate
