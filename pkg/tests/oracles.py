"""Independent brute-force oracles used to freeze expected test values.

Everything here is deliberately written in plain loops against the raw data,
so the oracles share no code path with the library implementations they
check.
"""

import numpy as np


def scan_ball(space, center, radius):
    """Exhaustive open-ball membership scan."""
    hits = []
    for i in range(space.n):
        if space.dist(center, i) < radius:
            hits.append(i)
    return hits


def min_cover_1d(values, r):
    """Exact minimal number of closed length-r intervals covering 1-d points."""
    count = 0
    hi = -np.inf
    for x in np.sort(np.asarray(values, dtype=float)):
        if x > hi:
            count += 1
            hi = x + r
    return count


def holder_sup(source_pts, target_pts, alpha):
    """Brute-force sup of d_Y(f x, f y) / d_X(x, y)^alpha over distinct pairs."""
    src = np.asarray(source_pts, dtype=float)
    tgt = np.asarray(target_pts, dtype=float)
    if src.ndim == 1:
        src = src[:, None]
    if tgt.ndim == 1:
        tgt = tgt[:, None]
    best = 0.0
    for i in range(len(src)):
        for j in range(i + 1, len(src)):
            dx = float(np.linalg.norm(src[i] - src[j]))
            dy = float(np.linalg.norm(tgt[i] - tgt[j]))
            best = max(best, dy / dx ** alpha)
    return best


def weighted_ball_mass(coords, weights, center_coord, radius):
    """Direct weighted count of points strictly inside a Euclidean ball."""
    total = 0.0
    for x, w in zip(np.atleast_2d(coords), weights):
        if np.linalg.norm(x - center_coord) < radius:
            total += w
    return total
