"""Greedy primitives: farthest-point traversal and coverage-maximizing covers.

``farthest_first`` serves nets and packings:

* separation ``>= t`` (non-strict): a maximal t-separated subset, i.e. a t-net.
  Every pool point ends up within < t of a chosen center, so the chosen
  centers also index a cover by open radius-t balls.
* separation ``> t`` (strict): a packing witness; any set of diameter <= t
  contains at most one chosen point, which lower-bounds covering numbers.

``greedy_cover_size`` is the classical greedy set cover restricted to balls
around the first uncovered point; it tracks the optimal covering number far
more tightly than a maximal separated set does, which matters when covering
counts feed a dimension fit.
"""

from __future__ import annotations

import numpy as np


def farthest_first(space, pool, threshold, *, strict=False):
    """Greedy farthest-point traversal of ``pool`` (array of point indices).

    Seeds at the lowest point index in the pool, then repeatedly adds the pool
    point farthest from the chosen set while that distance is >= ``threshold``
    (> when ``strict``). Ties resolve to the lowest index. Deterministic.

    When the threshold cannot separate anything (at or below the sample's
    minimum inter-point gap) every pool point would be chosen one at a time;
    that case returns the pool directly in index order.
    """
    pool = np.asarray(pool, dtype=np.intp)
    if pool.size == 0:
        return pool.copy()
    pool = np.sort(pool)
    gap = space.min_gap()
    if (threshold < gap) if strict else (threshold <= gap):
        return pool.copy()

    chosen = [int(pool[0])]
    min_dist = space.dists_from(int(pool[0]))[pool]
    while True:
        j = int(np.argmax(min_dist))
        best = float(min_dist[j])
        if (best <= threshold) if strict else (best < threshold):
            break
        center = int(pool[j])
        chosen.append(center)
        np.minimum(min_dist, space.dists_from(center)[pool], out=min_dist)
    return np.asarray(chosen, dtype=np.intp)


def greedy_cover_size(space, pool, radius, *, round_budget=20_000_000):
    """Size of a greedy cover of ``pool`` by open radius-``radius`` balls.

    Centers are pool points. Each round takes the lowest-index uncovered
    point u, considers the pool points whose ball contains u, and picks the
    candidate whose ball covers the most still-uncovered points (first
    maximum wins ties). Any pick covers u, so the loop terminates. All the
    action lives inside the closed 2*radius ball around u, and scoring runs
    only against the still-uncovered points there, which is exact (covered
    points score zero) and keeps rounds cheap as coverage grows.

    When a round would exceed its work budget, an evenly strided subset of
    the candidates is scored; pruning candidates can only enlarge the cover,
    never invalidate it.
    """
    pool = np.asarray(pool, dtype=np.intp)
    if pool.size == 0:
        return 0
    pool = np.sort(pool)
    if radius <= space.min_gap():
        return int(pool.size)          # every ball holds only its center
    n = space.n
    in_pool = np.full(n, -1, dtype=np.intp)
    in_pool[pool] = np.arange(pool.size, dtype=np.intp)
    uncovered = np.ones(pool.size, dtype=bool)
    count = 0
    cursor = 0
    while True:
        while cursor < pool.size and not uncovered[cursor]:
            cursor += 1
        if cursor == pool.size:
            break
        u = int(pool[cursor])
        neigh = space.neighbors_within(u, 2.0 * radius)
        local = neigh[in_pool[neigh] >= 0]
        lpos = in_pool[local]
        targets = local[uncovered[lpos]]       # scoring and marking pool
        tpos = in_pool[targets]
        d_u = space.pairwise([u], local)[0]
        cand = local[d_u < radius]
        cap = max(64, round_budget // max(1, targets.size))
        if cand.size > cap:
            cand = cand[np.unique(np.round(
                np.linspace(0, cand.size - 1, cap)).astype(int))]
        best_cover = -1
        best_center = None
        block = max(1, 4_000_000 // max(1, targets.size))
        for start in range(0, cand.size, block):
            rows = space.pairwise(cand[start:start + block], targets) < radius
            scores = rows.sum(axis=1)
            j = int(np.argmax(scores))
            if int(scores[j]) > best_cover:
                best_cover = int(scores[j])
                best_center = int(cand[start + j])
        mask = space.pairwise([best_center], targets)[0] < radius
        uncovered[tpos[mask]] = False
        count += 1
    return count


def packing_size(space, pool, threshold, *, strict=True, switch_at=2048):
    """Size of a greedy maximal separated subset of ``pool``.

    Separation is > threshold when strict (a packing witness: no diameter-
    threshold set holds two chosen points), >= threshold otherwise. Uses
    farthest-first traversal while the result stays small, then restarts with
    an index-order sweep whose per-point cost is one neighborhood query;
    either way the output is a maximal separated subset.
    """
    pool = np.asarray(pool, dtype=np.intp)
    if pool.size == 0:
        return 0
    pool = np.sort(pool)
    gap = space.min_gap()
    if (threshold < gap) if strict else (threshold <= gap):
        return int(pool.size)

    chosen = [int(pool[0])]
    min_dist = space.dists_from(int(pool[0]))[pool]
    while len(chosen) <= switch_at:
        j = int(np.argmax(min_dist))
        best = float(min_dist[j])
        if (best <= threshold) if strict else (best < threshold):
            return len(chosen)
        center = int(pool[j])
        chosen.append(center)
        np.minimum(min_dist, space.dists_from(center)[pool], out=min_dist)

    # Too many centers for quadratic traversal: sweep in index order.
    chosen_mask = np.zeros(space.n, dtype=bool)
    count = 0
    for start in range(0, pool.size, 4096):
        chunk = pool[start:start + 4096]
        neigh_lists = space.neighbors_within_many(chunk, threshold)
        for x, neigh in zip(chunk, neigh_lists):
            if strict:
                blocked = chosen_mask[neigh].any()
            else:
                hits = neigh[chosen_mask[neigh]]
                blocked = bool(hits.size) and bool(
                    (space.pairwise([int(x)], hits)[0] < threshold).any())
            if not blocked:
                chosen_mask[x] = True
                count += 1
    return count
