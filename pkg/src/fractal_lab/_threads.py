"""Optional thread fan-out, capped by the FRACTAL_LAB_THREADS env var."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("FRACTAL_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def thread_map(fn, items):
    """Apply ``fn`` over ``items`` preserving order; parallel only if allowed."""
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
