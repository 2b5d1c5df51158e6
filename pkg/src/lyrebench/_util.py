"""Small shared helpers."""

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads=1):
    """Map preserving input order; thread pool when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
