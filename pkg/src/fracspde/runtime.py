"""Worker-parallelism control: FSPDE_THREADS, overridden by --threads."""

import os
from concurrent.futures import ThreadPoolExecutor


def get_threads():
    env = os.environ.get("FSPDE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """Run fn over items, in parallel when allowed.

    Results come back in input order, so downstream reductions are
    deterministic regardless of the thread count.
    """
    n = get_threads()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(min(n, len(items))) as ex:
        return list(ex.map(fn, items))
