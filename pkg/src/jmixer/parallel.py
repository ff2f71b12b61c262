"""Ordered thread-pool map; worker count from ``JMIXER_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "JMIXER_THREADS"


def thread_count() -> int:
    """Workers to use: ``JMIXER_THREADS`` if set to a positive integer, else 1."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def ordered_map(fn, items) -> list:
    """``[fn(x) for x in items]``, possibly concurrent; results keep input order."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
