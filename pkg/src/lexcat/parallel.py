"""Order-stable parallel mapping for batch operations."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import BatchItemError

T = TypeVar("T")
R = TypeVar("R")


def ordered_parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Apply fn to every item; output order matches input order.

    The first failure aborts the batch, wrapped in a BatchItemError that
    carries the failing index. Results are identical for any worker count.
    """
    def run(pair):
        idx, item = pair
        try:
            return fn(item)
        except Exception as err:
            raise BatchItemError(idx, err) from err

    indexed = list(enumerate(items))
    if workers <= 1 or len(indexed) < 2:
        return [run(p) for p in indexed]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, indexed))
