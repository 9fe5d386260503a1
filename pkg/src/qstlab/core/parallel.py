"""Order-preserving data-parallel map capped by ``QSTLAB_THREADS``."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from ..config import get_settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """
    Apply ``fn`` to every item, results in input order.

    Reductions over the result are done by the caller in that fixed order, so
    outputs do not depend on the thread count.
    """
    threads = get_settings().threads
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
