from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from novikov_cli.utils.logger import get_logger

_LOG = get_logger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def run_ordered(func: Callable[[T], R], items: Iterable[T],
                jobs: int = 1) -> list[R]:
    """
    Applies func to every item, up to `jobs` at a time. Results come back in
    input order; the first raised exception propagates
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(jobs, len(items))
    _LOG.debug(f'Running {len(items)} tasks on {workers} workers')
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
