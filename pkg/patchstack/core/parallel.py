"""Order-preserving worker pool used by dataset generation and episode batches"""

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import structlog

from patchstack.core.logging import configure_logging

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def _init_worker() -> None:
    # spawned workers start with default structlog output on stdout
    configure_logging("WARNING")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1, chunksize: int = 16) -> List[R]:
    """Map fn over items; results come back in input order regardless of jobs"""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    workers = min(jobs, len(items))
    logger.debug("starting worker pool", workers=workers, items=len(items))
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx, initializer=_init_worker) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
