"""Module contains the order-preserving process pool helper."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable
from typing import Iterable
from typing import TypeVar

from .exceptions import ConfigError


__all__ = (
    "THREADS_ENV",
    "worker_count",
    "map_ordered",
)


THREADS_ENV = "VAR_BOOT_THREADS"

TItem = TypeVar("TItem")
TResult = TypeVar("TResult")


def worker_count(threads: int | None = None) -> int:
    """Explicit count, else VAR_BOOT_THREADS, else the CPU count."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                threads = int(raw)
            except ValueError as error:
                msg = f"{THREADS_ENV} must be an integer, got '{raw}'."
                raise ConfigError(msg) from error
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        msg = f"Worker count must be at least 1, got {threads}."
        raise ConfigError(msg)
    return threads


def map_ordered(
    func: Callable[[TItem], TResult],
    items: Iterable[TItem],
    threads: int | None = None,
) -> list[TResult]:
    """Apply ``func`` to every item, results in submission order.

    ``func`` and the items must be picklable when more than one worker is
    used.
    """
    work = list(items)
    workers = min(worker_count(threads), max(len(work), 1))
    if workers == 1:
        return [func(item) for item in work]
    try:
        executor = ProcessPoolExecutor(max_workers=workers)
    except (OSError, NotImplementedError) as error:
        logging.warning("Process pool unavailable (%s); running serially.", error)
        return [func(item) for item in work]
    with executor:
        chunk = max(1, len(work) // (4 * workers))
        results = list(executor.map(func, work, chunksize=chunk))
    logging.info("Completed %s tasks with %s workers.", len(work), workers)
    return results
