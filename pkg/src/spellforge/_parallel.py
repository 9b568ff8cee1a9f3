"""Order-preserving chunked map over a process pool."""

from __future__ import annotations

import multiprocessing
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def chunked(items: Iterable[T], size: int) -> Iterator[list[T]]:
    it = iter(items)
    while True:
        chunk = list(islice(it, size))
        if not chunk:
            return
        yield chunk


def map_chunks(
    func: Callable[[list[T]], R],
    items: Iterable[T],
    workers: int = 1,
    chunk_size: int = 512,
) -> Iterator[R]:
    """Yield ``func(chunk)`` for consecutive chunks of ``items``, in input order.

    With ``workers > 1`` chunks run in a process pool; at most ``2 * workers``
    chunks are in flight so memory stays bounded on long streams. ``func``
    must be picklable.
    """
    chunks = chunked(items, chunk_size)
    if workers <= 1:
        for chunk in chunks:
            yield func(chunk)
        return

    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        pending: deque = deque()
        for chunk in chunks:
            pending.append(pool.submit(func, chunk))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
