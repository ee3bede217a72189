"""Document worker pool.

Work is split into fixed-size chunks (never a function of the worker
count) and results are consumed in submission order, so any `workers >= 1`
produces identical output. Library modules stay passive; only the CLI
drives this pool.
"""

from __future__ import annotations

import itertools
import multiprocessing
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

CHUNK_DOCS = 256  # fixed: chunking must not depend on worker count

_WORKER_FN: Callable | None = None


def _init_worker(fn: Callable) -> None:
    global _WORKER_FN
    _WORKER_FN = fn


def _run_chunk(chunk: Sequence) -> list:
    assert _WORKER_FN is not None
    return [_WORKER_FN(item) for item in chunk]


def chunked(items: Iterable[T], size: int = CHUNK_DOCS) -> Iterator[list[T]]:
    it = iter(items)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def map_documents(
    fn: Callable[[T], R], items: Iterable[T], workers: int = 1
) -> Iterator[R]:
    """Order-preserving parallel map with bounded memory."""
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(fn,)) as pool:
        for chunk_result in pool.imap(_run_chunk, chunked(items)):
            yield from chunk_result
