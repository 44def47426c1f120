from concurrent import futures
from functools import partial
from typing import Any, Callable, Sequence

from .config import TapConfig

"""
Data-parallel evaluation over vertex pairs.

The read-only context (precomputed per-vertex profiles or weight vectors) is installed once per worker process by the
pool initializer, then each worker is handed chunks of items.  Chunk results are concatenated in submission order, so
the output is the same for any worker count.
"""

_worker_context: dict = {}


def _install_context(context: dict) -> None:
    global _worker_context
    _worker_context = context


def _run_chunk(chunk_fn: Callable[[dict, Sequence], list], chunk: Sequence) -> list:
    return chunk_fn(_worker_context, chunk)


def chunked(items: Sequence, size: int) -> list[Sequence]:
    return [items[i:i + size] for i in range(0, len(items), max(size, 1))]


def map_chunks(chunk_fn: Callable[[dict, Sequence], list],
               items: Sequence,
               context: dict[str, Any],
               workers: int = 1,
               chunk_size: int | None = None) -> list:
    """
    chunk_fn must be a module-level function (it is pickled to the workers) taking (context, chunk) and returning
    a list.
    """
    chunks = chunked(items, chunk_size if chunk_size else TapConfig().chunk_size)
    if workers <= 1 or len(chunks) <= 1:
        return [result for chunk in chunks for result in chunk_fn(context, chunk)]
    with futures.ProcessPoolExecutor(max_workers=workers,
                                     initializer=_install_context,
                                     initargs=(context,)) as executor:
        return [result
                for chunk_results in executor.map(partial(_run_chunk, chunk_fn), chunks)
                for result in chunk_results]
