"""Worker-count control for the embarrassingly parallel inner loops.

The BINORMAL_THREADS environment variable caps the pool size; heavy chunks
are numpy calls that release the GIL, so a thread pool is enough.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    env = os.environ.get("BINORMAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def chunked_map(fn, chunks: list) -> list:
    """Map fn over chunks, in a thread pool when more than one worker is allowed."""
    chunks = list(chunks)
    workers = worker_count()
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as ex:
        return list(ex.map(fn, chunks))
