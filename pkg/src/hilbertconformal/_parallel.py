"""Ordered parallel map over independent replicates.

Results are assembled in submission order, so worker count never changes
output bytes.  Exceptions are returned in place of results and handled by
the caller's failure policy.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable


def ordered_map(fn: Callable, args: Iterable, workers: int = 1) -> list:
    """Apply fn over args; each result is either fn(arg) or the raised exception."""
    args = list(args)
    if workers <= 1 or len(args) <= 1:
        return [_call(fn, a) for a in args]
    out = [None] * len(args)
    with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
        futures = [pool.submit(fn, a) for a in args]
        for i, fut in enumerate(futures):
            exc = fut.exception()
            out[i] = exc if exc is not None else fut.result()
    return out


def _call(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # mirrored by the pool path
        return exc
