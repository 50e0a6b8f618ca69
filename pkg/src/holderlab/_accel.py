"""Optional numba acceleration.

Set ``HOLDERLAB_NO_NUMBA=1`` to force the pure-numpy kernels. The flag is read
once at import time.
"""

import os

_DISABLED = os.environ.get("HOLDERLAB_NO_NUMBA", "").strip() not in ("", "0", "false")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and not _DISABLED


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def worker_count() -> int:
    """Worker pool size from ``HOLDERLAB_WORKERS`` (default 1)."""
    raw = os.environ.get("HOLDERLAB_WORKERS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise ValueError(f"HOLDERLAB_WORKERS must be an integer, got {raw!r}") from None


def parallel_map(func, items, workers: int | None = None) -> list:
    """Ordered map over a thread pool; the numba kernels release the GIL."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
