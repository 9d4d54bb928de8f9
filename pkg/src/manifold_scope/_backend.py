"""Kernel backend selection.

Heavy loops (neighbor search, batched curvature fits) exist twice: a numba
JIT implementation and a pure numpy one. The environment variable
MANIFOLD_SCOPE_BACKEND picks between them ("numba" or "numpy"). When unset,
numba is used if it imports, numpy otherwise.
"""

import os

ENV_BACKEND = "MANIFOLD_SCOPE_BACKEND"
ENV_THREADS = "MANIFOLD_SCOPE_THREADS"

_NAMES = ("numba", "numpy")


def _numba_usable():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend():
    """Resolve the backend name, honoring MANIFOLD_SCOPE_BACKEND."""
    choice = os.environ.get(ENV_BACKEND, "").strip().lower()
    if choice and choice not in _NAMES:
        raise ValueError(
            "unknown backend %r: expected one of %s" % (choice, ", ".join(_NAMES))
        )
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _numba_usable():
            raise RuntimeError("backend 'numba' requested but numba is not importable")
        return "numba"
    return "numba" if _numba_usable() else "numpy"


def get_kernels():
    """Return the kernel module for the active backend.

    Both modules expose the same functions with identical signatures:
    two_nearest_all, knn_batch and mapc_batch.
    """
    if active_backend() == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod


def set_threads(n):
    """Cap the JIT thread pool at ``n`` threads.

    Values above what the runtime can offer are clamped instead of raising,
    so a generous --threads flag is safe on small machines. Returns the
    effective thread count (always 1 for the numpy backend, which does not
    run a thread pool of its own).
    """
    n = int(n)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if active_backend() != "numba":
        return 1
    import numba

    effective = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(effective)
    return effective


def threads_from_env(default=None):
    """Read MANIFOLD_SCOPE_THREADS, returning ``default`` when unset."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError("MANIFOLD_SCOPE_THREADS must be an integer, got %r" % raw)
