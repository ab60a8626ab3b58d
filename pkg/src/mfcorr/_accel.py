"""Backend selection for the hot kernels.

Every kernel in :mod:`mfcorr._kernels` exists twice: a loop version compiled
with ``numba.njit`` and a vectorised pure-numpy version. The backend is read
from the environment at import time::

    MFCORR_BACKEND=numpy    # force the numpy path
    MFCORR_BACKEND=numba    # require numba (ImportError if missing)
    MFCORR_DISABLE_NUMBA=1  # same as MFCORR_BACKEND=numpy

and may be switched later with :func:`set_backend` / :func:`use_backend`.
"""
import os
from contextlib import contextmanager

# TBB on some images is too old and numba warns on every parallel launch;
# the portable workqueue layer is used unless the caller chose otherwise.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _from_env():
    if os.environ.get("MFCORR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes"):
        return "numpy"
    name = os.environ.get("MFCORR_BACKEND", "auto").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"MFCORR_BACKEND must be one of {BACKENDS} or 'auto', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("MFCORR_BACKEND=numba but numba is not installed")
    return name


_backend = _from_env()


def backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not installed")
    _backend = name


@contextmanager
def use_backend(name):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching; identity decorator without numba."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


prange = numba.prange if HAVE_NUMBA else range


def set_threads(k):
    """Cap numba worker threads. Outputs never depend on the value."""
    if not HAVE_NUMBA or k is None:
        return
    k = max(1, min(int(k), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(k)


def get_threads():
    return numba.get_num_threads() if HAVE_NUMBA else 1
