"""Numba switch.

Set ``HEATCHANNEL_DISABLE_NUMBA=1`` to force the pure-numpy kernels. Numba
is imported lazily, the first time a compiled kernel is requested.
"""
import functools
import os

_FALSY = {"", "0", "false", "no", "off"}


def numba_disabled():
    return os.environ.get("HEATCHANNEL_DISABLE_NUMBA", "").strip().lower() not in _FALSY


@functools.lru_cache(maxsize=1)
def have_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def use_numba():
    """True when compiled kernels are both available and not disabled."""
    return have_numba() and not numba_disabled()
