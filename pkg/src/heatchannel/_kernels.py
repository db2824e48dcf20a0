"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public entry points ``hermite_table`` and ``localize`` dispatch on
:func:`heatchannel._accel.use_numba`; the ``*_numpy`` and ``*_numba``
variants are importable directly so tests and the benchmark can compare
the two paths.
"""
import functools
import math

import numpy as np

from ._accel import use_numba

# rescale the recurrence state once it leaves [1e-150, 1e150]
_BIG = 1e150
_LOG_BIG = math.log(_BIG)
_LOG_PI_QUARTER = -0.25 * math.log(math.pi)
# exp(-_KERNEL_CUTOFF) ~ 2e-22: kernel samples below that are dropped
_KERNEL_CUTOFF = 50.0


def hermite_table_numpy(kmax, t):
    """Rows 0..kmax of normalized Hermite functions at points ``t``."""
    t = np.asarray(t, dtype=np.float64).ravel()
    out = np.empty((kmax + 1, t.size))
    log_scale = -0.5 * t * t + _LOG_PI_QUARTER
    prev = np.zeros_like(t)
    cur = np.ones_like(t)
    out[0] = np.exp(log_scale)
    for k in range(kmax):
        nxt = t * math.sqrt(2.0 / (k + 1)) * cur - math.sqrt(k / (k + 1.0)) * prev
        big = np.abs(nxt) > _BIG
        if big.any():
            nxt[big] /= _BIG
            cur[big] /= _BIG
            log_scale[big] += _LOG_BIG
        prev, cur = cur, nxt
        out[k + 1] = cur * np.exp(log_scale)
    return out


def _hermite_table_loop(kmax, t, out):
    n = t.shape[0]
    prev = np.zeros(n)
    cur = np.ones(n)
    log_scale = np.empty(n)
    scale = np.empty(n)
    for i in range(n):
        log_scale[i] = -0.5 * t[i] * t[i] + _LOG_PI_QUARTER
        scale[i] = math.exp(log_scale[i])
        out[0, i] = scale[i]
    for k in range(kmax):
        a = math.sqrt(2.0 / (k + 1))
        b = math.sqrt(k / (k + 1.0))
        for i in range(n):
            nxt = a * t[i] * cur[i] - b * prev[i]
            c = cur[i]
            if abs(nxt) > _BIG:
                nxt /= _BIG
                c /= _BIG
                log_scale[i] += _LOG_BIG
                scale[i] = math.exp(log_scale[i])
            prev[i] = c
            cur[i] = nxt
            out[k + 1, i] = nxt * scale[i]
    return out


def _localize_loop(f, t0, h, window, width, cosh_delta, out):
    n = f.shape[0]
    pref = width / math.sqrt(2.0 * math.pi * cosh_delta) * h
    reach = math.sqrt(2.0 * _KERNEL_CUTOFF) / width
    for i in range(n):
        x = t0 + i * h
        c = x / cosh_delta
        jlo = int(math.floor((c - reach - t0) / h))
        jhi = int(math.ceil((c + reach - t0) / h))
        if jlo < 0:
            jlo = 0
        if jhi > n - 1:
            jhi = n - 1
        acc = 0.0
        for j in range(jlo, jhi + 1):
            d = c - (t0 + j * h)
            acc += math.exp(-0.5 * width * width * d * d) * f[j]
        out[i] = math.exp(-0.5 * x * x / (window * window)) * pref * acc
    return out


def localize_numpy(f, t0, h, window, width, cosh_delta, block=256):
    """Quadrature of the Gaussian localization integral on a uniform grid.

    Evaluates ``exp(-x^2/2a^2) * b/sqrt(2 pi cosh) * int exp(-b^2/2 (x/cosh - x')^2) f(x') dx'``
    with ``a = window`` and ``b = width`` at every grid node, using the
    rectangle rule (the integrand is negligible at the grid ends).
    """
    f = np.asarray(f, dtype=np.float64)
    n = f.size
    x = t0 + h * np.arange(n)
    pref = width / math.sqrt(2.0 * math.pi * cosh_delta) * h
    out = np.empty(n)
    for lo in range(0, n, block):
        xi = x[lo:lo + block]
        d = xi[:, None] / cosh_delta - x[None, :]
        kern = np.exp(-0.5 * width * width * d * d)
        out[lo:lo + block] = kern @ f
    return np.exp(-0.5 * x * x / (window * window)) * pref * out


@functools.lru_cache(maxsize=None)
def _compiled():
    import numba

    jit = numba.njit(cache=True, fastmath=False)
    return jit(_hermite_table_loop), jit(_localize_loop)


def hermite_table_numba(kmax, t):
    t = np.ascontiguousarray(np.asarray(t, dtype=np.float64).ravel())
    out = np.empty((kmax + 1, t.size))
    return _compiled()[0](kmax, t, out)


def localize_numba(f, t0, h, window, width, cosh_delta):
    f = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty_like(f)
    return _compiled()[1](f, float(t0), float(h), float(window), float(width),
                          float(cosh_delta), out)


def hermite_table(kmax, t):
    if use_numba():
        return hermite_table_numba(kmax, t)
    return hermite_table_numpy(kmax, t)


def localize(f, t0, h, window, width, cosh_delta):
    if use_numba():
        return localize_numba(f, t0, h, window, width, cosh_delta)
    return localize_numpy(f, t0, h, window, width, cosh_delta)
