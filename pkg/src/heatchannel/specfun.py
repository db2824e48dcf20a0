"""Hermite functions and the real branches of the Lambert W function.

Hermite functions are evaluated with the normalized three-term recurrence
(carrying a separate logarithmic scale, so nothing overflows for large
orders or arguments). Lambert W is computed by Halley iteration from a
branch-appropriate starting point.

``w0`` and ``wm1`` are the inverse maps built on top of W that show up in
the closed-form capacity and rate-distortion formulas:

* ``w0``  inverts ``y = (2x - 1) exp(2x) + 1`` on ``x >= 0``
* ``wm1`` inverts ``y = (2x + 1) exp(-2x)``     on ``x >= 0``
"""
from dataclasses import dataclass
import functools
import math

import numpy as np

from .errors import DomainError, OrderRangeError

MAX_ORDER = 512

_EPS = np.finfo(float).eps
_INV_E = math.exp(-1.0)
# distance (in the inverse-map argument) below which w0/wm1 switch to bisection
_BRANCH_GUARD = 1e-8


def _elementwise(fn):
    """Let a scalar function accept arrays; scalars come back as float."""
    vec = np.vectorize(fn, otypes=[float])

    @functools.wraps(fn)
    def wrapper(x):
        if np.ndim(x) == 0:
            return fn(float(x))
        return vec(np.asarray(x, dtype=float))

    return wrapper


# ---------------------------------------------------------------------------
# Hermite functions


def _check_order(k, max_order=MAX_ORDER):
    if int(k) != k or k < 0:
        raise OrderRangeError(f"Hermite order must be a nonnegative integer, got {k!r}")
    if k > max_order:
        raise OrderRangeError(f"Hermite order {k} exceeds supported maximum {max_order}")
    return int(k)


def hermite_table(kmax, t):
    """Array of shape ``(kmax + 1, len(t))`` holding psi_0..psi_kmax at ``t``."""
    from . import _kernels

    kmax = _check_order(kmax)
    return _kernels.hermite_table(kmax, t)


def hermite_fn(k, t):
    """Normalized Hermite function psi_k(t).

    Parameters
    ----------
    k : int
        Order, ``0 <= k <= MAX_ORDER``.
    t : float or array_like
        Evaluation points.
    """
    k = _check_order(k)
    row = hermite_table(k, np.atleast_1d(t))[k]
    return float(row[0]) if np.ndim(t) == 0 else row.reshape(np.shape(t))


def dilated_hermite(k, t, gamma):
    """D_gamma psi_k(t) = gamma^{-1/2} psi_k(t / gamma)."""
    if not gamma > 0:
        raise DomainError(f"dilation gamma must be positive, got {gamma!r}")
    return hermite_fn(k, np.asarray(t, dtype=float) / gamma) / math.sqrt(gamma)


@dataclass(frozen=True)
class HermiteBasis:
    """Orthonormal basis of dilated Hermite functions D_gamma psi_k."""

    gamma: float
    max_order: int = MAX_ORDER

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"dilation gamma must be positive, got {self.gamma!r}")
        if self.max_order < 0 or self.max_order > MAX_ORDER:
            raise OrderRangeError(f"max_order must lie in [0, {MAX_ORDER}]")

    def table(self, t, kmax=None):
        """Rows k = 0..kmax of D_gamma psi_k sampled at ``t``."""
        kmax = self.max_order if kmax is None else _check_order(kmax, self.max_order)
        t = np.asarray(t, dtype=float).ravel()
        return hermite_table(kmax, t / self.gamma) / math.sqrt(self.gamma)

    def __call__(self, k, t):
        _check_order(k, self.max_order)
        return dilated_hermite(k, t, self.gamma)


# ---------------------------------------------------------------------------
# Lambert W


def _halley(w, x):
    best, best_res = w, math.inf
    for _ in range(40):
        ew = math.exp(w)
        f = w * ew - x
        res = abs(f)
        if res < best_res:
            best, best_res = w, res
        if res <= 2.0 * _EPS * max(abs(x), 1e-300):
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - dw
        if w_new == w:
            break
        w = w_new
    return best


def _branch_series(p):
    # W near -1/e in powers of p = +-sqrt(2 (e x + 1))
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))


def _branch_offset(x):
    """e*x + 1, clamped to 0 if x sits a few ulps below -1/e."""
    q = math.e * x + 1.0
    if q < 0.0:
        if q > -8.0 * _EPS:
            return 0.0
        raise DomainError(f"Lambert W is real only for x >= -1/e, got {x!r}")
    return q


@_elementwise
def lambert_w0(x):
    """Principal branch W_0(x) for real ``x >= -1/e``."""
    if math.isnan(x):
        raise DomainError("Lambert W of NaN")
    q = _branch_offset(x)
    if q == 0.0:
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if q < 0.25:
        w = _branch_series(math.sqrt(2.0 * q))
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    return _halley(w, x)


@_elementwise
def lambert_wm1(x):
    """Lower real branch W_{-1}(x) for ``-1/e <= x < 0``."""
    if math.isnan(x) or x >= 0.0:
        raise DomainError(f"W_-1 is real only on [-1/e, 0), got {x!r}")
    q = _branch_offset(x)
    if q == 0.0:
        return -1.0
    if q < 0.25:
        w = _branch_series(-math.sqrt(2.0 * q))
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    return _halley(w, x)


# ---------------------------------------------------------------------------
# inverse maps used by the closed forms


def _series_tail(z):
    # sum_{n>=2} (n - 1) z^n / n!, accurate for small |z|
    term = z
    total = 0.0
    for n in range(2, 30):
        term *= z / n
        inc = (n - 1) * term
        total += inc
        if abs(inc) <= _EPS * abs(total):
            break
    return total


@_elementwise
def w0_forward(x):
    """(2x - 1) exp(2x) + 1, without cancellation near x = 0."""
    if abs(x) < 0.05:
        return _series_tail(2.0 * x)
    return (2.0 * x - 1.0) * math.exp(2.0 * x) + 1.0


@_elementwise
def wm1_forward(x):
    """(2x + 1) exp(-2x), with 1 - value computed by series near x = 0."""
    if abs(x) < 0.05:
        return 1.0 - _series_tail(-2.0 * x)
    return (2.0 * x + 1.0) * math.exp(-2.0 * x)


def _bisect(fn, target, lo, hi, increasing):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        above = fn(mid) > target
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@_elementwise
def w0(y):
    """Inverse of ``(2x - 1) exp(2x) + 1`` restricted to ``x >= 0``."""
    if math.isnan(y) or y < 0.0:
        raise DomainError(f"w0 is defined for y >= 0, got {y!r}")
    if y == 0.0:
        return 0.0
    if y < _BRANCH_GUARD:
        return _bisect(w0_forward, y, 0.0, 2.0 * math.sqrt(y), increasing=True)
    return 0.5 * (1.0 + lambert_w0((y - 1.0) / math.e))


@_elementwise
def wm1(y):
    """Inverse of ``(2x + 1) exp(-2x)`` restricted to ``x >= 0``; needs ``0 < y <= 1``."""
    if math.isnan(y) or not 0.0 < y <= 1.0:
        raise DomainError(f"wm1 is defined for 0 < y <= 1, got {y!r}")
    if y == 1.0:
        return 0.0
    if 1.0 - y < _BRANCH_GUARD:
        return _bisect(wm1_forward, y, 0.0, 2.0 * math.sqrt(1.0 - y), increasing=False)
    return 0.5 * (-1.0 - lambert_wm1(-y / math.e))
