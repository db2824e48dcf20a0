"""Water-filling and reverse water-filling in the time-frequency plane, and a
numerical check of the trace (Szego) asymptotics for the squared filter.

Every phase-plane integrand here depends on (t, omega) only through
``u = t^2/alpha^2 + omega^2/beta^2``, so with ``dt domega = pi*alpha*beta du``
the double integrals collapse to elementary 1-D forms. The generic 2-D
quadrature in :func:`phase_plane_quad` is kept as an independent check of
those reductions.
"""
from dataclasses import dataclass
import math
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .channel import eigen_sum
from .errors import ContractError, DomainError
from .specfun import w0_forward
from .waterfill import LOG2E

# integrands are cut off where they drop below this fraction of their peak
_PEAK_CUTOFF = 1e-16
_U_CUTOFF = -math.log(_PEAK_CUTOFF)


def phase_plane_quad(f, params, u_break, u_max, epsrel=1e-12):
    """Adaptive 2-D quadrature of ``f(t, omega)`` over the disc u <= u_max.

    Works in scaled coordinates x = t/alpha, y = omega/beta over one
    quadrant (all in-scope integrands are even in t and omega) and splits the
    inner and outer integrals at the circle u = u_break, where the
    integrands have a kink.
    """
    a, b = params.alpha, params.beta
    rb2, rm2 = u_break, u_max
    opts = dict(epsabs=0.0, epsrel=epsrel, limit=200)

    def inner(x):
        lo = 0.0
        ymax = math.sqrt(max(rm2 - x * x, 0.0))
        pieces = []
        if x * x < rb2:
            yb = min(math.sqrt(rb2 - x * x), ymax)
            pieces.append((lo, yb))
            lo = yb
        if ymax > lo:
            pieces.append((lo, ymax))
        return sum(integrate.quad(lambda y: f(a * x, b * y), p, q, **opts)[0] for p, q in pieces)

    rb, rm = math.sqrt(min(rb2, rm2)), math.sqrt(rm2)
    total = integrate.quad(inner, 0.0, rb, **opts)[0]
    if rm > rb:
        total += integrate.quad(inner, rb, rm, **opts)[0]
    return 4.0 * a * b * total


def _solve_level(target):
    """L >= 0 with (L - 1) e^L + 1 = target, by bracketed Brent iteration."""
    if target <= 0.0:
        return 0.0
    g = lambda L: w0_forward(0.5 * L) - target
    hi = 1.0
    while g(hi) < 0.0:
        hi *= 2.0
    return optimize.brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class TFWaterfillResult:
    """Water level ``nu`` over the noise cup and the resulting capacity.

    ``fill_radius_L`` is the radial extent of the filled region in u.
    The ``*_quadrature`` fields hold the 2-D quadrature cross-check (None
    when it was skipped).
    """

    nu: float
    capacity_bits: float
    input_energy: float
    fill_radius_L: float
    energy_quadrature: Optional[float] = None
    capacity_quadrature_bits: Optional[float] = None

    @property
    def capacity_nats(self):
        return self.capacity_bits / LOG2E


def tf_energy(nu, params):
    """Radial closed form of the poured energy for water level nu."""
    c = params.theta2 * params.cosh_delta / (2.0 * math.pi)
    if nu <= c:
        return 0.0
    L = math.log(nu / c)
    return 0.5 * params.dof * params.theta2 * params.cosh_delta * w0_forward(0.5 * L)


def tf_waterfill(S, params, cross_check=True):
    """Capacity by water-filling the noise cup N(t, omega) with energy S."""
    if not (math.isfinite(S) and S > 0):
        raise DomainError(f"S must be positive, got {S!r}")
    half = 0.5 * params.dof
    cosh = params.cosh_delta
    L = _solve_level(S / (half * params.theta2 * cosh))
    c = params.theta2 * cosh / (2.0 * math.pi)
    nu = c * math.exp(L)
    cap = half * (0.5 * L) ** 2 * LOG2E
    s_q = c_q = None
    if cross_check and L > 0.0:
        s_q, c_q = _tf_quadrature(nu, L, params)
    return TFWaterfillResult(nu, cap, float(S), L, s_q, c_q)


def _tf_quadrature(nu, L, params):
    a2, b2 = params.alpha ** 2, params.beta ** 2
    c = params.theta2 * params.cosh_delta / (2.0 * math.pi)

    def cup(t, w):
        return c * math.exp(t * t / a2 + w * w / b2)

    def fill(t, w):
        return max(nu - cup(t, w), 0.0)

    def rate(t, w):
        n = cup(t, w)
        return 0.5 * math.log2(1.0 + max(nu - n, 0.0) / n) / (2.0 * math.pi)

    return (phase_plane_quad(fill, params, L, L),
            phase_plane_quad(rate, params, L, L))


@dataclass(frozen=True)
class TFReverseResult:
    lam: float
    distortion: float
    rate_nats: float
    distortion_quadrature: Optional[float] = None
    rate_quadrature_nats: Optional[float] = None

    @property
    def rate_bits(self):
        return self.rate_nats * LOG2E


def tf_reverse_waterfill(lam, sigma2_src, params, cross_check=True):
    """Distortion and rate for water table ``lam`` under the Wigner-Ville spectrum."""
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not sigma2_src > 0:
        raise DomainError(f"sigma2_src must be positive, got {sigma2_src!r}")
    peak = sigma2_src / (2.0 * math.pi * params.cosh_delta)
    pi_ab = math.pi * params.dof
    if lam >= peak:
        D, R, M = pi_ab * peak, 0.0, 0.0
    else:
        M = math.log(peak / lam)
        D = pi_ab * lam * (M + 1.0)
        R = 0.5 * params.dof * (0.5 * M) ** 2
    d_q = r_q = None
    if cross_check:
        d_q, r_q = _tf_reverse_quadrature(lam, peak, M, params)
    return TFReverseResult(float(lam), D, R, d_q, r_q)


def _tf_reverse_quadrature(lam, peak, M, params):
    a2, b2 = params.alpha ** 2, params.beta ** 2

    def phi(t, w):
        return peak * math.exp(-(t * t / a2 + w * w / b2))

    def dist(t, w):
        return min(lam, phi(t, w))

    def rate(t, w):
        p = phi(t, w)
        return max(0.0, 0.5 * math.log(p / lam)) / (2.0 * math.pi) if p > 0 else 0.0

    d_q = phase_plane_quad(dist, params, M, M + _U_CUTOFF)
    r_q = phase_plane_quad(rate, params, M, M) if M > 0 else 0.0
    return d_q, r_q


def tf_reverse_at_table(theta2_table, sigma2_src, params, cross_check=True):
    """Time-frequency reverse water-filling at lambda = theta2_table / (2 pi)."""
    return tf_reverse_waterfill(theta2_table / (2.0 * math.pi), sigma2_src, params, cross_check)


# ---------------------------------------------------------------------------
# trace asymptotics


@dataclass(frozen=True)
class SzegoTestFunction:
    """G(z) = a * g(b * z) with g continuous, g(0) = 0 and g(x)/x bounded near 0.

    ``radial(c)`` is the closed form of the u-integral of G(c e^{-u}) over
    u >= 0; ``kink(c)`` the u at which the integrand has a kink (or None).
    """

    label: str
    G: Callable[[np.ndarray], np.ndarray]
    radial: Callable[[float], float]
    kink: Callable[[float], Optional[float]]


def _check_coef(name, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
        raise ContractError(f"{name} must be a finite nonnegative number, got {v!r}")


def monomial(n):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ContractError(f"monomial degree must be an integer >= 1 (g(x)/x must stay bounded), got {n!r}")
    n = int(n)
    return SzegoTestFunction(f"monomial({n})", lambda z: z ** n, lambda c: c ** n / n, lambda c: None)


def _log_ratio(x):
    return math.log(x) if x > 0 else -math.inf


def log_plus(b):
    """G(z) = (1/2) ln_+(b z); the capacity integrand."""
    _check_coef("b", b)

    def G(z):
        with np.errstate(divide="ignore"):
            return 0.5 * np.maximum(np.log(b * z), 0.0)

    def radial(c):
        m = _log_ratio(b * c)
        return 0.25 * m * m if m > 0 else 0.0

    return SzegoTestFunction(f"log_plus({b:g})", G, radial,
                             lambda c: _log_ratio(b * c) if b * c > 1 else None)


def clipped_inverse(a, b):
    """G(z) = a (1 - 1/(b z))^+; the energy integrand of water-filling."""
    _check_coef("a", a)
    _check_coef("b", b)

    def G(z):
        bz = b * np.asarray(z, dtype=float)
        return a * np.where(bz > 1.0, 1.0 - 1.0 / np.where(bz > 1.0, bz, 1.0), 0.0)

    def radial(c):
        m = _log_ratio(b * c)
        return a * (m - 1.0 + 1.0 / (b * c)) if m > 0 else 0.0

    return SzegoTestFunction(f"clipped_inverse({a:g},{b:g})", G, radial,
                             lambda c: _log_ratio(b * c) if b * c > 1 else None)


def min_one(b, a=1.0):
    """G(z) = a min{1, b z}; the distortion integrand of reverse water-filling."""
    _check_coef("a", a)
    _check_coef("b", b)

    def radial(c):
        m = _log_ratio(b * c)
        return a * (m + 1.0) if m > 0 else a * b * c

    label = f"min_one({b:g})" if a == 1.0 else f"min_one({b:g},a={a:g})"
    return SzegoTestFunction(label, lambda z: a * np.minimum(1.0, b * z), radial,
                             lambda c: _log_ratio(b * c) if b * c > 1 else None)


@dataclass(frozen=True)
class SzegoReport:
    test_function_id: str
    dof: float
    lhs: float
    rhs: float
    rhs_quadrature: float
    normalized_gap: float


def szego_check(test_fn, params):
    """Eigenvalue sum of G versus the phase-plane integral of G of the Weyl symbol."""
    if not isinstance(test_fn, SzegoTestFunction):
        raise ContractError("test function must be built by monomial/log_plus/clipped_inverse/min_one")
    lhs = eigen_sum(test_fn.G, params)
    c = 1.0 / params.cosh_delta
    half = 0.5 * params.dof
    rhs = half * test_fn.radial(c)
    kink = test_fn.kink(c)
    pts = [kink] if kink is not None and kink > 0 else None
    upper = _U_CUTOFF + (kink or 0.0)
    val = integrate.quad(lambda u: float(test_fn.G(np.array(c * math.exp(-u)))), 0.0, upper,
                         points=pts, epsabs=0.0, epsrel=1e-13, limit=400)[0]
    return SzegoReport(test_fn.label, params.dof, lhs, rhs, half * val, abs(lhs - rhs) / params.dof)
