"""Parametric capacity of the time-invariant Gaussian-filter channel (the
Gallager waveform channel) and the spectral-efficiency comparison with the
heat channel and the ideal bandlimited channel.

The LTI filter has impulse response

    h1(t) = beta / sqrt(2 pi) * exp(-beta^2 t^2 / 2),
    H1(f) = exp(-omega^2 / (2 beta^2)),  omega = 2 pi f,

so after AWGN of PSD theta2 the effective noise density to water-fill is
N1(omega) = theta2 / (2 pi) * exp(omega^2 / beta^2) with water level
nu1 = B / (2 pi). With r = B / theta2 and l = ln r the two parametric
integrals reduce to

    C / (beta/2)   = (2 / 3 pi) l^{3/2} log2(e)
    P / (beta th2) = (1 / pi) int_0^sqrt(l) (r - exp(x^2)) dx.

SNR convention throughout: SNR = P / (W N0) with W = beta/2, N0 = 2 theta2.
"""
from dataclasses import dataclass
import bisect
import math
import threading

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError
from .waterfill import LOG2E, spectral_efficiency_heat, spectral_efficiency_shannon

_SE_COEF = 2.0 / (3.0 * math.pi) * LOG2E
# largest l = ln r for which r stays finite in double precision
_L_MAX = 700.0


def noise_density(omega, theta2, beta):
    """N1(omega) = (theta2 / 2 pi) exp(omega^2 / beta^2)."""
    return theta2 / (2.0 * math.pi) * np.exp((np.asarray(omega, dtype=float) / beta) ** 2)


def frequency_response(f, beta):
    """H1(f) = exp(-(2 pi f)^2 / (2 beta^2))."""
    w = 2.0 * math.pi * np.asarray(f, dtype=float)
    return np.exp(-0.5 * (w / beta) ** 2)


def impulse_response(t, beta):
    """h1(t), a unit-area Gaussian of standard deviation 1/beta."""
    t = np.asarray(t, dtype=float)
    return beta / math.sqrt(2.0 * math.pi) * np.exp(-0.5 * (beta * t) ** 2)


def exp_square_integral_series(a):
    """int_0^a exp(x^2) dx by its Taylor series, sum a^(2n+1) / (n! (2n+1))."""
    a = float(a)
    a2 = a * a
    term = a  # a^(2n+1)/n!
    total = a
    n = 0
    while True:
        n += 1
        term *= a2 / n
        inc = term / (2 * n + 1)
        total += inc
        if inc <= 1e-17 * total:
            return total


def _snr_of_log_ratio(l):
    # r - e^{x^2} = e^{x^2} (e^{l - x^2} - 1), written to avoid cancellation near x = sqrt(l)
    if l <= 0.0:
        return 0.0
    val = integrate.quad(lambda x: math.exp(x * x) * math.expm1(l - x * x), 0.0, math.sqrt(l),
                         epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return val / math.pi


@dataclass(frozen=True)
class GallagerPoint:
    r: float
    snr: float
    se: float


def gallager_point(r):
    """Spectral efficiency and SNR of the Gaussian-filter channel at parameter r = B/theta2."""
    if not (math.isfinite(r) and r >= 1.0):
        raise DomainError(f"r must be >= 1 (r <= 1 carries no capacity), got {r!r}")
    l = math.log(r)
    if l > _L_MAX:
        raise DomainError(f"r = {r!r} too large to represent the water level")
    return GallagerPoint(float(r), _snr_of_log_ratio(l), _SE_COEF * l ** 1.5)


class _InverseTable:
    """Monotone table of (snr, l) built once; queries are bracketed and polished."""

    def __init__(self):
        self._lock = threading.Lock()
        self._snr = None
        self._l = None

    def _build(self):
        with self._lock:
            if self._snr is None:
                ls = np.concatenate([np.geomspace(1e-12, 1.0, 97)[:-1], np.linspace(1.0, _L_MAX, 300)])
                self._l = [float(v) for v in ls]
                self._snr = [_snr_of_log_ratio(v) for v in self._l]

    def log_ratio(self, snr):
        if self._snr is None:
            self._build()
        snrs, ls = self._snr, self._l
        if snr > snrs[-1]:
            raise DomainError(f"snr = {snr!r} beyond representable range")
        i = bisect.bisect_left(snrs, snr)
        if i < len(snrs) and snrs[i] == snr:
            return ls[i]
        if i == 0:
            # small-l expansion snr ~ (2 / 3 pi) l^{3/2}; bracket around it
            guess = (1.5 * math.pi * snr) ** (2.0 / 3.0)
            lo, hi = 0.5 * guess, min(2.0 * guess, ls[0])
        else:
            lo, hi = ls[i - 1], ls[i]
        return optimize.brentq(lambda l: _snr_of_log_ratio(l) - snr, lo, hi,
                               xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)


_TABLE = _InverseTable()


def gallager_se_at_snr(snr):
    """Spectral efficiency (bit/s/Hz) of the Gaussian-filter channel at a given SNR."""
    if not (math.isfinite(snr) and snr > 0):
        raise DomainError(f"snr must be positive, got {snr!r}")
    return _SE_COEF * _TABLE.log_ratio(float(snr)) ** 1.5


def _eb_n0_db(snr, se):
    return 10.0 * math.log10(snr / se)


@dataclass(frozen=True)
class SpectralEfficiencyPoint:
    snr: float
    se_heat: float
    se_shannon: float
    se_gallager: float
    eb_n0_db_heat: float
    eb_n0_db_shannon: float
    eb_n0_db_gallager: float


def compare_curves(snr_grid):
    """Heat, bandlimited and Gaussian-filter spectral efficiencies on an ascending SNR grid."""
    grid = [float(s) for s in snr_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("snr grid must be sorted ascending")
    out = []
    for s in grid:
        if not s > 0:
            raise DomainError(f"snr must be positive, got {s!r}")
        h = float(spectral_efficiency_heat(s))
        sh = float(spectral_efficiency_shannon(s))
        g = gallager_se_at_snr(s)
        out.append(SpectralEfficiencyPoint(s, h, sh, g, _eb_n0_db(s, h), _eb_n0_db(s, sh), _eb_n0_db(s, g)))
    return out


def _refine(diff, lo, hi):
    # root of diff in log-snr, bracketed
    return math.exp(optimize.brentq(lambda x: diff(math.exp(x)), math.log(lo), math.log(hi), xtol=1e-14))


def heat_gallager_crossing(lo=0.01, hi=10.0):
    """SNR where the heat and Gaussian-filter curves meet, by bracketing in (lo, hi)."""
    diff = lambda s: float(spectral_efficiency_heat(s)) - gallager_se_at_snr(s)
    if diff(lo) * diff(hi) >= 0:
        raise DomainError(f"no sign change of se_heat - se_gallager on [{lo}, {hi}]")
    return _refine(diff, lo, hi)


def heat_shannon_crossover(snr_grid=None):
    """SNR above which the heat channel beats the bandlimited channel on the sampled grid.

    Returns the refined root of the last sign change of se_heat - se_shannon
    on the grid; heat exceeds Shannon at every grid point beyond it.
    """
    grid = np.geomspace(1e-2, 1e8, 201) if snr_grid is None else np.asarray(snr_grid, dtype=float)
    d = spectral_efficiency_heat(grid) - spectral_efficiency_shannon(grid)
    if d[-1] <= 0:
        raise DomainError("heat channel does not overtake the bandlimited channel on the grid")
    neg = np.flatnonzero(d <= 0)
    if neg.size == 0:
        raise DomainError("no crossover on the grid: heat channel ahead everywhere")
    i = int(neg[-1])
    diff = lambda s: float(spectral_efficiency_heat(s) - spectral_efficiency_shannon(s))
    return _refine(diff, grid[i], grid[i + 1])
