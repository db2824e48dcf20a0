"""Discrete water-filling over the heat-channel subchannels, its closed forms,
and the dual reverse water-filling for the filtered white-noise source.

The exact discrete solvers are the ground truth. Everything named
``*_closed_form`` or ``*_asymptotic`` is only asymptotically equal to them
(the difference is o(alpha*beta)).
"""
from dataclasses import dataclass
import math

import numpy as np

from .channel import MAX_TERMS
from .errors import DomainError, OrderRangeError
from .specfun import w0, wm1

LOG2E = 1.0 / math.log(2.0)
# relative slack for deciding ties, so that rounding in the partial sums
# cannot flip the documented tie-break
_TIE = 4.0 * np.finfo(float).eps


def nats_to_bits(x):
    return x * LOG2E


def bits_to_nats(x):
    return x / LOG2E


def _check_positive(name, v, allow_zero=False):
    ok = v >= 0 if allow_zero else v > 0
    if not (math.isfinite(v) and ok):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"{name} must be finite and {bound}, got {v!r}")


def _first_true(pred, max_count):
    """Smallest K in 1..max_count with pred(K array) true; scanned in growing chunks."""
    start, size = 1, 256
    while start <= max_count:
        K = np.arange(start, min(start + size, max_count + 1), dtype=np.int64)
        hits = np.flatnonzero(pred(K))
        if hits.size:
            return int(K[hits[0]])
        start += size
        size = min(2 * size, 1 << 20)
    return None


@dataclass(frozen=True)
class WaterfillSolution:
    """Exact water-filling solution.

    ``allocation[k]`` is the energy poured into subchannel k; only the K
    active subchannels (strictly positive allocation) are listed.
    """

    sigma2: float
    K: int
    allocation: np.ndarray
    capacity_nats: float
    capacity_bits: float
    input_energy: float
    params: object

    @property
    def noise_variances(self):
        return self.params.theta2 * np.exp(self.params.delta * (2.0 * np.arange(self.K) + 1.0))


def solve_waterfill(S, params, max_subchannels=MAX_TERMS):
    """Pour energy S over noise levels nu_k^2 = theta2 * rho**(-2k-1).

    K is found by a linear scan: the first K whose level
    ``(S + sum_{k<K} nu_k^2) / K`` does not exceed nu_K^2. At a tie (to a
    few ulps) subchannel K stays inactive.
    """
    _check_positive("S", S)
    th2, d = params.theta2, params.delta
    denom = math.expm1(2.0 * d)

    def level(K):
        # closed-form geometric partial sum of the noise variances
        cum = th2 * math.exp(d) * np.expm1(2.0 * d * K) / denom
        return (S + cum) / K

    def done(K):
        with np.errstate(over="ignore", invalid="ignore"):
            nu2 = th2 * np.exp(d * (2.0 * K + 1.0))
            return (level(K) <= nu2 * (1.0 + _TIE)) & np.isfinite(nu2)

    K = _first_true(done, max_subchannels)
    if K is None:
        raise OrderRangeError(f"S = {S!r} needs more than {max_subchannels} subchannels")
    sigma2 = float(level(np.array([K]))[0])
    k = np.arange(K)
    allocation = sigma2 - th2 * np.exp(d * (2.0 * k + 1.0))
    log_ratio = math.log(sigma2 / th2) - d * (2.0 * k + 1.0)
    c = 0.5 * math.fsum(log_ratio)
    return WaterfillSolution(sigma2, K, allocation, c, nats_to_bits(c), float(S), params)


def capacity_closed_form(S, params):
    """Asymptotic capacity in bits, (ab/2) * w0(S / ((ab/2) theta2))**2 * log2(e)."""
    _check_positive("S", S, allow_zero=True)
    half = 0.5 * params.dof
    return half * w0(S / (half * params.theta2)) ** 2 * LOG2E


def energy_closed_form(sigma2, params):
    """Asymptotic input energy for water level sigma2: (ab/2) theta2 (r ln r - r + 1), r = sigma2/theta2."""
    r = sigma2 / params.theta2
    if r <= 1.0:
        return 0.0
    return 0.5 * params.dof * params.theta2 * (r * math.log(r) - r + 1.0)


def capacity_from_water_level(sigma2, params):
    """Asymptotic capacity in nats, (ab/2) (ln(sigma2/theta2) / 2)**2."""
    r = sigma2 / params.theta2
    return 0.5 * params.dof * (0.5 * math.log(r)) ** 2 if r > 1.0 else 0.0


def spectral_efficiency_heat(snr):
    """C/W in bit/s/Hz of the heat channel at SNR = P / (W N0), W = beta/2."""
    return w0(2.0 * np.asarray(snr, dtype=float)) ** 2 * LOG2E


def rate_per_second(P, beta, theta2):
    """Capacity in bit/s for average power P: (beta/2) w0(P / ((beta/2) theta2))**2 log2(e)."""
    _check_positive("P", P, allow_zero=True)
    _check_positive("beta", beta)
    _check_positive("theta2", theta2)
    half = 0.5 * beta
    return half * w0(P / (half * theta2)) ** 2 * LOG2E


def wideband_limit(P, theta2):
    """Limit of :func:`rate_per_second` as beta -> infinity, (P / 2 theta2) log2(e)."""
    return P / (2.0 * theta2) * LOG2E


def shannon_bandlimited(P, W, N0):
    """W log2(1 + P / (W N0)) bit/s."""
    for name, v in (("P", P), ("W", W), ("N0", N0)):
        _check_positive(name, v)
    return W * math.log2(1.0 + P / (W * N0))


def spectral_efficiency_shannon(snr):
    return np.log2(1.0 + np.asarray(snr, dtype=float))


def active_subchannels_asymptotic(sigma2, params):
    if not sigma2 > params.theta2:
        raise DomainError(f"water level {sigma2!r} must exceed theta2 = {params.theta2!r}")
    return 0.5 * params.dof * math.log(sigma2 / params.theta2)


def capacity_from_output(e_out_hat, params):
    """Asymptotic capacity in bits from the measured-output energy."""
    _check_positive("E_out_hat", e_out_hat, allow_zero=True)
    half = 0.5 * params.dof
    return half * (0.5 * math.log1p(e_out_hat / (half * params.theta2))) ** 2 * LOG2E


def e_out_hat_asymptotic(sigma2, params):
    """(ab/2)(sigma2 - theta2), the asymptotic measured-output energy at water level sigma2."""
    return 0.5 * params.dof * (sigma2 - params.theta2)


@dataclass(frozen=True)
class EnergyBalance:
    e_in: float
    e_out: float
    e_err: float
    e_out_hat: float


def energy_balance(sol, params):
    """Average energies around the channel for an optimal input."""
    k = np.arange(sol.K)
    sk = sol.sigma2 * np.exp(-params.delta * (2.0 * k + 1.0))
    e_out = math.fsum(sk - params.theta2)
    e_err = sol.K * params.theta2
    return EnergyBalance(sol.input_energy, e_out, e_err, e_out + e_err)


# ---------------------------------------------------------------------------
# rate distortion of the filtered white-noise source


@dataclass(frozen=True)
class RateDistortionSolution:
    """Reverse water-filling solution; sources k < K are coded.

    ``distortion`` is the distortion actually incurred, min(D, E) where E
    is the source energy; for D >= E nothing is coded and the water table
    sits at the largest source variance.
    """

    theta2_table: float
    K: int
    distortion: float
    rate_nats: float
    rate_bits: float
    source_sigma2: float


def source_energy(sigma2_src, params):
    """E = sigma2 rho / (1 - rho^2)."""
    return sigma2_src * 0.5 / params.sinh_delta


def solve_reverse_waterfill(D, sigma2_src, params, max_sources=MAX_TERMS):
    """Exact reverse water-filling on sigma_k^2 = sigma2 rho**(2k+1).

    At a tie theta2 = sigma_K^2 (to a few ulps) source K is not coded.
    """
    _check_positive("D", D)
    _check_positive("sigma2_src", sigma2_src)
    d = params.delta
    E = source_energy(sigma2_src, params)
    if D >= E:
        top = sigma2_src * math.exp(-d)
        return RateDistortionSolution(top, 0, E, 0.0, 0.0, sigma2_src)
    one_minus = -math.expm1(-2.0 * d)

    def table(K):
        tail = sigma2_src * np.exp(-d * (2.0 * K + 1.0)) / one_minus
        return (D - tail) / K

    def done(K):
        return table(K) >= sigma2_src * np.exp(-d * (2.0 * K + 1.0)) * (1.0 - _TIE)

    K = _first_true(done, max_sources)
    if K is None:
        raise OrderRangeError(f"D = {D!r} needs more than {max_sources} coded sources")
    th2 = float(table(np.array([K]))[0])
    k = np.arange(K)
    r = 0.5 * math.fsum(math.log(sigma2_src / th2) - d * (2.0 * k + 1.0))
    return RateDistortionSolution(th2, K, float(D), r, nats_to_bits(r), sigma2_src)


def rd_closed_form(D, sigma2_src, params):
    """Asymptotic rate in nats, (ab/2) wm1(D / ((ab/2) sigma2))**2; zero beyond (ab/2) sigma2."""
    if not (math.isfinite(D) and D > 0):
        raise DomainError(f"D must be positive, got {D!r}")
    _check_positive("sigma2_src", sigma2_src)
    half = 0.5 * params.dof
    x = D / (half * sigma2_src)
    if x >= 1.0:
        return 0.0
    return half * wm1(x) ** 2


def distortion_closed_form(theta2_table, sigma2_src, params):
    """Asymptotic distortion at water table theta2: (ab/2) theta2 (ln(sigma2/theta2) + 1)."""
    r = sigma2_src / theta2_table
    if r <= 1.0:
        return 0.5 * params.dof * sigma2_src
    return 0.5 * params.dof * theta2_table * (math.log(r) + 1.0)
