"""Monte-Carlo check of the matched-filter measurement model, and the
estimation quantities (LLSE, MMSE, derivative of the smooth capacity).

Random numbers come from counter-based Philox streams keyed by
``(seed, role, k, block)``, so a report depends only on the seed and the
configuration, never on how many workers produced the blocks. Block
statistics are merged in block order.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from .channel import ChannelParams, Grid, apply_filter_waveform
from .errors import ContractError, DomainError
from .specfun import MAX_ORDER, HermiteBasis
from .waterfill import WaterfillSolution, solve_waterfill

MODES = ("coefficient", "waveform")
_ROLE_INPUT, _ROLE_NOISE, _ROLE_GRID_NOISE = 0, 1, 2


@dataclass(frozen=True)
class SimulationConfig:
    """Monte-Carlo settings.

    ``block`` is the number of trials drawn per random stream; it is part
    of the configuration, so changing it changes the draws.
    """

    params: ChannelParams
    S: float
    trials: int = 100_000
    seed: int = 0
    mode: str = "coefficient"
    grid: Optional[Grid] = None
    block: int = 8192
    workers: int = 1

    def __post_init__(self):
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 2):
            raise DomainError(f"trials must be an integer >= 2, got {self.trials!r}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2 ** 64):
            raise DomainError(f"seed must be a 64-bit nonnegative integer, got {self.seed!r}")
        if self.block < 1 or self.workers < 1:
            raise DomainError("block and workers must be positive")
        if not (math.isfinite(self.S) and self.S > 0):
            raise DomainError(f"S must be positive, got {self.S!r}")
        if self.mode == "waveform":
            self.resolved_grid().check(self.params, "time")

    def resolved_grid(self):
        return self.grid if self.grid is not None else Grid.for_channel(self.params)


@dataclass(frozen=True)
class SimulationReport:
    """Sample statistics of one Monte-Carlo run.

    ``empirical_noise_var[k]`` is the sample variance of yhat_k - y_k and
    ``empirical_estimate_var[k]`` that of xhat_k - x_k. ``empirical_cross_cov``
    is the largest absolute off-diagonal sample correlation of the noise.
    Energy means and their standard errors are keyed e_in, e_out,
    e_out_hat, e_err.
    """

    mode: str
    trials: int
    seed: int
    K: int
    theta2: float
    empirical_noise_var: np.ndarray
    empirical_estimate_var: np.ndarray
    empirical_input_var: np.ndarray
    empirical_cross_cov: float
    empirical_energy_balance: dict
    energy_standard_error: dict
    analytic_e_out_hat: float
    capacity_reference: float
    noise_var_standard_error: float = field(init=False)

    def __post_init__(self):
        # standard error of a Gaussian sample variance, sigma^2 sqrt(2 / (n - 1))
        object.__setattr__(self, "noise_var_standard_error", self.theta2 * math.sqrt(2.0 / (self.trials - 1)))


@dataclass(frozen=True)
class InputSample:
    x: np.ndarray
    waveform: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Measurement:
    y: np.ndarray
    y_hat: np.ndarray
    x_hat: np.ndarray


def _filter_gains(params, K):
    return np.exp(-params.delta * (np.arange(K) + 0.5))


def _render(x, grid, gamma):
    K = x.shape[-1]
    if K - 1 > MAX_ORDER:
        raise ContractError(f"waveform rendering supports at most {MAX_ORDER + 1} subchannels, got {K}")
    return x @ HermiteBasis(gamma).table(grid.points(), K - 1)


def synthesize_optimal_input(sol, rng, trials=None, grid=None):
    """Draw capacity-achieving inputs x_k ~ N(0, sigma2 - nu_k^2), k < K.

    Returns an :class:`InputSample`; with ``grid`` the waveform
    sum_k x_k D_gamma psi_k is rendered as well.
    """
    if not isinstance(sol, WaterfillSolution):
        raise ContractError("expected a WaterfillSolution")
    shape = (sol.K,) if trials is None else (int(trials), sol.K)
    x = rng.standard_normal(shape) * np.sqrt(sol.allocation)
    wave = _render(x, grid, sol.params.gamma) if grid is not None else None
    return InputSample(x, wave)


def _measure(x, z, params, mode, grid, noise_var):
    """Measurement from standard normals ``z`` (per subchannel, or per grid node)."""
    K = x.shape[-1]
    gains = _filter_gains(params, K)
    y = x * gains
    if mode == "coefficient":
        y_hat = y + math.sqrt(noise_var) * z
    else:
        f = np.atleast_2d(_render(x, grid, params.gamma))
        g = np.stack([apply_filter_waveform(row, grid, params) for row in f])
        noisy = g + math.sqrt(noise_var / grid.step) * np.atleast_2d(z)
        table = HermiteBasis(params.gamma).table(grid.points(), K - 1)
        y_hat = (grid.step * (noisy @ table.T)).reshape(y.shape)
    return Measurement(y, y_hat, y_hat / gains)


def measure(x, params, rng, mode="coefficient", grid=None, noise_var=None):
    """Noisy matched-filter measurements of inputs ``x`` (shape (K,) or (trials, K)).

    Coefficient mode adds n_k ~ N(0, theta2) directly. Waveform mode
    renders and filters the input waveform, adds white noise sampled at
    every grid node with variance theta2 / step, and projects onto the
    dilated Hermite functions. ``noise_var`` overrides theta2.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    x = np.asarray(x, dtype=float)
    nv = params.theta2 if noise_var is None else float(noise_var)
    if nv < 0:
        raise DomainError("noise variance must be nonnegative")
    if mode == "waveform":
        if grid is None:
            grid = Grid.for_channel(params)
        grid.check(params, "time")
        z = rng.standard_normal(x.shape[:-1] + (grid.count,))
    else:
        z = rng.standard_normal(x.shape)
    return _measure(x, z, params, mode, grid, nv)


# ---------------------------------------------------------------------------
# Monte-Carlo driver


def _stream(seed, role, k, block):
    ss = np.random.SeedSequence(seed, spawn_key=(role, k, block))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class _Moments:
    """Running count, mean and co-moment (full matrix or diagonal only)."""

    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, a, full):
        mean = a.mean(axis=0)
        c = a - mean
        return cls(a.shape[0], mean, c.T @ c if full else (c * c).sum(axis=0))

    def merge(self, other):
        n = self.n + other.n
        d = other.mean - self.mean
        extra = np.outer(d, d) if self.m2.ndim == 2 else d * d
        return _Moments(n, self.mean + d * (other.n / n), self.m2 + other.m2 + extra * (self.n * other.n / n))

    def variance(self):
        return (np.diag(self.m2) if self.m2.ndim == 2 else self.m2) / (self.n - 1)


def _run_block(cfg, sol, b, n):
    K = sol.K
    zx = np.column_stack([_stream(cfg.seed, _ROLE_INPUT, k, b).standard_normal(n) for k in range(K)])
    x = zx * np.sqrt(sol.allocation)
    if cfg.mode == "coefficient":
        grid = None
        zn = np.column_stack([_stream(cfg.seed, _ROLE_NOISE, k, b).standard_normal(n) for k in range(K)])
    else:
        grid = cfg.resolved_grid()
        zn = _stream(cfg.seed, _ROLE_GRID_NOISE, 0, b).standard_normal((n, grid.count))
    m = _measure(x, zn, cfg.params, cfg.mode, grid, cfg.params.theta2)
    noise = m.y_hat - m.y
    energies = np.column_stack([(x * x).sum(1), (m.y * m.y).sum(1), (m.y_hat * m.y_hat).sum(1),
                                (noise * noise).sum(1)])
    return (_Moments.of(noise, True), _Moments.of(m.x_hat - x, False),
            _Moments.of(x, False), _Moments.of(energies, False))


def run_simulation(cfg):
    """Run the configured Monte Carlo on the optimal input of ``solve_waterfill(cfg.S)``."""
    params = cfg.params
    sol = solve_waterfill(cfg.S, params)
    if cfg.mode == "waveform" and sol.K - 1 > MAX_ORDER:
        raise ContractError(f"waveform mode supports at most {MAX_ORDER + 1} subchannels, got {sol.K}")
    sizes = [min(cfg.block, cfg.trials - s) for s in range(0, cfg.trials, cfg.block)]
    jobs = list(enumerate(sizes))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda j: _run_block(cfg, sol, *j), jobs))
    else:
        parts = [_run_block(cfg, sol, *j) for j in jobs]
    acc = parts[0]
    for p in parts[1:]:
        acc = tuple(a.merge(q) for a, q in zip(acc, p))
    noise, est, xin, en = acc

    cov = noise.m2 / (noise.n - 1)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    off = corr[~np.eye(sol.K, dtype=bool)]
    max_corr = float(np.max(np.abs(off))) if off.size else 0.0

    keys = ("e_in", "e_out", "e_out_hat", "e_err")
    se = np.sqrt(en.variance() / en.n)
    sk = sol.sigma2 * np.exp(-params.delta * (2.0 * np.arange(sol.K) + 1.0))
    return SimulationReport(
        mode=cfg.mode, trials=int(cfg.trials), seed=int(cfg.seed), K=sol.K, theta2=params.theta2,
        empirical_noise_var=np.diag(cov).copy(),
        empirical_estimate_var=est.variance(),
        empirical_input_var=xin.variance(),
        empirical_cross_cov=max_corr,
        empirical_energy_balance={k: float(v) for k, v in zip(keys, en.mean)},
        energy_standard_error={k: float(v) for k, v in zip(keys, se)},
        analytic_e_out_hat=math.fsum(sk),
        capacity_reference=sol.capacity_bits,
    )


# ---------------------------------------------------------------------------
# estimation quantities (sigma2 = 1, theta2 = 1/snr)


def _check_snr(snr):
    if not (math.isfinite(snr) and snr >= 1.0):
        raise DomainError(f"snr must be >= 1, got {snr!r}")


def active_count(snr, params):
    """K = #{k >= 0 : (2k + 1) delta < ln snr}; a tie leaves subchannel k inactive."""
    _check_snr(snr)
    ls, d = math.log(snr), params.delta
    K = max(0, math.ceil((ls / d - 1.0) / 2.0))
    while K > 0 and not (2 * K - 1) * d < ls:
        K -= 1
    while (2 * K + 1) * d < ls:
        K += 1
    return K


def llse_exact(snr, params):
    """K / snr: error energy of the linear estimate at water level 1."""
    return active_count(snr, params) / snr


def llse_asymptotic(snr, params):
    _check_snr(snr)
    return 0.5 * params.dof * math.log(snr) / snr


def mmse_exact(snr, params):
    """sum_{k<K} snr^-1 (1 - snr^-1 rho^(-2k-1))."""
    K = active_count(snr, params)
    if K == 0:
        return 0.0
    k = np.arange(K)
    return math.fsum((1.0 - np.exp(params.delta * (2.0 * k + 1.0)) / snr) / snr)


def mmse_asymptotic(snr, params):
    return llse_asymptotic(snr, params) - 0.5 * params.dof / snr * (1.0 - 1.0 / snr)


def llse_average(snr):
    """Per-degree-of-freedom LLSE in the limit, (1/2) ln(snr) / snr."""
    _check_snr(snr)
    return 0.5 * math.log(snr) / snr


def mmse_average(snr):
    return llse_average(snr) - 0.5 / snr * (1.0 - 1.0 / snr)


def capacity_at_snr(snr, params):
    """Exact water-filling capacity in nats at water level 1 and theta2 = 1/snr."""
    K = active_count(snr, params)
    return 0.5 * (K * math.log(snr) - params.delta * K * K)


def smooth_capacity(snr, params):
    """C0(snr) = (ab/2) (ln sqrt(snr))^2 nats."""
    _check_snr(snr)
    return 0.125 * params.dof * math.log(snr) ** 2


def smooth_capacity_derivative(snr, params):
    """dC0/dsnr = (ab/4) ln(snr) / snr."""
    _check_snr(snr)
    return 0.25 * params.dof * math.log(snr) / snr


def kink_snrs(params, snr_max):
    """SNRs rho^-(2K+1), K = 0, 1, ..., up to snr_max, where a subchannel switches on."""
    n = math.floor((math.log(snr_max) / params.delta - 1.0) / 2.0)
    k = np.arange(max(n + 1, 0))
    out = np.exp(params.delta * (2.0 * k + 1.0))
    return out[out <= snr_max]


def detect_kinks(params, snr_lo, snr_hi, points=20001, factor=50.0):
    """Kinks of C(snr) located numerically from spikes in second differences.

    Samples C on a log-uniform grid, and reports the grid midpoints where the
    absolute second difference exceeds ``factor`` times its median.
    """
    x = np.linspace(math.log(snr_lo), math.log(snr_hi), points)
    c = np.array([capacity_at_snr(math.exp(v), params) for v in x])
    d2 = np.abs(np.diff(c, 2))
    spikes = np.flatnonzero(d2 > factor * np.median(d2))
    # consecutive spike indices belong to the same kink
    groups = np.split(spikes, np.flatnonzero(np.diff(spikes) > 1) + 1) if spikes.size else []
    return np.array([math.exp(x[g[np.argmax(d2[g])] + 1]) for g in groups])


@dataclass(frozen=True)
class CLLSERow:
    snr: float
    K: int
    dc0_finite_difference: float
    dc0_analytic: float
    half_llse_exact: float
    half_llse_asymptotic: float
    half_mmse_corrected: float
    capacity_nats: float
    smooth_capacity_nats: float
    kink_before: bool


def c_llse_check(snr_grid, params, rel_step=1e-6):
    """Derivative of the smooth capacity against half the LLSE and the corrected MMSE.

    ``kink_before`` marks rows where K increased since the previous row,
    i.e. a kink of C(snr) lies in between.
    """
    rows = []
    prev_K = None
    for snr in snr_grid:
        snr = float(snr)
        if not snr > 1.0:
            raise DomainError(f"snr grid must lie in (1, inf), got {snr!r}")
        h = snr * rel_step
        if snr - h < 1.0:
            raise DomainError(f"finite-difference step leaves the domain at snr = {snr!r}")
        fd = (smooth_capacity(snr + h, params) - smooth_capacity(snr - h, params)) / (2.0 * h)
        K = active_count(snr, params)
        corr = 0.5 * params.dof / snr * (1.0 - 1.0 / snr)
        rows.append(CLLSERow(
            snr, K, fd, smooth_capacity_derivative(snr, params),
            0.5 * llse_exact(snr, params), 0.5 * llse_asymptotic(snr, params),
            0.5 * (mmse_exact(snr, params) + corr),
            capacity_at_snr(snr, params), smooth_capacity(snr, params),
            prev_K is not None and K > prev_K))
        prev_K = K
    return rows

