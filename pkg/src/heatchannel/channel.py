"""Heat-channel parameters and the analytic objects of its filter.

The filter is the Gaussian time-frequency localization operator with
time scale ``alpha`` and frequency scale ``beta``. It is diagonal in the
dilated Hermite basis with eigenvalues ``rho**(k + 1/2)``, where
``rho = exp(-delta)`` and ``coth(delta) = alpha * beta``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import AdmissibilityError, DomainError, OrderRangeError, ResolutionError
from .specfun import HermiteBasis

# support half-width, in units of alpha*cosh(delta), a waveform grid must cover
GRID_SUPPORT = 6.0
# largest step * beta for which the rectangle rule resolves the filter kernel
GRID_MAX_STEP = 0.5
# hard cap on terms of eigenvalue series (independent of the Hermite order cap)
MAX_TERMS = 10_000_000


@dataclass(frozen=True)
class ChannelParams:
    """The (alpha, beta, theta2) triple and everything derived from it.

    Attributes
    ----------
    alpha : float
        Time scale in seconds.
    beta : float
        Frequency scale (rad/s convention).
    theta2 : float
        Two-sided noise PSD ``N0 / 2`` in W/Hz (dimension of an energy).
    """

    alpha: float
    beta: float
    theta2: float

    def __post_init__(self):
        for name in ("alpha", "beta", "theta2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        if not self.alpha * self.beta > 1.0:
            raise AdmissibilityError(
                f"uncertainty principle violated: alpha*beta = {self.alpha * self.beta!r} <= 1")

    @property
    def dof(self):
        """Time-frequency product alpha*beta (degrees of freedom)."""
        return self.alpha * self.beta

    @property
    def gamma(self):
        return math.sqrt(self.alpha / self.beta)

    @property
    def delta(self):
        # arccoth(ab) = artanh(1/ab); never a log of a ratio
        return math.atanh(1.0 / self.dof)

    @property
    def rho(self):
        return math.exp(-self.delta)

    @property
    def cosh_delta(self):
        return math.cosh(self.delta)

    @property
    def sinh_delta(self):
        return math.sinh(self.delta)

    @property
    def bandwidth(self):
        """Approximate bandwidth W = beta / 2 in Hz."""
        return 0.5 * self.beta

    @property
    def n0(self):
        """One-sided noise PSD N0 = 2 theta2."""
        return 2.0 * self.theta2

    def replace(self, **changes):
        fields = {"alpha": self.alpha, "beta": self.beta, "theta2": self.theta2}
        fields.update(changes)
        return ChannelParams(**fields)


def make_params(alpha, beta, theta2):
    return ChannelParams(float(alpha), float(beta), float(theta2))


def params_from_dof(dof, theta2, alpha=1.0):
    """Parameters with a prescribed time-frequency product (``beta = dof / alpha``)."""
    return ChannelParams(float(alpha), float(dof) / alpha, float(theta2))


@dataclass(frozen=True)
class FilterEigensystem:
    """Eigenvalues of the filter, of its square, and the induced noise variances."""

    params: ChannelParams

    def filter_eigenvalue(self, k):
        return np.exp(-self.params.delta * (np.asarray(k, dtype=float) + 0.5))

    def squared_eigenvalue(self, k):
        """lambda_k = rho**(2k + 1), the eigenvalues of the squared filter."""
        return np.exp(-self.params.delta * (2.0 * np.asarray(k, dtype=float) + 1.0))

    def noise_variance(self, k):
        """nu_k^2 = theta2 * rho**(-2k - 1)."""
        return self.params.theta2 * np.exp(self.params.delta * (2.0 * np.asarray(k, dtype=float) + 1.0))

    def lambda_sum(self):
        """Exact value of sum_k lambda_k = rho / (1 - rho^2) = 1 / (2 sinh delta)."""
        return 0.5 / self.params.sinh_delta


def eigen_sum(g, params, max_terms=MAX_TERMS, chunk=8192):
    """Sum ``g(lambda_k)`` over k = 0, 1, ... for a nonnegative, nondecreasing g.

    Truncates once the geometric bound on the remaining tail,
    ``term / (1 - rho^2)``, falls below 1e-15 of the running sum.
    """
    delta = params.delta
    tail_factor = 1.0 / -math.expm1(-2.0 * delta)
    parts = []
    acc = 0.0
    for start in range(0, max_terms, chunk):
        k = np.arange(start, min(start + chunk, max_terms), dtype=float)
        terms = np.asarray(g(np.exp(-delta * (2.0 * k + 1.0))), dtype=float)
        parts.append(terms)
        acc += float(terms.sum())
        last = float(terms[-1])
        if last * tail_factor <= 1e-15 * abs(acc) or (acc == 0.0 and last == 0.0):
            return math.fsum(np.concatenate(parts))
    raise OrderRangeError(f"eigenvalue series did not converge within {max_terms} terms")


def apply_filter_coeff(x, params):
    """Diagonal action of the filter on basis coefficients: x_k -> rho^(k+1/2) x_k."""
    x = np.asarray(x, dtype=float)
    return FilterEigensystem(params).filter_eigenvalue(np.arange(x.shape[-1])) * x


def mehler_kernel(x, y, delta_arg, gamma):
    """Closed-form kernel of the localization operator at order ``delta_arg``."""
    if not delta_arg > 0:
        raise DomainError(f"kernel order must be positive, got {delta_arg!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = 0.5 * delta_arg
    expo = (x - y) ** 2 / math.tanh(half) + math.tanh(half) * (x + y) ** 2
    return np.exp(-expo / (4.0 * gamma * gamma)) / (gamma * math.sqrt(2.0 * math.pi * math.sinh(delta_arg)))


def white_noise_autocorrelation(t1, t2, sigma2, params):
    """Autocorrelation sigma2 * P_{2 delta}(t1, t2) of the filtered white noise."""
    return sigma2 * mehler_kernel(t1, t2, 2.0 * params.delta, params.gamma)


def weyl_symbol(t, omega, params):
    """Weyl symbol of the squared filter: exp(-t^2/alpha^2 - omega^2/beta^2) / cosh(delta)."""
    u = (np.asarray(t, dtype=float) / params.alpha) ** 2 + (np.asarray(omega, dtype=float) / params.beta) ** 2
    return np.exp(-u) / params.cosh_delta


def wvs(t, omega, sigma2, params):
    """Wigner-Ville spectrum of the filter response to white noise of PSD sigma2."""
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2!r}")
    return sigma2 / (2.0 * math.pi) * weyl_symbol(t, omega, params)


def noise_cup(t, omega, params):
    """Effective noise density (theta2 / 2pi) cosh(delta) exp(t^2/alpha^2 + omega^2/beta^2)."""
    u = (np.asarray(t, dtype=float) / params.alpha) ** 2 + (np.asarray(omega, dtype=float) / params.beta) ** 2
    return params.theta2 / (2.0 * math.pi) * params.cosh_delta * np.exp(u)


def eoc_report(params):
    """Area of the ellipse of concentration and the degrees of freedom."""
    return {"area": 2.0 * math.pi * params.dof, "dof": params.dof}


# ---------------------------------------------------------------------------
# waveforms


@dataclass(frozen=True)
class Grid:
    """Uniform sampling grid ``start + step * arange(count)``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0 or self.count < 2:
            raise ResolutionError(f"grid needs step > 0 and count >= 2, got {self}")

    @classmethod
    def symmetric(cls, half_width, step):
        n = int(math.ceil(half_width / step))
        return cls(-n * step, step, 2 * n + 1)

    @classmethod
    def for_channel(cls, params, step=None, support=GRID_SUPPORT, domain="time"):
        """Smallest symmetric grid that passes :meth:`check` for ``params``."""
        window, width = _scales(params, domain)
        if step is None:
            step = 0.25 / width
        return cls.symmetric(support * window * params.cosh_delta, step)

    @property
    def stop(self):
        return self.start + self.step * (self.count - 1)

    def points(self):
        return self.start + self.step * np.arange(self.count)

    def check(self, params, domain="time"):
        """Raise :class:`ResolutionError` unless the grid suits the filter quadrature."""
        window, width = _scales(params, domain)
        need = GRID_SUPPORT * window * params.cosh_delta
        if self.start > -need or self.stop < need:
            raise ResolutionError(
                f"grid [{self.start:g}, {self.stop:g}] does not cover the essential support "
                f"[-{need:g}, {need:g}] ({GRID_SUPPORT:g} * scale * cosh(delta))")
        if self.step * width > GRID_MAX_STEP:
            raise ResolutionError(
                f"grid step {self.step:g} too coarse: need step <= {GRID_MAX_STEP / width:g} "
                f"to resolve the kernel width 1/{width:g}")


def _scales(params, domain):
    if domain == "time":
        return params.alpha, params.beta
    if domain == "frequency":
        return params.beta, params.alpha
    raise ValueError(f"domain must be 'time' or 'frequency', got {domain!r}")


def apply_filter_waveform(f, grid, params):
    """Filter a sampled waveform by direct quadrature of the integral operator."""
    from . import _kernels

    f = np.asarray(f, dtype=float)
    if f.shape != (grid.count,):
        raise ResolutionError(f"waveform has shape {f.shape}, grid expects ({grid.count},)")
    grid.check(params, "time")
    return _kernels.localize(f, grid.start, grid.step, params.alpha, params.beta, params.cosh_delta)


def apply_filter_spectrum(fhat, grid, params):
    """Frequency-domain form of the filter acting on a sampled spectrum.

    Same Gaussian structure with the roles of alpha and beta exchanged;
    complex spectra are filtered part by part since the kernel is real.
    """
    from . import _kernels

    fhat = np.asarray(fhat)
    if fhat.shape != (grid.count,):
        raise ResolutionError(f"spectrum has shape {fhat.shape}, grid expects ({grid.count},)")
    grid.check(params, "frequency")
    run = lambda part: _kernels.localize(part, grid.start, grid.step, params.beta, params.alpha,
                                         params.cosh_delta)
    if np.iscomplexobj(fhat):
        return run(fhat.real) + 1j * run(fhat.imag)
    return run(fhat.astype(float))


def render(coeffs, grid, gamma):
    """Waveform sum_k c_k D_gamma psi_k on the grid."""
    coeffs = np.asarray(coeffs, dtype=float)
    table = HermiteBasis(gamma).table(grid.points(), coeffs.shape[-1] - 1)
    return coeffs @ table


def project(f, grid, gamma, K):
    """Inner products <f, D_gamma psi_k>, k < K, by the rectangle rule.

    ``f`` may be a single waveform or a 2-D stack (one waveform per row).
    """
    table = HermiteBasis(gamma).table(grid.points(), K - 1)
    return grid.step * (np.asarray(f, dtype=float) @ table.T)
