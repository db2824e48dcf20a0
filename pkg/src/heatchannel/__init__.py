"""Capacity, rate distortion and estimation theory of the heat channel.

The heat channel is a Gaussian time-frequency localization filter followed
by additive white Gaussian noise. After matched filtering it becomes the
vector Gaussian channel Y_k = X_k + Z_k with Z_k ~ N(0, theta2 rho^(-2k-1)).
"""
from .channel import (ChannelParams, FilterEigensystem, Grid, apply_filter_coeff, apply_filter_spectrum,
                      apply_filter_waveform, eigen_sum, eoc_report, make_params, mehler_kernel, noise_cup,
                      params_from_dof, project, render, weyl_symbol, white_noise_autocorrelation, wvs)
from .errors import (AdmissibilityError, ContractError, DomainError, HeatChannelError, OrderRangeError,
                     ResolutionError)
from .gallager import (GallagerPoint, SpectralEfficiencyPoint, compare_curves, gallager_point,
                       gallager_se_at_snr, heat_gallager_crossing, heat_shannon_crossover)
from .simulate import (SimulationConfig, SimulationReport, c_llse_check, llse_exact, measure, mmse_exact,
                       run_simulation, synthesize_optimal_input)
from .specfun import HermiteBasis, dilated_hermite, hermite_fn, lambert_w0, lambert_wm1, w0, wm1
from .tfplane import (SzegoReport, TFWaterfillResult, clipped_inverse, log_plus, min_one, monomial,
                      szego_check, tf_reverse_waterfill, tf_waterfill)
from .waterfill import (EnergyBalance, RateDistortionSolution, WaterfillSolution, capacity_closed_form,
                        capacity_from_output, energy_balance, rate_per_second, rd_closed_form,
                        shannon_bandlimited, solve_reverse_waterfill, solve_waterfill)

__version__ = "0.1.0"
