import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from heatchannel.channel import make_params, params_from_dof
from heatchannel.errors import DomainError, OrderRangeError
from heatchannel.waterfill import (LOG2E, active_subchannels_asymptotic, capacity_closed_form,
                                   capacity_from_output, capacity_from_water_level, distortion_closed_form,
                                   e_out_hat_asymptotic, energy_balance, energy_closed_form, rate_per_second,
                                   rd_closed_form, shannon_bandlimited, solve_reverse_waterfill,
                                   solve_waterfill, source_energy, spectral_efficiency_heat,
                                   spectral_efficiency_shannon, wideband_limit)

# water level and capacity of the reference instance, from a 40-digit bisection on sum (s2 - nu_k^2)^+ = S
REF_SIGMA2 = 0.03591143243573375707708582416663358928464
REF_CAPACITY_BITS = 29.47480303618981249702774756735356014172


def test_ref_instance(ref):
    sol = solve_waterfill(1.0, ref)
    assert sol.K == 64
    assert abs(sol.capacity_bits - 29.47) <= 0.02
    assert sol.capacity_bits == pytest.approx(REF_CAPACITY_BITS, rel=1e-12)
    assert sol.sigma2 == pytest.approx(REF_SIGMA2, rel=1e-12)
    assert abs(active_subchannels_asymptotic(sol.sigma2, ref) - 64) <= 3
    assert capacity_closed_form(1.0, ref) == pytest.approx(sol.capacity_bits, rel=0.02)
    assert energy_balance(sol, ref).e_in == 1.0


def test_vanishing_energy(ref):
    sol = solve_waterfill(1e-12, ref)
    assert sol.K == 1 and sol.capacity_bits < 1e-9


def test_range_error():
    with pytest.raises(OrderRangeError):
        solve_waterfill(1e6, params_from_dof(1e4, 1.0), max_subchannels=1000)
    with pytest.raises(DomainError):
        solve_waterfill(0.0, params_from_dof(10, 1.0))


def _kkt_oracle(S, nu2):
    # maximize sum 1/2 ln(1 + p_k / nu_k^2) on the simplex by SLSQP from a uniform start
    n = nu2.size
    res = optimize.minimize(lambda p: -0.5 * np.sum(np.log1p(p / nu2)), np.full(n, S / n),
                            jac=lambda p: -0.5 / (nu2 + p), bounds=[(0, S)] * n,
                            constraints=[{"type": "eq", "fun": lambda p: p.sum() - S, "jac": lambda p: np.ones(n)}],
                            method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
    return -res.fun, res.x


def test_three_level_instance_against_kkt_oracle():
    p = make_params(1.0, 2.0, 1.0)
    nu2 = p.theta2 * np.exp(p.delta * (2 * np.arange(6) + 1))
    S = 0.5 * (nu2[2] + nu2[3]) * 3 - nu2[:3].sum()   # level halfway between nu_2^2 and nu_3^2
    sol = solve_waterfill(S, p)
    assert sol.K == 3
    best, alloc = _kkt_oracle(S, nu2)
    assert sol.capacity_nats == pytest.approx(best, abs=1e-8)
    assert np.allclose(alloc[:3], sol.allocation, atol=1e-6) and np.all(alloc[3:] < 1e-6)


@settings(max_examples=150, deadline=None)
@given(st.floats(1.01, 1e4), st.floats(1e-3, 1e3), st.floats(1e-3, 50.0))
def test_solution_invariants(dof, theta2, s):
    p = params_from_dof(dof, theta2)
    S = s * 0.5 * dof * theta2
    sol = solve_waterfill(S, p)
    nu2 = sol.noise_variances
    assert np.all(sol.allocation > 0) and np.all(np.diff(sol.allocation) < 0)
    assert sol.allocation.sum() == pytest.approx(S, rel=1e-10)
    assert nu2[-1] < sol.sigma2 <= p.theta2 * math.exp(p.delta * (2 * sol.K + 1)) * (1 + 1e-14)
    assert sol.capacity_nats == pytest.approx(0.5 * math.fsum(np.log(sol.sigma2 / nu2)), rel=1e-12)
    bal = energy_balance(sol, p)
    assert bal.e_out_hat == pytest.approx(math.fsum(sol.sigma2 * p.rho ** (2 * np.arange(sol.K) + 1)), rel=1e-12)
    assert bal.e_out_hat - bal.e_err == pytest.approx(bal.e_out)
    assert min(bal.e_in, bal.e_out, bal.e_err, bal.e_out_hat) >= 0


def test_tie_leaves_next_subchannel_inactive():
    p = make_params(1.0, 4.0, 1.0)
    nu2 = p.theta2 * np.exp(p.delta * (2 * np.arange(10) + 1))
    S = float(np.sum(nu2[4] - nu2[:4]))   # water level exactly at nu_4^2
    sol = solve_waterfill(S, p)
    assert sol.K == 4
    assert sol.sigma2 == pytest.approx(nu2[4], rel=1e-14)


@pytest.mark.parametrize("dof, theta2, S", [(1.5, 1.0, 0.7), (3.0, 0.2, 0.9), (4.0, 1.0, 5.0)])
def test_beats_random_feasible_allocations(dof, theta2, S):
    p = params_from_dof(dof, theta2)
    sol = solve_waterfill(S, p)
    assert sol.K <= 5
    n = sol.K + 2
    nu2 = p.theta2 * np.exp(p.delta * (2 * np.arange(n) + 1))
    rng = np.random.default_rng(11)
    alloc = rng.dirichlet(np.ones(n), size=1000) * S
    rates = 0.5 * np.log1p(alloc / nu2).sum(axis=1)
    assert np.all(rates < sol.capacity_nats - 1e-9)


def test_capacity_increasing_concave():
    p = params_from_dof(20.0, 0.1)
    S = np.linspace(0.01, 10, 400)
    c = np.array([solve_waterfill(s, p).capacity_nats for s in S])
    assert np.all(np.diff(c) > 0)
    assert np.all(np.diff(c, 2) <= 1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 4.0])
def test_closed_form_gap_shrinks(s):
    gaps = []
    for dof in (1e2, 1e3, 1e4):
        p = params_from_dof(dof, 0.01)
        S = s * 0.5 * dof * p.theta2
        gaps.append(abs(solve_waterfill(S, p).capacity_bits - capacity_closed_form(S, p)) / dof)
    assert gaps[0] > gaps[1] > gaps[2]


def test_closed_form_examples():
    p = params_from_dof(100.0, 0.3)
    assert capacity_closed_form(0.0, p) == 0.0
    S = 0.5 * p.dof * p.theta2
    assert capacity_closed_form(S, p) == pytest.approx(0.5 * p.dof * 0.25 * LOG2E, rel=1e-12)


def test_water_level_duality():
    gaps = []
    for dof in (1e2, 1e3, 1e4):
        p = params_from_dof(dof, 0.01)
        S = 0.5 * dof * p.theta2
        sol = solve_waterfill(S, p)
        gaps.append(abs(energy_closed_form(sol.sigma2, p) - S) / dof)
        assert capacity_from_water_level(sol.sigma2, p) == pytest.approx(sol.capacity_nats, rel=0.05)
    assert gaps[0] > gaps[1] > gaps[2]


def test_rate_per_second():
    assert abs(rate_per_second(1.0, 100.0, 0.01) - 29.47) <= 0.02
    assert rate_per_second(0.0, 100.0, 0.01) == 0.0
    assert float(spectral_efficiency_heat(1e-12)) < 1e-11
    ratios = [rate_per_second(1.0, b, 0.01) / wideband_limit(1.0, 0.01) for b in (1e2, 1e3, 1e4, 1e6)]
    assert all(a < b for a, b in zip(ratios, ratios[1:])) and ratios[-1] < 1.0
    # per-second rate over the half-bandwidth equals the spectral efficiency at SNR = P / (beta theta2)
    assert rate_per_second(2.0, 10.0, 0.1) / 5.0 == pytest.approx(float(spectral_efficiency_heat(2.0)))


@pytest.mark.parametrize("snr, se", [(1.0, 1.0), (3.0, 2.0), (15.0, 4.0)])
def test_shannon(snr, se):
    assert shannon_bandlimited(snr * 2.0 * 0.5, 2.0, 0.5) / 2.0 == pytest.approx(se)
    assert float(spectral_efficiency_shannon(snr)) == pytest.approx(se)


def test_active_subchannels_asymptotic():
    p = params_from_dof(200.0, 0.1)
    assert active_subchannels_asymptotic(p.theta2 * math.e, p) == pytest.approx(100.0)
    assert active_subchannels_asymptotic(p.theta2 * math.exp(2 / p.dof), p) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        active_subchannels_asymptotic(p.theta2, p)


def test_capacity_from_output():
    p = params_from_dof(50.0, 0.2)
    assert capacity_from_output(0.0, p) == 0.0
    e = 0.5 * p.dof * p.theta2 * (math.e ** 2 - 1)
    assert capacity_from_output(e, p) == pytest.approx(0.5 * p.dof * LOG2E, rel=1e-12)
    gaps = []
    for dof in (1e2, 1e3, 1e4):
        q = params_from_dof(dof, 0.01)
        S = 0.5 * dof * q.theta2
        sol = solve_waterfill(S, q)
        rel = abs(capacity_from_output(energy_balance(sol, q).e_out_hat, q) - sol.capacity_bits) / sol.capacity_bits
        gaps.append(rel)
        # linked through the same water level, the two closed forms agree up to o(ab)
        linked = capacity_from_output(e_out_hat_asymptotic(sol.sigma2, q), q)
        assert linked == pytest.approx(capacity_closed_form(energy_closed_form(sol.sigma2, q), q), rel=1e-12)
    assert gaps[2] < gaps[0]


def test_energy_balance_single_subchannel(ref):
    sol = solve_waterfill(1e-6, ref)
    assert sol.K == 1
    assert energy_balance(sol, ref).e_out_hat == pytest.approx(sol.sigma2 * ref.rho)


# --- rate distortion ---------------------------------------------------------


def _rd_params():
    # rho = 1/2, i.e. alpha*beta = coth(ln 2) = 5/3
    return make_params(1.0, 5.0 / 3.0, 1.0)


def test_small_rd_instance():
    p = _rd_params()
    assert p.rho == pytest.approx(0.5, rel=1e-15)
    sol = solve_reverse_waterfill(0.3, 1.0, p)
    # 30-digit bisection on sum min(theta2, 0.5^(2k+1)) = 0.3
    assert sol.K == 1
    assert sol.theta2_table == pytest.approx(2.0 / 15.0, rel=1e-10)
    assert sol.rate_nats == pytest.approx(0.660877919991159723580770163616, rel=1e-10)


def test_rd_no_coding_at_source_energy():
    p = _rd_params()
    E = source_energy(1.0, p)
    assert E == pytest.approx(0.5 / (1 - 0.25))
    for D in (E, 2 * E):
        sol = solve_reverse_waterfill(D, 1.0, p)
        assert sol.rate_nats == 0.0 and sol.K == 0 and sol.distortion == E


def test_rd_boundary_tie():
    p = _rd_params()
    s = 0.5 ** (2 * np.arange(60) + 1)
    D = s[1] + s[1:].sum()   # table exactly at sigma_1^2: K = 1 by the tie rule
    sol = solve_reverse_waterfill(D, 1.0, p)
    assert sol.K == 1
    assert sol.theta2_table == pytest.approx(s[1], rel=1e-14)


@settings(max_examples=150, deadline=None)
@given(st.floats(1.01, 1e4), st.floats(1e-3, 0.999))
def test_rd_invariants(dof, frac):
    p = params_from_dof(dof, 1.0)
    sigma2 = 2.0
    D = frac * source_energy(sigma2, p)
    sol = solve_reverse_waterfill(D, sigma2, p)
    K = sol.K
    tail = sigma2 * p.rho ** (2 * K + 1) / (1 - p.rho ** 2)
    assert K * sol.theta2_table + tail == pytest.approx(D, rel=1e-10)
    sk = sigma2 * p.rho ** (2 * np.arange(K + 1) + 1)
    assert sk[K - 1] > sol.theta2_table >= sk[K] * (1 - 1e-14)
    assert sol.rate_nats == pytest.approx(0.5 * math.fsum(np.log(sk[:K] / sol.theta2_table)), rel=1e-12)


def test_rd_decreasing_convex():
    p = params_from_dof(30.0, 1.0)
    E = source_energy(1.0, p)
    D = np.linspace(0.01, 0.99, 300) * E
    r = np.array([solve_reverse_waterfill(d, 1.0, p).rate_nats for d in D])
    assert np.all(np.diff(r) < 0)
    assert np.all(np.diff(r, 2) >= -1e-12)


def test_rd_closed_form_examples():
    p = params_from_dof(40.0, 1.0)
    half = 0.5 * p.dof
    assert rd_closed_form(half, 1.0, p) == 0.0
    assert rd_closed_form(2 * half, 1.0, p) == 0.0
    assert rd_closed_form(2 / math.e * half, 1.0, p) == pytest.approx(half * 0.25, rel=1e-12)
    with pytest.raises(DomainError):
        rd_closed_form(0.0, 1.0, p)


@pytest.mark.parametrize("d", [0.2, 0.5, 0.8])
def test_rd_closed_form_gap_shrinks(d):
    gaps = []
    for dof in (1e2, 1e3, 1e4):
        p = params_from_dof(dof, 1.0)
        D = d * 0.5 * dof
        sol = solve_reverse_waterfill(D, 1.0, p)
        gaps.append(abs(sol.rate_nats - rd_closed_form(D, 1.0, p)) / dof)
        assert distortion_closed_form(sol.theta2_table, 1.0, p) == pytest.approx(D, rel=0.05)
    assert gaps[0] > gaps[1] > gaps[2]
