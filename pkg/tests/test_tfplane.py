import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatchannel.channel import make_params, params_from_dof
from heatchannel.errors import ContractError, DomainError
from heatchannel.tfplane import (clipped_inverse, log_plus, min_one, monomial, phase_plane_quad,
                                 szego_check, tf_energy, tf_reverse_at_table, tf_reverse_waterfill,
                                 tf_waterfill)
from heatchannel.waterfill import solve_reverse_waterfill, solve_waterfill


def test_ref_close_to_discrete(ref):
    r = tf_waterfill(1.0, ref)
    disc = solve_waterfill(1.0, ref).capacity_bits
    assert r.capacity_bits == pytest.approx(disc, rel=0.03)
    assert r.nu > ref.theta2 * ref.cosh_delta / (2 * math.pi)
    assert tf_energy(r.nu, ref) == pytest.approx(1.0, rel=1e-10)
    assert r.fill_radius_L == pytest.approx(math.log(2 * math.pi * r.nu / (ref.theta2 * ref.cosh_delta)))


def test_vanishing_energy():
    r = tf_waterfill(1e-14, params_from_dof(50.0, 1.0), cross_check=False)
    assert 0 < r.fill_radius_L < 1e-5 and r.capacity_bits < 1e-10


@pytest.mark.parametrize("S", [0.05, 1.3, 40.0])
def test_radial_and_2d_quadrature_agree(S):
    p = make_params(1.3, 17.0, 0.02)
    r = tf_waterfill(S, p)
    assert r.energy_quadrature == pytest.approx(S, rel=1e-8)
    assert r.capacity_quadrature_bits == pytest.approx(r.capacity_bits, rel=1e-8)


def test_tf_capacity_increasing_concave():
    p = params_from_dof(30.0, 0.1)
    S = np.linspace(0.01, 10, 200)
    c = np.array([tf_waterfill(s, p, cross_check=False).capacity_bits for s in S])
    assert np.all(np.diff(c) > 0) and np.all(np.diff(c, 2) <= 1e-12)


def test_tf_gap_to_discrete_shrinks():
    gaps = []
    for dof in (1e2, 1e3, 1e4):
        p = params_from_dof(dof, 0.01)
        S = 0.5 * dof * p.theta2
        gaps.append(abs(tf_waterfill(S, p, cross_check=False).capacity_bits
                        - solve_waterfill(S, p).capacity_bits) / dof)
    assert gaps[0] > gaps[1] > gaps[2]


def test_reverse_saturated_table():
    p = make_params(2.0, 3.0, 1.0)
    sigma2 = 1.7
    peak = sigma2 / (2 * math.pi * p.cosh_delta)
    for lam in (peak, 3 * peak):
        q = tf_reverse_waterfill(lam, sigma2, p)
        assert q.rate_nats == 0.0
        assert q.distortion == pytest.approx(0.5 * p.dof * sigma2 / p.cosh_delta, rel=1e-10)
        assert q.distortion_quadrature == pytest.approx(q.distortion, rel=1e-8)


@pytest.mark.parametrize("lam", [1e-4, 3e-3, 0.05])
def test_reverse_quadrature_agrees(lam):
    p = make_params(0.7, 9.0, 1.0)
    q = tf_reverse_waterfill(lam, 1.0, p)
    assert q.distortion_quadrature == pytest.approx(q.distortion, rel=1e-8)
    assert q.rate_quadrature_nats == pytest.approx(q.rate_nats, rel=1e-8)


def test_reverse_limits():
    p = params_from_dof(20.0, 1.0)
    qs = [tf_reverse_waterfill(lam, 1.0, p, cross_check=False) for lam in (1e-3, 1e-6, 1e-12)]
    assert qs[0].rate_nats < qs[1].rate_nats < qs[2].rate_nats
    assert qs[0].distortion > qs[1].distortion > qs[2].distortion
    with pytest.raises(DomainError):
        tf_reverse_waterfill(0.0, 1.0, p)


@pytest.mark.parametrize("d", [0.2, 0.5, 0.8])
def test_reverse_gap_to_discrete_shrinks(d):
    gd, gr = [], []
    for dof in (1e2, 1e3, 1e4):
        p = params_from_dof(dof, 1.0)
        sol = solve_reverse_waterfill(d * 0.5 * dof, 1.0, p)
        q = tf_reverse_at_table(sol.theta2_table, 1.0, p, cross_check=False)
        gd.append(abs(q.distortion - sol.distortion) / dof)
        gr.append(abs(q.rate_nats - sol.rate_nats) / dof)
    assert gd[0] > gd[1] > gd[2] and gr[0] > gr[1] > gr[2]


def test_phase_plane_quad_gaussian():
    p = make_params(1.5, 2.0, 1.0)
    val = phase_plane_quad(lambda t, w: math.exp(-(t / p.alpha) ** 2 - (w / p.beta) ** 2), p, 1.0, 40.0)
    assert val == pytest.approx(math.pi * p.dof, rel=1e-10)


# --- trace asymptotics -------------------------------------------------------


@pytest.mark.parametrize("dof", [10.0, 1e2, 1e3])
def test_monomials_one_and_two_exact(dof):
    p = params_from_dof(dof, 1.0)
    r1, r2 = szego_check(monomial(1), p), szego_check(monomial(2), p)
    assert abs(r1.lhs - 0.5 / p.sinh_delta) <= 1e-12 * r1.lhs
    assert abs(r2.lhs - 0.5 / math.sinh(2 * p.delta)) <= 1e-12 * r2.lhs
    assert abs(r1.lhs - r1.rhs) <= 1e-10 and abs(r2.lhs - r2.rhs) <= 1e-10


def test_monomial_three_closed_forms():
    gaps = []
    for dof in (10.0, 1e2, 1e3):
        p = params_from_dof(dof, 1.0)
        r = szego_check(monomial(3), p)
        assert r.lhs == pytest.approx(0.5 / math.sinh(3 * p.delta), rel=1e-12)
        assert r.rhs == pytest.approx(dof / (6 * p.cosh_delta ** 3), rel=1e-12)
        assert r.normalized_gap > 0
        gaps.append(r.normalized_gap)
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.mark.parametrize("make", [lambda: log_plus(100.0), lambda: min_one(100.0, a=0.01),
                                  lambda: clipped_inverse(2.0, 30.0)])
def test_named_families_gap_shrinks(make):
    fn = make()
    gaps = [szego_check(fn, params_from_dof(d, 1.0)).normalized_gap for d in (1e2, 1e3, 1e4)]
    assert gaps[0] > gaps[1] > gaps[2]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["log_plus", "min_one", "clipped_inverse", "monomial"]),
       st.floats(0.5, 1e3), st.floats(1.5, 500.0))
def test_radial_form_matches_quadrature(kind, b, dof):
    fn = {"log_plus": lambda: log_plus(b), "min_one": lambda: min_one(b),
          "clipped_inverse": lambda: clipped_inverse(1.5, b), "monomial": lambda: monomial(int(b) % 5 + 1)}[kind]()
    r = szego_check(fn, params_from_dof(dof, 1.0))
    assert math.isfinite(r.lhs) and math.isfinite(r.rhs) and r.normalized_gap >= 0
    assert r.rhs_quadrature == pytest.approx(r.rhs, rel=1e-8, abs=1e-13)


def test_capacity_instantiation_matches_discrete():
    # sum_k 1/2 ln_+((sigma2/theta2) lambda_k) over the eigenvalues is the discrete capacity
    p = params_from_dof(100.0, 0.01)
    sol = solve_waterfill(0.5, p)
    r = szego_check(log_plus(sol.sigma2 / p.theta2), p)
    assert r.lhs == pytest.approx(sol.capacity_nats, rel=1e-12)


@pytest.mark.parametrize("bad", [lambda: monomial(0), lambda: monomial(1.5), lambda: log_plus(-1.0),
                                 lambda: clipped_inverse(1.0, float("inf")), lambda: min_one(float("nan"))])
def test_contract_errors(bad):
    with pytest.raises(ContractError):
        bad()


def test_checker_rejects_plain_callables():
    with pytest.raises(ContractError):
        szego_check(lambda z: z, params_from_dof(10.0, 1.0))
