import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invasion_lab.analysis import estimate_speed, moving_frame_profile, trace_front
from invasion_lab.errors import BlowUpError
from invasion_lab.kinetics import KineticModel, c_star, make_builtin, wave_constants
from invasion_lab.phase import (
    PlaneState,
    Regime,
    Region,
    TWState,
    classify_region,
    integrate_plane,
    integrate_riccati,
    integrate_tw,
    linear_mode,
    omega_inf,
    omega_inf_prime,
    riccati_blowup_z2,
    riccati_bounds,
    riccati_closed_form,
    riccati_rk4,
    riccati_roots,
    shoot_from_prey_state,
    sign_change_exists,
    theta_bounds,
    tw_jacobian,
    tw_rhs,
)

MU, V0 = 1.0, 2.2


# ---------------------------------------------------------------------------- 4-D system


def test_tw_rhs_equilibria(lv):
    us, vs = np.linalg.solve([[1.0, 0.5], [-1.0, 1.0]], [1.0, 1.0])
    for s in [(1, 0, 0, 0), (0, 0, MU, 0), (us, 0, vs, 0)]:
        assert np.max(np.abs(tw_rhs(TWState(*map(float, s)), 2.0, lv))) <= 1e-15


def test_tw_rhs_non_finite():
    bad = KineticModel("bad", 1.0, {}, F=lambda u, v: float("nan"), G=lambda u, v: 0.0)
    with pytest.raises(BlowUpError):
        tw_rhs((1.0, 0.0, 0.0, 0.0), 1.0, bad)


def test_integrate_tw_constant(lv):
    tr = integrate_tw(TWState(1.0, 0.0, 0.0, 0.0), 3.0, lv, (0.0, 20.0), 0.01, V0)
    assert tr.reason == "Completed" and tr.escape_z is None
    assert np.all(tr.states == np.array([1.0, 0.0, 0.0, 0.0]))


def test_jacobian_has_lambda1(lv):
    c = 1.1 * c_star(lv)
    lam1 = wave_constants(lv, c)[1]
    J = tw_jacobian(lv, c)
    # block-triangular oracle: psi-block characteristic polynomial d l^2 - c l + G(1,0)
    psi_roots = np.roots([lv.d, -c, float(lv.G(1.0, 0.0))])
    eig = np.linalg.eigvals(J)
    for r in psi_roots:
        assert np.min(np.abs(eig - r)) <= 1e-6
    assert min(abs(r - lam1) for r in psi_roots) <= 1e-9


def test_leaves_prey_state(lv):
    c = 1.1 * c_star(lv)
    lam1 = wave_constants(lv, c)[1]
    for ic in (TWState(1 - 1e-6, 0.0, 1e-6, 1e-6 * lam1), shoot_from_prey_state(lv, c, lam1)):
        tr = integrate_tw(ic, c, lv, (0.0, 2.0), 0.01, V0)
        phi, psi = tr.states[:, 0], tr.states[:, 2]
        assert phi[-1] < phi[0] and psi[-1] > psi[0]
        assert np.all(np.diff(psi) > 0)


def test_psi_positive_while_phi_positive(lv):
    c = 1.1 * c_star(lv)
    ic = shoot_from_prey_state(lv, c, wave_constants(lv, c)[1])
    tr = integrate_tw(ic, c, lv, (0.0, 10.0), 0.01, V0)
    s = tr.states
    alive = s[:, 0] > 0
    assert np.all(s[alive, 2] > 0) and np.all(s[:, 2] < V0)


# ---------------------------------------------------------------------------- regions


@pytest.mark.parametrize(
    "p, label",
    [
        ((MU, 0.0), Region.A6),
        ((MU + 1, 1.0), Region.A1),
        ((MU - 0.5, 0.3), Region.OTHER),
        ((MU, 0.2), Region.A2),
        ((MU + 0.2, 0.0), Region.A3),
        ((MU, -0.2), Region.A4),
        ((MU + 0.2, -0.2), Region.A5),
        ((MU + 5e-9, 5e-9), Region.A6),
    ],
)
def test_classify_examples(p, label):
    assert classify_region(PlaneState(*p), MU) is label


@settings(max_examples=300)
@given(psi=st.floats(-5, 5), chi=st.floats(-5, 5))
def test_classify_partition(psi, chi):
    label = classify_region((psi, chi), MU)
    predicates = {
        Region.A1: psi - MU > 1e-8 and chi > 1e-8,
        Region.A2: abs(psi - MU) <= 1e-8 and chi > 1e-8,
        Region.A3: psi - MU > 1e-8 and abs(chi) <= 1e-8,
        Region.A4: abs(psi - MU) <= 1e-8 and chi < -1e-8,
        Region.A5: psi - MU > 1e-8 and chi < -1e-8,
        Region.A6: abs(psi - MU) <= 1e-8 and abs(chi) <= 1e-8,
        Region.OTHER: psi - MU < -1e-8,
    }
    assert sum(predicates.values()) == 1
    assert predicates[label]


# ---------------------------------------------------------------------------- plane flow


def test_a6_invariant(lv):
    tr = integrate_plane(PlaneState(MU, 0.0), 2.0, lv, (0.0, 100.0), 0.01, V0)
    drift = np.max(np.abs(tr.psi - MU) + np.abs(tr.chi))
    assert tr.reason == "Completed" and drift <= 1e-10


def test_a1_escapes(lv):
    tr = integrate_plane(PlaneState(MU + 0.1, 0.05), 2.0, lv, (0.0, 50.0), 0.01, V0)
    assert tr.reason == "Escape" and tr.z[-1] < 50.0
    assert np.all(np.diff(tr.psi) > 0)


def test_a5_backward_monotone(lv):
    tr = integrate_plane(PlaneState(V0, -0.05), 2.0, lv, (0.0, -50.0), 0.01, V0)
    assert np.all(tr.chi < 0)
    assert np.all(np.diff(tr.psi) > 0)  # z decreasing, psi increasing


@pytest.mark.parametrize("ic", [(MU, 0.1), (MU + 0.1, 0.0)])
def test_one_step_transit_into_a1(lv, ic):
    tr = integrate_plane(PlaneState(*ic), 2.0, lv, (0.0, 0.01), 0.01, V0)
    assert tr.regions(MU)[-1] is Region.A1


# ---------------------------------------------------------------------------- theta


def test_theta_lv(lv):
    th = theta_bounds(lv, 2.0, V0)
    # oracle: eta (1 - eta) / 2 on [0, 2.2]
    assert th.theta_plus == pytest.approx(0.125, abs=1e-12) and th.eta_plus == pytest.approx(0.5, abs=1e-6)
    assert th.theta_minus == pytest.approx(-1.32, abs=1e-12) and th.eta_minus == pytest.approx(2.2)
    assert not th.degenerate


def test_theta_scaling(lv):
    a, b = theta_bounds(lv, 2.0, V0), theta_bounds(lv, 4.0, V0)
    assert b.theta_plus == pytest.approx(a.theta_plus / 2, rel=1e-12)
    assert b.theta_minus == pytest.approx(a.theta_minus / 2, rel=1e-12)


def test_theta_degenerate():
    flat = KineticModel("flat", 1.0, {}, F=lambda u, v: 0 * u, G=lambda u, v: 0 * v)
    th = theta_bounds(flat, 1.0, 1.0)
    assert th.theta_plus == 0 and th.theta_minus == 0 and th.degenerate


@settings(max_examples=25, deadline=None)
@given(psi=st.floats(0.0, V0), frac=st.floats(0.0, 1.0))
def test_theta_band_backward(lv, psi, frac):
    th = theta_bounds(lv, 2.0, V0)
    chi = th.theta_minus + frac * (th.theta_plus - th.theta_minus)
    tr = integrate_plane(PlaneState(psi, chi), 2.0, lv, (0.0, -30.0), 0.01, V0, theta=th)
    inside = (tr.psi >= 0) & (tr.psi <= V0)
    stop = np.argmin(inside) if not inside.all() else inside.size
    seg = tr.chi[:stop]
    assert np.all(seg >= th.theta_minus - 1e-6) and np.all(seg <= th.theta_plus + 1e-6)


# ---------------------------------------------------------------------------- Riccati


def test_riccati_m_lv(lv):
    rb = riccati_bounds(lv, 2.0, V0)
    assert rb.m == pytest.approx(1.1, abs=1e-12)
    assert rb.pi_plus == pytest.approx((2 + math.sqrt(8.4)) / 2, abs=1e-12)
    assert rb.pi_minus == pytest.approx((2 - math.sqrt(8.4)) / 2, abs=1e-12)
    assert rb.pi_plus > 0 > rb.pi_minus


@settings(max_examples=200)
@given(c=st.floats(0.1, 10), m=st.floats(0.0, 10))
def test_riccati_quadratic_residual(c, m):
    rb = riccati_roots(c, m)
    for p in (rb.pi_plus, rb.pi_minus):
        assert abs(p * p - c * p - m) <= 1e-12 * max(1.0, c * c, m)


def test_riccati_profile_bounded(lv, lv_default_run):
    traj, _ = lv_default_run
    c = estimate_speed(trace_front(traj, "predator", 0.5), (40, 90)).c_measured
    prof = moving_frame_profile(traj, lv, c, 80.0, (-100.0, 20.0), level=0.5).to_theory_frame()
    rb = riccati_bounds(lv, c, V0)
    rp = integrate_riccati(prof.z, prof.phi, prof.psi, c, lv, rb)
    assert rp.bounded and rp.max_abs <= rb.pi_plus
    assert abs(rp.left_value) <= 1e-3


def test_riccati_rejects_nonpositive_phi(lv):
    z = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        integrate_riccati(z, np.zeros_like(z), np.zeros_like(z), 2.0, lv, riccati_roots(2.0, 1.1))


def z2_oracle(z1, w1, c, m):
    mp.mp.dps = 40
    s = mp.sqrt(c * c + 4 * mp.mpf(m))
    pp, pm = (c + s) / 2, (c - s) / 2
    return float(z1 + mp.log((pp - w1) / (pm - w1)) / s)


def test_z2_value():
    z2 = riccati_blowup_z2(0.0, -3.0, 2.0, 1.1)
    assert z2 == pytest.approx(z2_oracle(0, -3, 2, mp.mpf("1.1")), abs=1e-14)
    assert z2 == pytest.approx(0.261889, abs=1e-6)


def test_z2_vs_rk4():
    z2 = riccati_blowup_z2(0.0, -3.0, 2.0, 1.1)
    z, w, blew = riccati_rk4(0.0, -3.0, 2.0, 1.1, 1.0)
    assert blew and abs(z[-1] - z2) <= 0.01 * z2


def test_closed_form_matches_rk4():
    z1, w1, c, m = 0.0, -3.0, 2.0, 1.1
    z2 = riccati_blowup_z2(z1, w1, c, m)
    assert riccati_closed_form(z1, z2, c, m) == pytest.approx(w1, abs=1e-12)
    z, w, _ = riccati_rk4(z1, w1, c, m, z1 + 0.9 * (z2 - z1))
    exact = riccati_closed_form(z, z2, c, m)
    assert np.max(np.abs(w - exact) / np.abs(exact)) <= 1e-6


@settings(max_examples=50)
@given(w1=st.floats(-50.0, -2.5), z1=st.floats(-10, 10))
def test_z2_after_z1(w1, z1):
    assert riccati_blowup_z2(z1, w1, 2.0, 1.1) > z1


def test_z2_precondition():
    with pytest.raises(ValueError):
        riccati_blowup_z2(0.0, -1.0, 2.0, 1.1)


# ---------------------------------------------------------------------------- linear modes


def test_node_roots():
    mode = linear_mode(2.0, 0.5)
    assert mode.c0 == pytest.approx(math.sqrt(2), abs=1e-15)
    assert mode.regime is Regime.NODE
    assert mode.eta_plus[0] == pytest.approx((2 + math.sqrt(2)) / 2, abs=1e-12)
    assert mode.eta_minus[0] == pytest.approx((2 - math.sqrt(2)) / 2, abs=1e-12)
    assert 0 < mode.eta_minus[0] < mode.eta_plus[0]


def test_oscillatory_sign_change():
    mode = linear_mode(1.0, 0.5)
    assert mode.regime is Regime.OSCILLATORY and mode.eta_plus == (0.5, 0.5)
    z = np.linspace(-5, 5, 11)
    assert np.allclose(omega_inf(z, mode), np.exp(z / 2) * np.cos(z / 2))
    assert omega_inf(math.pi + 0.1, mode) < 0
    assert sign_change_exists(mode) == pytest.approx(math.pi, abs=1e-10)


@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0])
def test_node_positive(kappa):
    mode = linear_mode(2.0, 0.5)
    z = np.arange(-50.0, 50.0 + 1e-9, 1e-2)
    assert np.all(omega_inf(z, mode, kappa) > 0)
    assert np.all(omega_inf_prime(z, mode, kappa) > 0)
    assert sign_change_exists(mode, kappa, (-50, 50)) is None


def test_degenerate():
    mode = linear_mode(math.sqrt(2), 0.5)
    assert mode.regime is Regime.DEGENERATE and mode.eta_plus == mode.eta_minus
    assert mode.eta_plus[0] == pytest.approx(math.sqrt(2) / 2)
    with pytest.raises(ValueError, match="positivity"):
        omega_inf(0.0, mode, kappa=0.3)


def test_node_kappa_rejected():
    with pytest.raises(ValueError, match="positivity"):
        omega_inf(0.0, linear_mode(2.0, 0.5), kappa=1.5)


@settings(max_examples=200)
@given(c=st.floats(0.05, 10), f=st.floats(0.01, 10))
def test_eta_quadratic_residual(c, f):
    mode = linear_mode(c, f)
    for re, im in (mode.eta_plus, mode.eta_minus):
        eta = complex(re, im)
        assert abs(eta * eta - c * eta + f) <= 1e-12 * max(1.0, c * c, f)


@settings(max_examples=100)
@given(c=st.floats(0.1, 5), kappa=st.floats(-2, 3))
def test_neutral_form(c, kappa):
    mode = linear_mode(c, 0.0)
    assert mode.regime is Regime.NEUTRAL
    if 0 <= kappa <= 1:
        z = np.linspace(-50, 50, 1001)
        assert np.all(omega_inf(z, mode, kappa) >= 0)
        assert omega_inf(0.0, mode, kappa) == pytest.approx(1.0)
    else:
        with pytest.raises(ValueError):
            omega_inf(0.0, mode, kappa)


def test_neutral_kappa_one_constant():
    mode = linear_mode(1.5, 0.0)
    assert np.all(omega_inf(np.linspace(-10, 10, 21), mode, 1.0) == 1.0)


def test_negative_f0mu_refused():
    with pytest.raises(ValueError):
        linear_mode(1.0, -0.2)


def test_omega_at_zero_is_one():
    for c, f, k in [(1.0, 0.5, 0.7), (2.0, 0.5, 0.3), (math.sqrt(2), 0.5, 0.0)]:
        assert float(omega_inf(0.0, linear_mode(c, f), k)) == pytest.approx(1.0)


def test_leslie_gower_mode_from_model():
    from invasion_lab.kinetics import model_constants

    k = model_constants(make_builtin("leslie_gower"))
    mode = linear_mode(0.5 * k.c0, k.f0mu)
    assert mode.regime is Regime.OSCILLATORY and sign_change_exists(mode) is not None
