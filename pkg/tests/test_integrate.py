import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbplankton.errors import ValidationError
from tbplankton.integrate import Terminal, integrate
from tbplankton.model import ModelParams, State, interior_equilibria, rhs_xy


def test_equilibrium_start_is_stationary(baseline):
    (e,) = interior_equilibria(baseline)
    traj = integrate(baseline, e.state, 100.0)
    assert traj.terminal is Terminal.COMPLETED
    assert np.abs(traj.states - [e.state.x, e.state.y]).max() < 1e-9


def test_prey_only_axis_stays_on_axis(baseline):
    traj = integrate(baseline, State(0.3, 0.0), 50.0)
    assert np.all(traj.y == 0.0)
    assert traj.final.x == pytest.approx(1.0, abs=1e-8)


def test_logistic_closed_form():
    p = ModelParams(1.9, 0.057, 1.3, 0.5)
    traj = integrate(p, State(0.1, 0.0), 5.0, rel_tol=1e-11, abs_tol=1e-14)
    t = traj.times
    exact = 1 / (1 + 9 * np.exp(-1.9 * t))
    assert np.abs(traj.x - exact).max() < 1e-9


def test_tolerance_self_convergence(baseline, start):
    coarse = integrate(baseline, start, 50.0, rel_tol=1e-7)
    fine = integrate(baseline, start, 50.0, rel_tol=1e-11, abs_tol=1e-14)
    t = np.linspace(0, 50, 501)
    err_coarse = np.abs(coarse.sample(t) - fine.sample(t)).max()
    mid = integrate(baseline, start, 50.0, rel_tol=1e-9)
    err_mid = np.abs(mid.sample(t) - fine.sample(t)).max()
    assert err_mid < err_coarse < 1e-4


def test_dense_output_matches_rhs(baseline, start):
    traj = integrate(baseline, start, 20.0)
    stored = np.array([rhs_xy(baseline, x, y) for x, y in traj.states])
    np.testing.assert_allclose(traj.derivs, stored, rtol=1e-12, atol=1e-15)


def test_extinction_terminal():
    p = ModelParams(1.9, 0.057, 1.3, 2.0)
    traj = integrate(p, State(0.9, 0.5), 500.0)
    assert traj.terminal in (Terminal.EXTINCT, Terminal.COMPLETED)
    assert traj.final.y < 1e-6


def test_sample_outside_interval(baseline, start):
    traj = integrate(baseline, start, 1.0)
    with pytest.raises(ValidationError):
        traj.sample([2.0])


@pytest.mark.parametrize("kwargs", [dict(t_end=-1.0), dict(t_end=1.0, rel_tol=0.0),
                                    dict(t_end=1.0, abs_tol=-1.0)])
def test_rejects_bad_arguments(baseline, start, kwargs):
    with pytest.raises(ValidationError):
        integrate(baseline, start, **kwargs)


def test_rejects_negative_initial_state(baseline):
    with pytest.raises(ValidationError):
        integrate(baseline, State(-0.1, 0.5), 1.0)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.1, 4.0), beta=st.floats(0.3, 2.0), gamma=st.floats(0.1, 1.5),
       mu=st.sampled_from([0.0, 1.0, 2.0]), x0=st.floats(0.05, 1.0), y0=st.floats(0.05, 1.0))
def test_positivity(alpha, beta, gamma, mu, x0, y0):
    p = ModelParams(alpha, 0.057, beta, gamma, mu)
    traj = integrate(p, State(x0, y0), 30.0)
    assert traj.terminal in (Terminal.COMPLETED, Terminal.EXTINCT)
    assert traj.states.min() >= -1e-12


def test_halving_tolerances_moves_endpoint_little(baseline, start):
    a = integrate(baseline, start, 500.0, rel_tol=1e-9, abs_tol=1e-12)
    b = integrate(baseline, start, 500.0, rel_tol=5e-10, abs_tol=5e-13)
    assert max(abs(a.final.x - b.final.x), abs(a.final.y - b.final.y)) < 10 * 1e-9
