import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbplankton.errors import ArgumentDomainError, ValidationError
from tbplankton.model import (DimensionalParams, EquilibriumKind, ModelParams, State,
                              dimensional_time, equilibria, interior_function,
                              nondimensionalize, rhs)


def test_nondimensionalize_unit_ratios():
    p = nondimensionalize(DimensionalParams(r=2.0, K=3.0, omega=2.0, a=3.0, eta=2.0, beta=0.7))
    assert (p.alpha, p.lam, p.gamma, p.beta, p.mu) == (1.0, 1.0, 1.0, 0.7, 0.0)


def test_nondimensionalize_baseline_ratios():
    K = 10.0
    p = nondimensionalize(DimensionalParams(r=0.95, K=K, omega=0.5, a=0.057 * K, eta=0.25, beta=1.3),
                          mu=0.5)
    assert p.alpha == pytest.approx(1.9)
    assert p.lam == pytest.approx(0.057)
    assert p.gamma == pytest.approx(0.5)
    assert p.mu == 0.5


def test_nondimensionalize_is_pure():
    dim = DimensionalParams(r=0.37, K=1.7, omega=0.21, a=0.3, eta=0.11, beta=1.1)
    assert nondimensionalize(dim) == nondimensionalize(dim)


def test_dimensional_round_trip():
    dim = DimensionalParams(r=0.95, K=12.0, omega=0.5, a=0.684, eta=0.25, beta=1.3)
    X, Y = State(0.25, 0.5).dimensional(dim)
    assert (X, Y) == (3.0, 6.0)
    assert dimensional_time(4.0, dim) == 8.0


@pytest.mark.parametrize("field", ["r", "K", "omega", "a", "eta", "beta"])
def test_dimensional_rejects_non_positive(field):
    kwargs = dict(r=1.0, K=1.0, omega=1.0, a=1.0, eta=1.0, beta=1.0)
    kwargs[field] = 0.0
    with pytest.raises(ValidationError):
        DimensionalParams(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(lam=0.0), dict(gamma=-1.0), dict(alpha=math.nan),
                                    dict(mu=-0.1)])
def test_model_params_validation(kwargs):
    base = dict(alpha=1.0, lam=0.1, beta=1.0, gamma=0.5, mu=0.0)
    base.update(kwargs)
    with pytest.raises(ValidationError):
        ModelParams(**base)


def test_rhs_fixed_points(baseline):
    d = rhs(baseline, State(0.0, 0.0))
    assert (d.dx_dt, d.dy_dt) == (0.0, 0.0)
    d = rhs(baseline, State(1.0, 0.0))
    assert (d.dx_dt, d.dy_dt) == (0.0, 0.0)


def test_rhs_hand_value(baseline):
    # hand substitution: 0.475 - 0.125/0.253249 and 1.3*0.125/0.253249*... - 0.25
    h = 0.25 * 0.5 / (0.057**2 + 0.25)
    d = rhs(baseline, State(0.5, 0.5))
    assert d.dx_dt == pytest.approx(1.9 * 0.25 - h, rel=1e-12)
    assert d.dy_dt == pytest.approx(1.3 * h - 0.25, rel=1e-12)
    # quoted six-decimal values are rounded loosely; the exact lines above are the check
    assert d.dx_dt == pytest.approx(-0.018586, abs=2e-6)
    assert d.dy_dt == pytest.approx(0.391662, abs=2e-6)


def test_rhs_fractional_mu_negative_x():
    p = ModelParams(1.9, 0.057, 1.3, 0.5, mu=0.5)
    with pytest.raises(ArgumentDomainError):
        rhs(p, State(-1e-3, 0.5))


@given(x=st.floats(-5, 5), y=st.floats(-5, 5), mu=st.integers(0, 4))
def test_rhs_integer_mu_defined_everywhere(x, y, mu):
    d = rhs(ModelParams(1.2, 0.3, 1.1, 0.4, mu=float(mu)), State(x, y))
    assert math.isfinite(d.dx_dt) and math.isfinite(d.dy_dt)


def test_interior_closed_form_mu0(baseline):
    interior = [e for e in equilibria(baseline) if e.kind is EquilibriumKind.INTERIOR]
    assert len(interior) == 1
    x_star = 0.057 * math.sqrt(0.5 / 0.8)
    assert interior[0].state.x == pytest.approx(x_star, rel=1e-12)
    assert interior[0].state.x == pytest.approx(0.0450625, abs=5e-8)
    assert interior[0].state.y == pytest.approx(0.212578, abs=1e-6)


def test_no_interior_when_beta_below_gamma():
    p = ModelParams(1.9, 0.057, 0.4, 0.5)
    kinds = [e.kind for e in equilibria(p)]
    assert kinds == [EquilibriumKind.ORIGIN, EquilibriumKind.PHYTO_ONLY]
    # dense scan oracle: g stays negative on (0, 1]
    xs = np.linspace(1e-6, 1.0, 100_001)
    assert all(interior_function(p, x) < 0 for x in xs[::97])


def test_multiple_interior_roots_found():
    # mu = 2: beta x^4 = gamma (lam^2 + x^2) is quadratic in x^2 with two
    # positive roots when beta lam^2 is small enough
    p = ModelParams(1.0, 0.2, 10.0, 1.0, mu=2.0)
    # oracle: solve beta u^2 - gamma u - gamma lam^2 = 0 for u = x^2 (one positive root)
    u = (1.0 + math.sqrt(1.0 + 4 * 10.0 * 0.04)) / 20.0
    xs = [e.state.x for e in equilibria(p) if e.kind is EquilibriumKind.INTERIOR]
    assert xs == pytest.approx([math.sqrt(u)], rel=1e-12)


params = st.builds(
    ModelParams,
    alpha=st.floats(0.01, 5.0), lam=st.floats(0.001, 2.0), beta=st.floats(0.05, 5.0),
    gamma=st.floats(0.01, 5.0),
    mu=st.one_of(st.sampled_from([0.0, 0.5, 1.0, 2.0]), st.floats(0.0, 3.0)),
)


@settings(max_examples=200, deadline=None)
@given(p=params)
def test_equilibria_are_fixed_points(p):
    for e in equilibria(p):
        d = rhs(p, e.state)
        assert max(abs(d.dx_dt), abs(d.dy_dt)) < 1e-10
        if e.kind is EquilibriumKind.INTERIOR:
            assert 0 < e.state.x <= 1
            expected = p.alpha * p.beta / p.gamma * e.state.x * (1 - e.state.x)
            assert abs(e.state.y - expected) < 1e-12


def test_params_dict_round_trip(baseline):
    assert ModelParams.from_dict(baseline.to_dict()) == baseline
    assert baseline.replace(**{"lambda": 0.1}).lam == 0.1
