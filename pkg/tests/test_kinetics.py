import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowsim.errors import ConstraintError, InvalidEigenvectorError, SingularKineticsError
from shadowsim.grid import make_uniform_grid
from shadowsim.kinetics import (
    ActivatorInhibitor,
    Carcinogenesis,
    Generic,
    GrayScott,
    autocatalysis_rate,
    classify_shadow_stability,
    eigenpair_residual,
    eval_f,
    ode_jacobian,
    ode_steady_states,
    shadow_steady_report,
    shadow_steady_states,
    zero_kinetics,
)

CARC = Carcinogenesis(2.0, 1.0, 65.0 / 8.0)


def test_carcinogenesis_ode_states():
    states = sorted(ode_steady_states(CARC), key=lambda s: s.u_bar)
    pairs = [s.as_pair() for s in states]
    np.testing.assert_allclose(pairs, [(0.0, 65 / 8), (1 / 8, 8.0), (8.0, 1 / 8)], atol=1e-12)
    labels = {s.as_pair(): s.classification for s in states}
    assert labels[pairs[1]] == "ode-unstable"
    assert labels[pairs[2]] == "ode-stable"


def test_carcinogenesis_jacobian_at_spatially_constant_state():
    jac = ode_jacobian(CARC, 8.0, 0.125)
    # f_u = d (a - d) / a at u xi = 1
    assert jac[0, 0] == pytest.approx(0.5)
    assert np.all(np.linalg.eigvals(jac).real < 0)


def test_gray_scott_shadow_roots():
    g = make_uniform_grid(10)
    states = shadow_steady_states(GrayScott(1.0, 0.0), g, g.nodes < 0.1 + 1e-12)
    xis = sorted(s.xi_bar for s in states)
    np.testing.assert_allclose(xis, [(1 - np.sqrt(0.6)) / 2, (1 + np.sqrt(0.6)) / 2], rtol=1e-12)


def test_gray_scott_no_state_on_large_mask():
    g = make_uniform_grid(10)
    states, diag = shadow_steady_report(GrayScott(1.0, 0.1), g, np.ones(10, bool))
    assert states == []
    assert any("discriminant" in d for d in diag)


def test_activator_inhibitor_closed_form():
    m = ActivatorInhibitor(2.0, 1.0, 2.0, 0.0, 0.5)
    g = make_uniform_grid(8)
    (st_,) = shadow_steady_states(m, g, g.nodes < 0.5)
    # xi = m^(-1/(rq/(p-1) - s - 1)) = 0.5^-1
    assert st_.xi_bar == pytest.approx(2.0)
    assert st_.u_bar == pytest.approx(2.0)
    assert st_.residual_f < 1e-12


def test_carcinogenesis_plateau_state():
    g = make_uniform_grid(512)
    mask = (g.nodes >= 0.25) & (g.nodes <= 0.75)
    states = shadow_steady_states(CARC, g, mask)
    high = max(states, key=lambda s: s.u_bar)
    assert high.u_bar == pytest.approx((65 + np.sqrt(4097)) / 8, rel=1e-12)
    assert high.xi_bar == pytest.approx(8 / (65 + np.sqrt(4097)), rel=1e-12)
    assert high.classification == "unstable-autocatalytic"


@pytest.mark.parametrize(
    "factory, message",
    [
        (lambda: ActivatorInhibitor(0.5, 1, 1, 0, 1), "p>1 required"),
        (lambda: ActivatorInhibitor(2, 0, 1, 0, 1), "q>0 required"),
        (lambda: ActivatorInhibitor(2, 1, 1, -1, 1), "s>=0 required"),
        (lambda: GrayScott(0.0, 0.1), "B>0 required"),
        (lambda: GrayScott(1.0, -0.1), "k>=0 required"),
        (lambda: Carcinogenesis(2, 1, 0), "kappa0>0 required"),
    ],
)
def test_parameter_constraints(factory, message):
    with pytest.raises(ConstraintError, match=message):
        factory()


def test_activator_inhibitor_singular_at_zero_xi():
    with pytest.raises(SingularKineticsError):
        ActivatorInhibitor(2, 1, 2, 0, 1).f(1.0, 0.0)


def test_scalar_evaluation_returns_float():
    assert isinstance(eval_f(CARC, 8.0, 0.125), float)
    assert eval_f(CARC, 8.0, 0.125) == pytest.approx(0.0, abs=1e-15)


def test_trivial_states_are_stable():
    for model in (GrayScott(1.0, 0.1), CARC):
        trivial = [s for s in ode_steady_states(model) if s.u_bar == 0.0]
        assert trivial and classify_shadow_stability(model, trivial[0]) == "trivial-stable"


_models = st.sampled_from([
    GrayScott(1.0, 0.1),
    GrayScott(0.3, 0.02),
    ActivatorInhibitor(2.0, 1.0, 2.0, 0.0, 0.5),
    ActivatorInhibitor(3.0, 2.0, 1.5, 0.5, 1.3),
    CARC,
])


@settings(max_examples=60, deadline=None)
@given(model=_models, u=st.floats(0.1, 10.0), xi=st.floats(0.1, 5.0))
def test_partials_match_finite_differences(model, u, xi):
    f_u, f_xi, g_u, g_xi = model.partials(u, xi)
    h = 1e-6
    fd = [
        (model.f(u + h, xi) - model.f(u - h, xi)) / (2 * h),
        (model.f(u, xi + h) - model.f(u, xi - h)) / (2 * h),
        (model.g(u + h, xi) - model.g(u - h, xi)) / (2 * h),
        (model.g(u, xi + h) - model.g(u, xi - h)) / (2 * h),
    ]
    np.testing.assert_allclose([f_u, f_xi, g_u, g_xi], fd, rtol=1e-5, atol=1e-6)


def _zero_mean_mode(grid, mask):
    w = np.where(mask, np.cos(2 * np.pi * grid.nodes), 0.0)
    w[mask] -= grid.weights[mask] @ w[mask] / grid.weights[mask].sum()
    return w


@pytest.mark.parametrize(
    "model, lam",
    [(GrayScott(0.1, 0.01), 0.11), (ActivatorInhibitor(3.0, 3.0, 1.0, 0.0, 1.0), 2.0), (CARC, 0.5)],
)
def test_eigenpair_residual_on_constant_states(model, lam):
    g = make_uniform_grid(64)
    nontrivial = [s for s in ode_steady_states(model) if s.u_bar > 0]
    assert nontrivial
    w = _zero_mean_mode(g, np.ones(64, bool))
    for state in nontrivial:
        if isinstance(model, Carcinogenesis) and state.u_bar != 8.0:
            continue
        # every nontrivial Gray-Scott state has f_u = B + k
        assert autocatalysis_rate(model, state) == pytest.approx(lam, rel=1e-12)
        assert eigenpair_residual(model, g, state, w) <= 1e-10


def test_eigenvector_must_have_zero_mean():
    g = make_uniform_grid(16)
    state = [s for s in ode_steady_states(CARC) if s.u_bar == 8.0][0]
    with pytest.raises(InvalidEigenvectorError):
        eigenpair_residual(CARC, g, state, np.ones(16))
    with pytest.raises(InvalidEigenvectorError):
        eigenpair_residual(CARC, g, state, np.zeros(16))


def test_eigenpair_on_plateau_state():
    g = make_uniform_grid(128)
    mask = (g.nodes > 0.25) & (g.nodes < 0.75)
    high = max(shadow_steady_states(CARC, g, mask), key=lambda s: s.u_bar)
    w = _zero_mean_mode(g, mask)
    assert eigenpair_residual(CARC, g, high, w) <= 1e-10


def test_generic_and_zero_kinetics():
    model = Generic(lambda u, xi: -u, lambda u, xi: -xi)
    assert model.f(2.0, 1.0) == -2.0
    z = zero_kinetics()
    assert z.f(3.0, 1.0) == 0.0 and z.g(3.0, 1.0) == 0.0
