import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowsim.errors import InvalidGridError, ShapeError
from shadowsim.grid import (
    ShadowState,
    argmax_set,
    make_uniform_grid,
    mask_measure,
    quadrature,
    redistribute_weights,
)


def test_uniform_grid_nodes_and_weights():
    g = make_uniform_grid(4)
    np.testing.assert_allclose(g.nodes, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(g.weights, 0.25)
    assert g.h == 0.25
    assert g == make_uniform_grid(4)
    assert g != make_uniform_grid(8)


@pytest.mark.parametrize("n", [0, 1, -3, 2.5])
def test_too_few_cells_rejected(n):
    with pytest.raises(InvalidGridError):
        make_uniform_grid(n)


def test_grid_arrays_are_read_only():
    g = make_uniform_grid(8)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0


def test_midpoint_rule_exact_for_linear_functions():
    g = make_uniform_grid(7)
    assert quadrature(g, 3.0 * g.nodes + 2.0) == pytest.approx(3.5, abs=1e-14)


def test_quadrature_second_order():
    errs = []
    for n in (16, 32, 64):
        g = make_uniform_grid(n)
        errs.append(abs(quadrature(g, np.exp(g.nodes)) - (np.e - 1.0)))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(rates, 2.0, atol=0.05)


def test_shape_mismatch():
    g = make_uniform_grid(4)
    with pytest.raises(ShapeError):
        quadrature(g, np.ones(5))


def test_argmax_set_keeps_ties():
    g = make_uniform_grid(6)
    f = np.array([1.0, 3.0, 2.0, 3.0, 0.0, 3.0 - 1e-9])
    assert argmax_set(g, f) == {1, 3}
    assert argmax_set(g, f, tol=1e-8) == {1, 3, 5}


def test_mask_measure():
    g = make_uniform_grid(8)
    assert mask_measure(g, g.nodes < 0.5) == pytest.approx(0.5)


def test_evaluate_broadcasts_constants():
    g = make_uniform_grid(5)
    np.testing.assert_array_equal(g.evaluate(lambda x: 2.0), np.full(5, 2.0))


def test_shadow_state_nonnegative():
    assert ShadowState(np.array([0.0, 1.0]), 0.5, 0.0).is_nonnegative()
    assert not ShadowState(np.array([-1e-9, 1.0]), 0.5, 0.0).is_nonnegative()


def test_redistribute_weights_interior_and_edge():
    g = make_uniform_grid(4)
    np.testing.assert_allclose(redistribute_weights(g, [1]), [0.375, 0, 0.375, 0.25])
    np.testing.assert_allclose(redistribute_weights(g, [0]), [0, 0.5, 0.25, 0.25])
    with pytest.raises(InvalidGridError):
        redistribute_weights(g, [7])


@settings(max_examples=50, deadline=None)
@given(n=st.integers(3, 200), data=st.data())
def test_redistributed_weights_integrate_linears_exactly(n, data):
    g = make_uniform_grid(n)
    i = data.draw(st.integers(1, n - 2))
    w = redistribute_weights(g, [i])
    assert w[i] == 0.0
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert w @ g.nodes == pytest.approx(0.5, abs=1e-14)
