import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from wavetrace.jets import (
    Jet,
    MultiIndex,
    jet_add,
    jet_compose_univariate,
    jet_derivative_coefficient,
    jet_mul,
    multi_indices,
    random_jet,
    sqrt_series,
    symmetric_tensor,
)


def jets_strategy(dim, trunc, const=None):
    coeff = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
    keys = [k for deg in range(trunc + 1) for k in multi_indices(dim, deg)]

    def build(vals):
        c = dict(zip(keys, vals))
        if const is not None:
            c[(0,) * dim] = const
        return Jet(dim, trunc, c)

    return st.lists(coeff, min_size=len(keys), max_size=len(keys)).map(build)


def test_multi_index_basics():
    g = MultiIndex((2, 0, 3))
    assert g.order() == 5
    assert g.factorial() == 12
    assert MultiIndex(()).factorial() == 1
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_multi_indices_count():
    for dim in (1, 2, 3):
        for order in range(6):
            assert len(multi_indices(dim, order)) == math.comb(order + dim - 1, dim - 1)


def test_add_example():
    a = Jet(2, 2, {(0, 0): 1, (1, 0): 1})
    b = Jet(2, 2, {(0, 0): 2, (0, 1): 1})
    s = jet_add(a, b)
    assert s.coeffs == {(0, 0): 3.0, (0, 1): 1.0, (1, 0): 1.0}
    assert jet_add(a, Jet.zero(2, 2)).coeffs == a.coeffs


def test_mul_examples():
    x = Jet.variable(1, 2, 0)
    assert jet_mul(1 + x, 1 - x).coeffs == {(0,): 1.0, (2,): -1.0}
    xy = Jet.variable(2, 2, 0) + Jet.variable(2, 2, 1)
    assert jet_mul(xy, xy).coeffs == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}
    a = random_jet(np.random.default_rng(1), 2, 3)
    assert jet_mul(a, Jet.one(2, 3)).is_close(a, 0)


def test_truncation_is_minimum():
    a = Jet(1, 4, {(4,): 1.0})
    b = Jet(1, 2, {(0,): 1.0})
    assert jet_add(a, b).trunc == 2
    assert jet_mul(a, b).coeffs == {}


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        jet_add(Jet.one(1, 2), Jet.one(2, 2))
    with pytest.raises(ValueError):
        jet_mul(Jet.one(1, 2), Jet.one(2, 2))


def test_compose_sqrt_binomial():
    u = Jet.variable(1, 4, 0, shift=1.0)
    s = jet_compose_univariate(sqrt_series(1.0, 4), u)
    assert s[(1,)] == pytest.approx(0.5)
    assert s[(2,)] == pytest.approx(-1 / 8)
    assert s[(3,)] == pytest.approx(1 / 16)


def test_compose_identity_series():
    h = random_jet(np.random.default_rng(2), 2, 3, constant=0.7)
    g = jet_compose_univariate([0.7, 1.0], h)
    assert g.is_close(h, 1e-15)


def test_sqrt_rejects_nonpositive_base():
    with pytest.raises(ValueError):
        sqrt_series(0.0, 3)


def test_derivative_coefficient_examples():
    a = Jet(2, 3, {(2, 1): 1.0})
    assert jet_derivative_coefficient(a, (2, 1)) == 2.0
    assert jet_derivative_coefficient(Jet.constant(2, 0, 3.5), (0, 0)) == 3.5
    with pytest.raises(ValueError):
        jet_derivative_coefficient(a, (3, 1))


def test_derivative_coefficient_symbolic():
    rng = np.random.default_rng(3)
    x, y = sympy.symbols("x y")
    coeffs = {k: int(rng.integers(-5, 6)) for deg in range(5) for k in multi_indices(2, deg)}
    poly = sum(v * x ** k[0] * y ** k[1] for k, v in coeffs.items())
    jet = Jet(2, 4, coeffs)
    for deg in range(5):
        for g in multi_indices(2, deg):
            expect = sympy.diff(poly, x, g[0], y, g[1]).subs({x: 0, y: 0})
            assert jet_derivative_coefficient(jet, g) == float(expect)


def test_symmetric_tensor():
    jet = Jet(2, 3, {(1, 2): 1.5})
    T = symmetric_tensor(jet, 3)
    assert T[0, 1, 1] == T[1, 0, 1] == T[1, 1, 0] == 3.0
    assert T[0, 0, 1] == 0.0


def test_evaluate_matches_polynomial():
    jet = Jet(2, 3, {(0, 0): 1.0, (1, 2): 2.0, (3, 0): -1.0})
    x = np.array([[0.3, -0.7], [1.1, 0.2]])
    expect = 1 + 2 * x[:, 0] * x[:, 1] ** 2 - x[:, 0] ** 3
    assert np.allclose(jet.evaluate(x), expect)


@settings(max_examples=40, deadline=None)
@given(jets_strategy(2, 3), jets_strategy(2, 3), jets_strategy(2, 3))
def test_mul_commutative_associative(a, b, c):
    assert jet_mul(a, b).is_close(jet_mul(b, a), 1e-12)
    assert jet_mul(jet_mul(a, b), c).is_close(jet_mul(a, jet_mul(b, c)), 1e-10)


@settings(max_examples=40, deadline=None)
@given(jets_strategy(2, 4, const=4.0))
def test_sqrt_composition_squares_back(h):
    s = jet_compose_univariate(sqrt_series(4.0, 4), h)
    assert jet_mul(s, s).is_close(h, 1e-9)


@settings(max_examples=30, deadline=None)
@given(jets_strategy(3, 3))
def test_derivative_coefficient_matches_factorial_rule(a):
    for k, v in a.items():
        assert jet_derivative_coefficient(a, k) == pytest.approx(MultiIndex(k).factorial() * v)
