import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavetrace.domain import (
    DegenerateOrbitError,
    DomainSpec,
    InvalidDomainError,
    build_boundary_jets,
    floquet_from_curvature,
    symmetric_domain,
    validate_DL,
)
from wavetrace.jets import Jet, jet_derivative_coefficient


def test_boundary_jets_quadratic():
    fp, fm = build_boundary_jets(symmetric_domain(2, 1.0, {(1,): -0.25}), 4)
    assert fp.coeffs == {(0,): 0.5, (2,): -0.25}
    assert (fp + fm).coeffs == {}
    assert jet_derivative_coefficient(fp, (2,)) == -0.5


def test_boundary_jets_index_doubling():
    spec = symmetric_domain(3, 1.0, {(1, 0): -0.25, (0, 1): -0.3, (1, 1): 0.1})
    fp, _ = build_boundary_jets(spec, 4)
    assert fp[(2, 2)] == 0.1
    assert fp[(2, 0)] == -0.25


def test_flat_domain_accepted_then_rejected():
    spec = symmetric_domain(2, 1.0, {(1,): 0.0})
    fp, fm = build_boundary_jets(spec, 2)
    assert fp.coeffs == {(0,): 0.5}
    with pytest.raises(DegenerateOrbitError):
        floquet_from_curvature(spec)


def test_missing_F():
    with pytest.raises(InvalidDomainError):
        DomainSpec(2, 1.0, F=None, symmetric=True)
    with pytest.raises(InvalidDomainError):
        DomainSpec(2, -1.0, F=Jet(1, 1, {(1,): -0.2}))


def test_floquet_elliptic_example():
    orbit = floquet_from_curvature(symmetric_domain(2, 1.0, {(1,): -0.25}))
    assert orbit.stability == ("elliptic",)
    assert orbit.a[0] == pytest.approx(-1.0)
    assert orbit.alpha[0] == pytest.approx(4 * math.pi / 3, abs=1e-14)


def test_floquet_hyperbolic_example():
    orbit = floquet_from_curvature(symmetric_domain(2, 1.0, {(1,): -1.25}))
    assert orbit.stability == ("hyperbolic",)
    assert orbit.a[0] == pytest.approx(3.0)
    assert math.cosh(orbit.alpha[0] / 2) == pytest.approx(1.5)


def test_non_diagonal_hessian_rejected():
    fp = Jet(2, 2, {(0, 0): 0.5, (2, 0): -0.2, (1, 1): 0.05, (0, 2): -0.3})
    fm = Jet(2, 2, {(0, 0): -0.5, (2, 0): 0.2, (1, 1): -0.05, (0, 2): 0.3})
    spec = DomainSpec(3, 1.0, symmetric=False, f_plus=fp, f_minus=fm)
    with pytest.raises(InvalidDomainError, match="rotate"):
        floquet_from_curvature(spec)


def test_general_mode_matches_symmetric():
    sym = symmetric_domain(2, 1.3, {(1,): -0.4})
    fp, fm = build_boundary_jets(sym, 2)
    gen = DomainSpec(2, 1.3, symmetric=False, f_plus=fp, f_minus=fm)
    assert floquet_from_curvature(gen).alpha == pytest.approx(floquet_from_curvature(sym).alpha)


def test_validate_resonance():
    spec = symmetric_domain(2, 1.0, {(1,): -0.25})
    with pytest.warns(UserWarning):
        rep = validate_DL(spec, r_max=3)
    assert not rep.ok
    assert validate_DL(spec, r_max=2).ok


def test_validate_irrational_pair():
    L = 1.0
    alpha = np.array([1.0, math.sqrt(2)])
    nu = (-np.cos(alpha / 2) - 1) / L
    spec = symmetric_domain(3, L, {(1, 0): nu[0] / 2, (0, 1): nu[1] / 2})
    rep = validate_DL(spec, r_max=10)
    assert rep.ok and rep.checks["symmetry"]


def test_validate_parabolic():
    with pytest.warns(UserWarning):
        assert not validate_DL(symmetric_domain(2, 1.0, {(1,): 0.0})).ok


@settings(max_examples=50, deadline=None)
@given(st.floats(0.3, 3.0), st.lists(st.floats(-0.99, -0.01), min_size=1, max_size=3),
       st.floats(-1, 1))
def test_curvature_round_trip(L, fractions, c2):
    d = len(fractions)
    nu = np.array(fractions) * 2 / L  # elliptic range (-2/L, 0)
    coeffs = {tuple(int(i == k) for i in range(d)): nu[k] / 2 for k in range(d)}
    coeffs[(2,) + (0,) * (d - 1)] = c2
    spec = symmetric_domain(d + 1, L, coeffs)
    fp, fm = build_boundary_jets(spec, 4)
    for k in range(d):
        e = [0] * d
        e[k] = 2
        assert jet_derivative_coefficient(fp, e) == pytest.approx(nu[k], rel=1e-14)
    assert (fp + fm).coeffs == {}
    assert all(v == 0 or all(x % 2 == 0 for x in key) for key, v in fp.items())
    orbit = floquet_from_curvature(spec)
    assert np.allclose(2 * np.cos(orbit.alpha / 2), orbit.a, atol=1e-12)
