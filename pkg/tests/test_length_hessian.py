import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavetrace.domain import DomainSpec, build_boundary_jets, symmetric_domain
from wavetrace.jets import Jet
from wavetrace.length_hessian import (
    SingularHessianError,
    build_length_jet,
    chebyshev_T,
    chebyshev_U,
    det_identity_check,
    hessian_closed_form,
    inverse_hessian,
    length_functional,
    numeric_hessian,
)

PINNED = symmetric_domain(2, 1.0, {(1,): -0.25})  # L = 1, nu = -1/2, alpha = 4 pi / 3


def spec_from_nu(L, nu, extra=0.2):
    d = len(nu)
    coeffs = {tuple(int(i == k) for i in range(d)): nu[k] / 2 for k in range(d)}
    coeffs[(2,) + (0,) * (d - 1)] = extra
    return symmetric_domain(d + 1, L, coeffs)


def test_length_jet_constant_and_gradient():
    spec = spec_from_nu(1.3, [-0.5, -1.1])
    for r in (1, 2, 3):
        lj = build_length_jet(spec, r, "+", 3)
        assert lj.critical_value == pytest.approx(2 * r * 1.3)
        assert np.max(np.abs(lj.gradient_at_zero())) < 1e-14


def test_length_jet_quadratic_coefficient():
    lj = build_length_jet(PINNED, 1, "+", 2)
    g = lj.global_jet()
    # -a/(2L) with a = -1
    assert g[(2, 0)] == pytest.approx(0.5)
    assert g[(0, 2)] == pytest.approx(0.5)


def test_pinned_dense_matrix():
    H = hessian_closed_form(PINNED, 1).dense()
    assert np.allclose(H, [[1, -2], [-2, 1]])
    assert np.allclose(numeric_hessian(PINNED, 1), H, atol=1e-8)


def test_orientation_swaps_diagonals():
    fp = Jet(1, 2, {(0,): 0.5, (2,): -0.2})
    fm = Jet(1, 2, {(0,): -0.5, (2,): 0.35})
    spec = DomainSpec(2, 1.0, symmetric=False, f_plus=fp, f_minus=fm)
    Hp = hessian_closed_form(spec, 2, "+").dense()
    Hm = hessian_closed_form(spec, 2, "-").dense()
    assert Hp[0, 0] == pytest.approx(Hm[1, 1])
    assert Hp[1, 1] == pytest.approx(Hm[0, 0])
    for o, H in (("+", Hp), ("-", Hm)):
        assert np.allclose(numeric_hessian(spec, 2, o), H, atol=1e-8)


def test_block_structure_d2_r2():
    spec = spec_from_nu(1.0, [-0.5, -1.2])
    H = hessian_closed_form(spec, 2).dense()
    assert H.shape == (8, 8)
    # blocks two points apart vanish
    assert np.all(H[0:2, 4:6] == 0)
    assert np.allclose(numeric_hessian(spec, 2), H, atol=1e-8)


def test_det_pinned_sign():
    chk = det_identity_check(PINNED, 1)
    assert chk.det_numeric == pytest.approx(-3.0)
    assert chk.predicted == pytest.approx(3.0)


def test_det_hyperbolic_r2():
    spec = symmetric_domain(2, 1.0, {(1,): -1.25})
    chk = det_identity_check(spec, 2)
    alpha = 2 * math.acosh(1.5)
    assert chk.abs_numeric == pytest.approx(abs(2 - 2 * math.cosh(2 * alpha)), rel=1e-12)


def test_chebyshev_values():
    assert chebyshev_T(2, 0.3) == pytest.approx(-0.82)
    assert chebyshev_U(0, 0.4) == 1.0
    assert chebyshev_U(1, 0.4) == pytest.approx(0.8)
    assert chebyshev_U(-1, 0.4) == 0.0
    t = 1.1
    assert chebyshev_T(7, math.cos(t)) == pytest.approx(math.cos(7 * t), abs=1e-13)


def test_inverse_pinned():
    h = inverse_hessian(PINNED, 1)
    assert np.allclose(h, [[-1 / 3, -2 / 3], [-2 / 3, -1 / 3]], atol=1e-14)
    alpha = 4 * math.pi / 3
    # the trigonometric form of the same entry
    assert h[0, 0] == pytest.approx(1 / math.tan(alpha / 2) / (2 * math.sin(alpha / 2)))


def test_resonance_raises():
    with pytest.raises(SingularHessianError):
        inverse_hessian(PINNED, 3)


def test_length_functional_perturbed_not_critical():
    spec = spec_from_nu(1.0, [-0.7])
    X = np.array([0.05, -0.02])
    e = 1e-6
    g = (length_functional(spec, X + [e, 0], 1) - length_functional(spec, X - [e, 0], 1)) / (2 * e)
    assert abs(g) > 1e-3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.floats(0.5, 2.0),
       st.lists(st.floats(0.02, 0.98), min_size=3, max_size=3))
def test_hessian_and_inverse_properties(d, r, L, fr):
    nu = -2 * np.array(fr[:d]) / L
    alpha = 2 * np.arccos(-(1 + L * nu))
    if np.min(np.abs(np.sin(r * alpha / 2))) < 1e-3:
        return
    spec = spec_from_nu(L, nu)
    H = hessian_closed_form(spec, r).dense()
    assert np.max(np.abs(numeric_hessian(spec, r) - H)) <= 1e-8
    h = inverse_hessian(spec, r)
    assert np.max(np.abs(h @ H - np.eye(H.shape[0]))) <= 1e-9
    assert det_identity_check(spec, r).rel_err <= 1e-10
    # parity: diagonal constant over odd and over even points
    m = 2 * r
    for i in range(d):
        diag = np.array([h[p * d + i, p * d + i] for p in range(m)])
        assert np.ptp(diag[0::2]) <= 1e-12 and np.ptp(diag[1::2]) <= 1e-12


def test_general_mode_parity_shift():
    fp = Jet(1, 2, {(0,): 0.5, (2,): -0.2})
    fm = Jet(1, 2, {(0,): -0.5, (2,): 0.35})
    spec = DomainSpec(2, 1.0, symmetric=False, f_plus=fp, f_minus=fm)
    r, m = 3, 6
    hp = inverse_hessian(spec, r, "+")
    hm = inverse_hessian(spec, r, "-")
    assert hp[0, 0] == pytest.approx(hm[1, 1], abs=1e-12)
    for p in range(m):
        for q in range(m):
            assert hm[p, q] == pytest.approx(hp[(p - 1) % m, (q - 1) % m], abs=1e-12)
    diag = np.diag(hp)
    assert np.ptp(diag[0::2]) <= 1e-12 and np.ptp(diag[1::2]) <= 1e-12


def test_sparse_path_above_dense_cap():
    spec = spec_from_nu(1.0, [-0.7, -1.3, -0.4])
    H = hessian_closed_form(spec, 11)  # N = 66 > 64
    with pytest.raises(ValueError):
        H.dense()
    assert det_identity_check(spec, 11).rel_err < 1e-9
    assert build_boundary_jets(spec, 2)[0].trunc == 2
