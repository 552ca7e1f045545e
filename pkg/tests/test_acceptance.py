"""The ten acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one PASS/FAIL line; the lines are collected again in the
terminal summary.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from wavetrace.verification import run_suite


def _check(number, title, results, budget=None):
    seconds = sum(r.seconds for r in results)
    ok = all(r.passed for r in results) and (budget is None or seconds < budget)
    errs = ", ".join(f"{r.name} {r.error:.2e} (tol {r.tolerance:.0e})" for r in results)
    timing = f"{seconds:.1f} s" + (f" of {budget} s" if budget else "")
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {errs}; {timing}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    for r in results:
        assert r.passed, f"{r.name}: error {r.error} vs tolerance {r.tolerance}; {r.details}"
    if budget is not None:
        assert seconds < budget, f"runtime {seconds:.1f} s exceeds {budget} s"


def test_criterion_01_hessian_closed_form():
    res = run_suite("hessian")
    assert len(res.details["cases"]) == 20
    assert {c["n"] for c in res.details["cases"]} <= {2, 3, 4}
    _check(1, "Hessian closed form", [res], budget=5)


def test_criterion_02_determinant_identity():
    res = run_suite("det-identity")
    assert sum(c["hyperbolic"] for c in res.details["cases"]) == 5
    assert res.details["pinned_det"] == pytest.approx(-3.0, abs=1e-12)
    assert res.details["pinned_predicted"] == pytest.approx(3.0, abs=1e-12)
    _check(2, "determinant identity", [res])


def test_criterion_03_chebyshev_inverse():
    res = run_suite("chebyshev")
    assert res.details["pinned_h11"] == pytest.approx(-1 / 3, abs=1e-12)
    assert res.details["parity_defect"] <= 1e-12
    _check(3, "Chebyshev inverse", [res])


def test_criterion_04_poincare_determinant():
    res = run_suite("billiard")
    assert max(c["d"] for c in res.details["cases"]) == 2
    assert max(c["r"] for c in res.details["cases"]) == 3
    _check(4, "billiard det(I - P^r)", [res], budget=10)


def test_criterion_05_stationary_phase():
    res = run_suite("stationary-phase")
    c1 = complex(*res.details["quartic_engine_c1"])
    assert abs(c1 + 3j) <= 1e-12
    assert res.details["quartic_oracle_rel_err"] <= 1e-3
    assert [c["N"] for c in res.details["random"]] == [1, 2, 3, 4]
    _check(5, "stationary-phase engine vs oracle", [res], budget=120)


def test_criterion_06_hankel_amplitude():
    res = run_suite("hankel")
    assert [c["nu"] for c in res.details["cases"]] == [0.5, 1.0, 1.5]
    _check(6, "Hankel amplitude", [res])


def test_criterion_07_model_integral():
    res = run_suite("model-integral")
    assert [c["r"] for c in res.details["cases"]] == [1, 2]
    _check(7, "model-integral invariants", [res], budget=300)


def test_criterion_08_structure():
    lin = run_suite("linearity")
    pat = run_suite("pattern")
    assert lin.details["higher_order_change"] <= 1e-12
    assert pat.details["factorization_defect"] <= 1e-8
    _check(8, "linearity, insensitivity and probe pattern", [lin, pat])


def test_criterion_09_floquet_recovery():
    res = run_suite("floquet")
    _check(9, "Floquet recovery", [res])


def test_criterion_10_round_trip():
    res = run_suite("roundtrip")
    cases = res.details["cases"]
    assert len(cases) == 20 and {c["d"] for c in cases} == {1, 2}
    _check(10, "full round trip", [res], budget=900)
