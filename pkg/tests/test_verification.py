import json

import numpy as np
import pytest

from wavetrace.serialization import dumps
from wavetrace.verification import (
    SUITES,
    canonical_axes,
    random_chain_problem,
    random_elliptic_spec,
    run_suite,
)

FAST = ["hessian", "det-identity", "chebyshev", "billiard", "hankel", "floquet"]


@pytest.mark.parametrize("seed", [1, 7])
@pytest.mark.parametrize("name", FAST)
def test_fast_suites_pass_for_other_seeds(name, seed):
    res = run_suite(name, seed)
    assert res.passed, (res.error, res.tolerance)


def test_suite_report_is_plain_json():
    res = run_suite("floquet")
    text = dumps(res.as_dict())
    assert json.loads(text)["suite"] == "floquet"


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
    assert "roundtrip" in SUITES and "model-integral" in SUITES


def test_random_elliptic_spec_margins():
    rng = np.random.default_rng(0)
    for d in (1, 2, 3):
        spec, alpha = random_elliptic_spec(rng, d, r_max=8)
        assert spec.d == d
        rs = np.arange(1, 9)
        assert np.min(np.abs(np.sin(np.outer(rs, alpha) / 2))) >= 0.08


def test_canonical_axes():
    out = canonical_axes({(1, 0): 1.0, (2, 1): 2.0}, [2.0, 1.0])
    assert out == {(0, 1): 1.0, (1, 2): 2.0}


def test_chain_problem_structure():
    rng = np.random.default_rng(3)
    links, S, A = random_chain_problem(rng, 3, 2)
    assert len(links) == 3 and S.trunc == 6 and A.trunc == 4
    assert np.max(np.abs(S.gradient())) == 0
    assert A.constant_term == 1.0
