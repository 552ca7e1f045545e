import json

import numpy as np
import pytest

from wavetrace.domain import DomainSpec, InvalidDomainError, build_boundary_jets, symmetric_domain
from wavetrace.inversion import invert_table
from wavetrace.serialization import (
    domain_from_json,
    domain_to_json,
    dumps,
    jet_from_json,
    jet_to_json,
    recovered_to_json,
    table_from_json,
    table_to_json,
)
from wavetrace.wave_invariants import forward_table

SPEC = symmetric_domain(3, 1.1, {(1, 0): -0.3, (0, 1): -0.55, (2, 0): 0.1 / 3, (1, 1): -0.2})


def test_domain_round_trip_exact():
    back = domain_from_json(json.loads(dumps(domain_to_json(SPEC))))
    assert back.n == 3 and back.L == 1.1 and back.symmetric
    assert back.F.coeffs == SPEC.F.coeffs  # shortest repr round-trips bit for bit


def test_general_domain_round_trip():
    fp, fm = build_boundary_jets(SPEC, 4)
    gen = DomainSpec(3, 1.1, symmetric=False, f_plus=fp, f_minus=fm)
    back = domain_from_json(json.loads(dumps(domain_to_json(gen))))
    assert not back.symmetric
    assert back.f_plus.coeffs == fp.coeffs and back.f_minus.coeffs == fm.coeffs


@pytest.mark.parametrize("obj", [
    {"trunc": 2, "coeffs": [{"idx": [1], "val": 0.2}]},
    {"trunc": 1, "coeffs": [{"idx": [2, 0], "val": 0.2}]},
    {"trunc": 2, "coeffs": [{"index": [1, 0], "val": 0.2}]},
])
def test_jet_validation(obj):
    with pytest.raises(InvalidDomainError):
        jet_from_json(obj, 2)


def test_domain_validation():
    with pytest.raises(InvalidDomainError):
        domain_from_json({"n": "two", "L": 1})
    with pytest.raises(InvalidDomainError):
        domain_from_json({"n": 1, "L": 1})


def test_jet_drops_zeros():
    enc = jet_to_json(SPEC.F + SPEC.F * -1.0)
    assert enc["coeffs"] == []


def test_nan_rejected():
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


def test_table_round_trip():
    table = forward_table(SPEC, [1, 2, 3], 1)
    text = dumps(table_to_json(table))
    back = table_from_json(json.loads(text))
    assert back.entries == table.entries
    assert back.rows == table.rows
    assert back.J == 1 and back.n == 3
    assert dumps(table_to_json(back)) == text
    assert "version" in back.convention


def test_recovered_json():
    spec = symmetric_domain(2, 1.0, {(1,): -0.3, (2,): 0.1})
    rec = invert_table(forward_table(spec, range(1, 6), 1))
    obj = json.loads(dumps(recovered_to_json(rec)))
    f = {tuple(c["idx"]): c["val"] for c in obj["f_coeffs"]}
    assert f[(4,)] == pytest.approx(0.1, abs=1e-9)
    assert obj["d"] == 1 and obj["order"] == 4
    assert np.isfinite(obj["condition"]["1"])
