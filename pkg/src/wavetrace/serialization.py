"""JSON encodings of domains, invariant tables and recovered jets.

Floats are written with Python's shortest round-trip repr, so reading a
file back reproduces every value bit for bit; mappings are emitted in a
canonical order so identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import math

import numpy as np

from . import __version__
from .domain import DomainSpec, InvalidDomainError
from .inversion import RecoveredJet
from .jets import Jet
from .wave_invariants import RowInfo, WaveInvariantTable

__all__ = [
    "jet_to_json",
    "jet_from_json",
    "domain_to_json",
    "domain_from_json",
    "table_to_json",
    "table_from_json",
    "recovered_to_json",
    "dumps",
    "load_domain",
    "load_table",
]


def _num(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value cannot be serialized")
    return x


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def jet_to_json(jet: Jet) -> dict:
    coeffs = [{"idx": list(k), "val": _num(v)} for k, v in sorted(jet.items()) if v != 0.0]
    return {"trunc": jet.trunc, "coeffs": coeffs}


def jet_from_json(obj: dict, dim: int) -> Jet:
    try:
        coeffs = {tuple(int(i) for i in c["idx"]): float(c["val"]) for c in obj["coeffs"]}
        trunc = int(obj["trunc"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDomainError(f"malformed jet encoding: {exc}") from exc
    for k in coeffs:
        if len(k) != dim:
            raise InvalidDomainError(f"multi-index {list(k)} does not have {dim} entries")
        if sum(k) > trunc:
            raise InvalidDomainError(f"multi-index {list(k)} exceeds truncation {trunc}")
    return Jet(dim, trunc, coeffs)


def domain_to_json(spec: DomainSpec) -> dict:
    out = {"n": spec.n, "L": _num(spec.L), "symmetric": spec.symmetric}
    for name in ("F", "f_plus", "f_minus"):
        jet = getattr(spec, name)
        if jet is not None:
            out[name] = jet_to_json(jet)
    return out


def domain_from_json(obj: dict) -> DomainSpec:
    try:
        n, L = int(obj["n"]), float(obj["L"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDomainError(f"domain needs integer 'n' and numeric 'L': {exc}") from exc
    if n < 2:
        raise InvalidDomainError("ambient dimension must be at least 2")
    jets = {name: jet_from_json(obj[name], n - 1) for name in ("F", "f_plus", "f_minus") if name in obj}
    return DomainSpec(n, L, symmetric=bool(obj.get("symmetric", True)), **jets)


def _complex(z) -> list:
    return [_num(z.real), _num(z.imag)]


def table_to_json(table: WaveInvariantTable) -> dict:
    entries = [
        {"r": r, "j": j, "re": _num(z.real), "im": _num(z.imag)}
        for (r, j), z in sorted(table.entries.items())
    ]
    rows = []
    for r, info in sorted(table.rows.items()):
        rows.append({
            "r": r, "N": info.N, "S0": _num(info.S0), "signature": info.signature,
            "sqrt_abs_det": _num(info.sqrt_abs_det), "s": info.s,
            "C": _complex(info.C), "c0": _complex(info.c0),
            "det_I_minus_P": _num(info.det_I_minus_P),
        })
    return {
        "n": table.n, "L": _num(table.L), "J": table.J, "entries": entries, "rows": rows,
        "convention": dict(table.convention, version=__version__),
    }


def table_from_json(obj: dict) -> WaveInvariantTable:
    entries = {(int(e["r"]), int(e["j"])): complex(e["re"], e["im"]) for e in obj["entries"]}
    J = int(obj.get("J", max((j for _, j in entries), default=0)))
    rows = {}
    for row in obj.get("rows", []):
        rows[int(row["r"])] = RowInfo(
            int(row["r"]), int(row["N"]), float(row["S0"]), int(row["signature"]),
            float(row["sqrt_abs_det"]), int(row["s"]), complex(*row["C"]), complex(*row["c0"]),
            float(row["det_I_minus_P"]),
        )
    return WaveInvariantTable(int(obj["n"]), float(obj["L"]), J, entries, rows,
                              dict(obj.get("convention", {})))


def recovered_to_json(rec: RecoveredJet) -> dict:
    return {
        "d": rec.d,
        "order": rec.order,
        "alpha": [_num(a) for a in np.atleast_1d(rec.alpha)] if rec.alpha is not None else None,
        "f_coeffs": [{"idx": list(k), "val": _num(v)} for k, v in sorted(rec.coeffs.items())],
        "F": {"trunc": max([sum(k) for k in rec.F_coeffs] + [1]),
              "coeffs": [{"idx": list(k), "val": _num(v)} for k, v in sorted(rec.F_coeffs.items())]},
        "condition": {str(j): _num(c) if math.isfinite(c) else None for j, c in sorted(rec.condition.items())},
        "residual": {str(j): _num(v) for j, v in sorted(rec.residual.items())},
        "r_used": {str(j): list(v) for j, v in sorted(rec.r_used.items())},
        "version": __version__,
    }


def load_domain(path) -> DomainSpec:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDomainError(f"{path}: not valid JSON ({exc})") from exc
    return domain_from_json(obj)


def load_table(path) -> WaveInvariantTable:
    with open(path) as fh:
        return table_from_json(json.load(fh))
