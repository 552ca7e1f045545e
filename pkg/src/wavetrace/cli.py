"""Command-line interface: ``wavetrace <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 resonance or degenerate orbit, 4 numerical failure, 5 ill-conditioned
or insufficient data, 6 inconsistent data.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import __version__
from .billiard import (
    BoundaryPoint,
    PatchExitError,
    TangentialRayError,
    billiard_orbit,
    det_I_minus_P_numeric,
    poincare_eigenvalues_numeric,
    verify_critical_point,
)
from .domain import DegenerateOrbitError, InvalidDomainError, floquet_from_curvature, validate_DL
from .inversion import (
    IllConditionedWarning,
    InconsistentDataError,
    InsufficientDataError,
    invert_table,
)
from .length_hessian import SingularHessianError, det_identity_check, hessian_closed_form, inverse_hessian
from .serialization import dumps, load_domain, load_table, recovered_to_json, table_to_json
from .stationary_phase import MissingTensorError, OracleFitError
from .wave_invariants import CONVENTION, forward_table, model_integral_oracle, wave_invariants

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_RESONANCE, EXIT_NUMERIC, EXIT_ILL, EXIT_INCONSISTENT = range(7)
J_CAP, R_CAP = 3, 12


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _write(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_csv(rows, header, path):
    if not path:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _write(buf.getvalue(), path)


def _load_domain(path):
    if not path:
        raise CLIError(EXIT_INVALID, "--domain is required")
    try:
        return load_domain(path)
    except FileNotFoundError as exc:
        raise CLIError(EXIT_INVALID, f"domain file not found: {path}") from exc
    except (InvalidDomainError, ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INVALID, f"invalid domain: {exc}") from exc


def _report_validation(spec, r_max):
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        try:
            rep = validate_DL(spec, r_max=r_max)
        except InvalidDomainError as exc:
            raise CLIError(EXIT_INVALID, f"invalid domain: {exc}") from exc
    if not rep.ok:
        raise CLIError(EXIT_RESONANCE, "; ".join(rep.messages) or "degenerate orbit")
    return rep


def _complex(z):
    return [float(np.real(z)), float(np.imag(z))]


# -- commands -----------------------------------------------------------------
def cmd_forward(args) -> int:
    spec = _load_domain(args.domain)
    J = args.j_max
    if args.trunc is not None and args.trunc < 2 * J + 2:
        raise CLIError(EXIT_INVALID, f"--trunc {args.trunc} is below the required 2J+2 = {2 * J + 2}")
    rep = _report_validation(spec, args.r_max)
    table = forward_table(spec, range(1, args.r_max + 1), J)
    _write(dumps(table_to_json(table)), args.out)
    _emit_csv([(r, j, repr(z.real), repr(z.imag)) for (r, j), z in sorted(table.entries.items())],
              ("r", "j", "re", "im"), args.emit_csv)
    lines = [
        f"wave invariants of the bouncing-ball orbit: n={spec.n}, L={spec.L}, r=1..{args.r_max}, j<=J={J}",
        "expansion shape per iterate r (prefactor left symbolic):",
        "  trace ~ C0 e^{i pi m/4} L_r |det(I - P^r)|^{-1/2} e^{2irLk} sum_j B[r,j] k^{-j},  B[r,0] = 1",
    ]
    for m in rep.messages:
        lines.append(f"note: {m}")
    for r in table.r_values:
        vals = "  ".join(f"{table.get(r, j).real:+.6e}{table.get(r, j).imag:+.6e}i" for j in range(1, J + 1))
        lines.append(f"  r={r:2d}  |det(I-P^r)|={table.rows[r].det_I_minus_P:.6e}  {vals}")
    print("\n".join(lines), file=sys.stderr)
    return EXIT_OK


def _parse_alpha(text):
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise CLIError(EXIT_INVALID, f"--alpha must be a comma-separated list of numbers: {text}") from exc


def cmd_invert(args) -> int:
    if not args.table:
        raise CLIError(EXIT_INVALID, "--table is required")
    try:
        table = load_table(args.table)
    except FileNotFoundError as exc:
        raise CLIError(EXIT_INVALID, f"table file not found: {args.table}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INVALID, f"invalid table: {exc}") from exc
    alpha = _parse_alpha(args.alpha) if args.alpha else None
    J = min(args.j_max, table.J) if args.j_max is not None else table.J
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rec = invert_table(table, alpha=alpha, J_max=J)
    ill = [str(w.message) for w in caught if issubclass(w.category, IllConditionedWarning)]
    _write(dumps(recovered_to_json(rec)), args.out)
    _emit_csv([(" ".join(map(str, k)), repr(v)) for k, v in sorted(rec.coeffs.items())],
              ("f_multi_index", "value"), args.emit_csv)
    for j in sorted(rec.condition):
        print(f"level {j}: condition {rec.condition[j]:.3e}, residual {rec.residual[j]:.3e}, "
              f"r used {rec.r_used[j]}", file=sys.stderr)
    if ill:
        raise CLIError(EXIT_ILL, "; ".join(ill))
    return EXIT_OK


def cmd_billiard(args) -> int:
    spec = _load_domain(args.domain)
    orbit = floquet_from_curvature(spec)
    steps = 2 * args.r_max
    traj = billiard_orbit(spec, BoundaryPoint(np.zeros(spec.d), 1, np.zeros(spec.d)), steps)
    rng = np.random.default_rng(args.seed)
    start = BoundaryPoint(rng.uniform(-1e-3, 1e-3, spec.d), 1, rng.uniform(-1e-3, 1e-3, spec.d))
    perturbed = billiard_orbit(spec, start, steps)
    ev = poincare_eigenvalues_numeric(spec)
    dets = []
    for r in range(1, args.r_max + 1):
        pred = float(np.prod([abs(2 - 2 * (np.cos(r * a) if s == "elliptic" else np.cosh(r * a)))
                              for a, s in zip(orbit.alpha, orbit.stability)]))
        num = det_I_minus_P_numeric(spec, r)
        dets.append({"r": r, "numeric": num, "predicted": pred, "rel_err": abs(num - pred) / pred})
    out = {
        "version": __version__,
        "alpha": orbit.alpha.tolist(),
        "stability": list(orbit.stability),
        "eigenvalues": [_complex(z) for z in ev],
        "det_I_minus_P": dets,
        "critical_gradient": {str(r): verify_critical_point(spec, r) for r in range(1, args.r_max + 1)},
        "orbit": [{"x": p.x_prime.tolist(), "side": p.side, "eta": p.eta.tolist()} for p in traj],
        "perturbed": [{"x": p.x_prime.tolist(), "side": p.side, "eta": p.eta.tolist()} for p in perturbed],
    }
    _write(dumps(out), args.out)
    _emit_csv([(d["r"], repr(d["numeric"]), repr(d["predicted"])) for d in dets],
              ("r", "numeric", "predicted"), args.emit_csv)
    return EXIT_OK


def cmd_hessian(args) -> int:
    spec = _load_domain(args.domain)
    r = args.r_max
    H = hessian_closed_form(spec, r)
    chk = det_identity_check(spec, r)
    hinv = inverse_hessian(spec, r)
    d, m = spec.d, 2 * r
    elements = [
        {"i": i + 1, "p": p + 1, "q": q + 1, "value": float(hinv[p * d + i, q * d + i])}
        for i in range(d) for p in range(m) for q in range(p, m)
    ]
    out = {
        "version": __version__,
        "r": r,
        "matrix": H.dense().tolist() if H.N <= 64 else None,
        "det": {"numeric": chk.det_numeric, "abs_numeric": chk.abs_numeric,
                "predicted": chk.predicted, "rel_err": chk.rel_err},
        "inverse_elements": elements,
    }
    _write(dumps(out), args.out)
    _emit_csv([(e["i"], e["p"], e["q"], repr(e["value"])) for e in elements],
              ("i", "p", "q", "value"), args.emit_csv)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import SUITES, run_all

    names = [s.strip() for s in args.suite.split(",")] if args.suite else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise CLIError(EXIT_INVALID, f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    results = run_all(args.seed, names)
    report = {"version": __version__, "seed": args.seed, "suites": []}
    for res in results:
        entry = res.as_dict()
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name:18s} error {res.error:.3e}  "
              f"tol {res.tolerance:.1e}  ({entry.pop('seconds'):.1f} s)", file=sys.stderr)
        report["suites"].append(entry)
    report["passed"] = all(r.passed for r in results)
    _write(dumps(report), args.out)
    _emit_csv([(r.name, int(r.passed), repr(r.error), repr(r.tolerance)) for r in results],
              ("suite", "passed", "error", "tolerance"), args.emit_csv)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_oracle(args) -> int:
    spec = _load_domain(args.domain)
    if spec.d != 1:
        raise CLIError(EXIT_INVALID, "the quadrature oracle supports d = 1 only")
    _report_validation(spec, args.r_max)
    J = args.j_max
    rows = []
    for r in range(1, args.r_max + 1):
        B = wave_invariants(spec, r, J)
        res = model_integral_oracle(spec, r, J, tol=None)
        c = res.coeffs / res.coeffs[0]
        for j in range(J + 1):
            rel = float(abs(c[j] - B[j]) / abs(B[j])) if B[j] != 0 else float(abs(c[j]))
            rows.append({"r": r, "j": j, "engine": _complex(B[j]), "oracle": _complex(c[j]),
                         "rel_err": rel, "fit_residual": res.residual})
    _write(dumps({"version": __version__, "convention": CONVENTION, "rows": rows}), args.out)
    _emit_csv([(x["r"], x["j"], repr(x["rel_err"])) for x in rows], ("r", "j", "rel_err"), args.emit_csv)
    return EXIT_OK


# -- parser -------------------------------------------------------------------
def _bounded(name, lo, hi):
    def parse(text):
        try:
            v = int(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from exc
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{name} must lie in [{lo}, {hi}]")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavetrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, domain=True, r_default=4, j_default=2):
        if domain:
            p.add_argument("--domain", help="DomainSpec JSON file")
        p.add_argument("--r-max", type=_bounded("--r-max", 1, R_CAP), default=r_default)
        p.add_argument("--j-max", type=_bounded("--j-max", 0, J_CAP), default=j_default)
        p.add_argument("--trunc", type=int, default=None, help="truncation order (must be >= 2J+2)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--emit-csv", default=None, help="also write a CSV table to this file")
        return p

    p = common(sub.add_parser("forward", help="compute the wave-invariant table"), r_default=4)
    p.set_defaults(func=cmd_forward)
    p = common(sub.add_parser("invert", help="recover Taylor coefficients from a table"), domain=False)
    p.add_argument("--table", help="WaveInvariantTable JSON file")
    p.add_argument("--alpha", default=None, help="known Floquet angles, comma separated")
    p.set_defaults(func=cmd_invert, j_max=None)
    p = common(sub.add_parser("billiard", help="billiard orbit and numeric Poincare data"), r_default=3)
    p.set_defaults(func=cmd_billiard)
    p = common(sub.add_parser("hessian", help="closed-form Hessian, determinant and inverse"), r_default=1)
    p.set_defaults(func=cmd_hessian)
    p = common(sub.add_parser("verify", help="run verification suites"), domain=False)
    p.add_argument("--suite", default=None, help="comma-separated suite names (default: all)")
    p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("oracle", help="engine vs quadrature of the model integral (d = 1)"),
               r_default=2)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DegenerateOrbitError, SingularHessianError) as exc:
        print(f"error: resonance or degenerate orbit: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except InvalidDomainError as exc:
        print(f"error: invalid domain: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InsufficientDataError as exc:
        print(f"error: insufficient data: {exc}", file=sys.stderr)
        return EXIT_ILL
    except InconsistentDataError as exc:
        print(f"error: inconsistent data: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (PatchExitError, TangentialRayError, OracleFitError, MissingTensorError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
