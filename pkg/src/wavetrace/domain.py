"""Analytic domain near a bouncing-ball orbit.

The orbit is the vertical segment from (0, -L/2) to (0, L/2); near its
endpoints the boundary is the union of two graphs x_n = f_plus(x') and
x_n = f_minus(x'), x' in R^d with d = n - 1.  In symmetric mode the
graphs come from one function F through

    f_plus(x') = L/2 + F(x_1^2, ..., x_d^2) - F(0),   f_minus = -f_plus.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet

__all__ = [
    "DomainSpec",
    "OrbitData",
    "DLReport",
    "DegenerateOrbitError",
    "InvalidDomainError",
    "build_boundary_jets",
    "boundary_polynomials",
    "curvature_data",
    "floquet_from_curvature",
    "validate_DL",
    "symmetric_domain",
]

PARABOLIC_TOL = 1e-9
RESONANCE_TOL = 1e-9


class InvalidDomainError(ValueError):
    pass


class DegenerateOrbitError(ValueError):
    """Raised for parabolic (or otherwise degenerate) bouncing-ball orbits."""


@dataclass(frozen=True)
class DomainSpec:
    n: int
    L: float
    F: Jet | None = None
    symmetric: bool = True
    f_plus: Jet | None = None
    f_minus: Jet | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDomainError("ambient dimension must be at least 2")
        if not self.L > 0:
            raise InvalidDomainError("L must be positive")
        d = self.n - 1
        for name in ("F", "f_plus", "f_minus"):
            j = getattr(self, name)
            if j is not None and j.dim != d:
                raise InvalidDomainError(f"{name} must be a jet in {d} variables, got {j.dim}")
        if self.symmetric and self.F is None:
            raise InvalidDomainError("symmetric mode requires F")
        if not self.symmetric and (self.f_plus is None or self.f_minus is None):
            raise InvalidDomainError("general mode requires f_plus and f_minus")

    @property
    def d(self) -> int:
        return self.n - 1

    def with_F(self, F: Jet) -> "DomainSpec":
        return DomainSpec(self.n, self.L, F=F, symmetric=True)


def symmetric_domain(n: int, L: float, coeffs: dict, trunc: int | None = None) -> DomainSpec:
    """Symmetric spec from a ``{multi-index of F: value}`` mapping."""
    d = n - 1
    if trunc is None:
        trunc = max([sum(k) for k in coeffs] + [1])
    return DomainSpec(n, L, F=Jet(d, trunc, coeffs), symmetric=True)


def build_boundary_jets(spec: DomainSpec, trunc: int) -> tuple[Jet, Jet]:
    """Jets of f_plus and f_minus at 0, truncated at total degree ``trunc``.

    In symmetric mode the coefficient of u^gamma in F becomes the
    coefficient of x^(2 gamma) in f; F is read as a polynomial, so terms
    above its stored truncation are zero.
    """
    if trunc < 2:
        raise ValueError("boundary jets need trunc >= 2")
    d, L = spec.d, spec.L
    if spec.symmetric:
        if spec.F is None:
            raise InvalidDomainError("missing F in symmetric mode")
        coeffs = {(0,) * d: L / 2}
        for k, v in spec.F.items():
            if sum(k) == 0:
                continue
            coeffs[tuple(2 * e for e in k)] = v
        f = Jet(d, trunc, coeffs)
        return f, -f
    fp, fm = spec.f_plus.truncate(trunc), spec.f_minus.truncate(trunc)
    if abs(fp.constant_term - L / 2) > 1e-12 or abs(fm.constant_term + L / 2) > 1e-12:
        raise InvalidDomainError("f_plus(0) and f_minus(0) must equal +L/2 and -L/2")
    if np.any(np.abs(fp.gradient()) > 1e-12) or np.any(np.abs(fm.gradient()) > 1e-12):
        raise InvalidDomainError("the orbit endpoints must be critical points of f_plus, f_minus")
    return fp, fm


@dataclass(frozen=True)
class OrbitData:
    """Curvature and stability data of the bouncing-ball orbit.

    ``nu`` and ``a`` refer to the top graph; ``nu_minus`` and ``a_minus``
    to the bottom one (equal to ``-nu`` and ``a`` in symmetric mode).
    """

    L: float
    nu: np.ndarray
    a: np.ndarray
    stability: tuple[str, ...]
    alpha: np.ndarray
    nu_minus: np.ndarray
    a_minus: np.ndarray
    symmetric: bool = True

    @property
    def d(self) -> int:
        return len(self.nu)

    @property
    def all_elliptic(self) -> bool:
        return all(s == "elliptic" for s in self.stability)

    @property
    def all_hyperbolic(self) -> bool:
        return all(s == "hyperbolic" for s in self.stability)


def _diagonal_hessian(f: Jet, name: str) -> np.ndarray:
    H = f.hessian()
    off = H - np.diag(np.diag(H))
    if np.any(np.abs(off) > 1e-12):
        raise InvalidDomainError(
            f"Hessian of {name} at 0 is not diagonal; rotate the tangential "
            "coordinates to principal curvature directions first"
        )
    return np.diag(H).copy()


def curvature_data(spec: DomainSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(nu_plus, nu_minus, a_plus, a_minus)`` without any stability classification."""
    L = spec.L
    fp, fm = build_boundary_jets(spec, 2)
    nu_p = _diagonal_hessian(fp, "f_plus")
    nu_m = _diagonal_hessian(fm, "f_minus")
    return nu_p, nu_m, -2.0 * (1.0 + L * nu_p), -2.0 * (1.0 - L * nu_m)


def boundary_polynomials(spec: DomainSpec) -> tuple[Jet, Jet]:
    """f_plus and f_minus as exact polynomials (no truncation beyond the data)."""
    if spec.symmetric:
        return build_boundary_jets(spec, max(2, 2 * spec.F.trunc))
    t = max(2, spec.f_plus.trunc, spec.f_minus.trunc)
    return build_boundary_jets(spec, t)


def floquet_from_curvature(spec: DomainSpec) -> OrbitData:
    """Curvatures, Hessian diagonals and Floquet exponents of the orbit."""
    L = spec.L
    nu_p, nu_m, a_p, a_m = curvature_data(spec)
    stability, alpha = [], []
    for j in range(spec.d):
        if spec.symmetric:
            s = 1.0 + L * nu_p[j]
            if abs(abs(s) - 1.0) < PARABOLIC_TOL:
                raise DegenerateOrbitError(
                    f"parabolic index {j}: |1 + L nu| = 1 (1 is an eigenvalue of the Poincare map)"
                )
            if abs(s) < 1.0:
                stability.append("elliptic")
                alpha.append(2.0 * math.acos(-s))
            else:
                stability.append("hyperbolic")
                alpha.append(2.0 * math.acosh(abs(s)))
        else:
            c = (a_p[j] * a_m[j] - 2.0) / 2.0
            if abs(abs(c) - 1.0) < PARABOLIC_TOL:
                raise DegenerateOrbitError(f"parabolic index {j}")
            if abs(c) < 1.0:
                stability.append("elliptic")
                alpha.append(math.acos(c))
            elif c > 1.0:
                stability.append("hyperbolic")
                alpha.append(math.acosh(c))
            else:
                raise DegenerateOrbitError(
                    f"index {j} is hyperbolic with reflection; not supported"
                )
    return OrbitData(
        L=L,
        nu=nu_p,
        a=a_p,
        stability=tuple(stability),
        alpha=np.array(alpha),
        nu_minus=nu_m,
        a_minus=a_m,
        symmetric=spec.symmetric,
    )


@dataclass
class DLReport:
    ok: bool
    checks: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _dist_to_2pi_lattice(x: float) -> float:
    t = x / (2 * math.pi)
    return abs(t - round(t)) * 2 * math.pi


def validate_DL(spec: DomainSpec, orbit: OrbitData | None = None, r_max: int = 1) -> DLReport:
    """Desk-checkable part of the admissibility conditions.

    Linear independence of the exponents over Q cannot be decided in
    floating point; it is replaced by: r * alpha_j not in 2 pi Z for all
    r <= r_max, and pairwise distinct exponents.  Length-spectrum
    multiplicity is not checked.
    """
    checks, messages = {}, []

    if spec.symmetric:
        fp, fm = build_boundary_jets(spec, 2 * max(spec.F.trunc, 1))
        odd = [k for k, v in fp.items() if any(e % 2 for e in k) and abs(v) > 0]
        checks["symmetry"] = not odd and (fp + fm).is_close(Jet.zero(spec.d, fp.trunc))
    else:
        checks["symmetry"] = False
        messages.append("(i) domain is not in symmetric mode; inversion is unavailable")

    if orbit is None:
        try:
            orbit = floquet_from_curvature(spec)
        except DegenerateOrbitError as exc:
            checks["nondegenerate"] = False
            messages.append(f"(iv) {exc}")
            orbit = None
    if orbit is not None:
        bad = []
        for j, (al, st) in enumerate(zip(orbit.alpha, orbit.stability)):
            if st != "elliptic":
                continue
            for r in range(1, r_max + 1):
                if _dist_to_2pi_lattice(r * al) < RESONANCE_TOL:
                    bad.append(f"(iv) resonance: {r} * alpha_{j} lies in 2 pi Z")
                    break
        al = orbit.alpha
        for i in range(len(al)):
            for j in range(i + 1, len(al)):
                if abs(al[i] - al[j]) < RESONANCE_TOL and orbit.stability[i] == orbit.stability[j]:
                    bad.append(f"(iv) alpha_{i} and alpha_{j} coincide")
        checks["nondegenerate"] = not bad
        messages.extend(bad)
        if any(s == "elliptic" for s in orbit.stability) and any(
            s == "hyperbolic" for s in orbit.stability
        ):
            messages.append("mixed elliptic/hyperbolic orbit: inversion results are experimental")

    ok = bool(checks.get("nondegenerate", False))
    for m in messages:
        warnings.warn(m, stacklevel=2)
    return DLReport(ok=ok, checks=checks, messages=messages)
