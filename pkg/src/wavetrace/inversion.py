"""Recovery of the Floquet angles and the even Taylor coefficients of f.

Floquet angles come from the determinant data prod_j 4 sin^2(r alpha_j / 2),
r = 1, 2, ...; the Taylor coefficients of degree 2j + 2 then follow level
by level from B_{r,j}, which is affine in them with a linear part
measured by forward "probe" evaluations.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .domain import DomainSpec
from .jets import Jet, multi_indices
from .wave_invariants import WaveInvariantTable, wave_invariants

__all__ = [
    "InconsistentDataError",
    "InsufficientDataError",
    "IllConditionedWarning",
    "RecoveredJet",
    "det_invariants",
    "recover_floquet",
    "alpha_to_nu",
    "probe_matrix",
    "recover_jet",
    "invert_table",
]

RESIDUAL_TOL = 1e-6
COND_TOL = 1e8
RESONANCE_TOL = 1e-9


class InconsistentDataError(ValueError):
    """The invariants are not consistent with the model (residual too large)."""


class InsufficientDataError(ValueError):
    """Not enough iterates r to determine the unknowns of a level."""


class IllConditionedWarning(UserWarning):
    pass


def det_invariants(alpha, r_values) -> dict:
    """prod_j 4 sin^2(r alpha_j / 2) for each r."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return {int(r): float(np.prod(4 * np.sin(r * alpha / 2) ** 2)) for r in r_values}


def _det_model(alpha, rs):
    return np.prod(4 * np.sin(np.outer(rs, alpha) / 2) ** 2, axis=1)


def recover_floquet(det_values: dict, d: int, r_max: int | None = None) -> np.ndarray:
    """Elliptic Floquet angles from determinant invariants.

    The data depend on alpha only through sin^2(r alpha / 2), which is
    invariant under alpha -> 2 pi - alpha; angles are returned in (0, pi],
    ascending.
    """
    if d > 3:
        raise ValueError("Floquet recovery supports d <= 3")
    rs = np.array(sorted(det_values))
    if r_max is not None:
        rs = rs[rs <= r_max]
    if len(rs) < 2 * d + 2:
        raise InsufficientDataError(f"need determinant data for at least {2 * d + 2} iterates, got {len(rs)}")
    v = np.array([det_values[int(r)] for r in rs], dtype=float)
    if np.any(v <= 1e-14):
        raise InconsistentDataError("vanishing determinant invariant (degenerate or resonant orbit)")
    scale = np.maximum(v, 1e-3)

    def resid(a):
        return (_det_model(a, rs) - v) / scale

    # coarse grid over ascending tuples, then local refinement of the best cells
    G = {1: 400, 2: 160, 3: 48}[d]
    grid = np.linspace(0, np.pi, G + 1)[1:]
    cand = np.array([c for c in itertools.combinations_with_replacement(grid, d)])
    obj = np.zeros(len(cand))
    for start in range(0, len(cand), 20000):
        chunk = cand[start:start + 20000]
        model = np.prod(4 * np.sin(chunk[:, None, :] * rs[None, :, None] / 2) ** 2, axis=2)
        obj[start:start + 20000] = np.sum(((model - v) / scale) ** 2, axis=1)
    best = None
    for i in np.argsort(obj)[:12]:
        sol = least_squares(resid, cand[i], bounds=(1e-12, np.pi), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    res = float(np.max(np.abs(resid(best.x))))
    if res > RESIDUAL_TOL:
        raise InconsistentDataError(f"determinant data inconsistent with an elliptic orbit (residual {res:.2e})")
    return np.sort(best.x)


def alpha_to_nu(alpha, L: float) -> np.ndarray:
    """Curvatures nu_j with 2 cos(alpha_j/2) = -2 (1 + L nu_j)."""
    return (-np.cos(np.asarray(alpha, dtype=float) / 2) - 1.0) / L


@dataclass
class RecoveredJet:
    d: int
    order: int
    F_coeffs: dict = field(default_factory=dict)  # multi-index of F -> value
    alpha: np.ndarray | None = None
    condition: dict = field(default_factory=dict)  # level j -> condition number
    residual: dict = field(default_factory=dict)  # level j -> residual
    r_used: dict = field(default_factory=dict)

    @property
    def coeffs(self) -> dict:
        """Coefficients of f keyed by even multi-indices."""
        return {tuple(2 * e for e in k): v for k, v in self.F_coeffs.items()}

    def as_domain(self, n: int, L: float) -> DomainSpec:
        trunc = max([sum(k) for k in self.F_coeffs] + [1])
        return DomainSpec(n, L, F=Jet(n - 1, trunc, self.F_coeffs), symmetric=True)


def _spec_with(n, L, coeffs: dict) -> DomainSpec:
    trunc = max([sum(k) for k in coeffs] + [1])
    return DomainSpec(n, L, F=Jet(n - 1, trunc, coeffs), symmetric=True)


def _resonant(alpha, r) -> bool:
    x = np.asarray(alpha) * r / (2 * np.pi)
    return bool(np.any(np.abs(x - np.round(x)) * 2 * np.pi < RESONANCE_TOL))


def probe_matrix(lower: dict, n: int, L: float, j: int, r_list) -> tuple[np.ndarray, np.ndarray, list]:
    """Linear response of B_{r,j} to unit F coefficients of degree j + 1.

    ``lower`` holds the known F coefficients of degree <= j.  Returns the
    complex matrix (rows r, columns multi-indices), the zero-top values
    B_{r,j}, and the column multi-indices.
    """
    d = n - 1
    cols = list(multi_indices(d, j + 1))
    base = _spec_with(n, L, lower)
    b0 = np.array([wave_invariants(base, r, j)[j] for r in r_list])
    P = np.empty((len(r_list), len(cols)), dtype=complex)
    for c, gamma in enumerate(cols):
        spec = _spec_with(n, L, {**lower, tuple(gamma): 1.0})
        P[:, c] = np.array([wave_invariants(spec, r, j)[j] for r in r_list]) - b0
    return P, b0, cols


def _solve_level(P, rhs):
    A = np.vstack([P.real, P.imag])
    b = np.concatenate([rhs.real, rhs.imag])
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    res = float(np.max(np.abs(A @ sol - b)) / max(1.0, np.max(np.abs(b))))
    return sol, cond, res


def recover_jet(table: WaveInvariantTable, alpha, L: float, n: int, J_max: int) -> RecoveredJet:
    """Inductive recovery of the F coefficients up to degree J_max + 1 (f up to 2 J_max + 2)."""
    d = n - 1
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if len(alpha) != d:
        raise ValueError(f"expected {d} Floquet angles")
    nu = alpha_to_nu(alpha, L)
    coeffs = {tuple(int(i == k) for i in range(d)): nu[k] / 2 for k in range(d)}
    out = RecoveredJet(d, 2 * J_max + 2, dict(coeffs), alpha.copy())
    available = table.r_values
    for j in range(1, J_max + 1):
        ncols = len(multi_indices(d, j + 1))
        r_list = []
        for r in range(1, ncols + 3):
            if r not in available or (r, j) not in table.entries:
                continue
            if _resonant(alpha, r):
                warnings.warn(f"iterate r={r} is resonant; row dropped", IllConditionedWarning, stacklevel=2)
                continue
            r_list.append(r)
        if len(r_list) < ncols:
            raise InsufficientDataError(
                f"level {j}: {ncols} unknowns but only {len(r_list)} usable iterates in the table"
            )
        P, b0, cols = probe_matrix(coeffs, n, L, j, r_list)
        rhs = np.array([table.get(r, j) for r in r_list]) - b0
        sol, cond, res = _solve_level(P, rhs)
        out.condition[j], out.residual[j], out.r_used[j] = cond, res, list(r_list)
        if cond > COND_TOL:
            warnings.warn(f"level {j}: probe matrix condition number {cond:.2e}", IllConditionedWarning,
                          stacklevel=2)
        if res > RESIDUAL_TOL:
            raise InconsistentDataError(f"level {j}: least-squares residual {res:.2e}")
        for gamma, val in zip(cols, sol):
            coeffs[tuple(gamma)] = float(val)
            out.F_coeffs[tuple(gamma)] = float(val)
    return out


def invert_table(table: WaveInvariantTable, alpha=None, J_max: int | None = None) -> RecoveredJet:
    """Floquet angles (unless given), then the Taylor coefficients.

    Recovered angles are only determined up to alpha -> 2 pi - alpha; each
    of the 2^d choices is tried and the one with the smallest level-1
    residual is kept.  The returned coefficients refer to axes ordered by
    ascending alpha in (0, 2 pi).
    """
    n, L = table.n, table.L
    d = n - 1
    J_max = table.J if J_max is None else J_max
    if alpha is not None:
        return recover_jet(table, alpha, L, n, J_max)
    base = recover_floquet(table.det_values(), d)
    if J_max == 0:
        warnings.warn("alpha -> 2pi - alpha ambiguity unresolved without level-1 data", stacklevel=2)
        return recover_jet(table, base, L, n, 0)
    best, best_res, errors = None, math.inf, []
    for flips in itertools.product((False, True), repeat=d):
        cand = np.where(flips, 2 * np.pi - base, base)
        try:
            trial = recover_jet(table, cand, L, n, 1)
        except InconsistentDataError as exc:
            errors.append(str(exc))
            continue
        if trial.residual[1] < best_res:
            best, best_res = cand, trial.residual[1]
    if best is None:
        raise InconsistentDataError("no choice of Floquet angles fits the level-1 data: " + "; ".join(errors))
    # axes are only defined up to permutation; fix them by ascending angle
    return recover_jet(table, np.sort(best), L, n, J_max)
