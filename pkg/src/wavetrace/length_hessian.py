"""Length functional of the r-th iterate and its Hessian at the orbit.

Configurations are 2r points x_1, ..., x_2r in R^d visiting the graphs
alternately; point p lies on the graph with sign w(p), where
w(p) = (-1)^(p+1) for orientation '+' and the opposite for '-'.  The
global variable of coordinate i at point p (1-based) is (p-1)*d + i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import (
    DomainSpec,
    boundary_polynomials,
    build_boundary_jets,
    curvature_data,
    floquet_from_curvature,
)
from .jets import Jet, sqrt_series

__all__ = [
    "SingularHessianError",
    "LengthJet",
    "BlockHessian",
    "orientation_signs",
    "link_jet",
    "build_length_jet",
    "length_functional",
    "length_gradient",
    "numeric_hessian",
    "hessian_closed_form",
    "det_identity_check",
    "chebyshev_T",
    "chebyshev_U",
    "inverse_hessian",
]

DENSE_CAP = 64


class SingularHessianError(ValueError):
    """The length Hessian is singular (resonance r*alpha in 2 pi Z)."""


def _check_orientation(orientation: str) -> int:
    if orientation not in ("+", "-"):
        raise ValueError(f"orientation must be '+' or '-', got {orientation!r}")
    return 1 if orientation == "+" else -1


def orientation_signs(r: int, orientation: str = "+") -> np.ndarray:
    """w(p) for p = 1..2r."""
    s = _check_orientation(orientation)
    p = np.arange(1, 2 * r + 1)
    return s * np.where(p % 2 == 1, 1, -1)


def link_jet(f_from: Jet, f_to: Jet, trunc: int) -> Jet:
    """Jet of |x_{p+1} - x_p|^2 + (f_to(x_{p+1}) - f_from(x_p))^2 under a square root.

    The result lives in 2d variables: x_p first, then x_{p+1}.
    """
    d = f_from.dim
    u_map, v_map = list(range(d)), list(range(d, 2 * d))
    fu = f_from.truncate(trunc).substitute(2 * d, u_map)
    fv = f_to.truncate(trunc).substitute(2 * d, v_map)
    gap = fv - fu
    h = gap * gap
    for i in range(d):
        dx = Jet.variable(2 * d, trunc, d + i) - Jet.variable(2 * d, trunc, i)
        h = h + dx * dx
    return h.compose(sqrt_series(h.constant_term, trunc))


@dataclass(frozen=True)
class LengthJet:
    r: int
    orientation: str
    d: int
    L: float
    trunc: int
    links: tuple
    weights: tuple

    @property
    def n_vars(self) -> int:
        return 2 * self.r * self.d

    def link_vars(self, p: int) -> np.ndarray:
        """Global indices of the 2d local variables of link p (0-based)."""
        d, m = self.d, 2 * self.r
        q = (p + 1) % m
        return np.concatenate([np.arange(p * d, p * d + d), np.arange(q * d, q * d + d)])

    @property
    def critical_value(self) -> float:
        return sum(l.constant_term for l in self.links)

    def global_jet(self) -> Jet:
        """Sum of the embedded link jets; only sensible for small r*d."""
        out = Jet.zero(self.n_vars, self.trunc)
        for p, link in enumerate(self.links):
            out = out + link.substitute(self.n_vars, list(self.link_vars(p)))
        return out

    def gradient_at_zero(self) -> np.ndarray:
        g = np.zeros(self.n_vars)
        for p, link in enumerate(self.links):
            g[self.link_vars(p)] += link.gradient()
        return g

    def hessian_at_zero(self) -> np.ndarray:
        H = np.zeros((self.n_vars, self.n_vars))
        for p, link in enumerate(self.links):
            idx = self.link_vars(p)
            H[np.ix_(idx, idx)] += link.hessian()
        return H


def build_length_jet(spec: DomainSpec, r: int, orientation: str = "+", trunc: int = 2) -> LengthJet:
    if r < 1:
        raise ValueError("iterate r must be at least 1")
    if trunc < 2:
        raise ValueError("length jets need trunc >= 2")
    w = orientation_signs(r, orientation)
    fp, fm = build_boundary_jets(spec, trunc)
    f = {1: fp, -1: fm}
    cache = {}
    links = []
    for p in range(2 * r):
        key = (int(w[p]), int(w[(p + 1) % (2 * r)]))
        if key not in cache:
            cache[key] = link_jet(f[key[0]], f[key[1]], trunc)
        links.append(cache[key])
    return LengthJet(r, orientation, spec.d, spec.L, trunc, tuple(links), tuple(int(x) for x in w))


# -- explicit evaluation (independent of the link jets) ----------------
def _config(X, r: int, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X.reshape(X.shape[:-1] + (2 * r, d)) if X.shape[-1] == 2 * r * d else X


def length_functional(spec: DomainSpec, X, r: int, orientation: str = "+") -> np.ndarray:
    """Total length of the closed polygon through the 2r graph points ``X``.

    ``X`` has shape (..., 2r, d) or (..., 2r*d).
    """
    d = spec.d
    X = _config(X, r, d)
    w = orientation_signs(r, orientation)
    fp, fm = boundary_polynomials(spec)
    heights = np.stack(
        [(fp if w[p] > 0 else fm).evaluate(X[..., p, :]) for p in range(2 * r)], axis=-1
    )
    Y = np.roll(X, -1, axis=-2)
    dh = np.roll(heights, -1, axis=-1) - heights
    return np.sqrt(np.sum((Y - X) ** 2, axis=-1) + dh**2).sum(axis=-1)


def length_gradient(spec: DomainSpec, X, r: int, orientation: str = "+") -> np.ndarray:
    """Analytic gradient of the length functional, flattened to 2r*d entries."""
    d = spec.d
    X = _config(X, r, d)
    w = orientation_signs(r, orientation)
    fp, fm = boundary_polynomials(spec)
    grads = {1: [fp.partial(i) for i in range(d)], -1: [fm.partial(i) for i in range(d)]}
    m = 2 * r
    heights = np.array([(fp if w[p] > 0 else fm).evaluate(X[p]) for p in range(m)])
    nabla = np.array([[g.evaluate(X[p]) for g in grads[int(w[p])]] for p in range(m)])
    G = np.zeros((m, d))
    for p in range(m):
        q = (p + 1) % m
        dx = X[q] - X[p]
        dh = heights[q] - heights[p]
        ell = math.sqrt(dx @ dx + dh * dh)
        G[p] += (-dx - dh * nabla[p]) / ell
        G[q] += (dx + dh * nabla[q]) / ell
    return G.ravel()


def numeric_hessian(spec: DomainSpec, r: int, orientation: str = "+", h: float = 1e-6,
                    X0=None) -> np.ndarray:
    """Central differences of the analytic gradient."""
    N = 2 * r * spec.d
    x0 = np.zeros(N) if X0 is None else np.asarray(X0, dtype=float).ravel()
    H = np.empty((N, N))
    for k in range(N):
        e = np.zeros(N)
        e[k] = h
        H[:, k] = (length_gradient(spec, x0 + e, r, orientation)
                   - length_gradient(spec, x0 - e, r, orientation)) / (2 * h)
    return 0.5 * (H + H.T)


# -- closed-form Hessian ----------------------------------------------
@dataclass(frozen=True)
class BlockHessian:
    """Cyclic block-tridiagonal Hessian of the length functional at the orbit.

    Diagonal blocks are -(1/L) diag(a) with a alternating between
    ``A_plus`` and ``A_minus`` (starting with ``A_plus`` for orientation
    '+'); neighbouring and corner blocks are -(1/L) I.
    """

    r: int
    d: int
    L: float
    A_plus: np.ndarray
    A_minus: np.ndarray
    orientation: str = "+"

    @property
    def N(self) -> int:
        return 2 * self.r * self.d

    def point_diagonal(self, p: int) -> np.ndarray:
        """Diagonal a-values at point p (0-based)."""
        first, second = (self.A_plus, self.A_minus) if self.orientation == "+" else (self.A_minus, self.A_plus)
        return first if p % 2 == 0 else second

    def _entries(self):
        d, m, L = self.d, 2 * self.r, self.L
        rows, cols, vals = [], [], []
        for p in range(m):
            a = self.point_diagonal(p)
            for i in range(d):
                rows.append(p * d + i)
                cols.append(p * d + i)
                vals.append(-a[i] / L)
            q = (p + 1) % m
            for i in range(d):
                # both orderings; duplicates (r = 1) add up to -2/L
                rows += [p * d + i, q * d + i]
                cols += [q * d + i, p * d + i]
                vals += [-1.0 / L, -1.0 / L]
        return rows, cols, vals

    def sparse(self) -> sp.csc_matrix:
        rows, cols, vals = self._entries()
        return sp.csc_matrix((vals, (rows, cols)), shape=(self.N, self.N))

    def dense(self) -> np.ndarray:
        if self.N > DENSE_CAP:
            raise ValueError(f"dense materialization capped at dimension {DENSE_CAP}; use sparse()")
        H = np.zeros((self.N, self.N))
        rows, cols, vals = self._entries()
        np.add.at(H, (rows, cols), vals)
        return H

    def slogdet(self) -> tuple[float, float]:
        if self.N <= DENSE_CAP:
            return np.linalg.slogdet(self.dense())
        lu = spla.splu(self.sparse())
        diag = np.concatenate([lu.U.diagonal()])
        if np.any(diag == 0):
            return 0.0, -np.inf
        perm_sign = _perm_parity(lu.perm_r) * _perm_parity(lu.perm_c)
        return perm_sign * np.prod(np.sign(diag)), float(np.sum(np.log(np.abs(diag))))


def _perm_parity(perm) -> int:
    perm = np.asarray(perm)
    seen = np.zeros(len(perm), dtype=bool)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def hessian_closed_form(spec: DomainSpec, r: int, orientation: str = "+") -> BlockHessian:
    _check_orientation(orientation)
    _, _, a_p, a_m = curvature_data(spec)
    return BlockHessian(r, spec.d, spec.L, a_p, a_m, orientation)


class DetCheck(NamedTuple):
    det_numeric: float
    abs_numeric: float
    predicted: float
    rel_err: float


def det_identity_check(spec: DomainSpec, r: int, orientation: str = "+") -> DetCheck:
    """|det H| against L^(-2rd) prod_j |2 - 2 cos(r alpha_j)| (cosh for hyperbolic indices)."""
    orbit = floquet_from_curvature(spec)
    H = hessian_closed_form(spec, r, orientation)
    sign, logdet = H.slogdet()
    factors = [
        abs(2 - 2 * (math.cos(r * al) if st == "elliptic" else math.cosh(r * al)))
        for al, st in zip(orbit.alpha, orbit.stability)
    ]
    log_pred = -2 * r * spec.d * math.log(spec.L) + sum(math.log(f) for f in factors)
    abs_num = math.exp(logdet)
    pred = math.exp(log_pred)
    rel = abs(math.expm1(logdet - log_pred))
    return DetCheck(float(sign) * abs_num, abs_num, pred, rel)


# -- Chebyshev closed-form inverse -------------------------------------
def chebyshev_T(m: int, x):
    """Chebyshev polynomial of the first kind by the three-term recurrence."""
    if m < 0:
        raise ValueError("T_m needs m >= 0")
    x = np.asarray(x, dtype=float)
    t0, t1 = np.ones_like(x), x
    if m == 0:
        return t0 if t0.ndim else float(t0)
    for _ in range(m - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1 if t1.ndim else float(t1)


def chebyshev_U(m: int, x):
    """Chebyshev polynomial of the second kind, with U_{-1} = 0."""
    if m < -1:
        raise ValueError("U_m needs m >= -1")
    x = np.asarray(x, dtype=float)
    u0, u1 = np.zeros_like(x), np.ones_like(x)
    if m == -1:
        return u0 if u0.ndim else float(u0)
    for _ in range(m):
        u0, u1 = u1, 2 * x * u1 - u0
    return u1 if u1.ndim else float(u1)


def _closed_form_inverse(r: int, d: int, L: float, a: np.ndarray) -> np.ndarray:
    m = 2 * r
    H = np.zeros((m * d, m * d))
    for i in range(d):
        x = -a[i] / 2
        denom = 2.0 * (1.0 - chebyshev_T(m, x))
        if abs(denom) < 1e-13:
            raise SingularHessianError(f"resonant index {i}: r * alpha_{i} lies in 2 pi Z")
        U = [chebyshev_U(k, x) for k in range(-1, m)]  # U[k + 1] = U_k
        for p in range(m):
            for q in range(p, m):
                val = -L * (U[m - q + p - 1 + 1] + U[q - p - 1 + 1]) / denom
                H[p * d + i, q * d + i] = H[q * d + i, p * d + i] = val
    return H


def inverse_hessian(spec: DomainSpec, r: int, orientation: str = "+", method: str = "auto") -> np.ndarray:
    """Matrix of h^{ij,pq}, the inverse of the length Hessian.

    Symmetric domains use the Chebyshev closed form (``method='auto'`` or
    ``'closed'``); otherwise, or with ``method='numeric'``, the block
    Hessian is inverted directly.
    """
    H = hessian_closed_form(spec, r, orientation)
    use_closed = method == "closed" or (method == "auto" and spec.symmetric)
    if use_closed:
        if not np.allclose(H.A_plus, H.A_minus, rtol=0, atol=1e-14):
            raise ValueError("closed-form inverse needs a_plus == a_minus")
        return _closed_form_inverse(r, spec.d, spec.L, H.A_plus)
    if H.N <= DENSE_CAP:
        M = H.dense()
        if np.linalg.cond(M) > 1e13:
            raise SingularHessianError("length Hessian is numerically singular")
        return np.linalg.inv(M)
    lu = spla.splu(H.sparse())
    return lu.solve(np.eye(H.N))
