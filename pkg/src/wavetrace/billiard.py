"""Billiard map on the two-graph local model, used as a geometric oracle.

A boundary point is (x', side) with x' in R^d; the phase-space
coordinate is the projected momentum eta_i = zeta_i + zeta_n df/dx_i,
the pairing of the unit direction zeta with the tangent vectors
e_i + (df/dx_i) e_n of the graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import DomainSpec, boundary_polynomials
from .length_hessian import length_functional, length_gradient

__all__ = [
    "BoundaryPoint",
    "PatchExitError",
    "TangentialRayError",
    "billiard_step",
    "billiard_orbit",
    "incoming_eta",
    "poincare_matrix_numeric",
    "poincare_eigenvalues_numeric",
    "det_I_minus_P_numeric",
    "verify_critical_point",
]


class PatchExitError(RuntimeError):
    """The ray leaves the coordinate patch of the local model."""


class TangentialRayError(ValueError):
    """|eta| reached 1: the ray is tangent to the boundary."""


@dataclass(frozen=True)
class BoundaryPoint:
    x_prime: np.ndarray
    side: int  # +1 top graph, -1 bottom graph
    eta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_prime", np.atleast_1d(np.asarray(self.x_prime, dtype=float)))
        object.__setattr__(self, "eta", np.atleast_1d(np.asarray(self.eta, dtype=float)))
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")


class _Graphs:
    def __init__(self, spec: DomainSpec):
        fp, fm = boundary_polynomials(spec)
        self.f = {1: fp, -1: fm}
        self.grad = {s: [j.partial(i) for i in range(spec.d)] for s, j in self.f.items()}
        self.d = spec.d

    def height(self, side, x):
        return float(self.f[side].evaluate(x))

    def gradient(self, side, x):
        return np.array([float(g.evaluate(x)) for g in self.grad[side]])


def _direction(graphs: _Graphs, p: BoundaryPoint) -> np.ndarray:
    g = graphs.gradient(p.side, p.x_prime)
    eta = p.eta
    A = 1.0 + g @ g
    B = -2.0 * (eta @ g)
    C = eta @ eta - 1.0
    disc = B * B - 4 * A * C
    if disc <= 0:
        raise TangentialRayError("projected momentum outside the open coball bundle")
    sq = math.sqrt(disc)
    # top graph: move down (zeta_n < 0); bottom graph: move up
    zn = (-B - sq) / (2 * A) if p.side == 1 else (-B + sq) / (2 * A)
    return np.append(eta - zn * g, zn)


def _hit(graphs: _Graphs, pos: np.ndarray, zeta: np.ndarray, target: int, L: float,
         tol: float = 1e-12) -> float:
    """Smallest t > 0 with pos + t zeta on the graph of side ``target``."""
    d = graphs.d

    def phi(t):
        q = pos + t * zeta
        return q[d] - graphs.height(target, q[:d])

    def dphi(t):
        q = pos + t * zeta
        return zeta[d] - graphs.gradient(target, q[:d]) @ zeta[:d]

    # bracket by marching; phi(0) has the sign of the side we leave
    s0 = np.sign(phi(0.0))
    dt = 0.05 * L
    lo, hi = 0.0, dt
    while np.sign(phi(hi)) == s0:
        lo, hi = hi, hi + dt
        if hi > 20 * L:
            raise PatchExitError("ray does not reach the opposite graph")
    t = 0.5 * (lo + hi)
    for _ in range(200):
        val = phi(t)
        if abs(val) < tol:
            return t
        if np.sign(val) == s0:
            lo = t
        else:
            hi = t
        der = dphi(t)
        t_new = t - val / der if der != 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        t = t_new
        if hi - lo < 1e-15 * max(1.0, hi):
            return t
    return t


def _inward_normal(graphs: _Graphs, side: int, x) -> np.ndarray:
    g = graphs.gradient(side, x)
    nvec = np.append(g, -1.0) if side == 1 else np.append(-g, 1.0)
    return nvec / np.linalg.norm(nvec)


def incoming_eta(spec: DomainSpec, p: BoundaryPoint, patch: float = 1.0):
    """Landing point of the ray from ``p`` with the projected momentum of the INCOMING direction.

    By the reflection law this equals the outgoing eta of :func:`billiard_step`.
    """
    graphs = _Graphs(spec)
    q, zeta, _ = _advance(graphs, spec, p, patch)
    g = graphs.gradient(-p.side, q[: spec.d])
    return zeta[: spec.d] + zeta[spec.d] * g


def _advance(graphs, spec, p, patch):
    d = spec.d
    zeta = _direction(graphs, p)
    pos = np.append(p.x_prime, graphs.height(p.side, p.x_prime))
    t = _hit(graphs, pos, zeta, -p.side, spec.L)
    q = pos + t * zeta
    if np.max(np.abs(q[:d])) > patch:
        raise PatchExitError(f"ray leaves the patch |x'| <= {patch}")
    return q, zeta, t


def billiard_step(spec: DomainSpec, p: BoundaryPoint, patch: float = 1.0) -> BoundaryPoint:
    """Follow the ray from ``p`` to the opposite graph and reflect."""
    graphs = _Graphs(spec)
    d = spec.d
    q, zeta, _ = _advance(graphs, spec, p, patch)
    side = -p.side
    nrm = _inward_normal(graphs, side, q[:d])
    out = zeta - 2.0 * (zeta @ nrm) * nrm
    g = graphs.gradient(side, q[:d])
    return BoundaryPoint(q[:d], side, out[:d] + out[d] * g)


def billiard_orbit(spec: DomainSpec, p: BoundaryPoint, steps: int, patch: float = 1.0) -> list:
    out = [p]
    for _ in range(steps):
        out.append(billiard_step(spec, out[-1], patch))
    return out


def _return_map(spec, z, patch):
    d = spec.d
    p = BoundaryPoint(z[:d], 1, z[d:])
    p = billiard_step(spec, billiard_step(spec, p, patch), patch)
    return np.concatenate([p.x_prime, p.eta])


def _central_jacobian(spec, h, patch):
    n = 2 * spec.d
    P = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        P[:, k] = (_return_map(spec, e, patch) - _return_map(spec, -e, patch)) / (2 * h)
    return P


def poincare_matrix_numeric(spec: DomainSpec, h: float = 1e-5, patch: float = 1.0,
                            richardson: bool = True) -> np.ndarray:
    """Central-difference Jacobian of the two-bounce map at the fixed point, in (x', eta).

    With ``richardson`` the O(h^2) error is cancelled using steps h and h/2.
    """
    P = _central_jacobian(spec, h, patch)
    if richardson:
        P = (4.0 * _central_jacobian(spec, h / 2, patch) - P) / 3.0
    return P


def poincare_eigenvalues_numeric(spec: DomainSpec, h: float = 1e-5, patch: float = 1.0,
                                 richardson: bool = True) -> np.ndarray:
    """Eigenvalues of the linearized two-bounce map, sorted by argument then modulus."""
    ev = np.linalg.eigvals(poincare_matrix_numeric(spec, h, patch, richardson))
    return ev[np.lexsort((np.abs(ev), np.angle(ev)))]


def det_I_minus_P_numeric(spec: DomainSpec, r: int = 1, h: float = 1e-5) -> float:
    """|det(I - P^r)| from the numeric Poincare eigenvalues."""
    ev = poincare_eigenvalues_numeric(spec, h)
    return float(abs(np.prod(1.0 - ev**r)))


def verify_critical_point(spec: DomainSpec, r: int, orientation: str = "+", X=None,
                          h: float = 1e-6) -> float:
    """Max of |analytic gradient| and |finite-difference gradient| of the length functional.

    Evaluated at the zero configuration unless ``X`` (shape (2r, d)) is given.
    """
    N = 2 * r * spec.d
    x0 = np.zeros(N) if X is None else np.asarray(X, dtype=float).ravel()
    g_an = length_gradient(spec, x0, r, orientation)
    g_fd = np.empty(N)
    for k in range(N):
        e = np.zeros(N)
        e[k] = h
        g_fd[k] = (length_functional(spec, x0 + e, r, orientation)
                   - length_functional(spec, x0 - e, r, orientation)) / (2 * h)
    return float(max(np.max(np.abs(g_an)), np.max(np.abs(g_fd))))
