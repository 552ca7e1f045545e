"""Stationary-phase coefficients from Feynman diagrams, plus a quadrature oracle.

For a phase S with a non-degenerate critical point at 0 and an amplitude
a(x, k) = sum_m k^-m A_m(x),

    int a e^{ikS} dx ~ (2pi/k)^{N/2} e^{i pi sgn/4} |det H|^{-1/2} e^{ikS(0)} sum_j c_j k^-j,

with c_j a sum over graphs Gamma with I - V = j (V closed vertices of
valency >= 3, I edges, one open vertex for the amplitude).  Edges carry
i h^{ab} (h the inverse Hessian), closed vertices i D^nu S(0), the open
vertex D^o A_m(0); each graph is weighted by 1/|Aut Gamma|.

Derivative tensors are "blocked": a tensor is a sum over blocks b of a
small dense tensor in local variables mapped to global ones by
``index_map[b]``.  The length functional is a sum of link terms, so its
tensors are naturally blocked by link, which keeps contractions cheap.
"""
from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .jets import Jet, symmetric_tensor

__all__ = [
    "MissingTensorError",
    "OracleFitError",
    "BlockTensor",
    "PhaseData",
    "AmplitudeData",
    "DiagramGraph",
    "SPExpansion",
    "OracleResult",
    "enumerate_graphs",
    "feynman_sum",
    "sp_expand",
    "sp_prefactor",
    "super_gaussian",
    "sharp_cutoff",
    "oscillatory_oracle",
    "chain_oracle",
    "fit_inverse_powers",
]


class MissingTensorError(ValueError):
    """A derivative tensor of the required order was not supplied."""


class OracleFitError(RuntimeError):
    """The 1/k polynomial fit of the quadrature data is not trustworthy."""


# -- tensors -------------------------------------------------------------
@dataclass(frozen=True)
class BlockTensor:
    """Sum over blocks b of ``data[b]`` embedded at global indices ``index_map[b]``."""

    index_map: np.ndarray  # (B, m) int
    data: np.ndarray  # (B,) + (m,) * order

    @property
    def order(self) -> int:
        return self.data.ndim - 1

    @classmethod
    def from_dense(cls, T) -> "BlockTensor":
        T = np.asarray(T)
        N = T.shape[0] if T.ndim else 0
        return cls(np.arange(N)[None, :], T[None, ...])

    def dense(self, N: int) -> np.ndarray:
        out = np.zeros((N,) * self.order, dtype=self.data.dtype)
        for b in range(self.data.shape[0]):
            idx = np.ix_(*([self.index_map[b]] * self.order)) if self.order else ()
            out[idx] += self.data[b]
        return out


def _tensors_from_jet(jet: Jet, orders) -> dict:
    out = {}
    for k in orders:
        if not jet.homogeneous(k):
            continue
        out[k] = BlockTensor.from_dense(symmetric_tensor(jet, k) if k else np.asarray(jet.constant_term))
    return out


@dataclass(frozen=True)
class PhaseData:
    """Critical-point data of a real phase: value, inverse Hessian, higher tensors."""

    N: int
    S0: float
    hinv: np.ndarray
    signature: int
    sqrt_abs_det: float
    tensors: dict = field(default_factory=dict)  # order (>= 3) -> BlockTensor
    max_order: int = 2

    @classmethod
    def from_hessian(cls, S0: float, H: np.ndarray, tensors: dict, max_order: int,
                     hinv: np.ndarray | None = None) -> "PhaseData":
        H = np.asarray(H, dtype=float)
        ev = np.linalg.eigvalsh(0.5 * (H + H.T))
        if np.min(np.abs(ev)) < 1e-12 * max(1.0, np.max(np.abs(ev))):
            raise ValueError("degenerate critical point (singular Hessian)")
        if hinv is None:
            hinv = np.linalg.inv(H)
        return cls(H.shape[0], float(S0), np.asarray(hinv, dtype=float),
                   int(np.sum(ev > 0) - np.sum(ev < 0)),
                   float(math.sqrt(abs(np.prod(ev)))), dict(tensors), int(max_order))

    @classmethod
    def from_jet(cls, jet: Jet, max_order: int | None = None) -> "PhaseData":
        """Phase given by a jet whose gradient at 0 vanishes."""
        if np.max(np.abs(jet.gradient()), initial=0.0) > 1e-12:
            raise ValueError("origin is not a critical point of the phase")
        max_order = jet.trunc if max_order is None else max_order
        if max_order > jet.trunc:
            raise MissingTensorError(f"phase jet truncated at {jet.trunc} < {max_order}")
        return cls.from_hessian(jet.constant_term, jet.hessian(),
                                _tensors_from_jet(jet, range(3, max_order + 1)), max_order)

    def tensor(self, order: int):
        if order > self.max_order:
            raise MissingTensorError(f"phase tensor of order {order} not available (max {self.max_order})")
        return self.tensors.get(order)


@dataclass(frozen=True)
class AmplitudeData:
    """Family A_0, A_1, ... of amplitude derivative tensors (a = sum_m k^-m A_m)."""

    family: tuple  # of dict order -> BlockTensor
    max_order: int

    @classmethod
    def from_jets(cls, jets: Sequence[Jet], max_order: int | None = None) -> "AmplitudeData":
        max_order = min(j.trunc for j in jets) if max_order is None else max_order
        return cls(tuple(_tensors_from_jet(j, range(max_order + 1)) for j in jets), max_order)

    @classmethod
    def constant(cls, value: complex = 1.0) -> "AmplitudeData":
        return cls(({0: BlockTensor(np.zeros((1, 0), dtype=int), np.array([value]))},), 10**6)

    def tensor(self, m: int, order: int):
        if m >= len(self.family):
            return None
        if order > self.max_order:
            raise MissingTensorError(f"amplitude tensor of order {order} not available (max {self.max_order})")
        return self.family[m].get(order)


# -- graphs --------------------------------------------------------------
@dataclass(frozen=True)
class DiagramGraph:
    """Multigraph with closed vertices 1..V and the open vertex 0.

    ``mult[u][w]`` counts edges between u and w; ``mult[u][u]`` counts loops.
    """

    valencies: tuple
    open_valence: int
    mult: tuple
    automorphisms: int

    @property
    def V(self) -> int:
        return len(self.valencies)

    @property
    def I(self) -> int:
        n = len(self.mult)
        return sum(self.mult[u][w] for u in range(n) for w in range(u, n))

    @property
    def euler(self) -> int:
        """V - I with the open vertex removed."""
        return self.V - self.I

    @property
    def order(self) -> int:
        return self.I - self.V


def _partitions(total: int, parts: int, minimum: int, maximum: int):
    """Non-increasing tuples of ``parts`` integers >= minimum summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(maximum, total - minimum * (parts - 1)), minimum - 1, -1):
        for rest in _partitions(total - first, parts - 1, minimum, first):
            yield (first,) + rest


def _compositions(total: int, caps: list):
    if not caps:
        if total == 0:
            yield ()
        return
    for x in range(min(total, caps[0]), -1, -1):
        for rest in _compositions(total - x, caps[1:]):
            yield (x,) + rest


def _matrices(deg: list):
    n = len(deg)
    M = [[0] * n for _ in range(n)]

    def rec(u, rem):
        if u == n:
            yield tuple(tuple(row) for row in M)
            return
        for loops in range(rem[u] // 2, -1, -1):
            left = rem[u] - 2 * loops
            for comp in _compositions(left, rem[u + 1:]):
                M[u][u] = loops
                new = list(rem)
                new[u] = 0
                for k, x in enumerate(comp):
                    w = u + 1 + k
                    M[u][w] = M[w][u] = x
                    new[w] -= x
                yield from rec(u + 1, new)
                for k in range(len(comp)):
                    M[u][u + 1 + k] = M[u + 1 + k][u] = 0
            M[u][u] = 0

    yield from rec(0, list(deg))


def _closed_permutations(valencies: tuple):
    groups = [list(g) for _, g in itertools.groupby(range(1, len(valencies) + 1),
                                                      key=lambda v: valencies[v - 1])]
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        perm = [0]
        for c in choice:
            perm.extend(c)
        yield perm


def _permuted(M, perm):
    return tuple(tuple(M[perm[u]][perm[w]] for w in range(len(M))) for u in range(len(M)))


@lru_cache(maxsize=None)
def enumerate_graphs(j: int) -> tuple:
    """All isomorphism classes of graphs with I - V = j (possibly disconnected)."""
    if j < 0:
        raise ValueError("order j must be non-negative")
    out = []
    for o in range(0, 2 * j + 1):
        for V in range(0, 2 * j - o + 1):
            total = 2 * V + 2 * j - o
            for vals in _partitions(total, V, 3, total):
                perms = list(_closed_permutations(vals))
                seen = set()
                for M in _matrices([o, *vals]):
                    key = min(_permuted(M, p) for p in perms)
                    if key in seen:
                        continue
                    seen.add(key)
                    n_vert = sum(1 for p in perms if _permuted(key, p) == key)
                    edge_sym = 1
                    for u in range(V + 1):
                        edge_sym *= 2 ** key[u][u] * math.factorial(key[u][u])
                        for w in range(u + 1, V + 1):
                            edge_sym *= math.factorial(key[u][w])
                    out.append(DiagramGraph(vals, o, key, n_vert * edge_sym))
    return tuple(out)


# -- contraction -----------------------------------------------------------
class _Contractor:
    def __init__(self, phase: PhaseData):
        self.phase = phase
        self.G = 1j * phase.hinv
        self._prop = {}
        self._paths = {}

    def propagator(self, mu: np.ndarray, mw: np.ndarray | None):
        key = (id(mu), id(mw))
        if key not in self._prop:
            if mw is None:
                P = self.G[mu[:, :, None], mu[:, None, :]]
            else:
                P = self.G[mu[:, :, None, None], mw[None, None, :, :]]
            self._prop[key] = (P, mu, mw)  # keep maps alive so ids stay unique
        return self._prop[key][0]

    def value(self, graph: DiagramGraph, amp: BlockTensor | None, closed: list) -> complex:
        letters = iter(string.ascii_letters)
        V = graph.V
        tensors = [amp] + closed
        block = [next(letters) for _ in range(V + 1)]
        slots = [[next(letters) for _ in range(t.order)] for t in tensors]
        used = [0] * (V + 1)
        operands, subs = [], []
        for u, t in enumerate(tensors):
            operands.append(t.data)
            subs.append(block[u] + "".join(slots[u]))
        M = graph.mult
        for u in range(V + 1):
            for w in range(u, V + 1):
                for _ in range(M[u][w]):
                    if u == w:
                        s, t_ = slots[u][used[u]], slots[u][used[u] + 1]
                        used[u] += 2
                        operands.append(self.propagator(tensors[u].index_map, None))
                        subs.append(block[u] + s + t_)
                    else:
                        s, t_ = slots[u][used[u]], slots[w][used[w]]
                        used[u] += 1
                        used[w] += 1
                        operands.append(self.propagator(tensors[u].index_map, tensors[w].index_map))
                        subs.append(block[u] + s + block[w] + t_)
        expr = ",".join(subs) + "->"
        pkey = (expr, tuple(o.shape for o in operands))
        if pkey not in self._paths:
            self._paths[pkey] = np.einsum_path(expr, *operands, optimize="greedy")[0]
        val = np.einsum(expr, *operands, optimize=self._paths[pkey])
        return complex(val) * (1j**V)


def feynman_sum(phase: PhaseData, amp: AmplitudeData, j: int, _contractor=None) -> complex:
    """Coefficient c_j: graphs of order j - m applied to A_m, summed over m."""
    con = _contractor or _Contractor(phase)
    total = 0j
    for m in range(j + 1):
        if m >= len(amp.family):
            break
        for g in enumerate_graphs(j - m):
            a = amp.tensor(m, g.open_valence)
            if a is None:
                continue
            closed = [phase.tensor(v) for v in g.valencies]
            if any(t is None for t in closed):
                continue
            total += con.value(g, a, closed) / g.automorphisms
    return total


@dataclass(frozen=True)
class SPExpansion:
    coeffs: np.ndarray
    S0: float
    signature: int
    sqrt_abs_det: float
    N: int

    def prefactor(self, k):
        return sp_prefactor(k, self.N, self.S0, self.signature, self.sqrt_abs_det)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        series = sum(c * k ** (-j) for j, c in enumerate(self.coeffs))
        return self.prefactor(k) * series


def sp_prefactor(k, N: int, S0: float, signature: int, sqrt_abs_det: float):
    k = np.asarray(k, dtype=float)
    return (2 * np.pi / k) ** (N / 2) * np.exp(1j * np.pi * signature / 4) / sqrt_abs_det * np.exp(1j * k * S0)


def sp_expand(phase: PhaseData, amp: AmplitudeData, J: int) -> SPExpansion:
    """Coefficients c_0..c_J together with the prefactor record."""
    con = _Contractor(phase)
    coeffs = np.array([feynman_sum(phase, amp, j, con) for j in range(J + 1)])
    return SPExpansion(coeffs, phase.S0, phase.signature, phase.sqrt_abs_det, phase.N)


# -- quadrature oracle -------------------------------------------------------
def super_gaussian(width: float, power: int = 8) -> Callable:
    """Smooth window exp(-(x/width)^power), flat to high order at 0."""
    return lambda x: np.exp(-((np.asarray(x) / width) ** power))


def sharp_cutoff(width: float) -> Callable:
    return lambda x: (np.abs(np.asarray(x)) <= width).astype(float)


@dataclass(frozen=True)
class OracleResult:
    coeffs: np.ndarray
    residual: float
    k_grid: np.ndarray
    values: np.ndarray


def default_k_grid(width: float, n: int = 12) -> np.ndarray:
    return np.geomspace(100.0, 800.0, n) / width**2


def fit_inverse_powers(k_grid, values, degree: int, J: int, tol: float | None = 1e-6) -> OracleResult:
    """Least-squares fit of ``values`` by a polynomial of ``degree`` in 1/k."""
    k = np.asarray(k_grid, dtype=float)
    values = np.asarray(values)
    kmin = k.min()
    A = np.stack([(kmin / k) ** j for j in range(degree + 1)], axis=1)
    sol, *_ = np.linalg.lstsq(A, values, rcond=None)
    resid = float(np.max(np.abs(A @ sol - values)) / np.max(np.abs(values)))
    coeffs = sol[: J + 1] * kmin ** np.arange(J + 1)
    if tol is not None and resid > tol:
        raise OracleFitError(f"1/k fit residual {resid:.3e} above {tol:.1e}")
    return OracleResult(coeffs, resid, k, values)


def oscillatory_oracle(integrand: Callable, N: int, J: int, prefactor: Callable,
                       half_width: float, k_grid=None, cutoff: Callable | None = None,
                       nodes: int = 400, degree: int | None = None,
                       tol: float | None = 1e-6) -> OracleResult:
    """Tensor-product Gauss-Legendre quadrature of integrand(x, k) * cutoff.

    ``integrand`` maps points of shape (M, N) and a wavenumber to M complex
    values; ``cutoff`` acts per coordinate (default: super-Gaussian of width
    half_width / 1.7).  The quadrature values divided by ``prefactor(k)``
    are fitted by a polynomial of degree J + 4 in 1/k.
    """
    width = half_width / 1.7
    cutoff = cutoff or super_gaussian(width)
    k_grid = default_k_grid(width) if k_grid is None else np.asarray(k_grid, dtype=float)
    t, w = leggauss(nodes)
    t, w = t * half_width, w * half_width
    X = np.stack([g.ravel() for g in np.meshgrid(*([t] * N), indexing="ij")], axis=1)
    wc = w * cutoff(t)
    W = np.ones(1)
    for _ in range(N):
        W = np.multiply.outer(W, wc)
    W = W.ravel()
    vals = np.array([np.sum(W * integrand(X, k)) / prefactor(k) for k in k_grid])
    return fit_inverse_powers(k_grid, vals, degree if degree is not None else J + 4, J, tol)


def chain_oracle(kernels: Callable, n_points: int, J: int, prefactor: Callable,
                 half_width: float, k_grid=None, cutoff: Callable | None = None,
                 nodes: int = 600, degree: int | None = None,
                 tol: float | None = 1e-6) -> OracleResult:
    """Quadrature of a cyclic chain integrand by transfer matrices.

    The integrand over scalars x_1..x_P is prod_p K_p(x_p, x_{p+1})
    (cyclically), or, when inserted kernels are supplied, the sum over p of
    that product with factor p replaced by K_ins_p.  ``kernels(k, x, y)``
    returns ``(K, K_ins)``: lists of P arrays of shape (len(x), len(y)),
    ``K_ins`` possibly None.  Traces of products of D K_p, with D the
    quadrature weights times cutoff, give the integral.
    """
    width = half_width / 1.7
    cutoff = cutoff or super_gaussian(width)
    k_grid = default_k_grid(width) if k_grid is None else np.asarray(k_grid, dtype=float)
    t, w = leggauss(nodes)
    t, w = t * half_width, w * half_width
    D = (w * cutoff(t))[:, None]
    vals = []
    for k in k_grid:
        K, K_ins = kernels(k, t[:, None], t[None, :])
        P = len(K)
        mats = [D * Kp for Kp in K]
        total = np.trace(_chain_product(mats))
        if K_ins is not None:
            # prefix[p] = M_0 ... M_{p-1}, suffix[p] = M_{p+1} ... M_{P-1}
            prefix = [np.eye(nodes)]
            for p in range(P - 1):
                prefix.append(prefix[-1] @ mats[p])
            suffix = [None] * P
            suffix[P - 1] = np.eye(nodes)
            for p in range(P - 2, -1, -1):
                suffix[p] = mats[p + 1] @ suffix[p + 1]
            total = 0j
            for p in range(P):
                # the term with the insertion at link p replaces the product entirely
                total += np.sum((suffix[p] @ prefix[p]).T * (D * K_ins[p]))
        vals.append(total / prefactor(k))
    return fit_inverse_powers(k_grid, np.array(vals), degree if degree is not None else J + 4, J, tol)


def _chain_product(mats):
    out = mats[0]
    for M in mats[1:]:
        out = out @ M
    return out
