"""Multi-indices and sparse truncated Taylor series ("jets").

A :class:`Jet` stores the Taylor coefficients of a germ at the origin,

    g(x) = sum_gamma c_gamma x^gamma,   c_gamma = D^gamma g(0) / gamma!,

keyed by multi-index and truncated by total degree.  Jets are immutable;
every operation returns a new jet whose truncation is the minimum of the
operands' truncations.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "MultiIndex",
    "Jet",
    "multi_indices",
    "jet_add",
    "jet_mul",
    "jet_compose_univariate",
    "jet_derivative_coefficient",
    "sqrt_series",
    "log_series",
    "power_series",
]


class MultiIndex(tuple):
    """Tuple of non-negative integers indexing a monomial or a mixed partial."""

    def __new__(cls, entries: Iterable[int]):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be non-negative: {entries}")
        return super().__new__(cls, entries)

    def order(self) -> int:
        return sum(self)

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for e in self)

    def doubled(self) -> "MultiIndex":
        return MultiIndex(2 * e for e in self)

    def __add__(self, other):  # componentwise, not tuple concatenation
        return MultiIndex(a + b for a, b in zip(self, other))


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of ``dim`` entries with total ``order``, descending lexicographic."""
    if dim == 0:
        return (MultiIndex(()),) if order == 0 else ()
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(dim - 1, order - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    return tuple(out)


def _key(idx) -> tuple:
    return tuple(int(e) for e in idx)


class Jet:
    """Sparse truncated multivariate Taylor series with real coefficients."""

    __slots__ = ("dim", "trunc", "_coeffs")

    def __init__(self, dim: int, trunc: int, coeffs: Mapping | None = None):
        if dim < 1:
            raise ValueError("jet dimension must be positive")
        if trunc < 0:
            raise ValueError("truncation order must be non-negative")
        self.dim = int(dim)
        self.trunc = int(trunc)
        clean = {}
        for idx, val in (coeffs or {}).items():
            key = _key(idx)
            if len(key) != self.dim:
                raise ValueError(f"multi-index {key} does not have {dim} entries")
            if min(key) < 0:
                raise ValueError(f"negative multi-index {key}")
            if sum(key) > self.trunc or val == 0:
                continue
            clean[key] = clean.get(key, 0.0) + float(val)
        self._coeffs = {k: clean[k] for k in sorted(clean)}

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, dim: int, trunc: int) -> "Jet":
        return cls(dim, trunc)

    @classmethod
    def constant(cls, dim: int, trunc: int, value: float) -> "Jet":
        return cls(dim, trunc, {(0,) * dim: value})

    @classmethod
    def one(cls, dim: int, trunc: int) -> "Jet":
        return cls.constant(dim, trunc, 1.0)

    @classmethod
    def variable(cls, dim: int, trunc: int, i: int, shift: float = 0.0) -> "Jet":
        e = [0] * dim
        e[i] = 1
        return cls(dim, trunc, {(0,) * dim: shift, tuple(e): 1.0})

    # -- access -------------------------------------------------------
    @property
    def coeffs(self) -> dict[tuple, float]:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __getitem__(self, idx) -> float:
        return self._coeffs.get(_key(idx), 0.0)

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def constant_term(self) -> float:
        return self._coeffs.get((0,) * self.dim, 0.0)

    def homogeneous(self, degree: int) -> dict[tuple, float]:
        return {k: v for k, v in self._coeffs.items() if sum(k) == degree}

    def derivative(self, idx) -> float:
        return jet_derivative_coefficient(self, idx)

    def gradient(self) -> np.ndarray:
        g = np.zeros(self.dim)
        for i in range(self.dim):
            e = [0] * self.dim
            e[i] = 1
            g[i] = self[e]
        return g

    def hessian(self) -> np.ndarray:
        """Second derivatives at the origin."""
        h = np.zeros((self.dim, self.dim))
        for k, v in self.homogeneous(2).items():
            nz = [i for i, e in enumerate(k) if e]
            if len(nz) == 1:
                h[nz[0], nz[0]] = 2.0 * v
            else:
                h[nz[0], nz[1]] = h[nz[1], nz[0]] = v
        return h

    def partial(self, i: int) -> "Jet":
        """Jet of the partial derivative in variable ``i`` (truncation drops by one)."""
        out = {}
        for k, v in self._coeffs.items():
            if k[i]:
                e = list(k)
                e[i] -= 1
                out[tuple(e)] = k[i] * v
        return Jet(self.dim, max(self.trunc - 1, 0), out)

    def truncate(self, trunc: int) -> "Jet":
        return Jet(self.dim, min(trunc, self.trunc), self._coeffs)

    def is_close(self, other: "Jet", atol: float = 1e-12) -> bool:
        t = min(self.trunc, other.trunc)
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(self[k] - other[k]) <= atol for k in keys if sum(k) <= t)

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in list(self._coeffs.items())[:8])
        more = "" if len(self) <= 8 else f", ... ({len(self)} terms)"
        return f"Jet(dim={self.dim}, trunc={self.trunc}, {{{terms}{more}}})"

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            return jet_add(self, other)
        return self + Jet.constant(self.dim, self.trunc, other)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.trunc, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(self.dim, self.trunc, {k: other * v for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Jet":
        if n < 0:
            raise ValueError("use compose(power_series(...)) for negative powers")
        out = Jet.one(self.dim, self.trunc)
        for _ in range(n):
            out = out * self
        return out

    # -- evaluation and substitution ---------------------------------
    def evaluate(self, x) -> np.ndarray:
        """Evaluate the truncated polynomial at points ``x`` of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError("last axis of x must equal the jet dimension")
        # per-variable power tables, shape (dim, trunc+1, ...)
        table = np.empty((self.dim, self.trunc + 1) + x.shape[:-1])
        for i in range(self.dim):
            table[i, 0] = 1.0
            for e in range(1, self.trunc + 1):
                table[i, e] = table[i, e - 1] * x[..., i]
        out = np.zeros(x.shape[:-1])
        for k, v in self._coeffs.items():
            term = np.full(x.shape[:-1], v)
            for i, e in enumerate(k):
                if e:
                    term = term * table[i, e]
            out = out + term
        return out

    def substitute(self, dim: int, index_map: Sequence[int]) -> "Jet":
        """Re-express in ``dim`` variables, variable i becoming variable ``index_map[i]``."""
        if len(index_map) != self.dim:
            raise ValueError("index_map must have one entry per variable")
        out = {}
        for k, v in self._coeffs.items():
            e = [0] * dim
            for i, p in enumerate(k):
                e[index_map[i]] += p
            e = tuple(e)
            out[e] = out.get(e, 0.0) + v
        return Jet(dim, self.trunc, out)

    def compose(self, series: Sequence[float]) -> "Jet":
        return jet_compose_univariate(series, self)


# ---------------------------------------------------------------------
def _check_dims(a: Jet, b: Jet):
    if a.dim != b.dim:
        raise ValueError(f"jet dimension mismatch: {a.dim} != {b.dim}")


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_dims(a, b)
    out = dict(a._coeffs)
    for k, v in b._coeffs.items():
        out[k] = out.get(k, 0.0) + v
    return Jet(a.dim, min(a.trunc, b.trunc), out)


def _by_degree(j: Jet) -> dict[int, list]:
    groups: dict[int, list] = {}
    for k, v in j._coeffs.items():
        groups.setdefault(sum(k), []).append((k, v))
    return groups


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product."""
    _check_dims(a, b)
    trunc = min(a.trunc, b.trunc)
    ga, gb = _by_degree(a), _by_degree(b)
    out: dict[tuple, float] = {}
    for da in sorted(ga):
        for db in sorted(gb):
            if da + db > trunc:
                break
            for ka, va in ga[da]:
                for kb, vb in gb[db]:
                    k = tuple(x + y for x, y in zip(ka, kb))
                    out[k] = out.get(k, 0.0) + va * vb
    return Jet(a.dim, trunc, out)


def jet_compose_univariate(series: Sequence[float], h: Jet) -> Jet:
    """Jet of g(h(x)) given the Taylor coefficients of g at c = h(0).

    ``series[k]`` is g^{(k)}(c) / k!.  Terms beyond ``h.trunc`` are ignored
    since (h - c) has no constant term.
    """
    delta = h - h.constant_term
    out = Jet.zero(h.dim, h.trunc)
    power = Jet.one(h.dim, h.trunc)
    for k, gk in enumerate(series):
        if k > h.trunc:
            break
        if k:
            power = power * delta
            if len(power) == 0:
                break
        if gk:
            out = out + gk * power
    return out


def jet_derivative_coefficient(a: Jet, idx) -> float:
    """Mixed partial D^idx a(0) = idx! * coefficient."""
    idx = MultiIndex(idx)
    if len(idx) != a.dim:
        raise ValueError("multi-index length does not match jet dimension")
    if idx.order() > a.trunc:
        raise ValueError(f"order {idx.order()} exceeds jet truncation {a.trunc}")
    return idx.factorial() * a[idx]


# -- univariate Taylor series about a base point -----------------------
def power_series(c: float, p: float, n: int) -> list[float]:
    """Taylor coefficients of t**p at t = c (generalized binomial series)."""
    if c <= 0:
        raise ValueError(f"power series needs a positive base point, got {c}")
    out = []
    binom = 1.0
    for k in range(n + 1):
        out.append(binom * c ** (p - k))
        binom *= (p - k) / (k + 1)
    return out


def sqrt_series(c: float, n: int) -> list[float]:
    """Taylor coefficients of sqrt(t) at t = c > 0."""
    if c <= 0:
        raise ValueError(f"sqrt composition at non-positive base point {c} (degenerate link)")
    return power_series(c, 0.5, n)


def log_series(c: float, n: int) -> list[float]:
    """Taylor coefficients of log(t) at t = c > 0."""
    if c <= 0:
        raise ValueError(f"log composition at non-positive base point {c}")
    return [math.log(c)] + [(-1) ** (k + 1) / (k * c**k) for k in range(1, n + 1)]


def exp_series(c: float, n: int) -> list[float]:
    e = math.exp(c)
    return [e / math.factorial(k) for k in range(n + 1)]


def random_jet(rng: np.random.Generator, dim: int, trunc: int, scale: float = 1.0,
               constant: float | None = None) -> Jet:
    """Dense random jet; handy for property tests and demos."""
    coeffs = {}
    for deg in range(trunc + 1):
        for idx in multi_indices(dim, deg):
            coeffs[idx] = scale * rng.uniform(-1, 1)
    if constant is not None:
        coeffs[(0,) * dim] = constant
    return Jet(dim, trunc, coeffs)


def monomial_exponents(dim: int, trunc: int) -> list[tuple]:
    return [idx for deg in range(trunc + 1) for idx in multi_indices(dim, deg)]


def symmetric_tensor(jet: Jet, order: int) -> np.ndarray:
    """Dense derivative tensor D^order jet(0) of shape (dim,)*order."""
    if order > jet.trunc:
        raise ValueError(f"order {order} exceeds jet truncation {jet.trunc}")
    T = np.zeros((jet.dim,) * order)
    for k, v in jet.homogeneous(order).items():
        labels = [i for i, e in enumerate(k) for _ in range(e)]
        val = MultiIndex(k).factorial() * v
        for perm in set(itertools.permutations(labels)):
            T[perm] = val
    return T
