"""Normalized wave invariants of the iterated bouncing-ball orbit.

The model trace near length 2rL is the oscillatory integral over 2r
boundary points

    I(k) = sum_(+-) int e^{ik L_+-(x)} a_+-(k, x) dx,
    a = L_+-(x) A(k, x) + (1/i) dA/dk,
    A = prod_p a1(k l_p) * ratio_p,

with l_p the link lengths, ratio_p the direction/normal factor and
a1(z) = z^{-(n-2)/2} e^{-iz} H^(1)_{n/2-1}(z).  Its stationary-phase
coefficients c_j, divided by c_0, are the invariants B_{r,j} computed here.

Factoring A = C k^{-s} exp(Lambda_0 + sum_m k^-m Lambda_m), s = (n-1)r,
turns the k-dependence into a power series whose terms are sums of
link-local jets, exponentiated on dense global derivative tensors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import __version__
from .domain import DomainSpec, build_boundary_jets, floquet_from_curvature
from .jets import Jet, log_series, power_series, symmetric_tensor
from .length_hessian import LengthJet, build_length_jet, inverse_hessian, orientation_signs
from .stationary_phase import AmplitudeData, BlockTensor, PhaseData, sp_expand

__all__ = [
    "WaveInvariantTable",
    "RowInfo",
    "hankel_amp_coeffs",
    "hankel_series",
    "hankel_integral",
    "a1_exact",
    "build_principal_integral",
    "wave_invariants",
    "forward_table",
    "top_term_closed_form",
    "top_term_constant",
    "CONVENTION",
    "model_integral_oracle",
]

DENSE_AMPLITUDE_CAP = 4 * 10**7

CONVENTION = {
    "invariant": "B[r,j] = c_j / c_0 of the combined (+ and -) model integral",
    "expansion": "Z(k) = (2pi/k)^(N/2) e^(i pi sgn/4) |det H|^(-1/2) e^(ik 2rL) C k^(-s) sum_j c_j k^(-j)",
    "edge_factor": "i h^{ab}",
    "closed_vertex_factor": "i D^nu L(0)",
    "open_vertex_factor": "D^o a(0)",
    "hankel_order": "n/2 - 1",
    "amplitude_constant": "C = a_0^(2r) L^(-s) prod_p(-w(p)), s = (n-1) r",
    "top_term_constant": "K_j = -4i(-1)^j multiplying (2i)^-(j+1) sum r/gamma! prod (h^{ii,11})^gamma_i D_2gamma f(0)",
}


# -- Hankel amplitude -------------------------------------------------------
def hankel_amp_coeffs(nu: float, M: int) -> np.ndarray:
    """a_0..a_{M-1} with e^{-iz} H^(1)_nu(z) ~ z^{-1/2} sum_m a_m z^{-m}.

    Obtained by expanding (1 - s/(2iz))^(nu - 1/2) binomially in the
    integral representation (see :func:`hankel_integral`) and integrating
    term by term.  For half-integer nu the series terminates.
    """
    pref = math.sqrt(2 / math.pi) * np.exp(-1j * (math.pi * nu / 2 + math.pi / 4)) / special.gamma(nu + 0.5)
    m = np.arange(M)
    return pref * special.binom(nu - 0.5, m) * (-1 / 2j) ** m * special.gamma(nu + m + 0.5)


def hankel_series(nu: float, z, M: int):
    z = np.asarray(z, dtype=float)
    a = hankel_amp_coeffs(nu, M)
    return z**-0.5 * sum(a[m] * z ** (-m) for m in range(M))


def hankel_integral(nu: float, z: float) -> complex:
    """e^{-iz} H^(1)_nu(z) by quadrature of its integral representation

        (2/(pi z))^(1/2) e^{-i(pi nu/2 + pi/4)} / Gamma(nu + 1/2)
            * int_0^inf e^{-s} s^(nu - 1/2) (1 - s/(2iz))^(nu - 1/2) ds.
    """
    # s = t^2 removes the endpoint singularity for nu < 1/2
    def g(t):
        return 2.0 * t ** (2 * nu) * np.exp(-t * t) * (1 - t * t / (2j * z)) ** (nu - 0.5)

    opts = dict(limit=400, epsabs=1e-15, epsrel=1e-13)
    re = integrate.quad(lambda t: g(t).real, 0, np.inf, **opts)[0]
    im = integrate.quad(lambda t: g(t).imag, 0, np.inf, **opts)[0]
    pref = math.sqrt(2 / (math.pi * z)) * np.exp(-1j * (math.pi * nu / 2 + math.pi / 4)) / special.gamma(nu + 0.5)
    return complex(pref * (re + 1j * im))


def a1_exact(n: int, z):
    """a1(z) = z^{-(n-2)/2} e^{-iz} H^(1)_{n/2-1}(z) and its derivative."""
    nu = n / 2 - 1
    z = np.asarray(z, dtype=float)
    h = special.hankel1e(nu, z)
    dh = special.h1vp(nu, z) * np.exp(-1j * z) - 1j * h
    p = -(n - 2) / 2
    return z**p * h, p * z ** (p - 1) * h + z**p * dh


def _log_coeffs(g: np.ndarray, M: int) -> np.ndarray:
    """b_1..b_M of log(1 + sum_{m>=1} g_m t^m) (index 0 unused)."""
    b = np.zeros(M + 1, dtype=complex)
    for m in range(1, M + 1):
        acc = m * (g[m] if m < len(g) else 0)
        for i in range(1, m):
            acc -= i * b[i] * (g[m - i] if m - i < len(g) else 0)
        b[m] = acc / m
    return b


# -- dense derivative tensors ("tensor jets") --------------------------------
def _shuffle(a: np.ndarray, b: np.ndarray, k: int, first_from_a: bool = False) -> np.ndarray:
    """Sum over ways of distributing k tensor slots between symmetric tensors a and b."""
    sa, sb = a.ndim, b.ndim
    outer = np.multiply.outer(a, b)
    total = np.zeros_like(outer)
    positions = range(1, k) if first_from_a else range(k)
    need = sa - 1 if first_from_a else sa
    for S in itertools.combinations(positions, need):
        S = ((0,) + S) if first_from_a else S
        comp = [t for t in range(k) if t not in S]
        perm = list(S) + comp
        total += np.transpose(outer, np.argsort(perm))
    return total


class _TJet:
    """Derivative tensors D^0..D^K of a function at 0 in N global variables."""

    def __init__(self, N: int, tensors: list):
        self.N = N
        self.t = tensors

    @property
    def K(self) -> int:
        return len(self.t) - 1

    @classmethod
    def from_links(cls, lj: LengthJet, jets: list, K: int, coef: complex = 1.0) -> "_TJet":
        N = lj.n_vars
        t = [np.zeros((N,) * k, dtype=complex) for k in range(K + 1)]
        cache = {}
        for p, jet in enumerate(jets):
            idx = lj.link_vars(p)
            for k in range(K + 1):
                key = (id(jet), k)
                if key not in cache:
                    cache[key] = symmetric_tensor(jet, k) if k else np.asarray(jet.constant_term)
                if k == 0:
                    t[0] = t[0] + cache[key]
                else:
                    t[k][np.ix_(*([idx] * k))] += cache[key]
        return cls(N, [coef * x for x in t])

    @classmethod
    def constant(cls, N: int, K: int, value: complex) -> "_TJet":
        return cls(N, [np.asarray(value, dtype=complex)] + [np.zeros((N,) * k, dtype=complex) for k in range(1, K + 1)])

    def truncate(self, K: int) -> "_TJet":
        return _TJet(self.N, self.t[: K + 1])

    def __add__(self, other: "_TJet") -> "_TJet":
        K = min(self.K, other.K)
        return _TJet(self.N, [self.t[k] + other.t[k] for k in range(K + 1)])

    def scale(self, c: complex) -> "_TJet":
        return _TJet(self.N, [c * x for x in self.t])

    def __mul__(self, other: "_TJet") -> "_TJet":
        K = min(self.K, other.K)
        out = []
        for k in range(K + 1):
            acc = np.zeros((self.N,) * k, dtype=complex)
            for s in range(k + 1):
                acc = acc + _shuffle(self.t[s], other.t[k - s], k)
            out.append(acc)
        return _TJet(self.N, out)

    def exp(self) -> "_TJet":
        # D g = g D f, expanded slot by slot
        g = [np.asarray(np.exp(self.t[0]), dtype=complex)]
        for k in range(1, self.K + 1):
            acc = np.zeros((self.N,) * k, dtype=complex)
            for s in range(k):
                acc = acc + _shuffle(self.t[s + 1], g[k - 1 - s], k, first_from_a=True)
            g.append(acc)
        return _TJet(self.N, g)


# -- the principal integral ------------------------------------------------
@dataclass(frozen=True)
class IntegralMeta:
    s: int
    C: complex
    r: int
    orientation: str


def _link_amplitude_jets(spec: DomainSpec, lj: LengthJet, K: int, Mmax: int):
    """Per-link jets: length, Lambda_0 term, and l^{-m} for m = 1..Mmax."""
    n, L = spec.n, spec.L
    d = spec.d
    fp, fm = build_boundary_jets(spec, K + 2)
    f = {1: fp, -1: fm}
    cache = {}
    out = []
    m2 = 2 * lj.r
    for p in range(m2):
        key = (lj.weights[p], lj.weights[(p + 1) % m2])
        if key not in cache:
            ell = lj.links[p].truncate(K)
            f_from = f[key[0]].substitute(2 * d, list(range(d)))
            f_to = f[key[1]].substitute(2 * d, list(range(d, 2 * d)))
            num = -(f_from - f_to)
            for i in range(d):
                dx = Jet.variable(2 * d, K + 1, i) - Jet.variable(2 * d, K + 1, d + i)
                num = num + dx * f[key[0]].partial(i).substitute(2 * d, list(range(d)))
            num = num.truncate(K)
            inv_ell = ell.compose(power_series(ell.constant_term, -1.0, K))
            ratio = num * inv_ell
            r0 = ratio.constant_term
            lam0 = (-(n - 1) / 2) * (ell * (1 / L)).compose(log_series(1.0, K)) \
                + (ratio * (1 / r0)).compose(log_series(1.0, K))
            inv_pows = [ell.compose(power_series(ell.constant_term, -float(m), K)) for m in range(1, Mmax + 1)]
            cache[key] = (ell, lam0, inv_pows, r0)
        out.append(cache[key])
    return out


def build_principal_integral(spec: DomainSpec, r: int, orientation: str, J: int):
    """Phase and amplitude data of the model integral, plus normalization metadata.

    Returns ``(PhaseData, AmplitudeData, IntegralMeta)``; the amplitude
    family excludes the constant C k^{-s}, which is recorded in the meta.
    """
    n, L, d = spec.n, spec.L, spec.d
    T = 2 * J + 2
    K = 2 * J
    lj = build_length_jet(spec, r, orientation, T)
    N = lj.n_vars
    if N ** K > DENSE_AMPLITUDE_CAP:
        raise MemoryError(f"dense amplitude tensors of order {K} in {N} variables exceed the size cap")

    # phase: link-blocked derivative tensors
    maps = np.stack([lj.link_vars(p) for p in range(2 * r)])
    tensors = {}
    for k in range(3, T + 1):
        data = np.stack([symmetric_tensor(l, k) for l in lj.links])
        if np.any(data):
            tensors[k] = BlockTensor(maps, data)
    hinv = inverse_hessian(spec, r, orientation)
    phase = PhaseData.from_hessian(lj.critical_value, lj.hessian_at_zero(), tensors, T, hinv=hinv)

    # amplitude
    s = (n - 1) * r
    nu = n / 2 - 1
    a = hankel_amp_coeffs(nu, J + 1)
    b = _log_coeffs(a / a[0], J)
    links = _link_amplitude_jets(spec, lj, K, J)
    lam0 = _TJet.from_links(lj, [x[1] for x in links], K)
    lam = [None] + [
        _TJet.from_links(lj, [x[2][m - 1] for x in links], 2 * (J - m), coef=b[m]) for m in range(1, J + 1)
    ]
    E = [_TJet.constant(N, K, 1.0)]
    for m in range(1, J + 1):
        Km = 2 * (J - m)
        acc = _TJet.constant(N, Km, 0.0)
        for i in range(1, m + 1):
            acc = acc + (lam[i].truncate(Km) * E[m - i].truncate(Km)).scale(i / m)
        E.append(acc)
    X = lam0.exp()
    length = _TJet.from_links(lj, [x[0] for x in links], K)
    Bm = [X.truncate(2 * (J - m)) * E[m] for m in range(J + 1)]
    family = []
    for m in range(J + 1):
        Km = 2 * (J - m)
        Am = length.truncate(Km) * Bm[m]
        if m:
            Am = Am + Bm[m - 1].truncate(Km).scale(1j * (s + m - 1))
        family.append({k: BlockTensor.from_dense(Am.t[k]) for k in range(Km + 1)})
    amp = AmplitudeData(tuple(family), K)
    C = a[0] ** (2 * r) * L ** (-s) * np.prod([x[3] for x in links])
    return phase, amp, IntegralMeta(s, complex(C), r, orientation)


# -- invariants ----------------------------------------------------------------
@dataclass(frozen=True)
class RowInfo:
    """Prefactor record of one iterate, enough to rebuild the unnormalized expansion."""

    r: int
    N: int
    S0: float
    signature: int
    sqrt_abs_det: float
    s: int
    C: complex
    c0: complex
    det_I_minus_P: float  # L^{2rd} |det H| = |det(I - P^r)|


@dataclass
class WaveInvariantTable:
    n: int
    L: float
    J: int
    entries: dict = field(default_factory=dict)  # (r, j) -> complex
    rows: dict = field(default_factory=dict)  # r -> RowInfo
    convention: dict = field(default_factory=lambda: dict(CONVENTION, version=__version__))

    @property
    def r_values(self) -> list:
        return sorted({r for r, _ in self.entries})

    def get(self, r: int, j: int) -> complex:
        return self.entries[(r, j)]

    def det_values(self) -> dict:
        return {r: info.det_I_minus_P for r, info in self.rows.items()}

    def restricted(self, r_values) -> "WaveInvariantTable":
        keep = set(r_values)
        return WaveInvariantTable(
            self.n, self.L, self.J,
            {k: v for k, v in self.entries.items() if k[0] in keep},
            {r: v for r, v in self.rows.items() if r in keep},
            dict(self.convention),
        )


def _orientation_coeffs(spec, r, orientation, J):
    phase, amp, meta = build_principal_integral(spec, r, orientation, J)
    exp = sp_expand(phase, amp, J)
    return exp, meta


def wave_invariants(spec: DomainSpec, r: int, J: int, return_info: bool = False):
    """Normalized invariants B_{r,0..J} (a complex array; entry 0 equals 1)."""
    exp_p, meta = _orientation_coeffs(spec, r, "+", J)
    if spec.symmetric:
        c = 2 * exp_p.coeffs
    else:
        exp_m, _ = _orientation_coeffs(spec, r, "-", J)
        c = exp_p.coeffs + exp_m.coeffs
    if abs(c[0]) == 0:
        raise ArithmeticError("leading coefficient vanishes")
    B = c / c[0]
    if not return_info:
        return B
    d = spec.d
    info = RowInfo(r, exp_p.N, exp_p.S0, exp_p.signature, exp_p.sqrt_abs_det, meta.s, meta.C,
                   complex(c[0]), float(spec.L ** (2 * r * d) * exp_p.sqrt_abs_det**2))
    return B, info


def forward_table(spec: DomainSpec, r_values, J: int) -> WaveInvariantTable:
    table = WaveInvariantTable(spec.n, spec.L, J)
    for r in r_values:
        B, info = wave_invariants(spec, r, J, return_info=True)
        for j in range(J + 1):
            table.entries[(r, j)] = complex(B[j])
        table.rows[r] = info
    table.convention["truncation"] = 2 * J + 2
    return table


def top_term_constant(j: int) -> complex:
    """Factor K_j relating the engine to the (2i)^-(j+1) normalization with h^{ii,11}."""
    return -4j * (-1) ** j


def top_term_closed_form(spec: DomainSpec, r: int, j: int) -> complex:
    """Part of B_{r,j} linear in the degree-(2j+2) Taylor coefficients of f.

    Sum over |gamma| = j+1 of (r/gamma!) prod_i (h^{ii,11})^{gamma_i}
    D^{2j+2}_{2gamma} f(0), times K_j / (2i)^{j+1}.
    """
    if not spec.symmetric:
        raise ValueError("closed-form top term needs a symmetric domain")
    d = spec.d
    hinv = inverse_hessian(spec, r, "+")
    h11 = np.array([hinv[i, i] for i in range(d)])
    total = 0.0
    for gamma, val in spec.F.items():
        if sum(gamma) != j + 1:
            continue
        g = np.array(gamma)
        D = math.prod(math.factorial(2 * e) for e in gamma) * val
        total += r / math.prod(math.factorial(e) for e in gamma) * np.prod(h11**g) * D
    return complex(top_term_constant(j) / (2j) ** (j + 1) * total)


def model_integral_oracle(spec: DomainSpec, r: int, J: int, orientation: str = "+",
                          half_width: float | None = None, nodes: int = 1000, k_grid=None,
                          tol: float | None = 1e-6):
    """Quadrature of the model integral for d = 1, fitted in 1/k.

    Uses exact Hankel functions and the explicit square-root link
    formulas, independently of the jet machinery.  Returns an
    :class:`OracleResult` whose coefficients are c_j for this orientation
    (same normalization as the engine, before dividing by c_0).
    """
    from .domain import boundary_polynomials
    from .stationary_phase import chain_oracle, sp_prefactor

    if spec.d != 1:
        raise ValueError("the transfer-matrix oracle handles d = 1 only")
    n, L = spec.n, spec.L
    # the box must be wide enough that c_j / k^j stands above quadrature noise
    half_width = 0.9 * min(1.0, L) if half_width is None else half_width
    if k_grid is None:
        k_grid = np.geomspace(50.0, 400.0, 12) / (half_width / 1.7) ** 2
    w = orientation_signs(r, orientation)
    fp, fm = boundary_polynomials(spec)
    f = {1: fp, -1: fm}
    df = {1: fp.partial(0), -1: fm.partial(0)}
    phase, _, meta = build_principal_integral(spec, r, orientation, 0)

    def evalf(jet, x):
        return jet.evaluate(np.asarray(x)[..., None])

    def kernels(k, x, y):
        K, K_ins = [], []
        cache = {}
        for p in range(2 * r):
            key = (int(w[p]), int(w[(p + 1) % (2 * r)]))
            if key not in cache:
                fw, ft = f[key[0]], f[key[1]]
                gap = evalf(ft, y) - evalf(fw, x)
                ell = np.sqrt((y - x) ** 2 + gap**2)
                ratio = ((x - y) * evalf(df[key[0]], x) + gap) / ell
                a, da = a1_exact(n, k * ell)
                osc = np.exp(1j * k * (ell - L))
                cache[key] = (osc * a * ratio, osc * ratio * ell * (a - 1j * da))
            K.append(cache[key][0])
            K_ins.append(cache[key][1])
        return K, K_ins

    def prefactor(k):
        return sp_prefactor(k, phase.N, 0.0, phase.signature, phase.sqrt_abs_det) * meta.C * k ** (-meta.s)

    return chain_oracle(kernels, 2 * r, J, prefactor, half_width, k_grid=k_grid, nodes=nodes, tol=tol)
