import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavetrace.jets import Jet
from wavetrace.stationary_phase import (
    AmplitudeData,
    BlockTensor,
    MissingTensorError,
    OracleFitError,
    PhaseData,
    enumerate_graphs,
    oscillatory_oracle,
    sharp_cutoff,
    sp_expand,
    sp_prefactor,
)


# -- graph enumeration against brute-force matchings ---------------------------
def _matchings(items):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in _matchings(rest):
            yield [(a, items[i])] + m


def _canonical(mult, vals):
    V = len(vals)
    best = None
    for perm in itertools.permutations(range(1, V + 1)):
        if any(vals[p - 1] != vals[i] for i, p in enumerate(perm)):
            continue
        full = (0,) + perm
        key = tuple(tuple(mult[full[u]][full[w]] for w in range(V + 1)) for u in range(V + 1))
        best = key if best is None or key < best else best
    return best


def _brute_force(o, vals):
    owner = [0] * o + [u + 1 for u, v in enumerate(vals) for _ in range(v)]
    n = len(vals) + 1
    counts = Counter()
    for m in _matchings(list(range(len(owner)))):
        mult = [[0] * n for _ in range(n)]
        for a, b in m:
            u, w = owner[a], owner[b]
            mult[u][w] += 1
            if u != w:
                mult[w][u] += 1
        counts[_canonical(mult, vals)] += 1
    denom = math.factorial(o) * math.prod(math.factorial(v) for v in vals)
    denom *= math.prod(math.factorial(c) for c in Counter(vals).values())
    return {k: c / denom for k, c in counts.items()}


@pytest.mark.parametrize("j", [0, 1, 2])
def test_graph_classes_match_brute_force(j):
    graphs = enumerate_graphs(j)
    profiles = {(g.open_valence, g.valencies) for g in graphs}
    for o, vals in profiles:
        brute = _brute_force(o, vals)
        ours = {g.mult: 1 / g.automorphisms for g in graphs
                if (g.open_valence, g.valencies) == (o, vals)}
        assert set(ours) == set(brute)
        for key, w in ours.items():
            assert w == pytest.approx(brute[key], rel=1e-14)


def test_graph_counts_and_order():
    assert [len(enumerate_graphs(j)) for j in range(4)] == [1, 5, 41, 378]
    for j in range(3):
        for g in enumerate_graphs(j):
            assert g.order == j
            assert all(v >= 3 for v in g.valencies)
    with pytest.raises(ValueError):
        enumerate_graphs(-1)


# -- closed-form expansions --------------------------------------------------
def test_gaussian():
    phase = PhaseData.from_jet(Jet(1, 8, {(2,): 0.5}))
    c = sp_expand(phase, AmplitudeData.constant(), 3).coeffs
    assert np.allclose(c, [1, 0, 0, 0])
    amp = AmplitudeData.from_jets([Jet(1, 6, {(2,): 1.0})])
    c = sp_expand(phase, amp, 2).coeffs
    assert np.allclose(c, [0, 1j, 0])


def test_quartic_phase():
    phase = PhaseData.from_jet(Jet(1, 6, {(2,): 0.5, (4,): 1.0}))
    c = sp_expand(phase, AmplitudeData.constant(), 2).coeffs
    assert np.allclose(c, [1, -3j, -52.5], atol=1e-12)


def test_negative_signature_prefactor():
    phase = PhaseData.from_jet(Jet(2, 4, {(2, 0): 0.5, (0, 2): -1.0}))
    assert phase.signature == 0
    assert phase.sqrt_abs_det == pytest.approx(math.sqrt(2))
    val = sp_prefactor(2 * np.pi, 2, 0.0, 0, math.sqrt(2))
    assert val == pytest.approx(1 / math.sqrt(2))


def test_separable_product():
    a = Jet(1, 6, {(2,): 0.5, (3,): 0.3, (4,): 0.7})
    b = Jet(1, 6, {(2,): -1.0, (3,): 0.2, (4,): 0.4})
    ab = Jet(2, 6, {(2, 0): 0.5, (3, 0): 0.3, (4, 0): 0.7, (0, 2): -1.0, (0, 3): 0.2, (0, 4): 0.4})
    J = 2
    ca = sp_expand(PhaseData.from_jet(a), AmplitudeData.constant(), J).coeffs
    cb = sp_expand(PhaseData.from_jet(b), AmplitudeData.constant(), J).coeffs
    cab = sp_expand(PhaseData.from_jet(ab), AmplitudeData.constant(), J).coeffs
    assert np.allclose(cab, np.convolve(ca, cb)[: J + 1], atol=1e-12)


def test_missing_tensor():
    phase = PhaseData.from_jet(Jet(1, 3, {(2,): 0.5, (3,): 1.0}))
    with pytest.raises(MissingTensorError):
        sp_expand(phase, AmplitudeData.constant(), 2)
    with pytest.raises(MissingTensorError):
        PhaseData.from_jet(Jet(1, 3, {(2,): 0.5}), max_order=6)


def test_not_critical():
    with pytest.raises(ValueError):
        PhaseData.from_jet(Jet(1, 4, {(1,): 0.1, (2,): 0.5}))


def test_block_tensor_dense():
    bt = BlockTensor(np.array([[0, 1], [1, 2]]), np.ones((2, 2, 2)))
    D = bt.dense(3)
    assert D[1, 1] == 2.0 and D[0, 2] == 0.0 and D[0, 0] == 1.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(-2, 2))
def test_amplitude_linearity(vals, scale):
    phase = PhaseData.from_jet(Jet(2, 6, {(2, 0): 0.5, (0, 2): 0.8, (3, 0): 0.2, (1, 2): -0.3,
                                          (4, 0): 0.1, (2, 2): 0.05}))
    keys = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    a = Jet(2, 4, dict(zip(keys, vals)))
    b = Jet(2, 4, {(0, 0): 1.0, (2, 1): 0.4, (0, 4): -0.3})
    ca = sp_expand(phase, AmplitudeData.from_jets([a]), 2).coeffs
    cb = sp_expand(phase, AmplitudeData.from_jets([b]), 2).coeffs
    cs = sp_expand(phase, AmplitudeData.from_jets([a * scale + b]), 2).coeffs
    assert np.allclose(cs, scale * ca + cb, atol=1e-11)


# -- quadrature oracle ---------------------------------------------------------
def _quartic_integrand(x, k):
    x = x[:, 0]
    return np.exp(1j * k * (x**2 / 2 + x**4))


def test_oracle_quartic():
    pref = lambda k: sp_prefactor(k, 1, 0.0, 1, 1.0)
    res = oscillatory_oracle(_quartic_integrand, 1, 2, pref, half_width=0.85, nodes=3000)
    assert res.coeffs[0] == pytest.approx(1, abs=1e-8)
    assert res.coeffs[1] == pytest.approx(-3j, abs=1e-6)
    assert abs(res.coeffs[2] + 52.5) < 1e-2


def test_sharp_cutoff_rejected():
    pref = lambda k: sp_prefactor(k, 1, 0.0, 1, 1.0)
    with pytest.raises(OracleFitError):
        oscillatory_oracle(_quartic_integrand, 1, 2, pref, half_width=0.85, nodes=3000,
                           cutoff=sharp_cutoff(0.5))
