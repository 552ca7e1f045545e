"""Diagram engine against brute-force oscillatory quadrature.

First the quartic phase x^2/2 + x^4, then the d = 1 model integral whose
normalized coefficients are the wave invariants.  The second part takes
about half a minute.
"""
import numpy as np

from wavetrace.domain import symmetric_domain
from wavetrace.jets import Jet
from wavetrace.stationary_phase import AmplitudeData, PhaseData, oscillatory_oracle, sp_expand, sp_prefactor
from wavetrace.wave_invariants import model_integral_oracle, wave_invariants

phase = PhaseData.from_jet(Jet(1, 6, {(2,): 0.5, (4,): 1.0}))
eng = sp_expand(phase, AmplitudeData.constant(), 2).coeffs


def quartic(X, k):
    x = X[:, 0]
    return np.exp(1j * k * (x**2 / 2 + x**4))


orc = oscillatory_oracle(quartic, 1, 2, lambda k: sp_prefactor(k, 1, 0.0, 1, 1.0),
                         half_width=0.85, nodes=3000)
print("quartic phase")
for j in range(3):
    print(f"  c{j}: engine {eng[j]:.8f}   quadrature {orc.coeffs[j]:.8f}")

spec = symmetric_domain(2, 1.0, {(1,): -0.3, (2,): 0.1, (3,): -0.1})
B = wave_invariants(spec, 1, 2)
res = model_integral_oracle(spec, 1, 2)
c = res.coeffs / res.coeffs[0]
print("\nmodel integral, r = 1")
for j in (1, 2):
    print(f"  B[1,{j}]: engine {B[j]:.8f}   quadrature {c[j]:.8f}")
