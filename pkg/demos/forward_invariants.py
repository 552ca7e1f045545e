"""Wave invariants of a bouncing-ball orbit in a 3-dimensional domain.

Builds a symmetric domain from curvatures and a few higher Taylor
coefficients, checks the orbit, and prints the table B[r, j].
"""
import numpy as np

from wavetrace.domain import floquet_from_curvature, symmetric_domain, validate_DL
from wavetrace.length_hessian import det_identity_check
from wavetrace.wave_invariants import forward_table

L = 1.0
spec = symmetric_domain(3, L, {
    (1, 0): -0.3, (0, 1): -0.55,            # nu / 2 along each axis
    (2, 0): 0.08, (1, 1): -0.05, (0, 2): 0.12,
    (3, 0): -0.02, (0, 3): 0.03,
})

orbit = floquet_from_curvature(spec)
print("stability:", orbit.stability)
print("Floquet angles:", np.round(orbit.alpha, 6))

rep = validate_DL(spec, r_max=6)
print("valid for r <= 6:", rep.ok)

for r in (1, 2, 3):
    chk = det_identity_check(spec, r)
    print(f"r={r}: det H = {chk.det_numeric:+.6e}, predicted |det| = {chk.predicted:.6e}")

table = forward_table(spec, range(1, 7), J=2)
print("\n r   |det(I-P^r)|     B[r,1]                   B[r,2]")
for r in table.r_values:
    b1, b2 = table.get(r, 1), table.get(r, 2)
    print(f"{r:2d}  {table.rows[r].det_I_minus_P:12.6e}  {b1.real:+.4e}{b1.imag:+.4e}i  {b2.real:+.4e}{b2.imag:+.4e}i")
