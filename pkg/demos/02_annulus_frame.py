"""Annulus q < |z| < 1: the harmonic frame and lambda against series formulas."""
import numpy as np

from ahlfors_green import geometry as geo
from ahlfors_green.harmonic import harmonic_frame, harmonic_lambda
from ahlfors_green.oracle import annulus_green, annulus_harmonic, annulus_lambda
from ahlfors_green.green import green_direct

q = 0.5
grid = geo.discretize(geo.annulus(q), 128)
frame = harmonic_frame(grid)

print("period P_11      ", frame.P[0, 0])
print("i sigma_11       ", frame.i_sigma[0, 0], " exact", -np.log(q) / (2 * np.pi))
for r in (0.6, 0.75, 0.9):
    z = r * np.exp(0.7j)
    om = frame.omega_at(z, 0)
    print(f"omega_1({r}) = {om:.14f}   exact {annulus_harmonic(q, z):.14f}")

# lambda_j(w) is a harmonic-measure-like weight built from |S(w, .)|^2; it
# differs from omega_j(w) but tends to it at the boundary
for r in (0.55, 0.75, 0.95):
    lam = harmonic_lambda(grid, r)
    print(f"lambda(|w|={r}) = {lam.round(10)}   series {np.round(annulus_lambda(q, r), 10)}"
          f"   omega = {annulus_harmonic(q, r):.10f}")

z, w = 0.7 * np.exp(2j), 0.8
print(f"G(z, w) direct {green_direct(grid, z, w):.14f}   product formula {annulus_green(q, z, w):.14f}")
