"""Green's function of the annulus assembled from kernel data and path integrals."""
import numpy as np

from ahlfors_green import geometry as geo
from ahlfors_green.green import (GreenAssembly, boundary_periods, green_by_path, poisson_kernel,
                                 green_from_type2, theorem2_decompose, type2_v)
from ahlfors_green.harmonic import harmonic_frame
from ahlfors_green.oracle import annulus_green

q = 0.5
grid = geo.discretize(geo.annulus(q), 256)
frame = harmonic_frame(grid)
w = 0.75
asm = GreenAssembly(grid, w, frame=frame, a=0.72)

print("boundary root z0 of f = 1:", np.round(asm.z0, 12))
print("contour integrals of G_z:", np.round(boundary_periods(asm), 10))
print("  compare i pi omega(w):  ", np.round(1j * np.pi * frame.omega_at(w), 10))

for z in (0.6j, -0.8 + 0.1j):
    dec = theorem2_decompose(asm, z)
    total, _, _ = green_from_type2(asm, z)
    print(f"z = {z}: alpha_re = {dec.alpha_re:.12f}  correction = {dec.correction:.3e}")
    print(f"  kernel sum {dec.total:.12f}  with v_k {total:.12f}  path {green_by_path(asm, z):.12f}"
          f"  exact {annulus_green(q, z, w):.12f}")

v = type2_v(asm, 0)
print(f"v_1 by path {v.v_path:.12f}  from the frame {v.v_frame.real:.12f} (imag {v.imag:.1e})")

P = poisson_kernel(asm)
mass = np.sum(P.real * grid.ds)
print(f"Poisson kernel: min {P.real.min():.4e}, max |imag| {np.abs(P.imag).max():.1e}, mass {mass:.14f}")
