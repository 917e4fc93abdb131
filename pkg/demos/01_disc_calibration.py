"""Unit disc: compare the kernel solver with the closed forms.

On the disc S(z, w) = 1 / (2 pi (1 - conj(w) z)), the Ahlfors map based at a
is the Moebius map (z - a) / (1 - conj(a) z), and G(z, w) = -log|(z - w) / (1 - conj(w) z)|.
"""
import numpy as np

from ahlfors_green import geometry as geo
from ahlfors_green.green import GreenAssembly, green_by_path
from ahlfors_green.oracle import disc_green
from ahlfors_green.szego import ahlfors, solve_szego

grid = geo.discretize(geo.disc(), 64)
w = 0.3 + 0.1j

k = solve_szego(grid, w)
S_exact = 1 / (2 * np.pi * (1 - np.conj(w) * grid.z))
print(f"max |S - S_exact| on the boundary: {np.max(np.abs(k.S - S_exact)):.2e}")

a = -0.2 + 0.4j
f = ahlfors(grid, a)
z = np.array([0.1, -0.5 + 0.2j, 0.6j])
print(f"max |f - Moebius| at 3 points:     {np.max(np.abs(f(z) - (z - a) / (1 - np.conj(a) * z))):.2e}")

asm = GreenAssembly(grid, w, f=f)
print(f"calibrated signs: eps1 = {asm.eps1:+d}, eps2 = {asm.eps2:+d}")
for p in (-0.5, -0.1 - 0.6j, 0.8j):
    g = green_by_path(asm, p)
    print(f"G({p}, w) = {g:.12f}   closed form {disc_green(p, w):.12f}")
