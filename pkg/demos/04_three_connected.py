"""A disc with two holes: Ahlfors map, its branch points and lambda near a hole."""
import numpy as np

from ahlfors_green import geometry as geo
from ahlfors_green.green import GreenAssembly, default_base_point, green_by_path, green_direct
from ahlfors_green.harmonic import harmonic_frame, harmonic_lambda
from ahlfors_green.szego import ahlfors, branch_locus

spec = geo.two_hole_disc()
grid = geo.discretize(spec, 256)
a = default_base_point(grid)
f = ahlfors(grid, a)

print(f"base point a = {a:.6f}")
print(f"change of arg f / 2 pi = {f.argument_change() / (2 * np.pi):.10f}  (degree n = {grid.n})")
print(f"max ||f| - 1| on the boundary = {np.max(np.abs(np.abs(f.values) - 1)):.1e}")
for b in branch_locus(f):
    print(f"branch point {complex(b):.8f}   |f'| = {abs(f.derivative(b)):.1e}")

frame = harmonic_frame(grid)
print("i sigma =\n", frame.i_sigma)

# lambda approaches omega as w moves towards the outer circle
theta = np.array([0.4, 1.9, 3.3, 5.0])
for d in (0.1, 0.06, 0.04):
    wp = (1 - d) * np.exp(1j * theta)
    gap = np.max(np.abs(np.array([harmonic_lambda(grid, p) for p in wp]).T - frame.omega_at(wp)))
    print(f"distance {d}: max |lambda - omega| = {gap:.2e}")

w = -0.1 + 0.6j
asm = GreenAssembly(grid, w, frame=frame, f=f)
for z in (0.3 - 0.5j, -0.6 - 0.2j):
    print(f"G({z}, w): path {green_by_path(asm, z):.12f}   direct {green_direct(grid, z, w):.12f}")
