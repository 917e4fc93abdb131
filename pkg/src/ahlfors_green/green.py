"""Green's function: direct solve, kernel representation, path antiderivatives.

Conventions.  ``green_direct`` is the classical Green's function: positive,
singular like -ln|z - w|, zero on the boundary.  With the kernel
normalization of :mod:`szego` its z-derivative is

    G_z = eps1 * X + eps2 * i pi * sum_j (omega_j(w) - lambda_j(w)) u_j(z),
    X(z, w) = pi S(z, w) L(z, w) / S(w, w),

with eps1 = eps2 = -1, found by calibration against finite differences
rather than assumed.  The contour identities (Poisson kernel, periods of
G_z, the lambda_k formula) are naturally stated for the opposite sign
convention, -G, whose derivative is eps1 * G_z; they are evaluated that way
here.  Integrating G_z along a path from the outer boundary gives G back
as 2 Re of the integral, so the harmonic correction enters with 2 pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .cauchy import HolomorphicFunction, diff_t
from .geometry import BoundaryGrid, GeometryError, annulus, contains, disc, discretize
from .harmonic import (HarmonicFrame, harmonic_frame, harmonic_lambda, reconstruct_omega_by_path,
                       solve_dirichlet)
from .paths import PathSpec, integrate_along_path, route
from .szego import AhlforsMap, ahlfors, ahlfors_boundary_root, branch_locus, solve_szego


class SingularityError(ValueError):
    pass


class CalibrationError(RuntimeError):
    pass


# ------------------------------------------------------------ direct solve

class DirectGreen:
    """G(., w) = -ln|z - w| + h with h harmonic and h = ln|zeta - w| on the boundary."""

    def __init__(self, grid: BoundaryGrid, w):
        self.grid, self.w = grid, complex(w)
        if not contains(grid.spec, self.w):
            raise GeometryError("point not in domain")
        self.h = solve_dirichlet(grid, np.log(np.abs(grid.z - self.w)))

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        if np.any(np.abs(zz - self.w) < 1e-10):
            raise SingularityError("z coincides with the source point w")
        val = -np.log(np.abs(zz - self.w)) + self.h(zz)
        return float(val) if zz.ndim == 0 else val

    def dz(self, z, step=None):
        """Finite-difference G_z = (G_x - i G_y) / 2, fourth-order central stencil.

        The default step keeps truncation and cancellation error near 1e-12
        for points a few tenths of the diameter from w.
        """
        z = np.asarray(z, dtype=complex)
        h = 5e-5 * self.grid.spec.diameter if step is None else step

        def d1(e):
            return (8 * (self(z + e * h) - self(z - e * h))
                    - (self(z + 2 * e * h) - self(z - 2 * e * h))) / (12 * h)
        return (d1(1) - 1j * d1(1j)) / 2


_DIRECT: dict = {}


def _direct(grid, w):
    key = (id(grid), complex(w))
    hit = _DIRECT.get(key)
    if hit is None or hit.grid is not grid:
        if len(_DIRECT) > 256:
            _DIRECT.clear()
        hit = _DIRECT[key] = DirectGreen(grid, w)
    return hit


def green_direct(grid: BoundaryGrid, z, w):
    """Classical Green's function G(z, w) (vectorized in z)."""
    return _direct(grid, w)(z)


# ------------------------------------------------------------- calibration

@dataclass(frozen=True)
class Signs:
    eps1: int
    eps2: int
    spread1: float      # min |cos| of the phase between the two sides at the probes
    spread2: float


def _sign_from(lhs, rhs, name):
    """The sign s with lhs = s * rhs, asserted consistent over all probes."""
    c = np.real(lhs * np.conj(rhs)) / (np.abs(lhs) * np.abs(rhs))
    s = np.sign(c)
    if not np.all(s == s[0]) or np.min(np.abs(c)) < 0.99:
        raise CalibrationError(f"{name} is not a consistent sign across probes: {c}")
    return int(s[0]), float(np.min(np.abs(c)))


@lru_cache(maxsize=None)
def calibrate_signs(m=128) -> Signs:
    """Fix eps1 on the unit disc and eps2 on the annulus {1/2 < |z| < 1}.

    On the disc the harmonic sum is empty, so G_z = eps1 X.  On the annulus
    the remainder G_z - eps1 X is compared with i pi (omega - lambda) u_1.
    Both comparisons use finite differences of the direct solver.
    """
    probes = np.array([0.5, -0.2 + 0.6j, 0.1 - 0.7j, -0.55 - 0.3j, 0.35 + 0.35j])
    g = discretize(disc(), m)
    w = 0.3 + 0.1j
    asm = GreenAssembly(g, w, signs=Signs(1, 1, 1.0, 1.0))
    fd = _direct(g, w).dz(probes)
    eps1, c1 = _sign_from(fd, asm.X(probes), "eps1")

    g = discretize(annulus(0.5), m)
    w = 0.75
    asm = GreenAssembly(g, w, signs=Signs(eps1, 1, c1, 1.0))
    probes = 0.8 * np.exp(1j * np.array([0.9, 2.0, 3.0, 4.1, 5.3]))
    rest = _direct(g, w).dz(probes) - eps1 * asm.X(probes)
    eps2, c2 = _sign_from(rest, asm.harmonic_part(probes), "eps2")
    return Signs(eps1, eps2, c1, c2)


# ---------------------------------------------------------------- assembly

def default_base_point(grid: BoundaryGrid) -> complex:
    """A deterministic interior point far from the boundary."""
    from .szego import interior_samples
    pts = interior_samples(grid, count=48)
    d = grid.spec.nearest(pts)[2]
    return complex(pts[np.argmax(np.round(d, 12))])


class GreenAssembly:
    """Kernel representation of G_z(., w) plus everything needed to integrate it."""

    quad_tol = 1e-12        # relative tolerance of the adaptive path quadrature

    def __init__(self, grid: BoundaryGrid, w, frame: HarmonicFrame | None = None,
                 f: AhlforsMap | None = None, a=None, signs: Signs | None = None):
        self.grid = grid
        self.w = complex(w)
        spec = grid.spec
        if not contains(spec, self.w):
            raise GeometryError("point not in domain")
        self.kernel = solve_szego(grid, self.w)
        self.n = grid.n
        self.frame = frame if (frame is not None or grid.n == 1) else harmonic_frame(grid)
        self.lam = harmonic_lambda(grid, kernel=self.kernel)
        self.omega_w = (self.frame.omega_at(self.w) if self.frame is not None
                        else np.ones(1))
        self.coef = (self.omega_w - self.lam)[: grid.n - 1]
        self.signs = signs if signs is not None else calibrate_signs()
        self._f, self._a = f, a
        self.exclusion = max(1e-3 * spec.diameter, 3 * grid.spacing())

    @property
    def eps1(self):
        return self.signs.eps1

    @property
    def eps2(self):
        return self.signs.eps2

    # -- pieces of G_z

    def X(self, z):
        """Principal term pi S(z, w) L(z, w) / S(w, w)."""
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z - self.w) < 1e-8 * self.grid.spec.diameter):
            raise SingularityError("X evaluated at the source point")
        k = self.kernel
        return np.pi * k.S_fn(z) * k.L_fn(z) / k.S_diag

    @cached_property
    def _U(self) -> HolomorphicFunction | None:
        """sum_j (omega_j(w) - lambda_j(w)) u_j as one holomorphic function."""
        if self.frame is None:
            return None
        fns = [self.frame.u_fn(j) for j in range(self.n - 1)]
        vals = sum(c * fn.values for c, fn in zip(self.coef, fns))
        poles = [(p, c * cs) for c, fn in zip(self.coef, fns) for p, cs in fn.poles]
        return HolomorphicFunction(self.grid, vals, poles=poles)

    def harmonic_part(self, z):
        """i pi sum_j (omega_j(w) - lambda_j(w)) u_j(z), without the sign flag."""
        z = np.asarray(z, dtype=complex)
        if self._U is None:
            return np.zeros(z.shape, dtype=complex)
        return 1j * np.pi * self._U(z)

    def green_z(self, z):
        return self.eps1 * self.X(z) + self.eps2 * self.harmonic_part(z)

    __call__ = green_z

    def green_z_boundary(self):
        """G_z at the grid nodes, from boundary data only."""
        k = self.kernel
        X = np.pi * k.S * k.L / k.S_diag
        H = (1j * np.pi * (self.coef @ self.frame.u)) if self.frame is not None else 0
        return self.eps1 * X + self.eps2 * H

    # -- Ahlfors data for anchoring paths

    @cached_property
    def f(self) -> AhlforsMap:
        if self._f is not None:
            return self._f
        a = self._a if self._a is not None else default_base_point(self.grid)
        return ahlfors(self.grid, a)

    @cached_property
    def branch_points(self):
        return branch_locus(self.f)

    @cached_property
    def z0(self) -> complex:
        """Outer boundary point with f(z0) = 1."""
        return ahlfors_boundary_root(self.f, self.n - 1)

    def boundary_root(self, k) -> complex:
        return ahlfors_boundary_root(self.f, k)

    def obstacles(self, ends=()):
        """Exclusion discs about w and the branch points of f.

        X is holomorphic at branch points, so their discs only keep paths
        off them; a disc shrinks to half the distance to a path end point
        that would otherwise lie inside it.
        """
        for e in ends:
            if abs(complex(e) - self.w) <= self.exclusion:
                raise GeometryError(f"{e} lies within the exclusion radius of the source point")
        obs = [(self.w, self.exclusion)]
        for b in map(complex, self.branch_points):
            r = min([self.exclusion] + [abs(b - complex(e)) / 2 for e in ends])
            if abs(b - self.w) > self.exclusion + r and r > 1e-9 * self.grid.spec.diameter:
                obs.append((b, r))
        return obs

    def path_to(self, z, via=(), start=None):
        start = self.z0 if start is None else complex(start)
        return route(self.grid.spec, start, z, obstacles=self.obstacles([start, z, *via]), via=via)

    def _integrate(self, fn, z, path, via):
        path = path if path is not None else self.path_to(z, via)
        path.validate(self.grid.spec)
        return integrate_along_path(fn, path, self.grid.spec, tol=self.quad_tol)


def principal_term_X(assembly: GreenAssembly, z):
    return assembly.X(z)


def green_z(assembly: GreenAssembly, z):
    return assembly.green_z(z)


def green_by_path(assembly: GreenAssembly, z, path: PathSpec | None = None, via=()):
    """2 Re of the integral of G_z from z0 to z."""
    return float(2 * np.real(assembly._integrate(assembly.green_z, z, path, via)))


@dataclass
class Decomposition:
    alpha_re: float
    correction: float
    total: float
    pi_correction: float   # same sum with coefficient pi instead of 2 pi


def theorem2_decompose(assembly: GreenAssembly, z, path: PathSpec | None = None, via=()):
    """G(z, w) = 2 Re int eps1 X + eps2 * 2 pi sum_j (omega_j(w) - lambda_j(w)) mu_j(z).

    The second term is 2 Re of the integral of the harmonic part, because
    Re int i u_j dz = mu_j(z) - mu_j(z0) and mu_j vanishes on the outer curve.
    """
    a = assembly
    alpha = float(2 * np.real(a._integrate(lambda s: a.eps1 * a.X(s), z, path, via)))
    if a.frame is None:
        return Decomposition(alpha, 0.0, alpha, 0.0)
    s = float(a.coef @ a.frame.mu_at(complex(z)))
    corr = a.eps2 * 2 * np.pi * s
    return Decomposition(alpha, corr, alpha + corr, a.eps2 * np.pi * s)


@dataclass
class TypeTwo:
    k: int
    v_path: float           # -Re of the integral of eps1 X along nu_k
    v_frame: complex        # eps2 i pi sum_j (omega_j - lambda_j) sigma_jk
    doubled: float          # the same path integral with a factor 2

    @property
    def imag(self):
        return abs(self.v_frame.imag)


def type2_v(assembly: GreenAssembly, k: int, path: PathSpec | None = None, via=()) -> TypeTwo:
    """Coefficient of F_k' in the harmonic part, computed two ways.

    Along nu_k from z0 to the root z_k of f = 1 on curve k, G vanishes at
    both ends and Re int F_j' dz = delta_jk, so Re int G_z dz = 0 gives
    v_k = -Re int eps1 X dz.
    """
    a = assembly
    if not 0 <= k < a.n - 1:
        raise IndexError("k must index an inner curve")
    zk = a.boundary_root(k)
    val = a._integrate(lambda s: a.eps1 * a.X(s), zk, path, via)
    v_path = float(-np.real(val))
    v_frame = complex(a.eps2 * 1j * np.pi * (a.coef @ a.frame.sigma[:, k]))
    return TypeTwo(k, v_path, v_frame, 2 * v_path)


def green_from_type2(assembly: GreenAssembly, z, paths=None):
    """alpha_re(z) + 2 sum_k v_k omega_k(z), with omega_k by path integrals of F_k'.

    Returns (total, alpha_re, harmonic part).
    """
    a = assembly
    dec = theorem2_decompose(a, z)
    if a.frame is None:
        return dec.alpha_re, dec.alpha_re, 0.0
    part = 0.0
    for k in range(a.n - 1):
        v = type2_v(a, k, path=None if paths is None else paths.get(k))
        om = reconstruct_omega_by_path(a.frame, k, route(a.grid.spec, a.z0, z))
        part += 2 * v.v_path * om
    return dec.alpha_re + part, dec.alpha_re, part


def _offset_contour(grid, k, offset):
    """Nodes and dz weights of curve k pushed ``offset`` along the inward normal."""
    s = grid.sl(k)
    T = grid.T[s]
    dT = diff_t(grid, grid.T)[s]
    z = grid.z[s] + offset * 1j * T
    dzw = (grid.dz[s] + offset * 1j * dT) * grid.weight
    return z, dzw


def theorem3_lambda(assembly: GreenAssembly, k: int, offset=0.0):
    """(1 / i pi) times the contour integral of X over inner curve k.

    ``offset = 0`` uses the boundary samples of S and L directly; a positive
    offset integrates over the curve pushed into the domain, with S and L
    evaluated in the interior.  Both equal lambda_k(w) when w lies beyond
    the shifted contour.
    """
    a, g = assembly, assembly.grid
    if offset == 0:
        s = g.sl(k)
        X = np.pi * a.kernel.S[s] * a.kernel.L[s] / a.kernel.S_diag
        return complex(np.sum(X * g.dzw[s]) / (1j * np.pi))
    z, dzw = _offset_contour(g, k, offset)
    if np.min(np.abs(z - a.w)) < 2 * offset:
        raise GeometryError("source point too close to the shifted contour")
    return complex(np.sum(a.X(z) * dzw) / (1j * np.pi))


def poisson_kernel(assembly: GreenAssembly, i=None):
    """(-i / pi) (eps1 G_z) T at node i (all nodes when i is None)."""
    a = assembly
    P = (-1j / np.pi) * a.eps1 * a.green_z_boundary() * a.grid.T
    return P if i is None else P[i]


def boundary_periods(assembly: GreenAssembly):
    """Contour integral of eps1 G_z over each curve; equals i pi omega_k(w)."""
    a = assembly
    v = a.eps1 * a.green_z_boundary()
    return np.array([a.grid.integrate(v, k) for k in range(a.n)])


def tangential_residual(assembly: GreenAssembly):
    """max |G_z T + conj(G_z T)| on the boundary nodes."""
    q = assembly.green_z_boundary() * assembly.grid.T
    return float(np.max(np.abs(q + np.conj(q))))


class PoissonField:
    """z -> P(z, zeta_i) for a fixed boundary node, harmonic in z.

    2 pi P = 2 Im[T_i / (zeta_i - z)] + h(z): the first term carries the full
    boundary delta at zeta_i, and h clears it everywhere else on the boundary.
    """

    def __init__(self, grid: BoundaryGrid, i: int):
        self.grid, self.i = grid, int(i) % grid.N
        zeta, T = grid.z[self.i], grid.T[self.i]
        diff = zeta - grid.z
        diff[self.i] = 1.0
        data = -2 * np.imag(T / diff)
        q = grid.d2z[self.i] / grid.dz[self.i]
        data[self.i] = -np.imag(q) / np.abs(grid.dz[self.i])
        self.zeta, self.T = zeta, T
        self.h = solve_dirichlet(grid, data)

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        val = (2 * np.imag(self.T / (self.zeta - zz)) + self.h(zz)) / (2 * np.pi)
        return float(val) if zz.ndim == 0 else val


def poisson_field(grid: BoundaryGrid, i: int) -> PoissonField:
    return PoissonField(grid, i)
