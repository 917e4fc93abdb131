"""Szego and Garabedian kernels, the Ahlfors map and its special points.

Normalization is pinned by the unit disc:
S(z, w) = 1 / (2 pi (1 - conj(w) z)),  L(z, w) = 1 / (2 pi (z - w)),
so that f = S(., a) / L(., a) is the Mobius map with f(a) = 0, f'(a) > 0.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .cauchy import HolomorphicFunction, cauchy_trace
from .geometry import BoundaryGrid, GeometryError, contains, discretize, inside_mask


class SzegoError(RuntimeError):
    pass


class RefinementError(SzegoError):
    """Source point too close to the boundary for the current grid."""


class ZeroLocationError(SzegoError):
    pass


_SOLVERS = weakref.WeakKeyDictionary()


class SzegoSolver:
    """LU-factored Kerzman-Stein system for one grid.

    On the boundary, (I - A) S(., w) = conj(H(w, .)) with the Cauchy kernel
    H(w, z) = T(z) / (2 pi i (z - w)) and the skew-hermitian Kerzman-Stein
    kernel A(z, zeta) = H(z, zeta) - conj(H(zeta, z)), which is smooth with
    A(z, z) = 0 on analytic curves.  (P(I + A) = H for the Szego projection
    P, and H* fixes conj(H(w, .)); taking adjoints gives the sign.)
    """

    def __init__(self, grid: BoundaryGrid):
        self.grid = grid
        z, T, ds = grid.z, grid.T, grid.ds
        diff = z[None, :] - z[:, None]
        np.fill_diagonal(diff, 1.0)
        H = T[None, :] / diff / (2j * np.pi)
        A = H - H.conj().T
        np.fill_diagonal(A, 0.0)
        M = np.eye(grid.N) - A * ds[None, :]
        try:
            self.lu = scipy.linalg.lu_factor(M)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SzegoError(f"singular Kerzman-Stein system (cond={np.linalg.cond(M):.3g})") from exc
        if not np.all(np.isfinite(self.lu[0])) or np.min(np.abs(np.diag(self.lu[0]))) == 0:
            raise SzegoError(f"singular Kerzman-Stein system (cond={np.linalg.cond(M):.3g})")

    def solve_boundary(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        g = self.grid
        rhs = np.conj(g.T[:, None] / (2j * np.pi * (g.z[:, None] - w[None, :])))
        return scipy.linalg.lu_solve(self.lu, rhs)


def szego_solver(grid: BoundaryGrid) -> SzegoSolver:
    if grid not in _SOLVERS:
        _SOLVERS[grid] = SzegoSolver(grid)
    return _SOLVERS[grid]


@dataclass(eq=False)
class KernelSet:
    """Boundary samples of S(., w) and L(., w) for one interior source w."""
    grid: BoundaryGrid
    w: complex
    S: np.ndarray
    L: np.ndarray
    S_diag: float

    @cached_property
    def S_fn(self):
        return HolomorphicFunction(self.grid, self.S)

    @cached_property
    def L_fn(self):
        # pole-subtracted evaluation, the 1/(2 pi (z - w)) part is restored exactly
        return HolomorphicFunction(self.grid, self.L, poles=[(self.w, [1 / (2 * np.pi)])])

    def boundary_identity_residual(self):
        """max |conj(S) - (1/i) L T| with L replaced by its Hardy projection.

        L is built from the identity itself, so the projection (pole part
        plus the interior Cauchy trace of the regular part) is what makes
        this a genuine check that L(., w) - 1/(2 pi (z - w)) is holomorphic.
        """
        g = self.grid
        pole = 1 / (2 * np.pi * (g.z - self.w))
        Lh = cauchy_trace(g, self.L - pole) + pole
        return float(np.max(np.abs(np.conj(self.S) - Lh * g.T / 1j)))

    def reproducing_residual(self, h_values, h_at_w):
        """|sum h(z_i) conj(S(z_i, w)) ds_i - h(w)| for a holomorphic h."""
        return abs(np.sum(h_values * np.conj(self.S) * self.grid.ds) - h_at_w)


def _check_source(grid, w):
    spec = grid.spec
    if not contains(spec, w):
        raise GeometryError("point not in domain")
    j, _, d = spec.nearest(np.array([w]))
    if d[0] <= grid.spacing(int(j[0])):
        raise RefinementError(
            f"source {w} is within one node spacing of the boundary; increase m")


def solve_szego(grid: BoundaryGrid, w) -> KernelSet:
    w = complex(w)
    _check_source(grid, w)
    S = szego_solver(grid).solve_boundary(w)[:, 0]
    L = 1j * np.conj(S) * np.conj(grid.T)
    S_diag = float(np.sum(np.abs(S) ** 2 * grid.ds))
    if not S_diag > 0:
        raise SzegoError("non-positive S(w, w)")
    return KernelSet(grid, w, S, L, S_diag)


def solve_szego_many(grid: BoundaryGrid, ws):
    """Batch version of solve_szego sharing one triangular solve."""
    ws = [complex(w) for w in ws]
    for w in ws:
        _check_source(grid, w)
    S_all = szego_solver(grid).solve_boundary(ws)
    out = []
    for i, w in enumerate(ws):
        S = S_all[:, i]
        L = 1j * np.conj(S) * np.conj(grid.T)
        out.append(KernelSet(grid, w, S, L, float(np.sum(np.abs(S) ** 2 * grid.ds))))
    return out


# ------------------------------------------------------------------ Ahlfors

@dataclass(eq=False)
class AhlforsMap:
    """f = S(., a) / L(., a): proper, degree n, unimodular on the boundary."""
    grid: BoundaryGrid
    a: complex
    kernel: KernelSet
    values: np.ndarray
    fn: HolomorphicFunction = field(repr=False)

    @cached_property
    def dfn(self):
        return self.fn.derivative()

    def __call__(self, z):
        return self.fn(z)

    def derivative(self, z):
        return self.dfn(z)

    def boundary(self, j, t):
        return self.fn.boundary(j, t)

    def argument_change(self):
        """Total change of arg f over the oriented boundary."""
        g = self.grid
        total = 0.0
        for j in range(g.n):
            v = self.values[g.sl(j)]
            total += np.sum(np.angle(np.roll(v, -1) / v))
        return float(total)

    def log_derivative_residual(self):
        """max |(f'/f) T + conj((f'/f) T)| on the boundary."""
        q = self.dfn.values / self.values * self.grid.T
        return float(np.max(np.abs(q + np.conj(q))))


def ahlfors(grid: BoundaryGrid, a, kernel: KernelSet | None = None) -> AhlforsMap:
    kernel = kernel if kernel is not None else solve_szego(grid, a)
    vals = kernel.S / kernel.L
    fn = HolomorphicFunction(grid, vals)
    fp = fn.derivative()(kernel.w)
    # f'(a) = 2 pi S(a, a) > 0 in exact arithmetic; strip round-off phase
    phase = np.conj(fp) / abs(fp)
    if (fp * phase).real <= 0 or abs(phase - 1) > 1e-6:
        raise SzegoError(f"Ahlfors rotation correction failed: f'(a) = {fp}")
    vals = vals * phase
    return AhlforsMap(grid, kernel.w, kernel, vals, HolomorphicFunction(grid, vals))


def ahlfors_boundary_root(f: AhlforsMap, j: int) -> complex:
    """The point z_j on curve j with f(z_j) = 1."""
    g = f.grid
    ang = np.angle(f.values[g.sl(j)])
    nxt = np.roll(ang, -1)
    # arg f increases once through 2 pi along each curve; pick the upward
    # crossing of 0, not the jump at +-pi
    up = np.flatnonzero((ang <= 0) & (nxt > 0) & (nxt - ang < np.pi))
    if up.size != 1:
        raise SzegoError(f"curve {j}: expected one crossing of arg f = 0, found {up.size}")
    i = int(up[0])
    t0, t1 = g.t[g.sl(j)][i], g.t[g.sl(j)][i] + g.weight

    def arg_f(t):
        return float(np.angle(f.boundary(j, t)))
    fa, fb = arg_f(t0), arg_f(t1)
    if fa * fb > 0:
        # root sits on a node to round-off
        t = t0 if abs(fa) < abs(fb) else t1
    else:
        t = brentq(arg_f, t0, t1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return complex(g.curve_z(j, t))


# ------------------------------------------------------------ zero finding

def _power_sums_to_poly(s):
    """Monic polynomial whose roots have power sums s[1..N] (Newton identities)."""
    N = len(s) - 1
    e = np.zeros(N + 1, dtype=complex)
    e[0] = 1
    for k in range(1, N + 1):
        e[k] = sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1)) / k
    return np.array([(-1) ** k * e[k] for k in range(N + 1)])


def zeros_in_domain(g_fn: HolomorphicFunction, dg_fn: HolomorphicFunction, expected=None,
                    polish_steps=60):
    """Zeros (with multiplicity) of a holomorphic function inside the domain.

    Argument-principle moments over the whole boundary,
    s_p = (1/2 pi i) oint zeta^p g'/g dzeta = sum over zeros of zeta^p,
    give the count and a polynomial with the zeros as roots; each root is
    then polished by damped Newton on the Cauchy-evaluated g.
    """
    grid = g_fn.grid
    outer = grid.z[grid.sl(grid.n - 1)]
    c = complex(np.mean(outer))
    R = grid.spec.diameter / 2
    ratio = dg_fn.values / g_fn.values
    count_raw = grid.integrate(ratio) / (2j * np.pi)
    count = int(round(count_raw.real))
    if abs(count_raw - count) > 1e-3:
        raise ZeroLocationError(f"argument principle count {count_raw} is not an integer")
    if expected is not None and count != expected:
        raise ZeroLocationError(f"found {count} zeros, expected {expected}")
    if count == 0:
        return np.zeros(0, dtype=complex)
    zeta = (grid.z - c) / R
    s = [count] + [grid.integrate(zeta ** p * ratio) / (2j * np.pi) for p in range(1, count + 1)]
    roots = c + R * np.roots(_power_sums_to_poly(s))
    polished = []
    for r in roots:
        z = complex(r)
        for _ in range(polish_steps):
            step = g_fn(z) / dg_fn(z)
            if not np.isfinite(step):
                break
            if abs(step) > 0.1 * R:
                step *= 0.1 * R / abs(step)
            z -= step
            if abs(step) < 1e-15 * R:
                break
        polished.append(z)
    return np.array(polished)


def szego_zeros(grid: BoundaryGrid, a, kernel: KernelSet | None = None):
    """The n - 1 zeros of z -> S(z, a) in the domain, required simple and distinct."""
    kernel = kernel if kernel is not None else solve_szego(grid, a)
    zs = zeros_in_domain(kernel.S_fn, kernel.S_fn.derivative(), expected=grid.n - 1)
    tol = 1e-9 * grid.spec.diameter
    for i in range(len(zs)):
        for k in range(i + 1, len(zs)):
            if abs(zs[i] - zs[k]) < max(tol, 1e-6 * grid.spec.diameter):
                raise ZeroLocationError(
                    f"zeros of S(., {a}) are not distinct; choose a different base point")
    return zs


def merge_clusters(points, tol):
    """Snap points closer than ``tol`` to their cluster mean (multiplicity kept)."""
    pts = np.array(points, dtype=complex)
    for i in range(len(pts)):
        close = np.abs(pts - pts[i]) < tol
        pts[close] = np.mean(pts[close])
    return pts


def branch_locus(f: AhlforsMap, refinements=2):
    """Zeros of f' in the domain with multiplicity; there are 2n - 2 of them."""
    expected = 2 * f.grid.n - 2
    for attempt in range(refinements + 1):
        try:
            zs = zeros_in_domain(f.dfn, f.dfn.derivative(), expected=expected)
            return merge_clusters(zs, 1e-9 * f.grid.spec.diameter)
        except ZeroLocationError:
            if attempt == refinements:
                raise
            f = ahlfors(discretize(f.grid.spec, 2 * f.grid.m), f.a)


# ------------------------------------------- interpolation through the Ahlfors map

def interior_samples(grid: BoundaryGrid, count=24, clearance=5.0, avoid=(), rings=24, spokes=20):
    """Deterministic polar sub-grid of interior points away from the boundary
    and at least three node spacings from each point in ``avoid``."""
    spec = grid.spec
    outer = grid.z[grid.sl(grid.n - 1)]
    c = complex(np.mean(outer))
    R = float(np.max(np.abs(outer - c)))
    pts = []
    for r in np.linspace(0.05, 0.97, rings):
        for th in np.linspace(0, 2 * np.pi, spokes, endpoint=False) + 0.37 * r:
            pts.append(c + r * R * np.exp(1j * th))
    pts = np.array(pts)
    # clearance in units of the nearest curve's own node spacing
    keep = np.ones(len(pts), bool)
    for j in range(grid.n):
        zj = grid.z[grid.sl(j)]
        dj = np.min(np.abs(pts[:, None] - zj[None, :]), axis=1)
        keep &= dj > clearance * grid.spacing(j)
    for p in avoid:
        keep &= np.abs(pts - complex(p)) > 3 * grid.spacing()
    pts = pts[keep]
    pts = pts[inside_mask(spec, pts)]
    if len(pts) < count:
        raise SzegoError("not enough interior sample points; refine the grid")
    idx = np.linspace(0, len(pts) - 1, count).round().astype(int)
    return pts[np.unique(idx)]


@dataclass(eq=False)
class InterpolationCoeffs:
    """c_00 and c_jk of the Szego/Garabedian representation in terms of f."""
    grid: BoundaryGrid
    f: AhlforsMap
    points: np.ndarray          # a_0 = a, a_1..a_{n-1}
    c: np.ndarray               # (n, n), c[0, j] = c[j, 0] = 0 for j > 0
    fit_residual: float
    kernels: list = field(repr=False, default_factory=list)

    @property
    def a(self):
        return self.points[0]

    @property
    def zeros(self):
        return self.points[1:]

    def _pairs(self):
        n = len(self.points)
        return [(0, 0)] + [(j, k) for j in range(1, n) for k in range(1, n)]

    def szego_interp_residual(self, ws, stride=1):
        g = self.grid
        zi = np.arange(0, g.N, stride)
        fz = self.f.values[zi]
        worst = 0.0
        for kw in solve_szego_many(g, ws):
            fw = self.f(kw.w)
            rhs = sum(self.c[p, q] * self.kernels[p].S[zi] * np.conj(self.kernels[q].S_fn(kw.w))
                      for p, q in self._pairs())
            worst = max(worst, float(np.max(np.abs(kw.S[zi] * (1 - np.conj(fw) * fz) - rhs))))
        return worst

    def garabedian_interp_residual(self, ws, stride=1, conjugate=False):
        g = self.grid
        zi = np.arange(0, g.N, stride)
        fz = self.f.values[zi]
        cc = np.conj(self.c) if conjugate else self.c
        cc = cc.copy()
        cc[0, 0] = self.c[0, 0]
        worst = 0.0
        for kw in solve_szego_many(g, ws):
            fw = self.f(kw.w)
            inner = sum(cc[p, q] * self.kernels[p].S[zi] * self.kernels[q].L_fn(kw.w)
                        for p, q in self._pairs())
            worst = max(worst, float(np.max(np.abs(kw.L[zi] - fw / (fz - fw) * inner))))
        return worst


def fit_interpolation_coeffs(grid: BoundaryGrid, a, f: AhlforsMap | None = None, zeros=None,
                             n_samples=24, stride=4) -> InterpolationCoeffs:
    """Least-squares fit of the coefficients from sampled (z on boundary, w inside) pairs.

    Even-indexed interior samples are used for the fit; the odd ones are
    held out and reported through ``szego_interp_residual``.
    """
    a = complex(a)
    f = f if f is not None else ahlfors(grid, a)
    zeros = szego_zeros(grid, a, f.kernel) if zeros is None else np.asarray(zeros)
    points = np.concatenate([[a], zeros])
    kernels = [f.kernel] + solve_szego_many(grid, zeros)
    n = len(points)
    pairs = [(0, 0)] + [(j, k) for j in range(1, n) for k in range(1, n)]
    ws = interior_samples(grid, n_samples)
    fit_ws = ws[::2]
    zi = np.arange(0, grid.N, stride)
    fz = f.values[zi]
    rows, rhs = [], []
    for kw in solve_szego_many(grid, fit_ws):
        fw = f(kw.w)
        conjS = [np.conj(kernels[q].S_fn(kw.w)) for q in range(n)]
        rows.append(np.stack([kernels[p].S[zi] * conjS[q] for p, q in pairs], axis=1))
        rhs.append(kw.S[zi] * (1 - np.conj(fw) * fz))
    Amat = np.concatenate(rows)
    b = np.concatenate(rhs)
    if Amat.shape[0] < 3 * len(pairs):
        raise SzegoError("too few sample pairs for the coefficient fit")
    sol, _, rank, sv = np.linalg.lstsq(Amat, b, rcond=None)
    if rank < len(pairs) or sv[-1] < 1e-12 * sv[0]:
        raise SzegoError(f"coefficient fit is rank deficient (cond={sv[0] / sv[-1]:.3g}); "
                         "choose a different base point")
    c = np.zeros((n, n), dtype=complex)
    for (p, q), val in zip(pairs, sol):
        c[p, q] = val
    resid = float(np.max(np.abs(Amat @ sol - b)))
    return InterpolationCoeffs(grid, f, points, c, resid, kernels)
