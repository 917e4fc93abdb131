"""Dirichlet problems, harmonic measures and the period/basis machinery.

A harmonic function is represented as

    u(z) = Re Phi(z) + sum_k A_k ln|z - c_k|,

where Phi is the Cauchy integral of a real density mu and c_k is a point in
hole k.  Taking real parts of the Plemelj limit gives the second-kind
equation (1/2 + K) mu + sum_k A_k ln|z - c_k| = g with the double-layer
kernel K.  On a multiply connected domain 1/2 + K alone is singular; the
log sources plus the side conditions int_{gamma_k} mu ds = 0 make the
bordered system uniquely solvable.

The complex derivative F' = 2 du/dz = Phi' + sum_k A_k / (z - c_k) is then
a holomorphic function with explicit boundary data, which is what the
period matrix and the u_j basis are built from.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .cauchy import HolomorphicFunction, cauchy_trace
from .geometry import BoundaryGrid
from .paths import PathSpec, integrate_along_path, route
from .szego import KernelSet, solve_szego, solve_szego_many


class DirichletError(RuntimeError):
    pass


def hole_point(grid: BoundaryGrid, j: int) -> complex:
    """A point well inside the region enclosed by inner curve j."""
    zj = grid.z[grid.sl(j)]
    # area centroid (Green's formula), good for star-shaped holes
    dzw = grid.dzw[grid.sl(j)]
    area = np.sum(np.conj(zj) * dzw).imag / 2
    # int z dA = (1/2i) * contour integral of |z|^2 dz
    c = complex(np.sum(np.abs(zj) ** 2 * dzw) / (2j * area)) if area else complex(zj.mean())
    if abs(grid.winding(c, j) + 1) < 0.5:
        return c
    # fallback: deepest point of a sample of the enclosed region
    lo, hi = zj.real.min(), zj.real.max()
    bo, to = zj.imag.min(), zj.imag.max()
    X, Y = np.meshgrid(np.linspace(lo, hi, 41), np.linspace(bo, to, 41))
    P = (X + 1j * Y).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        wind = np.array([grid.winding(p, j) for p in P])
    P = P[np.abs(wind + 1) < 0.5]
    if P.size == 0:
        raise DirichletError(f"could not place a source inside hole {j}")
    d = np.min(np.abs(P[:, None] - zj[None, :]), axis=1)
    return complex(P[np.argmax(d)])


class DirichletSolver:
    """LU-factored bordered double-layer system for one grid."""

    def __init__(self, grid: BoundaryGrid):
        self.grid = grid
        g = grid
        N, nh = g.N, g.n - 1
        self.centers = np.array([hole_point(g, j) for j in range(nh)], dtype=complex)
        diff = g.z[None, :] - g.z[:, None]
        np.fill_diagonal(diff, 1.0)
        K = np.real(g.dzw[None, :] / diff / (2j * np.pi))
        np.fill_diagonal(K, np.imag(g.d2z / g.dz) * g.weight / (4 * np.pi))
        M = np.zeros((N + nh, N + nh))
        M[:N, :N] = 0.5 * np.eye(N) + K
        for k in range(nh):
            M[:N, N + k] = np.log(np.abs(g.z - self.centers[k]))
            M[N + k, g.sl(k)] = g.ds[g.sl(k)]
        try:
            self.lu = scipy.linalg.lu_factor(M)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise DirichletError(f"singular Dirichlet system (cond={np.linalg.cond(M):.3g})") from exc
        if np.min(np.abs(np.diag(self.lu[0]))) < 1e-14 * np.max(np.abs(np.diag(self.lu[0]))):
            raise DirichletError(f"singular Dirichlet system (cond={np.linalg.cond(M):.3g})")

    def solve(self, data):
        """Densities for one or more real data vectors (last axis = nodes)."""
        data = np.asarray(data, dtype=float)
        rhs = np.concatenate([data.T, np.zeros((self.grid.n - 1,) + data.shape[:-1])])
        sol = scipy.linalg.lu_solve(self.lu, rhs)
        return sol[:self.grid.N].T, sol[self.grid.N:].T


_DIRICHLET = weakref.WeakKeyDictionary()


def dirichlet_solver(grid: BoundaryGrid) -> DirichletSolver:
    if grid not in _DIRICHLET:
        _DIRICHLET[grid] = DirichletSolver(grid)
    return _DIRICHLET[grid]


class HarmonicFunction:
    """u = Re Phi + sum_k A_k ln|z - c_k| with its holomorphic derivative."""

    def __init__(self, grid, mu, A, centers):
        self.grid = grid
        self.mu = np.asarray(mu, dtype=float)
        self.A = np.asarray(A, dtype=float)
        self.centers = np.asarray(centers, dtype=complex)
        self.phi = HolomorphicFunction(grid, cauchy_trace(grid, self.mu))

    def _logs(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        for a, c in zip(self.A, self.centers):
            out = out + a * np.log(np.abs(z - c))
        return out

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        val = np.real(self.phi(zz)) + self._logs(zz)
        return float(val) if zz.ndim == 0 else val

    @cached_property
    def boundary_values(self):
        return np.real(self.phi.values) + self._logs(self.grid.z)

    @cached_property
    def fprime(self) -> HolomorphicFunction:
        """2 du/dz as a holomorphic function (poles sit in the holes)."""
        d = self.phi.derivative()
        poles = [(c, [a]) for a, c in zip(self.A, self.centers)]
        return HolomorphicFunction(self.grid, d.values + sum(
            (a / (self.grid.z - c) for a, c in zip(self.A, self.centers)), np.zeros(self.grid.N)),
            poles=poles)

    @cached_property
    def normal_derivative(self):
        """Outward normal derivative on the grid, Re(-i T F')."""
        return np.real(-1j * self.grid.T * self.fprime.values)


def solve_dirichlet(grid: BoundaryGrid, boundary_data) -> HarmonicFunction:
    s = dirichlet_solver(grid)
    mu, A = s.solve(np.asarray(boundary_data, dtype=float))
    return HarmonicFunction(grid, mu, A, s.centers)


# ---------------------------------------------------------------- the frame

@dataclass(eq=False)
class HarmonicFrame:
    """omega_j, F_j', periods, sigma, u_j and mu_j for j = 1..n-1.

    Index j here is zero based (curve j of the grid, inner curves only).
    """
    grid: BoundaryGrid
    omega: list                 # HarmonicFunction per inner curve
    dn_omega: np.ndarray        # (n-1, N) outward normal derivatives
    Fp: np.ndarray              # (n-1, N) boundary samples of F_j'
    P: np.ndarray               # periods P[k, j] = int_{gamma_k} F_j' dz
    sigma: np.ndarray           # sum_m sigma[j, m] P[k, m] = delta_kj
    u: np.ndarray               # (n-1, N) boundary samples of u_j

    @property
    def count(self):
        return len(self.omega)

    @cached_property
    def i_sigma(self):
        """i * sigma, which is real; the imaginary residue is dropped."""
        return np.real(1j * self.sigma)

    def omega_at(self, z, j=None):
        """omega_j(z); j=None gives all n values (the outer one by complement)."""
        z = np.asarray(z, dtype=complex)
        vals = np.array([w(z) for w in self.omega]).reshape((self.count,) + z.shape)
        full = np.concatenate([vals, (1 - vals.sum(axis=0))[None]])
        return full if j is None else full[j]

    def mu_at(self, z, j=None):
        """mu_j(z) = Re(i sum_k sigma_jk omega_k(z))."""
        om = np.asarray(self.omega_at(z))[:-1]
        mu = np.tensordot(self.i_sigma, om, axes=1)
        return mu if j is None else mu[j]

    def Fp_fn(self, j) -> HolomorphicFunction:
        return self.omega[j].fprime

    def u_fn(self, j) -> HolomorphicFunction:
        """u_j as a holomorphic function (poles in the holes)."""
        fns = [w.fprime for w in self.omega]
        vals = sum(self.sigma[j, m] * fns[m].values for m in range(self.count))
        poles = [(p, self.sigma[j, m] * c) for m in range(self.count) for p, c in fns[m].poles]
        return HolomorphicFunction(self.grid, vals, poles=poles)

    def u_periods(self):
        """int_{gamma_k} u_j dz, rows k, columns j (should be the identity)."""
        return np.array([[self.grid.integrate(self.u[j], k) for j in range(self.count)]
                         for k in range(self.count)])

    def period_purity(self):
        return float(np.max(np.abs(self.P.real)) / np.max(np.abs(self.P)))

    def i_sigma_imag(self):
        return float(np.max(np.abs(np.imag(1j * self.sigma))))

    def to_dict(self):
        return {
            "periods": [[[float(p.real), float(p.imag)] for p in row] for row in self.P],
            "sigma": [[[float(s.real), float(s.imag)] for s in row] for row in self.sigma],
            "i_sigma": self.i_sigma.tolist(),
            "i_sigma_max_imag": self.i_sigma_imag(),
            "period_purity": self.period_purity(),
        }


def harmonic_frame(grid: BoundaryGrid) -> HarmonicFrame:
    if grid.n < 2:
        raise ValueError("the harmonic frame needs at least one inner curve")
    nh = grid.n - 1
    data = np.array([(grid.curve == j).astype(float) for j in range(nh)])
    s = dirichlet_solver(grid)
    mus, As = s.solve(data)
    omega = [HarmonicFunction(grid, mus[j], As[j], s.centers) for j in range(nh)]
    dn = np.array([w.normal_derivative for w in omega])
    Fp = 1j * dn * np.conj(grid.T)
    P = np.array([[grid.integrate(Fp[j], k) for j in range(nh)] for k in range(nh)])
    try:
        sigma = np.linalg.inv(P).T
    except np.linalg.LinAlgError as exc:
        raise DirichletError("singular period matrix; the discretization is inadequate") from exc
    u = sigma @ Fp
    return HarmonicFrame(grid, omega, dn, Fp, P, sigma, u)


# ----------------------------------------------------------------- lambda_j

def harmonic_lambda(grid: BoundaryGrid, w=None, kernel: KernelSet | None = None):
    """lambda_j(w) for all n curves: arc-length mass of |S(w, .)|^2 / S(w, w)."""
    k = kernel if kernel is not None else solve_szego(grid, w)
    dens = np.abs(k.S) ** 2 * grid.ds / k.S_diag
    return np.array([dens[grid.sl(j)].sum() for j in range(grid.n)])


def harmonic_lambda_many(grid: BoundaryGrid, ws):
    return np.array([harmonic_lambda(grid, kernel=k) for k in solve_szego_many(grid, ws)])


# ------------------------------------------------- omega_j by path integral

def reconstruct_omega_by_path(frame: HarmonicFrame, j: int, path, tol=1e-12):
    """Re of the integral of F_j' along a path starting on the outer curve.

    ``path`` is a PathSpec, or an end point (routed from the nearest outer
    boundary point).  The real part is omega_j(end) - omega_j(start).
    """
    grid = frame.grid
    spec = grid.spec
    if not isinstance(path, PathSpec):
        z = complex(path)
        jj, t, _ = grid.nearest(np.array([z]))
        start = complex(grid.curve_z(grid.n - 1, np.angle(z)) if jj[0] != grid.n - 1
                        else grid.curve_z(jj[0], t[0]))
        path = route(spec, start, z)
    j_, _, d = spec.nearest(np.array([path.start]))
    if j_[0] != spec.n - 1 or d[0] > 1e-9 * spec.diameter:
        raise ValueError("the path must start on the outer boundary")
    path.validate(spec)
    fp = frame.Fp_fn(j)
    return float(np.real(integrate_along_path(fp, path, spec, tol=tol)))
