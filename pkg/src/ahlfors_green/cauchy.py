"""Holomorphic functions represented by their boundary traces.

Interior values come from the Cauchy integral.  Far from the boundary the
barycentric form of the trapezoid rule is used on a 4x trigonometrically
upsampled grid.  Within a few node spacings of a curve the trapezoid rule
loses accuracy, so there we continue the trigonometric interpolant of the
trace analytically: solve z_j(tau) = p for complex tau and sum the Fourier
series at tau.  Both routes are spectrally accurate for analytic data.
"""
from __future__ import annotations

import warnings

import numpy as np

from .geometry import BoundaryGrid

NEAR = 0.75      # continuation radius in node spacings; deeper continuation amplifies aliased modes
UPSAMPLE = 4
_CHUNK = 2048


class AccuracyWarning(UserWarning):
    pass


# ---------------------------------------------------------------- spectral

def _per_curve(grid, values):
    v = np.asarray(values)
    return v.reshape(v.shape[:-1] + (grid.n, grid.m))


def diff_t(grid: BoundaryGrid, values):
    """d/dt of each curve's trace (spectral, Nyquist mode dropped)."""
    v = _per_curve(grid, np.asarray(values, dtype=complex))
    k = np.fft.fftfreq(grid.m, 1.0 / grid.m)
    k[grid.m // 2] = 0
    return np.fft.ifft(np.fft.fft(v, axis=-1) * (1j * k), axis=-1).reshape(values.shape)


def trig_coefficients(values_on_curve):
    """Coefficients for modes -m/2..m/2 (Nyquist split evenly)."""
    m = values_on_curve.shape[-1]
    F = np.fft.fft(values_on_curve, axis=-1) / m
    half = m // 2
    c = np.concatenate([F[..., half:], F[..., :half + 1]], axis=-1)
    c[..., 0] *= 0.5
    c[..., -1] = c[..., 0]
    return np.arange(-half, half + 1), c


def trig_eval(modes, coeffs, t):
    t = np.asarray(t)
    return np.exp(1j * np.multiply.outer(t, modes)) @ coeffs


def resample(values_on_curve, M):
    """Trigonometric interpolation of m equispaced samples onto M >= m."""
    m = values_on_curve.shape[-1]
    if M == m:
        return values_on_curve.copy()
    F = np.fft.fft(values_on_curve, axis=-1)
    G = np.zeros(values_on_curve.shape[:-1] + (M,), dtype=complex)
    half = m // 2
    G[..., :half] = F[..., :half]
    G[..., M - half + 1:] = F[..., half + 1:]
    G[..., half] = F[..., half] / 2
    G[..., M - half] = F[..., half] / 2
    return np.fft.ifft(G, axis=-1) * (M / m)


# ------------------------------------------------------------ Cauchy tools

def cauchy_trace(grid: BoundaryGrid, values):
    """Interior boundary limit of the Cauchy integral of ``values``.

    Plemelj with singularity subtraction: the difference quotient
    (v(zeta) - v(z_i)) / (zeta - z_i) is smooth, and its diagonal limit is
    (dv/dt) / z'(t).  For the trace of a holomorphic function this returns
    the values unchanged (up to quadrature error).
    """
    v = np.asarray(values, dtype=complex)
    z, dzw = grid.z, grid.dzw
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    q = (v[None, :] - v[:, None]) / diff * dzw[None, :]
    np.fill_diagonal(q, diff_t(grid, v) * grid.weight)
    return v + q.sum(axis=1) / (2j * np.pi)


def _locate(grid, p):
    """Nearest curve, oriented parameter and distance; exact only where it
    matters (points within a few spacings of the boundary)."""
    h = np.array([grid.spacing(j) for j in range(grid.n)])
    idx = np.empty(p.shape, dtype=int)
    dmin = np.empty(p.shape)
    for s in range(0, p.size, _CHUNK):
        D = np.abs(p[s:s + _CHUNK, None] - grid.z[None, :])
        idx[s:s + _CHUNK] = np.argmin(D, axis=1)
        dmin[s:s + _CHUNK] = D[np.arange(D.shape[0]), idx[s:s + _CHUNK]]
    j = grid.curve[idx]
    t = grid.t[idx]
    d = dmin
    cand = dmin < (NEAR + 1.0) * h[j]
    if np.any(cand):
        jj, tt, dd = grid.nearest(p[cand])
        j[cand], t[cand], d[cand] = jj, tt, dd
    near = d < NEAR * h[j]
    return j, t, d, near


def cauchy_eval(grid: BoundaryGrid, boundary_values, z, method="auto"):
    """Evaluate (1/2 pi i) * contour integral of h(zeta)/(zeta - z) at interior z.

    ``method="trapezoid"`` is the plain rule on the given nodes and warns
    inside its accuracy barrier; ``"auto"`` uses HolomorphicFunction.
    """
    if method == "auto":
        return HolomorphicFunction(grid, boundary_values)(z)
    zz = np.asarray(z, dtype=complex)
    flat = np.atleast_1d(zz).ravel()
    _, _, _, near = _locate(grid, flat)
    if np.any(near):
        warnings.warn("Cauchy evaluation within the near-boundary accuracy barrier",
                      AccuracyWarning, stacklevel=2)
    v = np.asarray(boundary_values, dtype=complex)
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, _CHUNK):
        out[s:s + _CHUNK] = (grid.dzw * v / (grid.z[None, :] - flat[s:s + _CHUNK, None])).sum(1)
    out /= 2j * np.pi
    return out[0] if zz.ndim == 0 else out.reshape(zz.shape)


class HolomorphicFunction:
    """Function holomorphic in the domain apart from finitely many poles.

    ``values`` are boundary samples of the full function; each pole is
    ``(p, coeffs)`` with principal part sum_k coeffs[k] / (z - p)**(k+1).
    """

    def __init__(self, grid: BoundaryGrid, values, poles=()):
        self.grid = grid
        self.values = np.asarray(values, dtype=complex)
        self.poles = [(complex(p), np.atleast_1d(np.asarray(c, dtype=complex)))
                      for p, c in poles]
        self._reg = self.values - self.principal(grid.z)
        self._coef = None
        self._up = None

    def principal(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for p, cs in self.poles:
            for k, c in enumerate(cs):
                out = out + c / (z - p) ** (k + 1)
        return out

    def derivative(self):
        grid = self.grid
        dreg = diff_t(grid, self._reg) / grid.dz
        poles = []
        for p, cs in self.poles:
            d = np.zeros(len(cs) + 1, dtype=complex)
            d[1:] = -np.arange(1, len(cs) + 1) * cs
            poles.append((p, d))
        out = HolomorphicFunction.__new__(HolomorphicFunction)
        out.grid, out.poles = grid, poles
        out._reg, out._coef, out._up = dreg, None, None
        out.values = dreg + out.principal(grid.z)
        return out

    def _coefficients(self):
        if self._coef is None:
            self._modes, self._coef = trig_coefficients(_per_curve(self.grid, self._reg))
        return self._modes, self._coef

    def _upsampled(self):
        if self._up is None:
            g = self.grid
            M = UPSAMPLE * g.m
            t = 2 * np.pi * np.arange(M) / M
            zu = np.concatenate([g.curve_z(j, t) for j in range(g.n)])
            dzu = np.concatenate([g.curve_dz(j, t) for j in range(g.n)]) * (2 * np.pi / M)
            vu = resample(_per_curve(g, self._reg), M).ravel()
            self._up = (zu, dzu, vu)
        return self._up

    def _cauchy(self, p):
        zu, dzu, vu = self._upsampled()
        out = np.empty(p.shape, dtype=complex)
        for s in range(0, p.size, _CHUNK):
            k = dzu / (zu[None, :] - p[s:s + _CHUNK, None])
            out[s:s + _CHUNK] = (k @ vu) / k.sum(axis=1)
        return out

    def _continue(self, j, p, t0):
        g = self.grid
        tau = t0 + (p - g.curve_z(j, t0)) / g.curve_dz(j, t0)
        for _ in range(30):
            step = (g.curve_z(j, tau) - p) / g.curve_dz(j, tau)
            tau = tau - step
            if np.max(np.abs(step)) < 1e-15:
                break
        modes, coef = self._coefficients()
        return trig_eval(modes, coef[j], tau)

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(zz).ravel()
        j, t, _, near = _locate(self.grid, flat)
        out = np.empty(flat.shape, dtype=complex)
        if np.any(~near):
            out[~near] = self._cauchy(flat[~near])
        for k in np.unique(j[near]):
            sel = near & (j == k)
            out[sel] = self._continue(k, flat[sel], t[sel])
        out += self.principal(flat)
        return complex(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)

    def boundary(self, j, t):
        """Trigonometric interpolant of the trace on curve j at parameter t."""
        modes, coef = self._coefficients()
        t = np.asarray(t)
        return trig_eval(modes, coef[j], t) + self.principal(self.grid.curve_z(j, t))
