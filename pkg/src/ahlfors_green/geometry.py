"""Boundary curves, Nystrom discretization and point/domain predicates.

Every curve is stored as a trigonometric polynomial z(t) = sum_k c_k e^{ikt},
so circles and ellipses are just short Fourier series.  This makes z(t)
entire in t, which the near-boundary evaluator relies on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# proximity tolerance for boundary tests, relative to the curve diameter
BOUNDARY_TOL = 1e-12

_DENSE = 1024  # samples per curve for nearest-point seeding
_CHECK = 400   # polygon size for the self-intersection check


class GeometryError(ValueError):
    """Invalid curve, domain or point."""


class BoundaryProximityError(GeometryError):
    """Point lies on (or numerically on) the boundary."""


@dataclass(eq=False)
class CurveSpec:
    kind: str
    role: str
    modes: np.ndarray
    coeffs: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.role not in ("outer", "inner"):
            raise GeometryError(f"curve role must be 'outer' or 'inner', got {self.role!r}")
        self.modes = np.asarray(self.modes, dtype=int)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    @classmethod
    def circle(cls, center, radius, role="outer"):
        if not radius > 0:
            raise GeometryError("circle radius must be positive")
        center = complex(center)
        return cls("circle", role, [0, 1], [center, radius],
                   {"center": center, "radius": float(radius)})

    @classmethod
    def ellipse(cls, center, semi_axes, rotation=0.0, role="outer"):
        a, b = map(float, semi_axes)
        if not (a > 0 and b > 0):
            raise GeometryError("ellipse semi-axes must be positive")
        rot = np.exp(1j * rotation)
        center = complex(center)
        return cls("ellipse", role, [0, 1, -1],
                   [center, rot * (a + b) / 2, rot * (a - b) / 2],
                   {"center": center, "semi_axes": (a, b), "rotation": float(rotation)})

    @classmethod
    def fourier(cls, coefficients, role="outer"):
        """``coefficients`` maps integer mode k to complex c_k."""
        items = sorted(dict(coefficients).items())
        modes = [int(k) for k, _ in items]
        coeffs = [complex(c) for _, c in items]
        return cls("fourier", role, modes, coeffs, {"coefficients": dict(zip(modes, coeffs))})

    def _series(self, t, order):
        t = np.asarray(t)
        phase = np.exp(1j * np.multiply.outer(t, self.modes))
        return phase @ (self.coeffs * (1j * self.modes) ** order)

    def z(self, t):
        return self._series(t, 0)

    def dz(self, t):
        return self._series(t, 1)

    def d2z(self, t):
        return self._series(t, 2)

    def signed_area(self):
        t = 2 * np.pi * np.arange(_DENSE) / _DENSE
        return 0.5 * np.mean(np.imag(np.conj(self.z(t)) * self.dz(t))) * 2 * np.pi

    def diameter(self):
        zs = self.z(2 * np.pi * np.arange(256) / 256)
        return float(np.max(np.abs(zs[:, None] - zs[None, :])))

    def to_dict(self):
        d = {"kind": self.kind, "role": self.role}
        if self.kind == "circle":
            c = self.params["center"]
            d.update(center=[c.real, c.imag], radius=self.params["radius"])
        elif self.kind == "ellipse":
            c = self.params["center"]
            d.update(center=[c.real, c.imag], semi_axes=list(self.params["semi_axes"]),
                     rotation=self.params["rotation"])
        else:
            d["coefficients"] = [[int(k), float(c.real), float(c.imag)]
                                for k, c in zip(self.modes, self.coeffs)]
        return d


def _polygon_winding(verts, p):
    """Winding numbers of closed polygons ``verts`` (rows) about points ``p``."""
    # signed crossings of the rightward ray from each point
    x0, y0 = verts.real[None, :], verts.imag[None, :]
    nxt = np.roll(verts, -1)
    x1, y1 = nxt.real[None, :], nxt.imag[None, :]
    px, py = p.real[:, None], p.imag[:, None]
    left = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (left > 0)
    down = (y0 > py) & (y1 <= py) & (left < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def _segments_cross(a0, a1, b0, b1):
    """Proper intersection test for segment arrays (broadcasting)."""
    def orient(p, q, r):
        return np.sign(np.imag(np.conj(q - p) * (r - p)))
    o1 = orient(a0, a1, b0)
    o2 = orient(a0, a1, b1)
    o3 = orient(b0, b1, a0)
    o4 = orient(b0, b1, a1)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


@dataclass(eq=False)
class DomainSpec:
    """Ordered boundary curves; the single outer curve is listed last."""
    curves: list

    def __post_init__(self):
        self.curves = list(self.curves)
        if not self.curves:
            raise GeometryError("domain needs at least one curve")
        roles = [c.role for c in self.curves]
        if roles.count("outer") != 1 or roles[-1] != "outer":
            raise GeometryError("exactly one outer curve, listed last, is required")
        self._validate()
        # +1 when the raw parametrization already has the domain on its left
        self.orientation = np.array(
            [(1 if (c.signed_area() > 0) == (c.role == "outer") else -1) for c in self.curves])
        self._diam = self.curves[-1].diameter()

    @property
    def n(self):
        return len(self.curves)

    @property
    def diameter(self):
        return self._diam

    def _validate(self):
        t = 2 * np.pi * np.arange(_CHECK) / _CHECK
        polys = []
        for j, c in enumerate(self.curves):
            speed = np.abs(c.dz(t))
            if np.min(speed) <= 1e-10 * np.max(speed):
                raise GeometryError(f"curve {j}: z'(t) vanishes")
            polys.append(c.z(t))
        starts = np.concatenate(polys)
        ends = np.concatenate([np.roll(p, -1) for p in polys])
        owner = np.repeat(np.arange(len(polys)), _CHECK)
        idx = np.arange(starts.size)
        cross = _segments_cross(starts[:, None], ends[:, None], starts[None, :], ends[None, :])
        same = owner[:, None] == owner[None, :]
        adjacent = same & ((np.abs(idx[:, None] - idx[None, :]) <= 1)
                           | (np.abs(idx[:, None] - idx[None, :]) == _CHECK - 1))
        bad = cross & ~adjacent
        if np.any(bad):
            i, k = np.argwhere(bad)[0]
            if owner[i] == owner[k]:
                raise GeometryError(f"curve {owner[i]} is not simple")
            raise GeometryError(f"curves {owner[i]} and {owner[k]} intersect")
        outer = polys[-1]
        for j, p in enumerate(polys[:-1]):
            if _polygon_winding(outer, p[:1])[0] == 0:
                raise GeometryError(f"inner curve {j} is not inside the outer curve")
            for k, q in enumerate(polys[:-1]):
                if k != j and _polygon_winding(q, p[:1])[0] != 0:
                    raise GeometryError(f"inner curves {j} and {k} are nested")
        for j in range(len(polys)):
            for k in range(j + 1, len(polys)):
                if np.min(np.abs(polys[j][:, None] - polys[k][None, :])) <= 0:
                    raise GeometryError(f"curves {j} and {k} touch")

    def nearest(self, p):
        """Nearest boundary point for each point in ``p``.

        Returns (curve index, raw parameter, distance) arrays.
        """
        p = np.atleast_1d(np.asarray(p, dtype=complex)).ravel()
        best_d = np.full(p.shape, np.inf)
        best_j = np.zeros(p.shape, dtype=int)
        best_t = np.zeros(p.shape)
        for j, c in enumerate(self.curves):
            t, d = _nearest_on_curve(c, p)
            better = d < best_d
            best_d[better], best_j[better], best_t[better] = d[better], j, t[better]
        return best_j, best_t, best_d

    def winding_number(self, p):
        """Total winding number of the oriented boundary about each point."""
        p = np.atleast_1d(np.asarray(p, dtype=complex)).ravel()
        polys, sag = self._polygons()
        total = np.zeros(p.shape, dtype=int)
        for sgn, verts in zip(self.orientation, polys):
            total += sgn * _chunked_winding(verts, p)
        # polygon is unreliable within its sag of the curve: use the side of
        # the nearest boundary point instead (inward normal is i*T)
        j, tt, d = self.nearest(p)
        close = d < max(1e-4 * self.diameter, 4 * sag)
        if np.any(close):
            for i in np.flatnonzero(close):
                c = self.curves[j[i]]
                tangent = self.orientation[j[i]] * c.dz(tt[i])
                inside = np.imag(np.conj(tangent) * (p[i] - c.z(tt[i]))) > 0
                # winding from the other curves is unaffected by the near one
                others = total[i] - self._curve_winding(j[i], p[i])
                if c.role == "outer":
                    total[i] = others + (1 if inside else 0)
                else:
                    total[i] = others + (0 if inside else -1)
        return total

    def _polygons(self):
        """Inscribed polygons fine enough that the chord sag is below 1e-5 diam."""
        if getattr(self, "_poly_cache", None) is None:
            polys, sag = [], 0.0
            probe = 2 * np.pi * np.arange(_DENSE) / _DENSE
            for c in self.curves:
                kappa = np.max(np.abs(c.d2z(probe)))
                n = _DENSE
                while kappa * (2 * np.pi / n) ** 2 / 8 > 1e-5 * self.diameter and n < 64 * _DENSE:
                    n *= 2
                polys.append(c.z(2 * np.pi * np.arange(n) / n))
                sag = max(sag, kappa * (2 * np.pi / n) ** 2 / 8)
            self._poly_cache = (polys, sag)
        return self._poly_cache

    def _curve_winding(self, j, p, t=None):
        verts = self._polygons()[0][j]
        return self.orientation[j] * _polygon_winding(verts, np.array([p]))[0]


def _chunked_winding(verts, p, chunk=512):
    out = np.empty(p.shape, dtype=int)
    for s in range(0, p.size, chunk):
        out[s:s + chunk] = _polygon_winding(verts, p[s:s + chunk])
    return out


def _nearest_on_curve(c, p, iters=30):
    t0 = 2 * np.pi * np.arange(_DENSE) / _DENSE
    samples = c.z(t0)
    t = np.empty(p.shape)
    for s in range(0, p.size, 512):
        t[s:s + 512] = t0[np.argmin(np.abs(samples[None, :] - p[s:s + 512, None]), axis=1)]
    step_cap = 2 * np.pi / _DENSE
    for _ in range(iters):
        r = c.z(t) - p
        d1 = c.dz(t)
        g = np.real(np.conj(r) * d1)
        gp = np.abs(d1) ** 2 + np.real(np.conj(r) * c.d2z(t))
        gp = np.where(gp > 0, gp, np.abs(d1) ** 2)
        dt = np.clip(g / gp, -step_cap, step_cap)
        t = t - dt
        if np.max(np.abs(dt)) < 1e-15:
            break
    return np.mod(t, 2 * np.pi), np.abs(c.z(t) - p)


def min_boundary_distance(spec: DomainSpec, p):
    """Distance from ``p`` to the boundary (scalar in, scalar out)."""
    d = spec.nearest(p)[2]
    return float(d[0]) if np.ndim(p) == 0 else d.reshape(np.shape(p))


def contains(spec: DomainSpec, p):
    """True iff the boundary winds once about ``p``.

    Raises BoundaryProximityError for points within the boundary tolerance.
    """
    scalar = np.ndim(p) == 0
    pa = np.atleast_1d(np.asarray(p, dtype=complex)).ravel()
    d = spec.nearest(pa)[2]
    if np.any(d < BOUNDARY_TOL * spec.diameter):
        raise BoundaryProximityError("point lies on the boundary")
    inside = spec.winding_number(pa) == 1
    return bool(inside[0]) if scalar else inside.reshape(np.shape(p))


def inside_mask(spec: DomainSpec, p):
    """Like contains() but boundary points map to False instead of raising."""
    pa = np.asarray(p, dtype=complex)
    flat = np.atleast_1d(pa).ravel()
    d = spec.nearest(flat)[2]
    ok = d >= BOUNDARY_TOL * spec.diameter
    out = np.zeros(flat.shape, dtype=bool)
    if np.any(ok):
        out[ok] = spec.winding_number(flat[ok]) == 1
    return out.reshape(pa.shape)


@dataclass(eq=False)
class BoundaryGrid:
    """Uniform-parameter nodes on every curve, in standard orientation.

    Arrays are flat over all curves; curve j owns ``slice(j*m, (j+1)*m)``.
    """
    spec: DomainSpec
    m: int
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray
    curve: np.ndarray

    @property
    def n(self):
        return self.spec.n

    @property
    def N(self):
        return self.z.size

    @property
    def weight(self):
        return 2 * np.pi / self.m

    @property
    def T(self):
        return self.dz / np.abs(self.dz)

    @property
    def ds(self):
        return np.abs(self.dz) * self.weight

    @property
    def dzw(self):
        """Complex quadrature weights z'(t_i) * 2pi/m."""
        return self.dz * self.weight

    def sl(self, j):
        return slice(j * self.m, (j + 1) * self.m)

    def spacing(self, j=None):
        if j is None:
            return float(np.max(self.ds))
        return float(np.max(self.ds[self.sl(j)]))

    # oriented parametrization of curve j, valid for complex t
    def curve_z(self, j, t):
        s = self.spec.orientation[j]
        return self.spec.curves[j].z(s * np.asarray(t))

    def curve_dz(self, j, t):
        s = self.spec.orientation[j]
        return s * self.spec.curves[j].dz(s * np.asarray(t))

    def nearest(self, p):
        """(curve, oriented parameter, distance) for each point."""
        j, t, d = self.spec.nearest(p)
        t = np.mod(self.spec.orientation[j] * t, 2 * np.pi)
        return j, t, d

    def integrate(self, values, j=None):
        """Trapezoid approximation of the contour integral of values dz."""
        prod = values * self.dzw
        return prod.sum(axis=-1) if j is None else prod[..., self.sl(j)].sum(axis=-1)

    def winding(self, p, j):
        """Spectral winding number of curve j about p (p well off the curve)."""
        s = self.sl(j)
        return (np.sum(self.dzw[s] / (self.z[s] - p)) / (2j * np.pi)).real


def discretize(spec: DomainSpec, m: int) -> BoundaryGrid:
    if m % 2 or m < 32:
        raise GeometryError("nodes per curve must be even and at least 32")
    base = 2 * np.pi * np.arange(m) / m
    zs, dzs, d2zs = [], [], []
    for s, c in zip(spec.orientation, spec.curves):
        zs.append(c.z(s * base))
        dzs.append(s * c.dz(s * base))
        d2zs.append(c.d2z(s * base))
    grid = BoundaryGrid(spec, m, np.tile(base, spec.n), np.concatenate(zs),
                        np.concatenate(dzs), np.concatenate(d2zs),
                        np.repeat(np.arange(spec.n), m))
    if np.any(np.abs(grid.dz) == 0):
        raise GeometryError("z'(t) vanishes at a node")
    return grid


# ---------------------------------------------------------------- config I/O

def curve_from_dict(d: dict) -> CurveSpec:
    try:
        kind = d["kind"]
        role = d.get("role", "outer")
        if kind == "circle":
            return CurveSpec.circle(complex(*d["center"]), d["radius"], role)
        if kind == "ellipse":
            return CurveSpec.ellipse(complex(*d["center"]), d["semi_axes"],
                                     d.get("rotation", 0.0), role)
        if kind == "fourier":
            return CurveSpec.fourier({int(k): complex(re, im) for k, re, im in d["coefficients"]},
                                     role)
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed curve entry {d!r}: {exc}") from exc
    raise GeometryError(f"unknown curve kind {kind!r}")


def domain_from_dict(d: dict):
    """Parse a domain config; returns (DomainSpec, nodes_per_curve or None)."""
    if "curves" not in d:
        raise GeometryError("domain config needs a 'curves' list")
    spec = DomainSpec([curve_from_dict(c) for c in d["curves"]])
    m = d.get("nodes_per_curve")
    return spec, (int(m) if m is not None else None)


def load_domain_config(path):
    with open(Path(path)) as fh:
        return domain_from_dict(json.load(fh))


def domain_to_dict(spec: DomainSpec, m=None):
    d = {"curves": [c.to_dict() for c in spec.curves]}
    if m is not None:
        d["nodes_per_curve"] = m
    return d


# ------------------------------------------------------------ stock domains

def disc(radius=1.0, center=0j):
    return DomainSpec([CurveSpec.circle(center, radius, "outer")])


def annulus(q):
    """{q < |z| < 1}."""
    if not 0 < q < 1:
        raise GeometryError("annulus modulus must lie in (0, 1)")
    return DomainSpec([CurveSpec.circle(0, q, "inner"), CurveSpec.circle(0, 1, "outer")])


def two_hole_disc():
    """Unit disc with two circular holes (a 3-connected test domain)."""
    return DomainSpec([CurveSpec.circle(0.35 + 0.15j, 0.2, "inner"),
                       CurveSpec.circle(-0.4 - 0.2j, 0.15, "inner"),
                       CurveSpec.circle(0, 1, "outer")])
