"""Paths in the closed domain and adaptive quadrature along them.

A path is a chain of straight segments and circular arcs.  Arcs appear as
detours around exclusion discs (the Green source, branch points of the
Ahlfors map).  ``route`` builds admissible paths automatically: a straight
line when it is clear, otherwise the shortest polyline through a
visibility graph around the holes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .geometry import DomainSpec, GeometryError, inside_mask


class RoutingError(GeometryError):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate, self.error = estimate, error


# ------------------------------------------------------------------ pieces

@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def point(self, s):
        return self.a + (self.b - self.a) * np.asarray(s)

    def deriv(self, s):
        return np.full(np.shape(s), self.b - self.a, dtype=complex)

    @property
    def length(self):
        return abs(self.b - self.a)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    sweep: float      # signed; negative is clockwise

    def point(self, s):
        return self.center + self.radius * np.exp(1j * (self.theta0 + self.sweep * np.asarray(s)))

    def deriv(self, s):
        th = self.theta0 + self.sweep * np.asarray(s)
        return 1j * self.sweep * self.radius * np.exp(1j * th)

    @property
    def length(self):
        return abs(self.sweep) * self.radius


def _detour(a, b, obstacle):
    """Split segment a->b around one disc; returns pieces or None if clear."""
    c, r, side = obstacle
    L = abs(b - a)
    d = (b - a) / L
    rel = np.conj(d) * (c - a)
    s0, h = rel.real, rel.imag
    if abs(h) >= r or s0 + r <= 0 or s0 - r >= L:
        return None
    delta = np.sqrt(r * r - h * h)
    if s0 - delta <= 0 or s0 + delta >= L:
        raise RoutingError(f"path endpoint lies inside the exclusion disc at {c}")
    e1, e2 = a + (s0 - delta) * d, a + (s0 + delta) * d
    t1, t2 = np.angle(e1 - c), np.angle(e2 - c)
    if side > 0:      # pass with the obstacle on the right: clockwise
        sweep = -np.mod(t1 - t2, 2 * np.pi)
    else:
        sweep = np.mod(t2 - t1, 2 * np.pi)
    return [Segment(a, e1), Arc(c, r, t1, sweep), Segment(e2, b)]


@dataclass
class PathSpec:
    """Waypoints joined by straight segments, with circular detours.

    ``obstacles`` holds (center, radius) or (center, radius, side) tuples;
    side +1 passes on the left of the direction of travel, -1 on the
    right, and 0 picks whichever side keeps the path in the domain.
    """
    waypoints: list
    obstacles: list = field(default_factory=list)
    order: int = 16

    def __post_init__(self):
        self.waypoints = [complex(p) for p in self.waypoints]
        if not self.waypoints:
            raise RoutingError("a path needs at least one waypoint")
        obs = []
        for o in self.obstacles:
            c, r = complex(o[0]), float(o[1])
            side = int(o[2]) if len(o) > 2 else 0
            if r <= 0:
                raise RoutingError("exclusion radius must be positive")
            obs.append((c, r, side))
        self.obstacles = obs

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]

    def resolve(self, spec: DomainSpec | None = None):
        """List of Segment/Arc pieces; ``spec`` settles automatic sides."""
        pieces = []
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            if a == b:
                continue
            pieces.extend(self._resolve_segment(a, b, spec))
        return pieces

    def _resolve_segment(self, a, b, spec):
        d = (b - a) / abs(b - a)
        hits = sorted((np.real(np.conj(d) * (o[0] - a)), o) for o in self.obstacles
                      if _detour(a, b, o) is not None)
        pieces, cur = [], a
        for _, (c, r, side) in hits:
            sides = [side] if side else [1, -1]
            for k, sd in enumerate(sides):
                seg = _detour(cur, b, (c, r, sd))
                if seg is None:
                    break
                arc = seg[1]
                if spec is None or len(sides) == 1 or _inside(spec, arc.point(np.linspace(0, 1, 33))):
                    break
                if k == len(sides) - 1:
                    raise RoutingError(f"no admissible side around the exclusion disc at {c}")
            if seg is None:
                continue
            pieces.extend(seg[:2])
            cur = seg[2].a
        pieces.append(Segment(cur, b))
        return [p for p in pieces if p.length > 0]

    def validate(self, spec: DomainSpec, samples=48):
        """Raise RoutingError unless the resolved path lies in the closed
        domain and outside every exclusion disc."""
        pieces = self.resolve(spec)
        s = np.linspace(0, 1, samples)
        pts = np.concatenate([p.point(s) for p in pieces]) if pieces else np.array([self.start])
        tol = 1e-9 * spec.diameter
        d = spec.nearest(pts)[2]
        if not np.all((d <= tol) | inside_mask(spec, pts)):
            raise RoutingError("path leaves the closed domain")
        for c, r, _ in self.obstacles:
            if np.min(np.abs(pts - c)) < r * (1 - 1e-9):
                raise RoutingError(f"path enters the exclusion disc at {c}")
        return pieces

    def polyline(self, spec=None, samples=32):
        """Dense sample of the resolved path (for export and plotting)."""
        s = np.linspace(0, 1, samples)
        pieces = self.resolve(spec)
        return np.concatenate([p.point(s) for p in pieces]) if pieces else np.array([self.start])


def _inside(spec, pts):
    return bool(np.all(inside_mask(spec, pts)))


# --------------------------------------------------------------- quadrature

def integrate_along_path(integrand, path, spec: DomainSpec | None = None,
                         tol=1e-12, max_levels=12):
    """Integral of ``integrand(z) dz`` along a path.

    ``path`` is a PathSpec or a list of pieces.  Each piece is split
    adaptively; an interval is accepted once the n-point Gauss-Legendre
    value agrees with the sum over its two halves.  The integrand is called
    with 1-d complex arrays, one batch per refinement level.
    """
    pieces = path.resolve(spec) if isinstance(path, PathSpec) else list(path)
    order = path.order if isinstance(path, PathSpec) else 16
    if not pieces:
        return 0j
    x, wts = np.polynomial.legendre.leggauss(order)
    x, wts = (x + 1) / 2, wts / 2
    scale = sum(p.length for p in pieces)

    def rule(intervals):
        nodes = [pieces[k].point(lo + (hi - lo) * x) for k, lo, hi in intervals]
        jac = [pieces[k].deriv(lo + (hi - lo) * x) * (hi - lo) for k, lo, hi in intervals]
        fz = np.asarray(integrand(np.concatenate(nodes)), dtype=complex)
        return (fz.reshape(len(intervals), order) * np.array(jac)) @ wts

    todo = [(k, 0.0, 1.0) for k in range(len(pieces))]
    whole = rule(todo)
    total = 0j
    for level in range(max_levels + 1):
        halves = [(k, a, b) for k, lo, hi in todo
                  for a, b in ((lo, (lo + hi) / 2), ((lo + hi) / 2, hi))]
        hv = rule(halves).reshape(len(todo), 2)
        refined = hv.sum(axis=1)
        err = np.abs(refined - whole)
        width = np.array([(hi - lo) * pieces[k].length / scale for k, lo, hi in todo])
        mag = np.maximum(1.0, np.abs(refined))
        # per-interval share of the tolerance, floored at roundoff level
        ok = err <= mag * np.maximum(tol * np.maximum(width, 1e-2), 2e-14)
        total += refined[ok].sum()
        if ok.all():
            return total
        if level == max_levels:
            bad = float(err[~ok].max())
            raise QuadratureError(
                f"path quadrature did not converge (error estimate {bad:.3g})",
                estimate=total + refined[~ok].sum(), error=bad)
        todo = [h for i in np.flatnonzero(~ok) for h in (halves[2 * i], halves[2 * i + 1])]
        whole = hv[~ok].ravel()
    return total


# ------------------------------------------------------------------ routing

def _boundary_polygons(spec, samples=256):
    t = 2 * np.pi * np.arange(samples) / samples
    return [c.z(t) for c in spec.curves]


def _seg_dist(p, a, b):
    """Distances between points p (last axis) and segments ab (leading axes)."""
    a, b = np.asarray(a)[..., None], np.asarray(b)[..., None]
    d = b - a
    dd = np.where(np.abs(d) > 0, np.abs(d) ** 2, 1.0)
    s = np.clip(np.real((p - a) * np.conj(d)) / dd, 0, 1)
    return np.abs(p - (a + s * d))


def _orient(p, q, r):
    return np.sign(np.imag(np.conj(q - p) * (r - p)))


class _Visibility:
    """Polylines through ring points around holes and exclusion discs."""

    def __init__(self, spec, obstacles, margin):
        self.spec, self.obstacles, self.margin = spec, obstacles, margin
        self.polys = _boundary_polygons(spec)
        self.c = np.concatenate(self.polys)
        self.e = np.concatenate([np.roll(v, -1) for v in self.polys])

    def clear(self, a, b, margin=None):
        """Mask of segments a[i] -> b[i] (interior end points assumed) that
        keep the margin from the boundary and miss every exclusion disc."""
        a, b = np.atleast_1d(a), np.atleast_1d(b)
        margin = np.broadcast_to(self.margin if margin is None else margin, a.shape)
        ok = np.ones(a.shape, bool)
        for s in range(0, a.size, 128):
            aa, bb = a[s:s + 128, None], b[s:s + 128, None]
            cross = ((_orient(aa, bb, self.c) * _orient(aa, bb, self.e) < 0)
                     & (_orient(self.c, self.e, aa) * _orient(self.c, self.e, bb) < 0))
            near = _seg_dist(self.c, a[s:s + 128], b[s:s + 128]).min(axis=1) < margin[s:s + 128]
            ok[s:s + 128] = ~(cross.any(axis=1) | near)
        for c, r, _ in self.obstacles:
            ok &= _seg_dist(np.array([c]), a, b)[:, 0] >= r * 1.05
        return ok

    def candidates(self):
        pts = []
        for j, v in enumerate(self.polys[:-1]):
            c = v.mean()
            R = np.max(np.abs(v - c)) + 2.5 * self.margin
            pts.extend(c + R * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16))
        for c, r, _ in self.obstacles:
            pts.extend(c + 1.6 * r * np.exp(2j * np.pi * np.arange(8) / 8))
        outer = self.polys[-1]
        c = outer.mean()
        for rho in (0.3, 0.6, 0.85):
            pts.extend(c + rho * (outer[::32] - c))
        pts = np.array(pts)
        ok = inside_mask(self.spec, pts)
        ok &= self.spec.nearest(pts)[2] > self.margin
        for c, r, _ in self.obstacles:
            ok &= np.abs(pts - c) > 1.05 * r
        return pts[ok]

    def shortest(self, a, b):
        nodes = np.concatenate([[a, b], self.candidates()])
        k = len(nodes)
        i, j = np.triu_indices(k, 1)
        # end points closer to the boundary than the margin get a thinner corridor
        d = self.spec.nearest(nodes)[2]
        ok = self.clear(nodes[i], nodes[j], np.minimum(self.margin, 0.5 * np.minimum(d[i], d[j])))
        W = np.zeros((k, k))
        W[i[ok], j[ok]] = np.abs(nodes[i[ok]] - nodes[j[ok]])
        dist, pred = dijkstra(W, directed=False, indices=0, return_predecessors=True)
        if not np.isfinite(dist[1]):
            raise RoutingError(f"no admissible route from {a} to {b}")
        chain, i = [], 1
        while i != 0:
            chain.append(nodes[i])
            i = pred[i]
        return [a] + chain[::-1]


def _step_inward(spec, p, margin):
    """If p sits on the boundary, the point a margin along the inward normal."""
    j, t, d = spec.nearest(np.array([p]))
    if d[0] > 1e-9 * spec.diameter:
        return None
    c = spec.curves[j[0]]
    tangent = spec.orientation[j[0]] * c.dz(t[0])
    return p + margin * 1j * tangent / abs(tangent)


def route(spec: DomainSpec, start, end, obstacles=(), via=(), margin=None, order=16):
    """Admissible PathSpec from ``start`` to ``end`` through ``via``.

    Consecutive waypoints are joined straight (with detours) when that is
    admissible and by a visibility-graph polyline otherwise.  Boundary end
    points are left along the inward normal.
    """
    start, end = complex(start), complex(end)
    margin = 0.02 * spec.diameter if margin is None else margin
    obs = PathSpec([start], obstacles).obstacles
    anchors = [start, *map(complex, via), end]
    inner = list(anchors)
    head = _step_inward(spec, start, margin)
    tail = _step_inward(spec, end, margin)
    if head is not None:
        inner[0] = head
    if tail is not None:
        inner[-1] = tail
    vis = None
    way = [start] if head is not None else []
    for a, b in zip(inner[:-1], inner[1:]):
        way.append(a)
        trial = PathSpec([a, b], obs, order)
        try:
            trial.validate(spec)
            continue
        except RoutingError:
            pass
        vis = vis or _Visibility(spec, obs, margin)
        way.extend(vis.shortest(a, b)[1:-1])
    way.append(inner[-1])
    if tail is not None:
        way.append(end)
    path = PathSpec(way, obs, order)
    path.validate(spec)
    return path
