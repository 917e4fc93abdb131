import json

import numpy as np
import pytest
from scipy.integrate import quad

from ahlfors_green import geometry as geo
from ahlfors_green.geometry import (BoundaryProximityError, CurveSpec, DomainSpec, GeometryError,
                                    contains, discretize, min_boundary_distance)


def test_unit_circle_length():
    g = discretize(geo.disc(), 64)
    assert abs(g.ds.sum() - 2 * np.pi) < 1e-12


def test_ellipse_length_matches_adaptive_quadrature():
    spec = DomainSpec([CurveSpec.ellipse(0, (1.0, 0.5))])
    g = discretize(spec, 128)
    ref, _ = quad(lambda t: np.hypot(np.sin(t), 0.5 * np.cos(t)), 0, 2 * np.pi,
                  epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(g.ds.sum() - ref) < 1e-10


def test_annulus_orientation(ann128):
    g = ann128
    # the inner circle winds -1 about points of its hole and 0 about 0.75
    assert abs(g.winding(0.0, 0) + 1) < 1e-12
    assert abs(g.winding(0.75, 0)) < 1e-12
    assert abs(g.winding(0.75, 1) - 1) < 1e-12
    assert geo.annulus(0.5).winding_number(0.75) == 1


def test_unit_tangents_and_closure(three256):
    g = three256
    assert np.max(np.abs(np.abs(g.T) - 1)) < 1e-15
    for j in range(g.n):
        assert abs(g.integrate(np.ones(g.N), j)) < 1e-13


@pytest.mark.parametrize("p, expected", [(0.75, True), (0.25, False), (2.0, False),
                                         (-0.6j, True), (0.55 + 0.0j, True)])
def test_contains_annulus(p, expected):
    assert contains(geo.annulus(0.5), p) is expected


def test_contains_rejects_boundary_points():
    with pytest.raises(BoundaryProximityError):
        contains(geo.annulus(0.5), 0.5)
    with pytest.raises(BoundaryProximityError):
        contains(geo.disc(), np.exp(0.3j))


def test_contains_just_inside_and_outside():
    spec = geo.annulus(0.5)
    assert contains(spec, 1 - 1e-9)
    assert not contains(spec, 1 + 1e-9)
    assert not contains(spec, 0.5 - 1e-9)


@pytest.mark.parametrize("spec, p, d", [(geo.annulus(0.5), 0.75, 0.25), (geo.disc(), 0.0, 1.0),
                                         (geo.annulus(0.5), 0.6, 0.1)])
def test_min_boundary_distance(spec, p, d):
    assert abs(min_boundary_distance(spec, p) - d) < 1e-12


@pytest.mark.parametrize("k", range(-10, 11))
def test_monomial_contour_integrals(k):
    g = discretize(geo.disc(), 64)
    ref = 2j * np.pi if k == -1 else 0
    assert abs(g.integrate(g.z ** k) - ref) < 1e-10


def test_trapezoid_error_squares_under_doubling():
    # analytic but not entire: the error decays geometrically in m
    spec = DomainSpec([CurveSpec.ellipse(0, (1.0, 0.6))])
    ref, _ = quad(lambda t: np.hypot(np.sin(t), 0.6 * np.cos(t)), 0, 2 * np.pi,
                  epsabs=1e-13, epsrel=1e-13, limit=400)
    e1 = abs(discretize(spec, 8 * 4).ds.sum() - ref)
    e2 = abs(discretize(spec, 16 * 4).ds.sum() - ref)
    assert e2 <= max(e1 ** 2 * 10, 1e-14)


def test_inner_curves_reversed_to_standard_orientation(three256):
    g = three256
    for j in range(g.n):
        area = 0.5 * np.imag(np.sum(np.conj(g.z[g.sl(j)]) * g.dzw[g.sl(j)]))
        assert (area > 0) == (j == g.n - 1)


def test_fourier_curve_round_trip(tmp_path):
    spec = DomainSpec([CurveSpec.circle(0.1, 0.2, "inner"),
                       CurveSpec.fourier({1: 1.0, -2: 0.05j})])
    d = geo.domain_to_dict(spec, 64)
    path = tmp_path / "dom.json"
    path.write_text(json.dumps(d))
    back, m = geo.load_domain_config(path)
    assert m == 64
    t = np.linspace(0, 2 * np.pi, 17)
    for a, b in zip(spec.curves, back.curves):
        assert np.allclose(a.z(t), b.z(t), atol=1e-15)


@pytest.mark.parametrize("curves, msg", [
    ([CurveSpec.circle(0, 1)] * 2, "exactly one outer"),
    ([CurveSpec.circle(0.9, 0.3, "inner"), CurveSpec.circle(0, 1)], "intersect"),
    ([CurveSpec.circle(2, 0.3, "inner"), CurveSpec.circle(0, 1)], "not inside"),
    ([CurveSpec.circle(0, 0.5, "inner"), CurveSpec.circle(0, 0.2, "inner"),
      CurveSpec.circle(0, 1)], "nested"),
    ([CurveSpec.fourier({1: 1.0, 2: 0.5})], "vanishes"),
    ([CurveSpec.fourier({1: 1.0, -3: 0.6})], "not simple"),
])
def test_invalid_domains(curves, msg):
    with pytest.raises(GeometryError, match=msg):
        DomainSpec(curves)


def test_discretize_rejects_small_or_odd_m():
    for m in (16, 33):
        with pytest.raises(GeometryError):
            discretize(geo.disc(), m)


def test_bad_config_entries():
    with pytest.raises(GeometryError):
        geo.domain_from_dict({"curves": [{"kind": "square"}]})
    with pytest.raises(GeometryError):
        geo.domain_from_dict({"curves": [{"kind": "circle", "center": [0, 0]}]})
    with pytest.raises(GeometryError):
        geo.domain_from_dict({})
