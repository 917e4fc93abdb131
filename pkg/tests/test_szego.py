import numpy as np
import pytest

from ahlfors_green import geometry as geo
from ahlfors_green.cauchy import AccuracyWarning, HolomorphicFunction, cauchy_eval
from ahlfors_green.geometry import GeometryError
from ahlfors_green.oracle import annulus_szego
from ahlfors_green.szego import (RefinementError, ahlfors, ahlfors_boundary_root, branch_locus,
                                 fit_interpolation_coeffs, interior_samples, solve_szego,
                                 szego_zeros)

TWO_PI = 2 * np.pi


def disc_S(z, w):
    return 1 / (TWO_PI * (1 - np.conj(w) * z))


def disc_L(z, w):
    return 1 / (TWO_PI * (z - w))


# ------------------------------------------------------------- Cauchy


def test_cauchy_of_constant_on_annulus(ann128):
    assert abs(cauchy_eval(ann128, np.ones(ann128.N), 0.75) - 1) < 1e-10


def test_cauchy_of_square_on_circle(disc128):
    assert abs(cauchy_eval(disc128, disc128.z ** 2, 0.5) - 0.25) < 1e-12


def test_cauchy_with_pole_in_hole(ann128):
    g = ann128
    assert abs(cauchy_eval(g, 1 / (g.z - 0.2), 0.75) - 1 / 0.55) < 1e-10


def test_trapezoid_warns_near_boundary(ann128):
    with pytest.warns(AccuracyWarning):
        cauchy_eval(ann128, np.ones(ann128.N), 0.995, method="trapezoid")


def test_near_boundary_continuation_is_accurate(ann128):
    g = ann128
    h = HolomorphicFunction(g, np.exp(g.z) / (g.z - 0.1))
    z = np.array([0.999, 0.5005j, -0.997 + 0.01j, 0.7 * np.exp(2j)])
    assert np.max(np.abs(h(z) - np.exp(z) / (z - 0.1))) < 1e-10


def test_derivative_of_trace(ann128):
    g = ann128
    d = HolomorphicFunction(g, g.z ** 3 + 1 / g.z).derivative()
    z = 0.7 * np.exp(0.4j)
    assert abs(d(z) - (3 * z ** 2 - 1 / z ** 2)) < 1e-9


# -------------------------------------------------------------- kernels


def test_disc_kernel_at_origin(disc128):
    k = solve_szego(disc128, 0)
    assert np.max(np.abs(k.S - 1 / TWO_PI)) < 1e-10


def test_disc_kernel_matches_closed_form(disc128):
    k = solve_szego(disc128, 0.3)
    z = disc128.z
    assert np.max(np.abs(k.S - disc_S(z, 0.3))) < 1e-12
    assert abs(k.S_diag - 1 / (TWO_PI * 0.91)) < 1e-12
    assert abs(k.S_diag - 0.174895) < 1e-6
    assert np.max(np.abs(k.L - disc_L(z, 0.3))) < 1e-12


def test_disc_interior_kernels(disc128):
    w = 0.2 - 0.45j
    k = solve_szego(disc128, w)
    z = np.array([0.1, -0.6 + 0.2j, 0.5j])
    assert np.max(np.abs(k.S_fn(z) - disc_S(z, w))) < 1e-12
    assert np.max(np.abs(k.L_fn(z) - disc_L(z, w))) < 1e-11


@pytest.mark.parametrize("w", [0.75, -0.3 + 0.6j, 0.8j])
def test_annulus_kernel_matches_series_oracle(ann256, w):
    k = solve_szego(ann256, w)
    assert np.max(np.abs(k.S - annulus_szego(0.5, ann256.z, w))) < 1e-12
    assert abs(k.S_diag - annulus_szego(0.5, w, w).real) < 1e-12
    z = np.array([0.6, -0.7j, 0.9 * np.exp(2j)])
    assert np.max(np.abs(k.S_fn(z) - annulus_szego(0.5, z, w))) < 1e-11


def test_boundary_identity_and_positivity(ann256, three256):
    for g, w in [(ann256, 0.75), (three256, -0.1 + 0.6j), (three256, 0.05)]:
        k = solve_szego(g, w)
        assert k.boundary_identity_residual() < 1e-8
        assert k.S_diag > 0


@pytest.mark.parametrize("p", range(6))
def test_reproducing_property(three256, p):
    k = solve_szego(three256, 0.1 - 0.6j)
    assert k.reproducing_residual(three256.z ** p, k.w ** p) < 1e-7


def test_source_errors(ann128):
    with pytest.raises(GeometryError, match="point not in domain"):
        solve_szego(ann128, 0.2)
    with pytest.raises(RefinementError):
        solve_szego(ann128, 0.999)


# -------------------------------------------------------------- Ahlfors


def test_disc_ahlfors_identity(disc128):
    f = ahlfors(disc128, 0)
    assert abs(f(0.5) - 0.5) < 1e-12
    assert abs(f.derivative(0) - 1) < 1e-12


def test_disc_ahlfors_moebius(disc128):
    f = ahlfors(disc128, 0.3)
    z = np.array([0.0, 0.4 + 0.4j, -0.7j])
    assert np.max(np.abs(f(z) - (z - 0.3) / (1 - 0.3 * z))) < 1e-12
    assert abs(f(0) + 0.3) < 1e-12
    assert abs(ahlfors_boundary_root(f, 0) - 1) < 1e-12
    assert branch_locus(f).size == 0


def test_annulus_ahlfors_properties(ann256):
    f = ahlfors(ann256, 0.72)
    assert np.max(np.abs(np.abs(f.values) - 1)) < 1e-8
    assert abs(f.argument_change() - 2 * TWO_PI) < 1e-6
    assert abs(f(0.72)) < 1e-8
    fp = f.derivative(0.72)
    assert abs(fp.imag) < 1e-12 and fp.real > 0
    assert abs(fp / (TWO_PI * f.kernel.S_diag) - 1) < 1e-6
    assert f.log_derivative_residual() < 1e-6
    for j in range(2):
        assert abs(f(ahlfors_boundary_root(f, j)) - 1) < 1e-10


def test_annulus_branch_points_conjugation_symmetric(ann256):
    bl = branch_locus(ahlfors(ann256, 0.72))
    assert bl.size == 2
    d = np.abs(bl[:, None] - np.conj(bl)[None, :]).min(axis=1)
    assert np.max(d) < 1e-8


def test_three_connected_branch_count(three256):
    f = ahlfors(three256, 0.0)
    assert branch_locus(f).size == 4
    assert abs(f.argument_change() - 3 * TWO_PI) < 1e-6


def test_szego_zeros(disc128, ann256, three256):
    assert szego_zeros(disc128, 0.3).size == 0
    zs = szego_zeros(ann256, 0.72)
    k = solve_szego(ann256, 0.72)
    assert zs.size == 1 and abs(k.S_fn(zs[0])) < 1e-8
    zs = szego_zeros(three256, 0.0)
    k = solve_szego(three256, 0.0)
    assert zs.size == 2 and abs(zs[0] - zs[1]) > 1e-3
    assert max(abs(k.S_fn(z)) for z in zs) < 1e-8


def test_annulus_szego_zero_from_series(ann256):
    # the lone zero of S(., 0.72) is on the negative real axis by symmetry
    zs = szego_zeros(ann256, 0.72)
    assert abs(zs[0].imag) < 1e-10 and zs[0].real < 0
    assert abs(annulus_szego(0.5, zs[0], 0.72)) < 1e-10


# ---------------------------------------------------- interpolation


def test_disc_single_coefficient(disc128):
    c = fit_interpolation_coeffs(disc128, 0.0)
    assert c.c.shape == (1, 1)
    assert abs(c.c[0, 0] / TWO_PI - 1) < 1e-8


def test_interpolation_residuals_annulus(ann256):
    c = fit_interpolation_coeffs(ann256, 0.72)
    held = interior_samples(ann256, 24)[1::2]
    assert c.szego_interp_residual(held, stride=4) < 1e-6
    assert c.garabedian_interp_residual(held, stride=4) < 1e-5
    assert c.garabedian_interp_residual(held, stride=4, conjugate=True) < 1e-5


def test_interpolation_coefficients_hermitian(three256):
    c = fit_interpolation_coeffs(three256, 0.0)
    assert np.max(np.abs(c.c - c.c.conj().T)) < 1e-10
    held = interior_samples(three256, 24)[1::2]
    assert c.garabedian_interp_residual(held, stride=4) < 1e-5


def test_szego_interpolation_improves_with_m():
    spec = geo.DomainSpec([geo.CurveSpec.ellipse(0.1, (0.25, 0.15), 0.3, "inner"),
                           geo.CurveSpec.ellipse(0, (1.0, 0.8))])
    res = []
    for m in (64, 128):
        g = geo.discretize(spec, m)
        c = fit_interpolation_coeffs(g, -0.55)
        res.append(c.szego_interp_residual(interior_samples(g, 24)[1::2], stride=4))
    assert res[1] < res[0] or res[1] < 1e-12
