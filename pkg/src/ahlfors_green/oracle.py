"""Closed-form references for the unit disc and the annulus {q < |z| < 1}."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import disc
from .paths import PathSpec, integrate_along_path, route

SERIES_TOL = 1e-14
SERIES_CAP = 200


class OracleError(ValueError):
    pass


def disc_green(z, w):
    """-ln|(z - w) / (1 - conj(w) z)| on the unit disc."""
    z, w = np.asarray(z, dtype=complex), complex(w)
    if np.any(np.abs(z - w) == 0):
        raise OracleError("z coincides with w")
    return -np.log(np.abs((z - w) / (1 - np.conj(w) * z)))


def disc_R(z, w, v):
    """R(z, w, v) = -(1 - w v) / (2 (z - w)(1 - v z))."""
    return -(1 - w * v) / (2 * (z - w) * (1 - v * z))


def disc_alpha_path(z, w, path: PathSpec | None = None, tol=1e-13):
    """Re of the integral of 2 R(zeta, w, conj(w)) from 1 to z.

    Without a path, one is routed from 1 around a small disc about w.
    """
    z, w = complex(z), complex(w)
    if path is None:
        r = min(0.05, abs(z - w) / 2, (1 - abs(w)) / 2)
        path = route(disc(), 1.0, z, obstacles=[(w, r)])
    val = integrate_along_path(lambda s: 2 * disc_R(s, w, np.conj(w)), path, tol=tol)
    return float(val.real)


@dataclass(frozen=True)
class AnnulusSpec:
    q: float

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise OracleError("annulus modulus must lie in (0, 1)")


def _product(q, zeta):
    """(1 - zeta) prod_k (1 - q^2k zeta)(1 - q^2k / zeta), truncated at SERIES_TOL."""
    zeta = np.asarray(zeta, dtype=complex)
    out = 1 - zeta
    q2 = q * q
    qk = 1.0
    for k in range(1, SERIES_CAP + 1):
        qk *= q2
        out = out * (1 - qk * zeta) * (1 - qk / zeta)
        if qk * max(np.max(np.abs(zeta)), np.max(1 / np.abs(zeta))) < SERIES_TOL:
            return out
    raise OracleError("annulus product did not converge within the reflection cap")


def annulus_green(q, z, w):
    """Green's function of {q < |z| < 1} by the image product.

    The product over reflections in both circles gives a function vanishing
    on |z| = 1; an alpha ln|z| term, fixed by the value on |z| = q, clears the
    inner circle as well.
    """
    if q > 0.9:
        raise OracleError("modulus above 0.9 is outside the oracle's range")
    AnnulusSpec(q)
    z, w = np.asarray(z, dtype=complex), complex(w)
    if not q < abs(w) < 1 or np.any((np.abs(z) <= q) | (np.abs(z) >= 1)):
        raise OracleError("points must lie inside the annulus")
    if np.any(z == w):
        raise OracleError("z coincides with w")

    def g(x):
        return -np.log(np.abs(_product(q, x / w))) + np.log(np.abs(_product(q, x * np.conj(w))))
    beta = -np.log(abs(w))
    inner = q * w / abs(w)
    alpha = -(g(inner) + beta) / np.log(q)
    return g(z) + alpha * np.log(np.abs(z)) + beta


def annulus_harmonic(q, z):
    """Harmonic measure of the inner circle, ln|z| / ln q."""
    AnnulusSpec(q)
    return np.log(np.abs(np.asarray(z, dtype=complex))) / np.log(q)


def annulus_green_fourier(q, z, w, modes=20000):
    """Independent check by separation of variables in polar coordinates.

    Mode k >= 1 of G is -phi_in(min(r, rho)) phi_out(max(r, rho)) / (k (1 - q^2k))
    with phi_in = r^k - q^2k r^-k and phi_out = r^k - r^-k, which vanish on
    the inner and outer circle; the constant is fixed by the jump -2/rho in
    the radial derivative.  Mode 0 is ln(min/q) ln(max) / ln q.  Terms decay
    like (min/max)^k, so use it for |z| and |w| well apart.
    """
    z, w = complex(z), complex(w)
    r, rho = abs(z), abs(w)
    if r < rho:
        r, rho = rho, r
    th = np.angle(z) - np.angle(w)
    total = np.log(rho / q) * np.log(r) / np.log(q)
    for k in range(1, modes + 1):
        # the same product with every factor bounded by 1
        term = ((rho / r) ** k * (1 - (q / rho) ** (2 * k)) * (1 - r ** (2 * k))
                / (k * (1 - q ** (2 * k))))
        total += term * np.cos(k * th)
        if abs(term) < 1e-17:
            break
    return float(total)


def _mode_cap(q, x):
    """Terms needed for geometric ratio max(|x|, q^2/|x|) to reach 1e-17."""
    ax = np.abs(np.asarray(x))
    rho = max(np.max(ax), np.max(q * q / ax))
    cap = int(np.ceil(np.log(1e-17) / np.log(rho))) + 10
    if cap > 10 ** 6:
        raise OracleError("point too close to the boundary for the series oracle")
    return cap


def _szego_modes(q, x):
    """Two-sided sum of x^k / (2 pi (1 + q^(2k+1))), truncated at SERIES_TOL."""
    x = np.asarray(x, dtype=complex)
    total = 1 / (2 * np.pi * (1 + q)) + 0 * x
    for k in range(1, _mode_cap(q, x)):
        up = x ** k / (2 * np.pi * (1 + q ** (2 * k + 1)))
        down = (q * q / x) ** k / q / (2 * np.pi * (q ** (2 * k - 1) + 1))
        total = total + up + down
        if max(np.max(np.abs(up)), np.max(np.abs(down))) < SERIES_TOL * 1e-2:
            return total
    raise OracleError("Szego series did not converge")


def annulus_szego(q, z, w):
    """S(z, w) on {q < |z| < 1} for arc-length measure.

    The monomials z^k are orthogonal on both circles with squared norm
    2 pi (1 + q^(2k+1)), so S is their normalized kernel sum.
    """
    AnnulusSpec(q)
    z, w = np.asarray(z, dtype=complex), complex(w)
    x = z * np.conj(w)
    if np.any(np.abs(x) >= 1) or np.any(np.abs(x) <= q * q):
        raise OracleError("series needs q^2 < |z w| < 1")
    return _szego_modes(q, x)


def annulus_lambda(q, w):
    """(lambda_inner, lambda_outer) at w from the same series, term by term."""
    AnnulusSpec(q)
    r2 = abs(complex(w)) ** 2
    if not q * q < r2 < 1:
        raise OracleError("w must lie inside the annulus")
    diag = float(_szego_modes(q, r2).real)
    # mass of |S(w, .)|^2 on |z| = q: sum_k r^2k q^(2k+1) / (2 pi (1 + q^(2k+1))^2)
    inner = q / (2 * np.pi * (1 + q) ** 2)
    for k in range(1, _mode_cap(q, r2)):
        up = (r2 * q * q) ** k * q / (2 * np.pi * (1 + q ** (2 * k + 1)) ** 2)
        # k -> -k, with q^(1-2k) factored out of the denominator
        down = (q * q / r2) ** k / q / (2 * np.pi * (q ** (2 * k - 1) + 1) ** 2)
        inner += up + down
        if max(up, down) < SERIES_TOL * 1e-2:
            lam = inner / diag
            return lam, 1 - lam
    raise OracleError("Szego series did not converge")
