"""Weierstrass elliptic functions for the one-parameter rectangular family.

For r in (0, 1] the branch values are

    e3 = -(r + 1/r)/3,   e2 = (2r - 1/r)/3,   e1 = (2/r - r)/3,

with e1 + e2 + e3 = 0, (e1 - e3)(e2 - e3) = 1 and invariants

    g2 = 4/3 (r + 1/r)^2 - 4,   g3 = 8/27 (r + 1/r)^3 - 4/3 (r + 1/r).

The lattice is rectangular: real half-period omega with wp(omega) = e1,
imaginary half-period omega' with wp(omega') = e3.  Both are computed with
the arithmetic-geometric mean,

    omega  = pi / (2 AGM(sqrt(e1 - e3), sqrt(e1 - e2))),
    omega' = i pi / (2 AGM(sqrt(e1 - e3), sqrt(e2 - e3))),

and cross-checked in the tests against direct quadrature of the defining
period integral on nu^2 = -t (t + r)(t + 1/r).  Quasi-periods are
eta = zeta(omega), eta' = zeta(omega'), normalized so that the Legendre
relation reads eta*omega' - eta'*omega = pi i / 2.

Evaluation strategy: truncated Laurent series about 0 after reduction into
the centered period cell, followed by argument doubling with the elliptic
group law (no external special-function dependency).  At r = 1 the lattice
degenerates (omega = inf) and the hyperbolic limits

    wp(z) = 1/3 + 1/sinh^2 z,   zeta(z) = -z/3 + coth z,
    omega' = i pi/2,            eta' = -i pi/6

are used instead.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError

_NC = 56  # Laurent coefficients; plenty for |z|/r_min <= 0.4


def _agm(a, b):
    for _ in range(64):
        if abs(a - b) <= 1e-17 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _series_coeffs(g2, g3):
    """Coefficients c_k of wp(z) = z^-2 + sum_{k>=2} c_k z^(2k-2)."""
    c = np.zeros(_NC + 1)
    c[2] = g2 / 20.0
    c[3] = g3 / 28.0
    for k in range(4, _NC + 1):
        s = 0.0
        for m in range(2, k - 1):
            s += c[m] * c[k - m]
        c[k] = 3.0 * s / ((2 * k + 1) * (k - 3))
    return c


@dataclass(frozen=True)
class EllipticKernel:
    r: float
    e1: float
    e2: float
    e3: float
    g2: float
    g3: float
    omega: float            # real half-period; inf at r = 1
    omega_p: complex        # imaginary half-period
    eta: complex            # zeta(omega); None at r = 1
    eta_p: complex          # zeta(omega')
    coeffs: np.ndarray = None

    @property
    def degenerate(self):
        return not math.isfinite(self.omega)


def kernel_from_r(r):
    """Branch values, invariants, half-periods and quasi-periods at parameter r."""
    if not (0.0 < r <= 1.0):
        raise DomainError(f"r must lie in (0, 1], got {r}")
    s = r + 1.0 / r
    e3 = -s / 3.0
    e2 = (2.0 * r - 1.0 / r) / 3.0
    e1 = (2.0 / r - r) / 3.0
    g2 = (4.0 / 3.0) * s * s - 4.0
    g3 = (8.0 / 27.0) * s ** 3 - (4.0 / 3.0) * s
    if r == 1.0:
        return EllipticKernel(r, e1, e2, e3, g2, g3, math.inf, 0.5j * math.pi,
                              None, -1j * math.pi / 6.0, None)
    omega = math.pi / (2.0 * _agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2)))
    omega_p = 1j * math.pi / (2.0 * _agm(math.sqrt(e1 - e3), math.sqrt(e2 - e3)))
    coeffs = _series_coeffs(g2, g3)
    k = EllipticKernel(r, e1, e2, e3, g2, g3, omega, omega_p, 0j, 0j, coeffs)
    eta = _eval_raw(k, complex(omega))[2]
    eta_p = _eval_raw(k, omega_p)[2]
    object.__setattr__(k, "eta", eta)
    object.__setattr__(k, "eta_p", eta_p)
    return k


def _series_eval(k, z):
    """(wp, wp', zeta) from the Laurent series; valid well inside the cell."""
    c = k.coeffs
    z2 = z * z
    p = 0j
    dp = 0j
    zt = 0j
    # wp: c_m z^(2m-2); wp': (2m-2) c_m z^(2m-3); zeta: -c_m z^(2m-1)/(2m-1)
    zp = z2  # z^(2m-2) for m = 2 -> z^2
    for m in range(2, _NC + 1):
        cm = c[m]
        p += cm * zp
        dp += (2 * m - 2) * cm * zp / z
        zt -= cm * zp * z / (2 * m - 1)
        zp *= z2
        if abs(zp) < 1e-280:
            break
    return p + 1.0 / z2, dp - 2.0 / (z2 * z), zt + 1.0 / z


def _eval_raw(k, z):
    """(wp, wp', zeta) by series plus argument doubling; no lattice reduction."""
    rmin = min(2.0 * k.omega, 2.0 * abs(k.omega_p))
    target = 0.35 * rmin
    for extra in range(4):
        n = max(0, math.ceil(math.log2(max(abs(z), 1e-300) / target))) + extra
        w = z / (1 << n) if n > 0 else z
        p, dp, zt = _series_eval(k, w)
        ok = True
        for _ in range(n):
            if abs(dp) < 1e-9 * (1.0 + abs(p)) ** 1.5:
                ok = False  # doubling through a near-critical point; dither
                break
            m = (6.0 * p * p - 0.5 * k.g2) / dp
            p2 = 0.25 * m * m - 2.0 * p
            dp = -(dp + m * (p2 - p))
            zt = 2.0 * zt + 0.5 * m
            p = p2
        if ok:
            return p, dp, zt
    return p, dp, zt


def _reduce(k, z):
    """Translate into the centered cell; returns (z0, n1, n2)."""
    n2 = round(z.imag / (2.0 * abs(k.omega_p)))
    n1 = round(z.real / (2.0 * k.omega))
    return z - 2.0 * n1 * k.omega - 2.0 * n2 * k.omega_p, n1, n2


def _eval_all(k, z, need_zeta):
    z = complex(z)
    if k.degenerate:
        n = round(z.imag / math.pi)
        z0 = z - 1j * math.pi * n
        if abs(z0) < 1e-8:
            raise PoleError(f"z = {z} is within 1e-8 of a lattice point")
        sh = np.sinh(z)
        p = 1.0 / 3.0 + 1.0 / sh ** 2
        dp = -2.0 * np.cosh(z) / sh ** 3
        zt = -z / 3.0 + np.cosh(z) / sh if need_zeta else 0j
        return p, dp, zt
    z0, n1, n2 = _reduce(k, z)
    if abs(z0) < 1e-8:
        raise PoleError(f"z = {z} is within 1e-8 of a lattice point")
    p, dp, zt = _eval_raw(k, z0)
    if need_zeta:
        zt = zt + 2.0 * n1 * k.eta + 2.0 * n2 * k.eta_p
    return p, dp, zt


def wp(k, z):
    """Weierstrass wp(z)."""
    return _eval_all(k, z, False)[0]


def wp_prime(k, z):
    """Weierstrass wp'(z)."""
    return _eval_all(k, z, False)[1]


def wzeta(k, z):
    """Weierstrass zeta(z) (quasi-periodic)."""
    return _eval_all(k, z, True)[2]


def wp_all(k, z):
    """(wp, wp', zeta) in one evaluation."""
    return _eval_all(k, z, True)


def wp_small(k, z):
    """(wp, wp', zeta) straight from the series; |z| must be well inside the
    cell.  Used for stable evaluation near the poles of derived quantities."""
    if k.degenerate:
        sh = np.sinh(z)
        return (1.0 / 3.0 + 1.0 / sh ** 2,
                -2.0 * np.cosh(z) / sh ** 3,
                -z / 3.0 + np.cosh(z) / sh)
    return _series_eval(k, complex(z))


def domega_p_dr(k):
    """d omega'/dr in closed form: (2 eta' - omega' e3) / (2 (1 - r^2))."""
    if k.degenerate:
        raise DomainError("derivative formula requires r < 1")
    return (2.0 * k.eta_p - k.omega_p * k.e3) / (2.0 * (1.0 - k.r ** 2))


def omega_p_quadrature(r, n=160):
    """omega' by direct quadrature of the period integral on the branch cut.

    With t = u^2 the integrand is smooth:
    omega' = i * 2 * integral_0^1 2 du / sqrt((u^2+r)(u^2+1/r)),
    using the t -> 1/t symmetry to fold [1, inf) onto (0, 1].
    """
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    f = 1.0 / np.sqrt((u * u + r) * (u * u + 1.0 / r))
    return 1j * float(np.sum(w * f))


def legendre_defect(k):
    """|eta*omega' - eta'*omega - i pi/2| (zero in exact arithmetic, r < 1)."""
    if k.degenerate:
        raise DomainError("Legendre relation requires r < 1")
    return abs(k.eta * k.omega_p - k.eta_p * k.omega - 0.5j * math.pi)
