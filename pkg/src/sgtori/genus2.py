"""Numerical period lattices on the genus-two spectral curve nu^2 = -lam a(lam).

For a quartic with four distinct simple roots off the unit circle the curve
compactifies to a genus-two surface branched over the roots, 0 and infinity.
Cycles are realized as capsule contours (stadium-shaped tubes around a chord,
bulged onto a circular arc when a forbidden branch point sits on the chord):

    A_i : around the root pair {alpha_i, 1/conj(alpha_i)},
    B_1 : around {0, alpha_1},
    B_2 : around {alpha_1, alpha_2} (or {0, alpha_2} if the chord is blocked).

A_1, A_2, B_1, B_2 span the homology of the compactified curve over Z
(consecutive-cut basis), so the lattice

    Gamma = {w : A-integrals of d ln mu_w vanish, B-periods in 2 pi i Z}

is exactly the period lattice; the generator labels differ from other cycle
conventions by a unimodular change, which the fundamental-domain reduction
removes.  d ln mu_w = b_w(lam)/(2 nu) dlam/lam with the unique

    b_w = w - conj(w) lam^3 + beta1 (lam - lam^2) + i beta2 (lam + lam^2)

whose A-integrals vanish (a real 2x2 linear system; the A-integrals of all
admissible integrands are real, the B-integrals purely imaginary).

Quadrature: per-piece Gauss-Legendre panels, subdivided geometrically so the
panel length stays below half the distance to the nearest branch point, with
the square root tracked by nearest-value continuation along the ordered nodes
and a full panel-doubling self-convergence pass.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (BranchCollisionError, ClassError, ContourError,
                     PathIntegrationError, SingularSystemError)
from .potentials import SpectralClass

_GAUSS_N = 12
_GX, _GW = np.polynomial.legendre.leggauss(_GAUSS_N)


@dataclass(frozen=True)
class HyperCurve:
    """Classified quartic plus the ordered branch points of nu^2 = -lam a."""
    quartic: object
    alpha: tuple          # the two roots inside the unit disc
    partners: tuple       # 1/conj(alpha_i)

    @classmethod
    def from_quartic(cls, q):
        if q.cls is not SpectralClass.M21:
            raise ClassError("period-lattice numerics require four simple "
                             "roots off the unit circle")
        inside = sorted((r for r, _ in q.roots if abs(r) < 1.0),
                        key=lambda z: (abs(z), z.real, z.imag))
        if len(inside) != 2:
            raise ClassError("expected two roots inside the unit disc")
        partners = tuple(1.0 / np.conj(r) for r in inside)
        return cls(q, tuple(inside), partners)

    @classmethod
    def from_roots(cls, roots):
        """Curve from exactly known roots (closer coalescence than the
        companion-matrix classifier can resolve from coefficients)."""
        from .potentials import quartic_from_roots
        roots = [complex(r) for r in roots]
        if any(abs(abs(r) - 1.0) < 1e-12 for r in roots):
            raise ClassError("roots must avoid the unit circle")
        q0 = quartic_from_roots(roots)
        q = type(q0)(q0.a1, q0.a2,
                     roots=tuple((r, 1) for r in roots),
                     cls=SpectralClass.M21)
        inside = sorted((r for r in roots if abs(r) < 1.0),
                        key=lambda z: (abs(z), z.real, z.imag))
        if len(inside) != 2:
            raise ClassError("expected two roots inside the unit disc")
        partners = tuple(1.0 / np.conj(r) for r in inside)
        return cls(q, tuple(inside), partners)

    @property
    def branch_points(self):
        return (0.0 + 0j,) + self.alpha + self.partners

    @property
    def roots(self):
        return self.alpha + self.partners

    def a_of(self, lam):
        return self.quartic(lam)

    def nu_sq(self, lam):
        return -lam * self.quartic(lam)


# --- contours ---------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    th0: float
    th1: float

    def point(self, s):
        th = self.th0 + s * (self.th1 - self.th0)
        return self.center + self.radius * np.exp(1j * th)

    def dpoint(self, s):
        th = self.th0 + s * (self.th1 - self.th0)
        return 1j * self.radius * (self.th1 - self.th0) * np.exp(1j * th)

    @property
    def length(self):
        return self.radius * abs(self.th1 - self.th0)


@dataclass(frozen=True)
class Segment:
    z0: complex
    z1: complex

    def point(self, s):
        return self.z0 + s * (self.z1 - self.z0)

    def dpoint(self, s):
        return (self.z1 - self.z0) * np.ones_like(s)

    @property
    def length(self):
        return abs(self.z1 - self.z0)


@dataclass
class Contour:
    pieces: list
    label: str = ""

    def winding(self, pt, n=4096):
        s = (np.arange(n) + 0.5) / n
        total = 0.0
        for p in self.pieces:
            lam = p.point(s)
            dl = p.dpoint(s) / n
            total += float(np.sum((dl / (lam - pt)).imag))
        return round(total / (2.0 * math.pi))

    def min_distance(self, pts, n=2048):
        s = (np.arange(n) + 0.5) / n
        d = math.inf
        for p in self.pieces:
            lam = p.point(s)
            for pt in pts:
                d = min(d, float(np.min(np.abs(lam - pt))))
        return d


def circle(center, radius):
    return Contour([Arc(complex(center), float(radius), 0.0, 2.0 * math.pi)],
                   "circle")


def _seg_distance(p, q, e):
    """Distance from point e to the segment [p, q]."""
    d = q - p
    t = ((e - p) * np.conj(d)).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(e - (p + t * d))


def _arc_chain_distance(center, radius, th0, th1, e):
    """Distance from e to the arc of angles [th0, th1] (th0 < th1)."""
    ang = cmath.phase(e - center)
    lo, hi = min(th0, th1), max(th0, th1)
    k = math.floor((lo - ang) / (2.0 * math.pi)) + 1
    inside = lo <= ang + 2.0 * math.pi * k <= hi
    if inside:
        return abs(abs(e - center) - radius)
    ds = [abs(e - (center + radius * cmath.exp(1j * th))) for th in (th0, th1)]
    return min(ds)


def _straight_capsule(p, q, w):
    u = (q - p) / abs(q - p)
    n = 1j * u
    a_n = cmath.phase(n)
    return Contour([
        Segment(p - w * n, q - w * n),
        Arc(q, w, a_n - math.pi, a_n),
        Segment(q + w * n, p + w * n),
        Arc(p, w, a_n, a_n + math.pi),
    ], "capsule")


def _arc_capsule(p, q, sagitta, w):
    """Capsule around the circular arc through p, q with the given sagitta."""
    c = q - p
    el = abs(c)
    u = c / el
    n = 1j * u
    s = sagitta
    radius = (el * el / 4.0 + s * s) / (2.0 * abs(s))
    mid = 0.5 * (p + q)
    center = mid - math.copysign(radius - abs(s), s) * n
    th_p = cmath.phase(p - center)
    th_q = cmath.phase(q - center)
    # sweep through the bulge point mid + s*n
    th_m = cmath.phase(mid + s * n - center)
    for k in (-1, 0, 1):
        a, b = th_p, th_q + 2.0 * math.pi * k
        lo, hi = min(a, b), max(a, b)
        km = math.floor((lo - th_m) / (2.0 * math.pi)) + 1
        if lo <= th_m + 2.0 * math.pi * km <= hi and abs(b - a) < 2.0 * math.pi:
            th_q = b
            break
    if th_q < th_p:
        # normalize to an increasing sweep (the caps assume it)
        p, q = q, p
        th_p, th_q = th_q, th_p
    return Contour([
        Arc(center, radius + w, th_p, th_q),
        Arc(q, w, th_q, th_q + math.pi),
        Arc(center, radius - w, th_q, th_p),
        Arc(p, w, th_p + math.pi, th_p + 2.0 * math.pi),
    ], "arc-capsule"), (center, radius, th_p, th_q)


def capsule_around(p, q, excluded, min_width=1e-9):
    """Contour enclosing exactly {p, q}: a straight capsule when the chord is
    clear, otherwise an arc capsule bulged off the blocked chord."""
    p, q = complex(p), complex(q)
    best = None
    d_straight = min((_seg_distance(p, q, e) for e in excluded),
                     default=math.inf)
    cands = []
    if d_straight > min_width / 0.45:
        cands.append(("straight", None, d_straight))
    el = abs(q - p)
    for sag in (0.35 * el, -0.35 * el, 0.6 * el, -0.6 * el, 0.9 * el, -0.9 * el):
        _, geom = _arc_capsule(p, q, sag, 0.0)
        center, radius, th0, th1 = geom
        d = min((_arc_chain_distance(center, radius, th0, th1, e)
                 for e in excluded), default=math.inf)
        cands.append(("arc", sag, d))
    for kind, sag, d in cands:
        if best is None or d > best[2]:
            best = (kind, sag, d)
    kind, sag, d = best
    if d * 0.45 < min_width:
        raise ContourError(
            f"no contour around ({p}, {q}) clears the excluded points")
    w = 0.45 * d
    cont = (_straight_capsule(p, q, w) if kind == "straight"
            else _arc_capsule(p, q, sag, w)[0])
    for pt in (p, q):
        if cont.winding(pt) not in (1, -1):
            raise ContourError("constructed contour misses an included point")
    wind_ref = cont.winding(p)
    if wind_ref == -1:
        cont = reverse_contour(cont)
    for e in excluded:
        if cont.winding(e) != 0:
            raise ContourError("constructed contour encloses an excluded point")
    return cont


def reverse_contour(c):
    rev = []
    for piece in reversed(c.pieces):
        if isinstance(piece, Segment):
            rev.append(Segment(piece.z1, piece.z0))
        else:
            rev.append(Arc(piece.center, piece.radius, piece.th1, piece.th0))
    return Contour(rev, c.label + "-rev")


@dataclass
class CycleSet:
    a1: Contour
    a2: Contour
    b1: Contour
    b2: Contour
    b2_kind: str


def build_cycles(curve):
    """Capsule realizations of A1, A2, B1, B2 for the given curve."""
    bp = list(curve.branch_points)
    a1r, a2r = curve.alpha
    p1, p2 = curve.partners

    def excl(*included):
        return [b for b in bp if all(abs(b - i) > 1e-14 for i in included)]

    a1 = capsule_around(a1r, p1, excl(a1r, p1))
    a1.label = "A1"
    a2 = capsule_around(a2r, p2, excl(a2r, p2))
    a2.label = "A2"
    b1 = capsule_around(0.0, a1r, excl(0.0, a1r))
    b1.label = "B1"
    try:
        b2 = capsule_around(a1r, a2r, excl(a1r, a2r))
        kind = "alpha1-alpha2"
    except ContourError:
        b2 = capsule_around(0.0, a2r, excl(0.0, a2r))
        kind = "0-alpha2"
    b2.label = "B2"
    return CycleSet(a1, a2, b1, b2, kind)


# --- branch-tracked quadrature ----------------------------------------------


def _panelize(piece, branch_points, base_panels):
    """Panel parameter bounds on [0, 1], split until the panel length is at
    most 0.45 of the distance from its midpoint to the nearest branch point."""
    out = []
    stack = [(i / base_panels, (i + 1) / base_panels)
             for i in range(base_panels - 1, -1, -1)]
    total = piece.length
    while stack:
        s0, s1 = stack.pop()
        plen = total * (s1 - s0)
        mid = piece.point(np.array([0.5 * (s0 + s1)]))[0]
        dist = min(abs(mid - b) for b in branch_points)
        if plen > 0.45 * dist and (s1 - s0) > 2.0 ** -26:
            sm = 0.5 * (s0 + s1)
            stack.append((sm, s1))
            stack.append((s0, sm))
        else:
            out.append((s0, s1))
    return out


def _contour_nodes(curve, contour, base_panels):
    """Ordered quadrature nodes (lam, weight*dlam) over the whole contour."""
    lam_all = []
    w_all = []
    for piece in contour.pieces:
        for (s0, s1) in _panelize(piece, curve.branch_points, base_panels):
            s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * _GX
            lam = piece.point(s)
            dl = piece.dpoint(s) * 0.5 * (s1 - s0)
            lam_all.append(lam)
            w_all.append(_GW * dl)
    return np.concatenate(lam_all), np.concatenate(w_all)


def _track_nu(curve, lam, start=None):
    """Continuous branch of nu along the ordered samples."""
    nu2 = curve.nu_sq(lam)
    nu = np.sqrt(nu2)
    if start is not None and abs(nu[0] - start) > abs(nu[0] + start):
        nu[0] = -nu[0]
    for i in range(1, len(nu)):
        if abs(nu[i] - nu[i - 1]) > abs(nu[i] + nu[i - 1]):
            nu[i] = -nu[i]
    return nu


def nu_on_contour(curve, contour, n=2048):
    """Branch-tracked nu along a contour: (lam, nu, sheet_flipped).

    nu is continued by nearest-value selection sample to sample; pointwise
    nu^2 + lam a(lam) = 0 holds exactly by construction.  Contours with even
    branch-point winding must return to the starting sheet (flipped False);
    odd winding flips it.  Inconsistency with the winding count raises
    BranchCollisionError.
    """
    if contour.min_distance(curve.branch_points) < 1e-6:
        raise BranchCollisionError("contour within 1e-6 of a branch point")
    s = (np.arange(n) + 0.5) / n
    lam = np.concatenate([p.point(s) for p in contour.pieces])
    nu = _track_nu(curve, lam)
    total_winding = sum(abs(contour.winding(b)) for b in curve.branch_points)
    back = _continue_one(curve, lam[-1], lam[0], nu[-1])
    rel = abs(nu[0] - back) / max(abs(nu[0]), 1e-300)
    flipped = rel > 1.0
    expect_flip = total_winding % 2 == 1
    if flipped != expect_flip:
        raise BranchCollisionError(
            f"sheet closure ({'flip' if flipped else 'no flip'}) inconsistent "
            f"with winding count {total_winding}")
    if not flipped and rel > 1e-6:
        raise BranchCollisionError(f"sheet closure defect {rel:.2e}")
    return lam, nu, flipped


def _continue_one(curve, lam_from, lam_to, nu_from):
    nu = np.sqrt(curve.nu_sq(np.array([lam_to])))[0]
    if abs(nu - nu_from) > abs(nu + nu_from):
        nu = -nu
    return nu


def contour_integrals(curve, contour, funcs, conv_tol=1e-8, base_panels=4,
                      max_doublings=6, strict=True, min_clearance=1e-6):
    """Integrals of f(lam)/(2 nu lam) dlam for each f, with panel-doubling
    self-convergence.  Returns (values, achieved_change)."""
    if contour.min_distance(curve.branch_points) < min_clearance:
        raise BranchCollisionError(
            f"contour within {min_clearance:.0e} of a branch point")
    prev = None
    panels = base_panels
    for _ in range(max_doublings + 1):
        lam, w = _contour_nodes(curve, contour, panels)
        nu = _track_nu(curve, lam)
        den = 2.0 * nu * lam
        vals = np.array([np.sum(f(lam) / den * w) for f in funcs])
        if prev is not None:
            change = float(np.max(np.abs(vals - prev)
                                  / np.maximum(1.0, np.abs(vals))))
            if change <= conv_tol:
                return vals, change
        prev = vals
        panels *= 2
    if strict:
        raise PathIntegrationError(
            f"contour quadrature did not reach {conv_tol:.1e} "
            f"(last change {change:.2e})")
    return prev, change


# --- the b_w linear system and the period lattice ---------------------------


@dataclass
class BOmega:
    omega: complex
    beta1: float
    beta2: float
    a_residual: float
    condition: float

    def coeffs(self):
        """Coefficients of b_w, lowest power first."""
        w = self.omega
        return np.array([w,
                         self.beta1 + 1j * self.beta2,
                         -self.beta1 + 1j * self.beta2,
                         -np.conj(w)])

    def __call__(self, lam):
        c = self.coeffs()
        return c[0] + c[1] * lam + c[2] * lam ** 2 + c[3] * lam ** 3


_BASIS = (lambda lam: lam - lam ** 2,
          lambda lam: 1j * (lam + lam ** 2))


def _a_integral_rows(curve, cycles, conv_tol, strict=True, min_clearance=1e-6):
    rows = []
    for cyc in (cycles.a1, cycles.a2):
        vals, _ = contour_integrals(
            curve, cyc,
            [_BASIS[0], _BASIS[1], lambda lam: np.ones_like(lam),
             lambda lam: lam ** 3],
            conv_tol=conv_tol, strict=strict, min_clearance=min_clearance)
        rows.append(vals)
    return rows


def solve_b_omega(curve, cycles, omega, conv_tol=1e-9, strict=True,
                  min_clearance=1e-6, _rows=None):
    """The unique admissible cubic whose A-cycle integrals vanish.

    The two basis integrals and the inhomogeneity are real (imaginary parts
    are checked and discarded); beta1, beta2 solve the resulting real 2x2
    system.
    """
    rows = _rows if _rows is not None else _a_integral_rows(
        curve, cycles, conv_tol, strict, min_clearance)
    omega = complex(omega)
    amat = np.empty((2, 2))
    rhs = np.empty(2)
    scale = 0.0
    for i, vals in enumerate(rows):
        p1, p2, c0, c3 = vals
        inhom = omega * c0 - np.conj(omega) * c3
        for v in (p1, p2, inhom):
            scale = max(scale, abs(v))
        amat[i, 0] = p1.real
        amat[i, 1] = p2.real
        rhs[i] = -inhom.real
        imag = max(abs(p1.imag), abs(p2.imag), abs(inhom.imag))
        if strict and imag > 1e-9 * max(1.0, scale):
            raise PathIntegrationError(
                f"A-integrals should be real; imaginary part {imag:.2e}")
    cond = np.linalg.cond(amat)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystemError(f"A-integral matrix condition {cond:.2e}")
    beta = np.linalg.solve(amat, rhs)
    b = BOmega(omega, beta[0], beta[1], 0.0, cond)
    resid, _ = contour_integrals(curve, cycles.a1, [b], conv_tol=conv_tol,
                                 strict=strict, min_clearance=min_clearance)
    resid2, _ = contour_integrals(curve, cycles.a2, [b], conv_tol=conv_tol,
                                  strict=strict, min_clearance=min_clearance)
    b.a_residual = max(abs(resid[0]), abs(resid2[0]))
    if strict and b.a_residual > 1e-9 * max(1.0, abs(omega)):
        raise PathIntegrationError(
            f"A-integral residual {b.a_residual:.2e} after solve")
    return b


def b_period_map(curve, cycles, conv_tol=1e-9, strict=True, min_clearance=1e-6):
    """2x2 real matrix of w -> (B-period / i) for w in {1, i}.

    All B-integrals must be purely imaginary (relative check 1e-8).
    """
    rows = _a_integral_rows(curve, cycles, conv_tol, strict, min_clearance)
    mat = np.empty((2, 2))
    bs = []
    for k, w in enumerate((1.0, 1j)):
        b = solve_b_omega(curve, cycles, w, conv_tol, strict, min_clearance,
                          _rows=rows)
        bs.append(b)
        for j, cyc in enumerate((cycles.b1, cycles.b2)):
            val, _ = contour_integrals(curve, cyc, [b], conv_tol=conv_tol,
                                       strict=strict,
                                       min_clearance=min_clearance)
            v = val[0]
            if strict and abs(v.real) > 1e-8 * max(1.0, abs(v)):
                raise PathIntegrationError(
                    f"B-period not purely imaginary: {v}")
            mat[j, k] = v.imag
    return mat, bs


@dataclass
class PeriodLatticeG2:
    omega1: complex
    omega2: complex
    bperiod_matrix: np.ndarray
    bperiod_residual: float
    condition: float

    def to_json_dict(self):
        return {
            "class": "M2_1",
            "omega1": [self.omega1.real, self.omega1.imag],
            "omega2": [self.omega2.real, self.omega2.imag],
            "bperiod_residual": self.bperiod_residual,
        }


def period_lattice(curve, cycles=None, conv_tol=1e-9, strict=True,
                   min_clearance=1e-6):
    """Lattice generators: preimages of (2 pi i, 0) and (0, 2 pi i) under the
    B-period map."""
    if cycles is None:
        cycles = build_cycles(curve)
    mat, _ = b_period_map(curve, cycles, conv_tol, strict, min_clearance)
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if abs(det) < 1e-12:
        raise SingularSystemError("B-period map numerically singular")
    inv = np.array([[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]]) / det
    g = []
    for target in ((2.0 * math.pi, 0.0), (0.0, 2.0 * math.pi)):
        v = inv @ np.array(target)
        g.append(complex(v[0], v[1]))
    resid = 0.0
    for w, target in zip(g, ((2.0 * math.pi, 0.0), (0.0, 2.0 * math.pi))):
        b = solve_b_omega(curve, cycles, w, conv_tol, strict, min_clearance)
        for j, cyc in enumerate((cycles.b1, cycles.b2)):
            val, _ = contour_integrals(curve, cyc, [b], conv_tol=conv_tol,
                                       strict=strict,
                                       min_clearance=min_clearance)
            resid = max(resid, abs(val[0] - 1j * target[j]))
    if strict and resid > 1e-7 * max(1.0, abs(g[0]), abs(g[1])):
        raise PathIntegrationError(f"B-period residual {resid:.2e}")
    return PeriodLatticeG2(g[0], g[1], mat, resid, float(np.linalg.cond(mat)))


# --- monodromy signs at the roots -------------------------------------------


def _segment_quad(f, z0, z1, n_panels=8):
    """Gauss-Legendre integral of f over [z0, z1] (complex line integral)."""
    total = 0.0 + 0j
    for k in range(n_panels):
        a = z0 + (z1 - z0) * k / n_panels
        b = z0 + (z1 - z0) * (k + 1) / n_panels
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        z = mid + half * _GX
        total += np.sum(_GW * f(z)) * half
    return total


def _avoiding_path(z0, z1, obstacles, clearance):
    """Waypoints from z0 to z1 keeping `clearance` from the obstacles."""
    path = [z0, z1]
    for _ in range(16):
        changed = False
        out = [path[0]]
        for a, b in zip(path, path[1:]):
            worst = None
            for o in obstacles:
                d = _seg_distance(a, b, o)
                if d < clearance and min(abs(o - a), abs(o - b)) > 1e-12:
                    if worst is None or d < worst[0]:
                        worst = (d, o)
            if worst is not None:
                o = worst[1]
                dvec = b - a
                n = 1j * dvec / abs(dvec)
                t = ((o - a) * np.conj(dvec)).real / abs(dvec) ** 2
                foot = a + t * dvec
                side = 1.0 if ((o - foot) * np.conj(n)).real < 0 else -1.0
                out.append(o + side * 2.0 * clearance * n)
                changed = True
            out.append(b)
        path = out
        if not changed:
            break
    return path


def mu_at_roots(curve, lattice, omega, tol=1e-4):
    """Signs of the monodromy eigenvalue at the four roots of the quartic.

    The logarithm is continued from the puncture over lam = 0 (where the
    normalized eigenvalue equals one) along branch-tracked paths to each
    root; admissible lattice vectors give ln mu in i pi Z at every root.
    Returns (signs, deviations) with signs in {+1, -1}.
    """
    near = min(abs(omega - (m * lattice.omega1 + n * lattice.omega2))
               for m in range(-6, 7) for n in range(-6, 7))
    if near > 1e-6 * max(1.0, abs(omega)):
        raise PathIntegrationError("omega is not a lattice vector")
    cycles = build_cycles(curve)
    b = solve_b_omega(curve, cycles, omega)
    roots = curve.roots
    sep = min(min(abs(r - s) for s in roots if s is not r) for r in roots)
    rho = min(0.1 * sep, 0.05)

    a_coeffs = curve.quartic.coeffs()       # highest power first
    a_der_coeffs = np.polyder(a_coeffs)

    def a_val(lam):
        return np.polyval(a_coeffs, lam)

    def a_der(lam):
        return np.polyval(a_der_coeffs, lam)

    # base point: |lam0| = 0.04 in the direction farthest from the roots
    best_dir, best_d = None, -1.0
    for k in range(16):
        d = cmath.exp(2j * math.pi * (k + 0.5) / 16)
        dist = min(_seg_distance(0.0, 0.12 * d, r) for r in roots)
        if dist > best_d:
            best_dir, best_d = d, dist
    lam0 = 0.04 * best_dir
    w0 = cmath.sqrt(lam0)

    bc = b.coeffs()

    def b_val(lam):
        return bc[0] + bc[1] * lam + bc[2] * lam ** 2 + bc[3] * lam ** 3

    def dh(wv):
        lam = wv * wv
        av = a_val(lam)
        s = np.sqrt(av)
        # branch: continuous from s(0) = 1; safe while Re stays positive
        s = np.where(s.real < 0, -s, s)
        br = b_val(lam) + omega * (a_der(lam) * lam - av)
        return -1j * br / (s * wv * wv)

    results = []
    devs = []
    for root in roots:
        s_w = cmath.sqrt(a_val(np.array([lam0]))[0])
        if s_w.real < 0:
            s_w = -s_w
        ln_mu = 1j * omega * s_w / w0 + _segment_quad(dh, 0.0, w0, 16)
        nu_here = 1j * w0 * s_w
        # waypoint path to the approach point of this root
        approach = root + rho * (lam0 - root) / abs(lam0 - root)
        obstacles = [r for r in roots if r is not root] + [0.0]
        wp = _avoiding_path(lam0, approach, obstacles, min(0.3 * abs(root), 0.4 * sep))
        for z0, z1 in zip(wp, wp[1:]):
            npan = max(8, int(8 * abs(z1 - z0) / rho))
            npan = min(npan, 400)
            for k in range(npan):
                a = z0 + (z1 - z0) * k / npan
                bseg = z0 + (z1 - z0) * (k + 1) / npan
                mid = 0.5 * (a + bseg)
                half = 0.5 * (bseg - a)
                z = mid + half * _GX
                order = np.argsort(_GX)
                z_ord = z[order]
                nu = _track_nu(curve, np.concatenate([[a], z_ord, [bseg]]),
                               start=nu_here)
                nu_nodes = np.empty_like(z)
                nu_nodes[order] = nu[1:-1]
                ln_mu += np.sum(_GW * b_val(z) / (2.0 * nu_nodes * z) * half)
                nu_here = nu[-1]
        # final leg in the u = sqrt(lam - root) coordinate
        rest_roots = [r for r in roots if r is not root]

        def t_branch(u, match=None):
            lam = root + u * u
            rest = -lam * np.prod([lam - r for r in rest_roots], axis=0)
            tv = np.sqrt(rest)
            if match is not None:
                if abs(tv.flat[0] - match) > abs(tv.flat[0] + match):
                    tv = -tv
            return tv

        u1 = cmath.sqrt(approach - root)
        t_match = nu_here / u1
        for k in range(24):
            a_u = u1 * (1.0 - k / 24)
            b_u = u1 * (1.0 - (k + 1) / 24)
            mid = 0.5 * (a_u + b_u)
            half = 0.5 * (b_u - a_u)
            u = mid + half * _GX
            tv = t_branch(u, match=t_match)
            lam = root + u * u
            ln_mu += np.sum(_GW * b_val(lam) / (tv * lam) * half)
            t_match = tv[np.argmax(np.abs(u - a_u))]
        k_img = ln_mu.imag / math.pi
        k_round = round(k_img)
        dev = abs(ln_mu - 1j * math.pi * k_round)
        if dev > tol:
            raise PathIntegrationError(
                f"ln mu at root {root} is {ln_mu}, not in i pi Z (dev {dev:.2e})")
        results.append(1 if k_round % 2 == 0 else -1)
        devs.append(dev)
    return results, devs
