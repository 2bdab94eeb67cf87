"""Commuting flows on the potential space, the frame ODE and the reduced flow.

The two vector fields are the commutator flows

    d zeta/dx = [zeta, U(zeta)],    d zeta/dy = [zeta, V(zeta)],

written out on the parameters (alpha, beta, gamma):

    d alpha/dx = (g^2 - g^-2) + beta*g - conj(beta)/g
    d beta /dx = -2 alpha g + 2 conj(alpha)/g - (alpha - conj(alpha)) beta
    d gamma/dx = -(alpha + conj(alpha)) g
    d alpha/dy = i (-(g^2 - g^-2) + beta*g - conj(beta)/g)
    d beta /dy = 2i (alpha g + conj(alpha)/g) - i (alpha + conj(alpha)) beta
    d gamma/dy = i (conj(alpha) - alpha) g

The quartic coefficients a1, a2 are conserved.  The frame F solves
dF = F (U dx + V dy), F(0,0) = 1, with det F = 1 (renormalized each step).

Conformal-coordinate convention: the flow parameters (x, y) are related to
the conformal coordinate of the induced surface by z_conf = 2 z, so u = ln
gamma satisfies u_xx + u_yy = -8 sinh 2u along the flow, equivalently
(1/4)(u_xx + u_yy) + 2 sinh 2u = 0.  sinh_gordon_residual measures the
latter.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import GridTooSmallError, StepCollapseError
from .potentials import Potential, spectral_poly, u_matrix, v_matrix


def lax_vector_fields(p):
    """Tangents ((da, db, dg) along x, (da, db, dg) along y) at a potential."""
    y = _pack(p, np.empty(0, complex))
    outx = np.empty_like(y)
    outy = np.empty_like(y)
    kernels.rhs(y, 1.0, 0.0, np.empty(0, complex), outx)
    kernels.rhs(y, 0.0, 1.0, np.empty(0, complex), outy)
    return ((outx[0], outx[1], outx[2].real),
            (outy[0], outy[1], outy[2].real))


def bracket_matrices(p, lam):
    """([zeta, U], [zeta, V]) at a spectral value, for cross-checks."""
    from .potentials import eval_zeta
    z = eval_zeta(p, lam)
    u = u_matrix(p, lam)
    v = v_matrix(p, lam)
    return z @ u - u @ z, z @ v - v @ z


def _pack(p, frames):
    y = np.empty(3 + frames.size, complex)
    y[0] = p.alpha
    y[1] = p.beta
    y[2] = p.gamma
    if frames.size:
        y[3:] = frames
    return y


def _unpack_potential(y):
    return Potential(complex(y[0]), complex(y[1]), float(y[2].real))


# local-error targets are set a factor below the requested drift tolerance so
# that accumulation over unit-length paths stays within it
_TOL_CALIBRATION = 0.15


def _drive(y, dx, dy, lambdas, rtol, atol, renorm):
    length = float(np.hypot(dx, dy))
    if length == 0.0:
        return
    status, _, hmin = kernels.drive(y, dx / length, dy / length, length,
                                    lambdas, rtol * _TOL_CALIBRATION,
                                    atol * _TOL_CALIBRATION, renorm)
    if status == kernels.STEP_COLLAPSE:
        raise StepCollapseError(f"step size collapsed to {hmin:.2e}")


@dataclass
class FlowResult:
    """States along a waypoint path, with the conserved-quantity drift."""
    points: list                # (x, y) visited, starting at (0, 0)
    states: list                # Potential at each point
    drift_a1: float
    drift_a2: float


def integrate_flow(p0, path, tol=1e-10):
    """Integrate the commuting flows along straight segments between waypoints.

    `path` is a list of (x, y) targets relative to the start.  Adaptive
    embedded Runge-Kutta with relative tolerance `tol`; steps that would push
    gamma through 0 are rejected and halved.  The reported drift is the
    largest deviation of (a1, a2) over all waypoints.
    """
    q0 = spectral_poly(p0)
    pts = [(0.0, 0.0)]
    states = [p0]
    y = _pack(p0, np.empty(0, complex))
    cx, cy = 0.0, 0.0
    d1 = d2 = 0.0
    none = np.empty(0, complex)
    for (tx, ty) in path:
        _drive(y, tx - cx, ty - cy, none, tol, tol * 1e-2, False)
        cx, cy = tx, ty
        p = _unpack_potential(y)
        q = spectral_poly(p)
        d1 = max(d1, abs(q.a1 - q0.a1))
        d2 = max(d2, abs(q.a2 - q0.a2))
        pts.append((tx, ty))
        states.append(p)
    return FlowResult(pts, states, d1, d2)


@dataclass
class Trajectory:
    """Potential states on a rectangular (x, y) lattice."""
    x0: float
    y0: float
    hx: float
    hy: float
    states: list                 # states[j][i] at (x0 + i*hx, y0 + j*hy)
    drift_a1: float
    drift_a2: float

    @property
    def nx(self):
        return len(self.states[0])

    @property
    def ny(self):
        return len(self.states)

    def gamma_grid(self):
        return np.array([[p.gamma for p in row] for row in self.states])

    def drift_grid(self):
        """Per-node (|delta a1|, |delta a2|) relative to the first node."""
        q0 = spectral_poly(self.states[0][0])
        d1 = np.empty((self.ny, self.nx))
        d2 = np.empty((self.ny, self.nx))
        for j, row in enumerate(self.states):
            for i, p in enumerate(row):
                q = spectral_poly(p)
                d1[j, i] = abs(q.a1 - q0.a1)
                d2[j, i] = abs(q.a2 - q0.a2)
        return d1, d2

    def to_csv(self, fh):
        fh.write("x,y,re_alpha,im_alpha,re_beta,im_beta,gamma\n")
        for j, row in enumerate(self.states):
            for i, p in enumerate(row):
                x = self.x0 + i * self.hx
                y = self.y0 + j * self.hy
                fh.write(f"{x:.17g},{y:.17g},{p.alpha.real:.17g},"
                         f"{p.alpha.imag:.17g},{p.beta.real:.17g},"
                         f"{p.beta.imag:.17g},{p.gamma:.17g}\n")


def trajectory_grid(p0, x0, y0, nx, ny, hx, hy, tol=1e-10):
    """Flow p0 onto a rectangular lattice (column-by-column integration)."""
    q0 = spectral_poly(p0)
    none = np.empty(0, complex)
    y = _pack(p0, none)
    _drive(y, x0, y0, none, tol, tol * 1e-2, False)
    rows = [[None] * nx for _ in range(ny)]
    d1 = d2 = 0.0
    col = y.copy()
    for j in range(ny):
        if j > 0:
            _drive(col, 0.0, hy, none, tol, tol * 1e-2, False)
        y = col.copy()
        for i in range(nx):
            if i > 0:
                _drive(y, hx, 0.0, none, tol, tol * 1e-2, False)
            p = _unpack_potential(y)
            rows[j][i] = p
        q = spectral_poly(rows[j][-1])
        d1 = max(d1, abs(q.a1 - q0.a1))
        d2 = max(d2, abs(q.a2 - q0.a2))
    return Trajectory(x0, y0, hx, hy, rows, d1, d2)


@dataclass
class FrameGrid:
    """Frames F(x, y; lambda) on a lattice, co-integrated with the potential."""
    x0: float
    y0: float
    hx: float
    hy: float
    lambda_samples: np.ndarray
    frames: np.ndarray           # shape (ny, nx, n_lambda, 2, 2)
    states: list                 # Potential per node


def default_lambda_samples(extra=()):
    th = np.arange(16) * (2.0 * np.pi / 16.0)
    return np.concatenate([np.exp(1j * th), np.asarray(extra, complex)])


def integrate_frame(p0, grid, lambda_samples=None, tol=1e-10):
    """Integrate dF = F(U dx + V dy) over a rectangular grid.

    `grid` is (x0, y0, nx, ny, hx, hy).  The potential is co-integrated (U, V
    depend on the flowing zeta); det F is renormalized to 1 after every
    accepted step.  F(0,0) = identity regardless of the grid origin.
    """
    x0, y0, nx, ny, hx, hy = grid
    lams = (default_lambda_samples() if lambda_samples is None
            else np.asarray(lambda_samples, complex))
    nl = lams.size
    eye = np.tile(np.eye(2, dtype=complex).ravel(), nl)
    y = _pack(p0, eye)
    _drive(y, x0, y0, lams, tol, tol * 1e-2, True)
    frames = np.empty((ny, nx, nl, 2, 2), complex)
    states = [[None] * nx for _ in range(ny)]
    col = y.copy()
    for j in range(ny):
        if j > 0:
            _drive(col, 0.0, hy, lams, tol, tol * 1e-2, True)
        y = col.copy()
        for i in range(nx):
            if i > 0:
                _drive(y, hx, 0.0, lams, tol, tol * 1e-2, True)
            frames[j, i] = y[3:].reshape(nl, 2, 2)
            states[j][i] = _unpack_potential(y)
    return FrameGrid(x0, y0, hx, hy, lams, frames, states)


def frame_at(p0, x, y, lambda_samples, tol=1e-10, waypoints=None):
    """(F(x, y; lambda_k), flowed potential) along a straight segment or a
    waypoint path from the origin."""
    lams = np.asarray(lambda_samples, complex)
    eye = np.tile(np.eye(2, dtype=complex).ravel(), lams.size)
    st = _pack(p0, eye)
    cx = cy = 0.0
    for (tx, ty) in (waypoints or []) + [(x, y)]:
        _drive(st, tx - cx, ty - cy, lams, tol, tol * 1e-2, True)
        cx, cy = tx, ty
    return st[3:].reshape(lams.size, 2, 2), _unpack_potential(st)


def monodromy(p0, omega, lambda_samples, tol=1e-10):
    """Frame value after one lattice translation omega = (x, y) or complex."""
    if np.iscomplexobj(omega) or isinstance(omega, complex):
        omega = complex(omega)
        x, y = omega.real, omega.imag
    else:
        x, y = omega
    F, p_end = frame_at(p0, x, y, lambda_samples, tol)
    return F, p_end


def sinh_gordon_residual(traj, coordinate_scale=2.0):
    """Max interior residual of the elliptic sinh-Gordon equation on u = ln gamma.

    The 5-point Laplacian is taken in the conformal coordinate
    z_conf = coordinate_scale * z_flow (default 2, the normalization in which
    the flows sweep out a conformally immersed surface), so the residual is

        | Lap_5(u) / scale^2 + 2 sinh(2u) |   ->  O(h^2).
    """
    g = traj.gamma_grid()
    if g.shape[0] < 3 or g.shape[1] < 3:
        raise GridTooSmallError("need at least a 3x3 grid for the stencil")
    u = np.log(g)
    s2 = coordinate_scale ** 2
    lap = ((u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / traj.hx ** 2
           + (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / traj.hy ** 2)
    res = lap / s2 + 2.0 * np.sinh(2.0 * u[1:-1, 1:-1])
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class Genus1State:
    """Reduced potential data (alpha_hat real, beta_hat positive)."""
    alpha_hat: float
    beta_hat: float

    def __post_init__(self):
        if not self.beta_hat > 0.0:
            raise ValueError("beta_hat must be positive")

    @property
    def a1_hat(self):
        return self.alpha_hat ** 2 + self.beta_hat ** 2 + self.beta_hat ** -2


@dataclass
class Genus1Orbit:
    """Dense record of the reduced flow: y-values, states and derivatives."""
    y: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    final: Genus1State


def genus1_flow(s0, y_span, tol=1e-10, max_step=0.02):
    """Integrate the reduced flow d alpha/dy = 2(b^-2 - b^2), d beta/dy = 2ab.

    The x-direction acts trivially on the state.  Returns a Genus1Orbit with
    a dense record of every accepted step (cubic Hermite data for
    interpolation; derivative values follow from the right-hand side).
    """
    cap = max(256, int(4 * abs(y_span) / max_step) + 64)
    for _ in range(6):
        rec_t = np.empty(cap)
        rec_a = np.empty(cap)
        rec_b = np.empty(cap)
        state = np.array([s0.alpha_hat, s0.beta_hat])
        status, m = kernels.genus1_drive(state, float(y_span), tol, tol * 1e-2,
                                         rec_t, rec_a, rec_b, max_step)
        if status == kernels.STEP_COLLAPSE:
            raise StepCollapseError("reduced flow step collapsed")
        if m < cap:
            return Genus1Orbit(rec_t[:m].copy(), rec_a[:m].copy(),
                               rec_b[:m].copy(),
                               Genus1State(state[0], state[1]))
        cap *= 4
    raise StepCollapseError("dense record overflow")


def genus1_period(s0, tol=1e-12):
    """Period of the closed reduced-flow orbit through s0.

    Detected from the two zero crossings of alpha_hat (the turning points of
    beta_hat), refined by bisection on the interpolated record.
    """
    if abs(s0.alpha_hat) < 1e-14 and abs(s0.beta_hat - 1.0) < 1e-14:
        raise ValueError("stationary state has no period")
    # crude bound: integrate far enough to see two sign changes of alpha
    orbit = genus1_flow(s0, 50.0, tol=tol, max_step=0.01)
    a = orbit.alpha
    t = orbit.y
    crossings = []
    for i in range(1, len(a)):
        if a[i - 1] == 0.0:
            continue
        if (a[i - 1] < 0) != (a[i] < 0):
            # bisect on short re-integrations from the bracketing record state
            base = Genus1State(a[i - 1], orbit.beta[i - 1])
            lo, hi = 0.0, t[i] - t[i - 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                am = genus1_flow(base, mid, tol=tol).final.alpha_hat
                if (am < 0) == (a[i - 1] < 0):
                    lo = mid
                else:
                    hi = mid
            crossings.append(t[i - 1] + 0.5 * (lo + hi))
            if len(crossings) == 2:
                break
    if len(crossings) < 2:
        raise StepCollapseError("period not detected within the search span")
    if abs(s0.alpha_hat) < 1e-12:
        # started at a turning point: crossings are the half and full period
        return 2.0 * (crossings[1] - crossings[0])
    return 2.0 * (crossings[1] - crossings[0])


def genus1_interpolant(orbit):
    """Cubic Hermite interpolant y -> (alpha_hat(y), beta_hat(y))."""
    t = orbit.y
    a = orbit.alpha
    b = orbit.beta
    da = 2.0 * (b ** -2 - b ** 2)
    db = 2.0 * a * b

    def interp(yq):
        yq = np.asarray(yq, float)
        idx = np.clip(np.searchsorted(t, yq) - 1, 0, len(t) - 2)
        h = t[idx + 1] - t[idx]
        s = (yq - t[idx]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        av = h00 * a[idx] + h10 * h * da[idx] + h01 * a[idx + 1] + h11 * h * da[idx + 1]
        bv = h00 * b[idx] + h10 * h * db[idx] + h01 * b[idx + 1] + h11 * h * db[idx + 1]
        return av, bv

    return interp
