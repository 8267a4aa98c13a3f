"""Integration of Hamiltonian flows, their linearisation and action integrand.

The integrator is the classical fixed-step fourth-order Runge-Kutta scheme,
vectorised over batches of initial points.  Alongside the position it can carry

* the action integrand ``lambda0(X_H) + H`` (so ``action[t]`` is the running
  integral of it along the orbit), and
* the variational equation ``dJ/dt = DX_H J`` for the flow Jacobian.

Symplecticity is monitored by tests (Jacobian determinant, triangle areas), it
is not built into the scheme.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepRejection
from .geometry import LoopSample, angle_lift, as_xy, enclosed_area_extrapolated
from .hamiltonians import HamiltonianSpec

STEPS_PER_UNIT = 2000
ESCAPE_RADIUS = 3.0
_CHECK_EVERY = 64


def _rhs(H: HamiltonianSpec, action: bool, jacobian: bool,
         extra: Callable | None = None) -> Callable:
    order = 2 if jacobian else 1

    def f(t, Y):
        x, y = Y[0], Y[1]
        jet = H.jet(t, x, y, order)
        hx, hy = jet[1], jet[2]
        out = [hy, -hx]
        if action:
            # lambda0(X) + H with X = (hy, -hx)
            out.append(0.5 * (-x * hx - y * hy) + jet[0])
        if jacobian:
            hxx, hxy, hyy = jet[3], jet[4], jet[5]
            j = 3 if action else 2
            j00, j01, j10, j11 = Y[j], Y[j + 1], Y[j + 2], Y[j + 3]
            out += [hxy * j00 + hyy * j10, hxy * j01 + hyy * j11,
                    -hxx * j00 - hxy * j10, -hxx * j01 - hxy * j11]
        if extra is not None:
            e = np.asarray(extra(t, x, y, hy, -hx), dtype=float)
            if e.ndim > np.ndim(x):
                out.extend(np.broadcast_to(e, (e.shape[0],) + np.shape(x)))
            else:
                out.append(np.broadcast_to(e, np.shape(x)))
        return np.array(out)

    return f


def _rk4(f, Y, t0: float, h: float, nsteps: int, record_every: int | None = None,
         mask_escapes: bool = False):
    """Advance ``Y`` (shape (d, N)) by ``nsteps`` RK4 steps of size ``h``.

    Returns the final state and, if ``record_every`` is set, the stacked states
    at steps ``0, record_every, 2 record_every, ...``.
    """
    snaps = [Y.copy()] if record_every else None
    t = t0
    with np.errstate(invalid="ignore", over="ignore"):
        for i in range(1, nsteps + 1):
            k1 = f(t, Y)
            k2 = f(t + 0.5 * h, Y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, Y + 0.5 * h * k2)
            k4 = f(t + h, Y + h * k3)
            Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t0 + i * h
            if i % _CHECK_EVERY == 0 or i == nsteps:
                r2 = Y[0] ** 2 + Y[1] ** 2
                bad = ~(r2 <= ESCAPE_RADIUS ** 2)
                if np.any(bad):
                    if not mask_escapes:
                        raise StepRejection(
                            f"orbit left |z| <= {ESCAPE_RADIUS:g} near t = {t:.4g}")
                    Y[:, bad] = np.nan
            if record_every and i % record_every == 0:
                snaps.append(Y.copy())
    if record_every:
        return Y, np.stack(snaps)
    return Y


def _steps_for(T: float, steps: int | None) -> int:
    if steps is None:
        steps = int(np.ceil(STEPS_PER_UNIT * abs(T)))
    if steps < 100 * abs(T):
        raise ValueError(f"need at least 100 steps per unit time, got {steps} for T={T}")
    return max(int(steps), 1)


@dataclass
class FlowBatch:
    """Result of :func:`propagate` for N initial points.

    ``points`` is (N, 2); ``action`` (N,) is the accumulated action integrand;
    ``jacobian`` (N, 2, 2); ``snapshots`` holds the same quantities at the
    recorded times (leading axis = time).
    """

    points: np.ndarray
    action: np.ndarray | None = None
    jacobian: np.ndarray | None = None
    extra: np.ndarray | None = None
    snapshot_times: np.ndarray | None = None
    snapshot_points: np.ndarray | None = None
    snapshot_action: np.ndarray | None = None
    snapshot_jacobian: np.ndarray | None = None

    @property
    def escaped(self) -> np.ndarray:
        return ~np.all(np.isfinite(self.points), axis=1)


def propagate(H: HamiltonianSpec, points, T: float = 1.0, steps: int | None = None,
              t0: float = 0.0, action: bool = False, jacobian: bool = False,
              extra: Callable | None = None, record_every_unit: bool = False,
              mask_escapes: bool = False, n_extra: int = 1) -> FlowBatch:
    """Flow a batch of points for time ``T`` starting at time ``t0``.

    ``steps`` is the total number of RK4 steps (default 2000 per unit time).
    With ``record_every_unit`` the state is also returned at every integer time
    offset ``t0 + 1, t0 + 2, ...`` (``T`` must then be an integer).
    ``extra(t, x, y, vx, vy)`` adds integrated scalars: one by default, or
    ``n_extra`` if it returns a stacked (n_extra, N) array; ``extra`` on the
    result then has shape (N,) or (n_extra, N).
    """
    pts = np.atleast_2d(as_xy(points)).astype(float)
    n = len(pts)
    nsteps = _steps_for(T, steps)
    rows = [pts[:, 0], pts[:, 1]]
    if action:
        rows.append(np.zeros(n))
    if jacobian:
        rows += [np.ones(n), np.zeros(n), np.zeros(n), np.ones(n)]
    if extra is not None:
        rows += [np.zeros(n)] * n_extra
    Y0 = np.array(rows)
    f = _rhs(H, action, jacobian, extra)
    h = T / nsteps
    record = None
    if record_every_unit:
        units = int(round(T))
        if abs(units - T) > 1e-12 or nsteps % units:
            raise ValueError("record_every_unit needs integer T and steps divisible by T")
        record = nsteps // units
    res = _rk4(f, Y0, t0, h, nsteps, record, mask_escapes)
    Y, snaps = res if record else (res, None)
    out = FlowBatch(points=Y[:2].T.copy())
    if action:
        out.action = Y[2].copy()
    if jacobian:
        j = 3 if action else 2
        out.jacobian = np.moveaxis(Y[j:j + 4].reshape(2, 2, n), -1, 0).copy()
    if extra is not None:
        out.extra = Y[-1].copy() if n_extra == 1 else Y[-n_extra:].copy()
    if snaps is not None:
        out.snapshot_times = t0 + np.arange(snaps.shape[0], dtype=float)
        out.snapshot_points = np.moveaxis(snaps[:, :2, :], 1, 2).copy()
        if action:
            out.snapshot_action = snaps[:, 2, :].copy()
        if jacobian:
            j = 3 if action else 2
            out.snapshot_jacobian = np.moveaxis(
                snaps[:, j:j + 4, :].reshape(snaps.shape[0], 2, 2, n), -1, 1).copy()
    return out


@dataclass
class OrbitTrace:
    """Uniformly sampled orbit ``t -> phi_t(z0)``.

    ``angle_lift`` is the continuous polar angle (``None`` if the orbit comes
    within 1e-9 of the origin); ``action_integrand[j]`` is the integral of
    ``lambda0(X_H) + H`` from ``t[0]`` to ``t[j]``.
    """

    times: np.ndarray
    points: np.ndarray
    angle_lift: np.ndarray | None
    action_integrand: np.ndarray
    error_estimate: float | None = None

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def closing_gap(self) -> float:
        return float(np.hypot(*(self.points[-1] - self.points[0])))

    def as_loop(self) -> LoopSample:
        """Closed loop made of all samples but the last (which repeats the first)."""
        return LoopSample(self.points[:-1])

    def max_step(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.max(np.hypot(d[:, 0], d[:, 1]))) if len(d) else 0.0


def _trace(H, z0, t0, T, steps):
    nsteps = _steps_for(T, steps)
    f = _rhs(H, True, False)
    Y0 = np.array([[z0[0]], [z0[1]], [0.0]])
    _, snaps = _rk4(f, Y0, t0, T / nsteps, nsteps, record_every=1)
    return nsteps, snaps[:, :, 0]


def integrate_orbit(H: HamiltonianSpec, z0, t_span=(0.0, 1.0), steps: int | None = None,
                    refine_tol: float | None = None, max_levels: int = 20) -> OrbitTrace:
    """Sample the orbit of ``z0`` over ``t_span``.

    With ``refine_tol`` the step count is doubled until the endpoint moves by
    less than ``refine_tol`` between resolutions (Richardson check); more than
    ``max_levels`` doublings raises :class:`StepRejection`.
    """
    z0 = as_xy(z0).astype(float)
    t0, t1 = map(float, t_span)
    T = t1 - t0
    nsteps, samples = _trace(H, z0, t0, T, steps)
    err = None
    if refine_tol is not None:
        for _ in range(max_levels):
            n2, fine = _trace(H, z0, t0, T, 2 * nsteps)
            err = float(np.hypot(*(fine[-1, :2] - samples[-1, :2]))) / 15.0
            nsteps, samples = n2, fine
            if err <= refine_tol:
                break
        else:
            raise StepRejection(f"step refinement exceeded {max_levels} levels")
    pts = samples[:, :2].copy()
    times = t0 + T * np.arange(nsteps + 1) / nsteps
    r = np.hypot(pts[:, 0], pts[:, 1])
    lift = angle_lift(pts) if np.min(r) > 1e-9 else None
    return OrbitTrace(times, pts, lift, samples[:, 2].copy(), err)


def time_one_map(H: HamiltonianSpec, z0, steps: int | None = None) -> np.ndarray:
    """``phi_1(z0)``; accepts one point or an (N, 2) array."""
    p = as_xy(z0)
    out = propagate(H, p, 1.0, steps).points
    return out[0] if p.ndim == 1 else out


@dataclass(frozen=True)
class FlowJacobian:
    matrix: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def flow_jacobian(H: HamiltonianSpec, z0, T: float = 1.0, steps: int | None = None) -> FlowJacobian:
    """``D phi_T(z0)`` from the variational equation."""
    res = propagate(H, as_xy(z0), T, steps, jacobian=True)
    return FlowJacobian(res.jacobian[0])


def area_ratios(H: HamiltonianSpec, polygons: np.ndarray, steps: int | None = None) -> np.ndarray:
    """Signed area of each advected polygon divided by its initial area.

    ``polygons`` has shape (N, M, 2).  With ``M = 3`` these are triangles through
    the mapped vertices, whose area ratio is ``det D phi + O(size)``.  A finely
    sampled closed loop (even ``M >= 16``) instead measures the area of the
    image region itself, which a symplectic map preserves exactly; the shoelace
    sum is then Richardson-extrapolated.
    """
    poly = np.asarray(polygons, dtype=float)
    img = time_one_map(H, poly.reshape(-1, 2), steps).reshape(poly.shape)
    return np.array([enclosed_area_extrapolated(a) / enclosed_area_extrapolated(b)
                     for a, b in zip(img, poly)])
