"""Action of loops, the action function sigma and the Calabi invariant.

``sigma`` is computed by the path formula

    sigma(z) = int_0^T (lambda0(X_H) + H)(t, phi_t z) dt,

which satisfies ``d sigma = phi^* lambda0 - lambda0`` and, on the unit circle
(where ``H = 0``), reduces to the line integral of ``lambda0`` along the
boundary orbit.  All values are in raw ``dx ^ dy`` units, so the disc has
area ``pi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import BoundaryViolation, NotClosed, OutsideDisc
from .flow import OrbitTrace, propagate
from .geometry import LoopSample, as_xy, enclosed_area_extrapolated
from .hamiltonians import HamiltonianSpec, is_identically_zero

DISC_AREA = np.pi
CLOSED_TOL = 1e-6
_DISC_TOL = 1e-12


def action_of_loop(H: HamiltonianSpec, loop, period: float | None = None) -> float:
    """Action ``int x^* lambda0 + int_0^T H(t, x(t)) dt`` of a closed loop.

    ``loop`` is an :class:`OrbitTrace` (its time grid is used; the last sample
    must return to the first within 1e-6) or a :class:`LoopSample`, taken to be
    parametrised by ``[0, period)`` (default ``period = 1``).
    """
    if isinstance(loop, OrbitTrace):
        if loop.closing_gap > CLOSED_TOL:
            raise NotClosed(f"loop endpoint misses its start by {loop.closing_gap:.3g}")
        pts = loop.points[:-1]
        t = loop.times[:-1]
        T = loop.times[-1] - loop.times[0]
    elif isinstance(loop, LoopSample):
        pts = loop.points
        T = 1.0 if period is None else float(period)
        t = loop.times * T
    else:
        raise TypeError("loop must be an OrbitTrace or a LoopSample")
    area = enclosed_area_extrapolated(pts)
    # periodic trapezoid rule: spectrally accurate for smooth periodic integrands
    h_mean = float(np.mean(H.value(t, pts[:, 0], pts[:, 1]) * np.ones(len(t))))
    return area + T * h_mean


@dataclass(frozen=True)
class ActionSample:
    point: tuple[float, float]
    sigma: float
    route: str = "PathIntegral"


def _check_disc(pts: np.ndarray):
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    if np.any(r2 > (1.0 + _DISC_TOL) ** 2):
        raise OutsideDisc(f"point at radius {np.sqrt(r2.max()):.12g} lies outside the unit disc")


def sigma(H: HamiltonianSpec, points, T: float = 1.0, steps: int | None = None) -> np.ndarray:
    """Vectorised action function of ``phi_T`` at an (N, 2) array of points."""
    pts = np.atleast_2d(as_xy(points))
    _check_disc(pts)
    if steps is None:
        steps = int(np.ceil(2000 * T))
    return propagate(H, pts, T, steps, action=True).action


def action_function(H: HamiltonianSpec, z, T: float = 1.0, steps: int | None = None) -> ActionSample:
    """``sigma(z)`` for the time-``T`` map (``T = k`` gives the action of ``phi^k``)."""
    p = as_xy(z)
    val = float(sigma(H, p[None, :], T, steps)[0])
    return ActionSample((float(p[0]), float(p[1])), val)


def boundary_line_integral(H: HamiltonianSpec, theta, steps: int = 2000) -> np.ndarray:
    """Line integral of ``lambda0`` along the time-one boundary orbit from angle ``theta``.

    Independent of ``H`` vanishing: it integrates only ``lambda0(X_H)``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    pts = np.column_stack([np.cos(theta), np.sin(theta)])

    def lam(t, x, y, vx, vy):
        return 0.5 * (x * vy - y * vx)

    return propagate(H, pts, 1.0, steps, extra=lam).extra


def verify_sigma_pde(H: HamiltonianSpec, grid: int = 32, radius: float = 0.9,
                     h: float = 1e-5, steps: int | None = None) -> float:
    """Max of ``|grad sigma - (phi^* lambda0 - lambda0)|`` over a square grid in
    the disc of the given radius.

    ``grad sigma`` is a central difference of the path formula; the right-hand
    side uses the time-one map and its variational Jacobian.
    """
    u = np.linspace(-radius, radius, grid)
    X, Y = np.meshgrid(u, u)
    keep = X ** 2 + Y ** 2 <= radius ** 2
    z = np.column_stack([X[keep], Y[keep]])
    n = len(z)
    offsets = np.array([[h, 0], [-h, 0], [0, h], [0, -h]])
    shifted = (z[None, :, :] + offsets[:, None, :]).reshape(-1, 2)
    pts = np.vstack([z, shifted])
    res = propagate(H, pts, 1.0, steps, action=True, jacobian=True)
    s = res.action[n:].reshape(4, n)
    grad = np.column_stack([(s[0] - s[1]) / (2 * h), (s[2] - s[3]) / (2 * h)])
    img = res.points[:n]
    J = res.jacobian[:n]
    # (phi^* lambda0)_z(e_i) = lambda0_{phi z}(J e_i)
    pull = 0.5 * (img[:, 0:1] * J[:, 1, :] - img[:, 1:2] * J[:, 0, :])
    lam = 0.5 * np.column_stack([-z[:, 1], z[:, 0]])
    return float(np.max(np.abs(grad - (pull - lam)))) if n else 0.0


@lru_cache(maxsize=None)
def _gauss_s(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _disc_nodes(n_s: int, n_theta: int):
    """Quadrature nodes and weights for ``int_D f dx dy = 1/2 int_0^1 int_0^2pi f ds dtheta``."""
    s, ws = _gauss_s(n_s)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    S, TH = np.meshgrid(s, th, indexing="ij")
    W = 0.5 * ws[:, None] * (2 * np.pi / n_theta) * np.ones_like(TH)
    r = np.sqrt(S)
    return r * np.cos(TH), r * np.sin(TH), W


def calabi(H: HamiltonianSpec, method: str = "TimeSpace", n_s: int = 64, n_theta: int = 128,
           n_t: int = 64, steps: int | None = None) -> float:
    """Unnormalised Calabi quantity of the isotopy generated by ``H``.

    ``TimeSpace``: ``int_0^1 int_D H dx dy dt``.  ``SigmaAverage``:
    ``int_D sigma dx dy``.  In the plane the two are related by
    ``SigmaAverage = 2 TimeSpace`` (see :func:`calabi_report`).
    """
    if not H.vanishes_on_boundary():
        raise BoundaryViolation(f"H does not vanish on the unit circle (max {H.boundary_max():.3g})")
    if getattr(H, "radial", False) and H.autonomous:
        n_theta = 1  # rotation invariant integrand: one angle carries the full weight
    x, y, W = _disc_nodes(n_s, n_theta)
    if method == "TimeSpace":
        ts = np.arange(1 if H.autonomous else n_t) / (1 if H.autonomous else n_t)
        tot = 0.0
        for t in ts:
            tot += float(np.sum(W * H.value(t, x, y)))
        val = tot / len(ts)
    elif method == "SigmaAverage":
        sig = sigma(H, np.column_stack([x.ravel(), y.ravel()]), 1.0, steps)
        val = float(np.sum(W.ravel() * sig))
    else:
        raise ValueError("method must be 'TimeSpace' or 'SigmaAverage'")
    return val


def calabi_report(H: HamiltonianSpec, **kw) -> dict:
    """Both Calabi quantities, their ratio and the area-normalised value used by
    the Hutchings check (``calabi_sigma / pi``)."""
    cal_h = calabi(H, "TimeSpace", **kw)
    cal_s = calabi(H, "SigmaAverage", **kw)
    return {
        "calabi_H": cal_h,
        "calabi_sigma": cal_s,
        "ratio_sigma_over_H": cal_s / cal_h if abs(cal_h) > 1e-14 else None,
        "calabi_normalized": cal_s / DISC_AREA,
        "area": DISC_AREA,
    }


@dataclass
class PrimitiveShiftReport:
    points: np.ndarray
    delta: np.ndarray
    expected: np.ndarray
    fixed_mask: np.ndarray
    max_error_nonfixed: float
    max_change_fixed: float
    tol: float = 1e-6
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok_nf = self.max_error_nonfixed <= self.tol
        ok_f = self.max_change_fixed <= self.tol
        return bool(ok_nf and ok_f)


def _num_grad(f: Callable, x, y, h: float = 1e-6):
    fx = (f(x + h, y) - f(x - h, y)) / (2 * h)
    fy = (f(x, y + h) - f(x, y - h)) / (2 * h)
    return fx, fy


def primitive_shift_test(H: HamiltonianSpec, f: Callable, points=None, fixed_points=None,
                         grad_f: Callable | None = None, n_random: int = 64, seed: int = 0,
                         fixed_tol: float = 1e-8, steps: int | None = None,
                         tol: float = 1e-6) -> PrimitiveShiftReport:
    """Recompute sigma with the primitive ``lambda0 + df`` and compare.

    The modified integrand adds ``df(X_H)`` along each orbit.  The change must
    equal ``f(phi z) - f(z)`` everywhere and vanish at fixed points.  Fixed
    points are taken from ``fixed_points`` or detected among the test points
    (``|phi z - z| <= fixed_tol``); if neither yields any, period-one orbits are
    searched for.
    """
    if points is None:
        rng = np.random.default_rng(seed)
        r = np.sqrt(rng.uniform(0, 0.95 ** 2, n_random))
        th = rng.uniform(0, 2 * np.pi, n_random)
        points = np.column_stack([r * np.cos(th), r * np.sin(th)])
    pts = np.atleast_2d(as_xy(points))
    if fixed_points is None:
        from .spectrum import find_periodic_orbits

        recs = find_periodic_orbits(H, 1, grid=12)
        fixed_points = [r.point for r in recs if r.location != "Boundary"]
    fp = np.atleast_2d(np.asarray(fixed_points, dtype=float)).reshape(-1, 2)
    allp = np.vstack([pts, fp])
    _check_disc(allp)
    grad = grad_f if grad_f is not None else (lambda x, y: _num_grad(f, x, y))

    def df_of_x(t, x, y, vx, vy):
        gx, gy = grad(x, y)
        return np.asarray(gx) * vx + np.asarray(gy) * vy

    res = propagate(H, allp, 1.0, steps, action=True, extra=df_of_x)
    delta = res.extra
    expected = f(res.points[:, 0], res.points[:, 1]) - f(allp[:, 0], allp[:, 1])
    expected = np.broadcast_to(np.asarray(expected, dtype=float), delta.shape)
    moved = np.hypot(*(res.points - allp).T)
    fixed = moved <= fixed_tol
    fixed[len(pts):] = True
    nonfixed_err = np.abs(delta - expected)[~fixed]
    return PrimitiveShiftReport(
        points=allp, delta=delta, expected=expected, fixed_mask=fixed,
        max_error_nonfixed=float(nonfixed_err.max()) if nonfixed_err.size else 0.0,
        max_change_fixed=float(np.abs(delta[fixed]).max()) if fixed.any() else 0.0,
        tol=tol, details={"sigma": res.action, "identity": is_identically_zero(H)},
    )
