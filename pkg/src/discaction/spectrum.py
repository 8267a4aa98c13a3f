"""Periodic orbits, action spectra, rotation number and mean actions.

Two search routes feed :func:`find_periodic_orbits`:

* radial autonomous Hamiltonians are solved exactly: the circle ``s`` consists
  of points of minimal period ``q`` iff ``g'(s) = -pi p / q`` with
  ``gcd(p, q) = 1``; one representative per circle is re-integrated to confirm
  closure and to measure its action;
* everything else goes through a damped Newton iteration on
  ``z -> phi^k(z) - z`` from a grid of seeds (plus seeds on the resonant circles
  of the radial part, for perturbed radial families).

Every reported record is re-integrated at twice the default resolution; its
residual and action come from that final pass.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .flow import STEPS_PER_UNIT, propagate
from .hamiltonians import (HamiltonianSpec, LinearCombination, PerturbedRadial,
                           RadialHamiltonian, is_identically_zero)
from .radial import resonant_levels

RESIDUAL_TOL = 1e-9
BOUNDARY_BAND = 1e-8
CLUSTER_RADIUS = 1e-6
VERIFY_STEPS = 2 * STEPS_PER_UNIT
COARSE_STEPS = 100
SEED_RADIUS = 0.98

INTERIOR = "Interior"
BOUNDARY = "Boundary"
DEGENERATE = "DegenerateCircle"


@dataclass
class PeriodicOrbitRecord:
    """A point ``z`` with ``phi^k(z) = z`` (``k`` minimal) and its actions.

    ``action_total`` is the action of ``phi^k`` at ``z``; ``mean_action`` is
    ``action_total / k``.  A ``DegenerateCircle`` record stands for a whole
    circle (or annulus ``s_range``) of such points, represented by ``point``.
    """

    point: tuple[float, float]
    period: int
    residual: float
    action_total: float
    mean_action: float
    location: str
    s_level: float | None = None
    s_range: tuple[float, float] | None = None

    @classmethod
    def make(cls, point, period, residual, action_total, location, s_level=None, s_range=None):
        return cls((float(point[0]), float(point[1])), int(period), float(residual),
                   float(action_total), float(action_total) / int(period), location,
                   None if s_level is None else float(s_level),
                   None if s_range is None else (float(s_range[0]), float(s_range[1])))

    @property
    def interior(self) -> bool:
        return self.location != BOUNDARY

    def to_row(self) -> dict:
        return {"x": self.point[0], "y": self.point[1], "period": self.period,
                "residual": self.residual, "action": self.action_total,
                "mean_action": self.mean_action, "location": self.location}


class OrbitList(list):
    """List of records with search bookkeeping attached."""

    def __init__(self, records=(), dropped: int = 0, identity: bool = False, seeds: int = 0):
        super().__init__(records)
        self.dropped = dropped
        self.identity = identity
        self.seeds = seeds


# ------------------------------------------------------------------ radial


def radial_profile(H: HamiltonianSpec):
    """Profile ``g(s, nu)`` if ``H`` is an autonomous radial Hamiltonian, else None."""
    if isinstance(H, RadialHamiltonian):
        return H.profile
    if isinstance(H, LinearCombination):
        parts = [radial_profile(h) for h in H.terms]
        if parts and all(p is not None for p in parts):
            w = H.weights
            return lambda s, nu=0: sum(wi * p(s, nu) for wi, p in zip(w, parts))
    return None


def _location(point, s_range=None) -> str:
    r = float(np.hypot(*point))
    if abs(r - 1.0) <= BOUNDARY_BAND:
        return BOUNDARY
    return DEGENERATE if s_range is not None else INTERIOR


def _verify(H, points: np.ndarray, periods: np.ndarray, steps_per_unit: int = VERIFY_STEPS):
    """Integrate once to the largest period; return (minimal period, residual, action)."""
    K = int(periods.max())
    res = propagate(H, points, float(K), steps_per_unit * K, action=True,
                    record_every_unit=True, mask_escapes=True)
    snaps, acts = res.snapshot_points, res.snapshot_action
    out = []
    for i, k in enumerate(periods):
        k = int(k)
        period, resid = k, np.inf
        for d in range(1, k + 1):
            if k % d:
                continue
            r = float(np.hypot(*(snaps[d, i] - points[i])))
            if not np.isfinite(r):
                break
            if r <= 1e-7 or d == k:
                period, resid = d, r
                break
        out.append((period, resid, float(acts[period, i])))
    return out


def _radial_orbits(H, prof, K: int) -> OrbitList:
    levels = resonant_levels(prof, K)
    reps, periods, meta = [np.zeros(2)], [1], [(None, None)]
    for lv in levels:
        s, s_hi = lv["s"], lv["s_hi"]
        if s_hi is None and s <= 0.0:
            continue  # the origin is already included
        s_rep = s if s_hi is None else 0.5 * (s + s_hi)
        reps.append(np.array([np.sqrt(min(s_rep, 1.0)), 0.0]))
        periods.append(lv["q"])
        meta.append((s_rep, None if s_hi is None else (s, s_hi)))
    pts = np.array(reps)
    checked = _verify(H, pts, np.array(periods))
    recs, dropped = [], 0
    for p, (period, resid, act), (s_level, s_range) in zip(pts, checked, meta):
        if not resid <= RESIDUAL_TOL:
            dropped += 1
            continue
        if s_level is None:
            loc = _location(p)
        elif abs(s_level - 1.0) <= BOUNDARY_BAND:
            loc = BOUNDARY
        else:
            loc = DEGENERATE
        recs.append(PeriodicOrbitRecord.make(p, period, resid, act, loc, s_level, s_range))
    return OrbitList(recs, dropped=dropped, seeds=len(pts))


# ------------------------------------------------------------------ Newton


def _grid_seeds(n: int, radius: float = SEED_RADIUS) -> np.ndarray:
    u = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(u, u)
    keep = X ** 2 + Y ** 2 <= radius ** 2
    return np.vstack([[0.0, 0.0], np.column_stack([X[keep], Y[keep]])])


def _resonance_seeds(H: PerturbedRadial, k: int, n_angle: int | None = None) -> np.ndarray:
    prof = radial_profile(H.base)
    if prof is None:
        return np.zeros((0, 2))
    mmax = max([m.m for m in H.modes] + [1])
    n_angle = n_angle or max(16, 4 * mmax * k)
    th = 2 * np.pi * (np.arange(n_angle) + 0.5) / n_angle
    out = []
    for lv in resonant_levels(prof, k):
        if lv["q"] != k or lv["s_hi"] is not None or not 0 < lv["s"] < SEED_RADIUS ** 2:
            continue
        r = np.sqrt(lv["s"])
        out.append(np.column_stack([r * np.cos(th), r * np.sin(th)]))
    return np.vstack(out) if out else np.zeros((0, 2))


def _flow_k(H, Z: np.ndarray, ks: np.ndarray, spu: int, jacobian: bool = False,
            action: bool = False):
    """Flow every point ``Z[i]`` for ``ks[i]`` units of time in one batch.

    All points are integrated to ``max(ks)`` with snapshots at integer times,
    so mixed periods cost no more than the longest one.  Returns the
    propagation result and the images ``phi^{k_i}(Z[i])``.
    """
    K = int(ks.max())
    res = propagate(H, Z, float(K), spu * K, jacobian=jacobian, action=action,
                    record_every_unit=True, mask_escapes=True)
    i = np.arange(len(Z))
    return res, res.snapshot_points[ks, i]


def _newton(H, Z: np.ndarray, ks: np.ndarray, spu: int, iters: int,
            tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Damped Newton on ``F_i(z) = phi^{k_i}(z) - z`` for a batch of seeds.

    Steps solve ``(A^T A + mu I) d = -A^T F`` with ``A = D phi^k - I``; a trial
    is accepted under the Armijo condition (``|F|^2`` decreases by a factor
    ``1 - 1e-4``), otherwise ``mu`` grows tenfold, which shortens the step and
    turns it towards steepest descent.  This copes with the nearly singular
    ``A`` met on slightly perturbed circles of periodic points.

    Returns the final points, a mask of converged ones and the last Jacobians.
    """
    Z = Z.copy()
    n = len(Z)
    alive = np.ones(n, bool)
    done = np.zeros(n, bool)
    mu_rel = np.full(n, 1e-6)
    jac = np.tile(np.eye(2), (n, 1, 1))
    eye = np.eye(2)
    for _ in range(iters):
        idx = np.flatnonzero(alive & ~done)
        if idx.size == 0:
            break
        res, img = _flow_k(H, Z[idx], ks[idx], spu, jacobian=True)
        F = img - Z[idx]
        J = res.snapshot_jacobian[ks[idx], np.arange(idx.size)]
        jac[idx] = J
        fn = np.hypot(F[:, 0], F[:, 1])
        bad = ~np.isfinite(fn)
        alive[idx[bad]] = False
        conv = ~bad & (fn <= tol * ks[idx])
        done[idx[conv]] = True
        work = ~bad & ~conv
        if not np.any(work):
            continue
        w = idx[work]
        A = J[work] - eye
        At = np.transpose(A, (0, 2, 1))
        AtA = At @ A
        g = (At @ F[work][:, :, None])[:, :, 0]
        scale = np.trace(AtA, axis1=1, axis2=2) + 1e-300
        f0 = fn[work] ** 2
        pending = np.arange(len(w))
        for _ in range(6):
            mu = mu_rel[w[pending]] * scale[pending]
            d = -np.linalg.solve(AtA[pending] + mu[:, None, None] * eye,
                                 g[pending][:, :, None])[:, :, 0]
            trial = Z[w[pending]] + d
            inside = np.hypot(trial[:, 0], trial[:, 1]) <= 1.0
            f_new = np.full(len(pending), np.inf)
            if np.any(inside):
                _, img_t = _flow_k(H, trial[inside], ks[w[pending[inside]]], spu)
                f_new[inside] = np.sum((img_t - trial[inside]) ** 2, axis=1)
            accept = f_new <= (1 - 1e-4) * f0[pending]
            acc = pending[accept]
            Z[w[acc]] = trial[accept]
            mu_rel[w[acc]] = np.maximum(mu_rel[w[acc]] / 10, 1e-12)
            pending = pending[~accept]
            if pending.size == 0:
                break
            mu_rel[w[pending]] *= 10
        alive[w[pending]] = False  # no descent direction found
    return Z, done & alive, jac


def _dedupe(cands: list[tuple], radius: float = CLUSTER_RADIUS) -> list[tuple]:
    """Keep one candidate ``(z, k, residual, ...)`` per cluster of the given
    radius and period, preferring the smallest residual."""
    cands = sorted(cands, key=lambda c: (c[1], c[2]))
    kept: list[tuple] = []
    for c in cands:
        if any(c[1] == d[1] and np.hypot(*(c[0] - d[0])) <= radius for d in kept):
            continue
        kept.append(c)
    kept.sort(key=lambda c: (c[1], c[0][0], c[0][1]))
    return kept


def _candidates(H, K: int, grid: int, seeds, keep_fraction: float = 0.25,
                radius: float = 0.05, cap: int = 512) -> tuple[np.ndarray, np.ndarray, int]:
    """Seed/period pairs worth a Newton run.

    All seeds are flown to time ``K`` once at coarse resolution; for each
    period ``k`` the seeds with the smallest displacement ``|phi^k z - z|``
    (the lowest quarter, everything below ``radius``, at most ``cap``) are
    kept.  Perturbed radial families also get seeds on the resonant circles of
    their radial part, always kept for their own period.
    """
    Z0 = _grid_seeds(grid) if seeds is None else np.atleast_2d(np.asarray(seeds, float))
    res = propagate(H, Z0, float(K), COARSE_STEPS * K, record_every_unit=True, mask_escapes=True)
    disp = np.hypot(*(res.snapshot_points - Z0[None]).transpose(2, 0, 1))
    disp = np.where(np.isfinite(disp), disp, np.inf)
    pts, ks = [], []
    for k in range(1, K + 1):
        d = disp[k]
        cut = max(np.quantile(d, keep_fraction), radius)
        sel = np.flatnonzero(d <= cut)
        sel = sel[np.argsort(d[sel])][:cap]
        pts.append(Z0[sel])
        ks.append(np.full(sel.size, k))
        if isinstance(H, PerturbedRadial) and seeds is None:
            extra = _resonance_seeds(H, k)
            pts.append(extra)
            ks.append(np.full(len(extra), k))
    Z = np.vstack(pts)
    return Z, np.concatenate(ks).astype(int), len(Z0)


def _polish(H, Z: np.ndarray, ks: np.ndarray, iters: int = 3, tol: float = 1e-11,
            max_step: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Plain Newton at the default resolution from coarse roots.

    Coarse and fine fixed points differ by the coarse integration error, so a
    step longer than ``max_step`` means the coarse root was spurious; such
    points are dropped.
    """
    Z = Z.copy()
    alive = np.ones(len(Z), bool)
    eye = np.eye(2)
    for _ in range(iters):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        res, img = _flow_k(H, Z[idx], ks[idx], STEPS_PER_UNIT, jacobian=True)
        F = img - Z[idx]
        fn = np.hypot(F[:, 0], F[:, 1])
        if np.all(fn <= tol * ks[idx]):
            break
        A = res.snapshot_jacobian[ks[idx], np.arange(idx.size)] - eye
        finite = np.isfinite(fn) & np.isfinite(A).all(axis=(1, 2))
        alive[idx[~finite]] = False
        At = np.transpose(A[finite], (0, 2, 1))
        AtA = At @ A[finite]
        mu = 1e-14 * np.trace(AtA, axis1=1, axis2=2) + 1e-300
        d = -np.linalg.solve(AtA + mu[:, None, None] * eye, At @ F[finite][:, :, None])[:, :, 0]
        d[fn[finite] <= tol * ks[idx][finite]] = 0.0
        big = np.hypot(d[:, 0], d[:, 1]) > max_step
        alive[idx[finite][big]] = False
        Z[idx[finite]] += np.where(big[:, None], 0.0, d)
    return Z, alive


def _newton_orbits(H, K: int, grid: int, seeds=None) -> OrbitList:
    Z, ks, n_seeds = _candidates(H, K, grid, seeds)
    Zc, ok, _ = _newton(H, Z, ks, COARSE_STEPS, iters=15, tol=1e-9)
    dropped = int(np.sum(~ok))
    if not np.any(ok):
        return OrbitList([], dropped=dropped, seeds=n_seeds)
    coarse = _dedupe([(z, int(k), 0.0) for z, k in zip(Zc[ok], ks[ok])], radius=1e-5)
    Zc = np.array([c[0] for c in coarse])
    kc = np.array([c[1] for c in coarse])
    Zf, alive = _polish(H, Zc, kc)
    dropped += int(np.sum(~alive))
    Zf, kf = Zf[alive], kc[alive]
    inside = np.hypot(Zf[:, 0], Zf[:, 1]) <= 1.0 + 1e-12
    dropped += int(np.sum(~inside))
    Zf, kf = Zf[inside], kf[inside]
    if len(Zf) == 0:
        return OrbitList([], dropped=dropped, seeds=n_seeds)
    checked = _verify(H, Zf, kf)
    good = [(z, per, resid, act) for z, (per, resid, act) in zip(Zf, checked) if resid <= RESIDUAL_TOL]
    dropped += len(checked) - len(good)
    uniq = _dedupe(good)
    recs = [PeriodicOrbitRecord.make(p, per, resid, act, _location(p)) for p, per, resid, act in uniq]
    return OrbitList(recs, dropped=dropped, seeds=n_seeds)


def find_periodic_orbits(H: HamiltonianSpec, K: int, grid: int = 64, seeds=None,
                         exact_radial: bool = True) -> OrbitList:
    """Periodic points of minimal period ``<= K``.

    ``grid`` sets the ``grid x grid`` seed lattice on the disc of radius 0.98
    (period one; higher periods use a coarser lattice).  Radial autonomous
    Hamiltonians are solved exactly unless ``exact_radial`` is False.  For the
    zero Hamiltonian a single record at the origin is returned and the
    ``identity`` flag is set.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if is_identically_zero(H):
        rec = PeriodicOrbitRecord.make((0.0, 0.0), 1, 0.0, 0.0, INTERIOR)
        return OrbitList([rec], identity=True, seeds=1)
    prof = radial_profile(H) if exact_radial else None
    if prof is not None:
        return _radial_orbits(H, prof, K)
    return _newton_orbits(H, K, grid, seeds)


# ----------------------------------------------------------- boundary data


def boundary_circle_map(H: HamiltonianSpec, n: int = 1024, steps: int = STEPS_PER_UNIT):
    """Lift ``F(theta)`` of the time-one map restricted to the unit circle.

    The angular speed on the circle is ``x X_y - y X_x``; the displacement
    ``F(theta) - theta`` is tabulated on ``n`` angles and interpolated by a
    periodic cubic spline (exact for constant displacement).
    """
    th = 2 * np.pi * np.arange(n) / n
    h = 1.0 / steps

    def speed(t, a):
        c, s = np.cos(a), np.sin(a)
        vx, vy = H.vector_field(t, c, s)
        return c * vy - s * vx

    a = th.copy()
    for i in range(steps):
        t = i * h
        k1 = speed(t, a)
        k2 = speed(t + h / 2, a + h / 2 * k1)
        k3 = speed(t + h / 2, a + h / 2 * k2)
        k4 = speed(t + h, a + h * k3)
        a = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    disp = a - th
    spl = CubicSpline(np.append(th, 2 * np.pi), np.append(disp, disp[0]), bc_type="periodic")

    def lift(theta):
        theta = np.asarray(theta, dtype=float)
        return theta + spl(np.mod(theta, 2 * np.pi))

    return lift


def boundary_orbit(H: HamiltonianSpec, N: int, starts=(0.0,), lift=None) -> np.ndarray:
    """Lifted angles ``theta_j`` (shape (N + 1, len(starts))) of boundary orbits."""
    lift = lift or boundary_circle_map(H)
    th = np.empty((N + 1, len(starts)))
    th[0] = starts
    for j in range(N):
        th[j + 1] = lift(th[j])
    return th


def boundary_rotation_number(H: HamiltonianSpec, iterates: int = 10_000, n_starts: int = 8) -> float:
    """``(theta_N - theta_0) / (2 pi N)`` averaged over a few starting angles."""
    starts = 2 * np.pi * np.arange(n_starts) / n_starts
    th = boundary_orbit(H, iterates, starts)
    return float(np.mean(th[-1] - th[0]) / (2 * np.pi * iterates))


def boundary_mean_action(H: HamiltonianSpec, N: int = 2000, steps: int | None = None) -> float:
    """Birkhoff mean of the action function along a boundary orbit.

    The orbit comes from the boundary circle map; ``sigma`` at its points is
    evaluated by the planar path formula, so this is an independent route to
    ``pi * rho``.
    """
    from .action import sigma

    th = boundary_orbit(H, N - 1)[:, 0]
    pts = np.column_stack([np.cos(th), np.sin(th)])
    return float(np.mean(sigma(H, pts, 1.0, steps)))


def birkhoff_mean_action(H: HamiltonianSpec, z, N: int = 1000,
                         steps_per_unit: int | None = None) -> float:
    """``(1/N) sum_{j<N} sigma(phi^j z)``.

    Telescoping gives ``sigma_{phi^N}(z) / N``, which is what is integrated.
    Shortcuts: on the unit circle ``sigma = (theta_1 - theta_0) / 2`` and the
    circle map is used; for radial autonomous ``H`` sigma is constant along
    orbits, so one evaluation suffices.
    """
    from .action import sigma

    p = np.asarray(z, dtype=float)
    r = float(np.hypot(*p))
    if abs(r - 1.0) <= BOUNDARY_BAND:
        th0 = float(np.arctan2(p[1], p[0]))
        th = boundary_orbit(H, N, (th0,))[:, 0]
        return float(0.5 * (th[-1] - th[0]) / N)
    if radial_profile(H) is not None:
        return float(sigma(H, p[None, :])[0])
    spu = steps_per_unit or COARSE_STEPS
    res = propagate(H, p[None, :], float(N), spu * N, action=True)
    return float(res.action[0] / N)


# ----------------------------------------------------------------- reports


@dataclass
class SpectrumReport:
    orbits: list[PeriodicOrbitRecord]
    period_cutoff: int
    spec_actions: list[float]
    interior_mean_spectrum_sample: list[float]
    boundary_rotation: float
    boundary_mean_action: float
    identity: bool = False
    dropped_seeds: int = 0
    calabi: dict | None = None
    family: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orbits"] = [asdict(o) for o in self.orbits]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), default=_json_default, **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["x", "y", "period", "residual", "action", "mean_action", "location"]
        w = csv.DictWriter(buf, fieldnames=cols)
        w.writeheader()
        for o in self.orbits:
            w.writerow(o.to_row())
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def _unique_sorted(vals, tol: float = 1e-8) -> list[float]:
    out: list[float] = []
    for v in sorted(vals):
        if not out or abs(v - out[-1]) > tol:
            out.append(float(v))
    return out


def interior_mean_spectrum(H: HamiltonianSpec, K: int = 16, grid: int = 64,
                           with_calabi: bool = False, rotation_iterates: int = 10_000,
                           boundary_N: int = 2000) -> SpectrumReport:
    """Assemble orbit search, boundary rotation and boundary mean action.

    ``interior_mean_spectrum_sample`` is a finite sample (lower approximation)
    of the set of mean actions at interior periodic points.
    """
    orbits = find_periodic_orbits(H, K, grid)
    rho = boundary_rotation_number(H, rotation_iterates)
    a = boundary_mean_action(H, boundary_N)
    spec1 = _unique_sorted(o.action_total for o in orbits if o.period == 1)
    sample = _unique_sorted(o.mean_action for o in orbits if o.interior)
    cal = None
    if with_calabi:
        from .action import calabi_report

        cal = calabi_report(H)
    notes = ["interior_mean_spectrum_sample is a finite sample of an infinite set",
             "actions in dx^dy units; disc area = pi"]
    if orbits.identity:
        notes.append("identity isotopy: every point is fixed with action 0")
    return SpectrumReport(list(orbits), K, spec1, sample, rho, a, orbits.identity,
                          orbits.dropped, cal, H.to_dict(), notes)
