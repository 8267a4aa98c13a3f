"""Closed-form spectral data of radial autonomous Hamiltonians.

For ``H = g(s)`` with ``s = |z|**2`` the flow turns the circle of level ``s``
at angular speed ``-2 g'(s)``.  A circle is made of one-periodic orbits iff
``g'(s) = -pi k`` for an integer ``k`` (the orbit winds ``k`` times) and each of
those orbits has action ``g(s) - s g'(s)``: the intercept of the tangent line to
the graph of ``g`` at ``s`` with the vertical axis.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from math import gcd
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import brentq

from .errors import IndeterminateCase, RootIsolationFailure
from .hamiltonians import (RadialHamiltonian, RadialPoly, RadialStaircase, RotationFamily,
                           build_staircase)

GRID = 10_000
MAX_SIGN_CHANGES = 10_000
ROOT_TOL = 1e-10
_ZERO = 1e-13


def _profile_fn(g) -> Callable:
    if isinstance(g, RadialHamiltonian):
        return g.profile
    if callable(g):
        return g
    raise TypeError("g must be a RadialHamiltonian or a callable profile(s, nu)")


@dataclass(frozen=True)
class SlopeRoot:
    """Solution of ``g'(s) = target``; ``s_hi`` is set for a whole flat run."""

    s: float
    s_hi: float | None = None

    @property
    def is_run(self) -> bool:
        return self.s_hi is not None


def solve_slope(g, target: float, grid: int = GRID) -> list[SlopeRoot]:
    """All ``s`` in [0, 1] with ``g'(s) = target``.

    Sign changes of ``g' - target`` on a uniform grid are bracketed and solved
    by Brent's method, then polished with one Newton step; grid runs where the
    difference vanishes identically are returned as intervals; double roots
    (tangencies) are caught as zeros of ``g''`` at which ``g'`` hits the target.
    """
    prof = _profile_fn(g)
    s = np.linspace(0.0, 1.0, grid + 1)
    d = prof(s, 1) - target
    zero = np.abs(d) <= _ZERO
    sign = np.sign(np.where(zero, 0.0, d))
    roots: list[SlopeRoot] = []

    # runs of exact zeros
    idx = np.flatnonzero(zero)
    if idx.size:
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate([[idx[0]], idx[breaks + 1]])
        ends = np.concatenate([idx[breaks], [idx[-1]]])
        for a, b in zip(starts, ends):
            if a == b:
                roots.append(SlopeRoot(float(s[a])))
            else:
                roots.append(SlopeRoot(float(s[a]), float(s[b])))

    f = lambda u: float(prof(np.array(u), 1) - target)  # noqa: E731
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    n_changes = changes.size
    if n_changes > grid // 2:
        # the grid is too coarse to resolve the oscillation: recount on a finer one
        fine = np.linspace(0.0, 1.0, 4 * max(grid, MAX_SIGN_CHANGES) + 1)
        df = np.sign(prof(fine, 1) - target)
        n_changes = max(n_changes, int(np.count_nonzero(df[:-1] * df[1:] < 0)))
    if n_changes > MAX_SIGN_CHANGES:
        raise RootIsolationFailure(f"{n_changes} sign changes of g' - target; profile too oscillatory")
    for i in changes:
        r = brentq(f, s[i], s[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        g2 = float(prof(np.array(r), 2))
        if g2 != 0.0:
            r_new = r - f(r) / g2
            if s[i] <= r_new <= s[i + 1] and abs(f(r_new)) <= abs(f(r)):
                r = r_new
        roots.append(SlopeRoot(float(r)))

    # tangencies: g'' changes sign with g' - target touching zero without crossing
    g2 = prof(s, 2)
    ext = np.flatnonzero(np.sign(g2[:-1]) * np.sign(g2[1:]) < 0)
    for i in ext:
        if sign[i] == 0 or sign[i + 1] == 0 or sign[i] != sign[i + 1]:
            continue
        c = brentq(lambda u: float(prof(np.array(u), 2)), s[i], s[i + 1], xtol=1e-15)
        if abs(f(c)) <= ROOT_TOL:
            roots.append(SlopeRoot(float(c)))

    roots.sort(key=lambda r: r.s)
    out: list[SlopeRoot] = []
    for r in roots:
        if out and not r.is_run and not out[-1].is_run and abs(r.s - out[-1].s) < 1e-9:
            continue
        if out and out[-1].is_run and out[-1].s - 1e-9 <= r.s <= out[-1].s_hi + 1e-9 and not r.is_run:
            continue
        out.append(r)
    return out


@dataclass(frozen=True)
class TangentLevel:
    s: float
    k: int
    value: float
    s_hi: float | None = None


@dataclass
class TangentSpectrum:
    """Period-one spectral data of a radial profile.

    ``levels`` are interior circles (or flat runs) of one-periodic orbits with
    ``g'(s) = -pi k``; ``origin_value = g(0)``; ``boundary_values`` lists the
    intercept at ``s = 1`` when ``g'(1)`` is a multiple of ``pi``.
    """

    levels: list[TangentLevel]
    origin_value: float
    boundary_values: list[float] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        """All spectral values (interior levels, origin, boundary) sorted, deduplicated."""
        vals = [lv.value for lv in self.levels] + [self.origin_value] + list(self.boundary_values)
        vals.sort()
        out: list[float] = []
        for v in vals:
            if not out or abs(v - out[-1]) > 1e-9:
                out.append(v)
        return out

    def to_dict(self) -> dict:
        return {"levels": [asdict(lv) for lv in self.levels], "origin_value": self.origin_value,
                "boundary_values": list(self.boundary_values), "values": self.values}


def slope_range_for(g, grid: int = GRID) -> int:
    """Smallest ``K`` with ``|g'| <= pi K`` on [0, 1]."""
    prof = _profile_fn(g)
    return int(np.ceil(np.max(np.abs(prof(np.linspace(0, 1, grid + 1), 1))) / np.pi))


def tangent_spectrum(g, slope_range: int | None = None, grid: int = GRID) -> TangentSpectrum:
    """Levels ``g'(s) = -pi k`` (``|k| <= slope_range``) with their tangent intercepts."""
    prof = _profile_fn(g)
    if slope_range is None:
        slope_range = slope_range_for(prof, grid)
    levels: list[TangentLevel] = []
    boundary: list[float] = []
    g0 = float(prof(np.array(0.0)))
    for k in range(-slope_range, slope_range + 1):
        target = -np.pi * k
        for root in solve_slope(prof, target, grid):
            hi = root.s_hi if root.is_run else root.s
            lo = root.s
            val = float(prof(np.array(lo)) - lo * prof(np.array(lo), 1))
            if lo <= 0.0 and not root.is_run:
                continue  # the origin is recorded separately
            if hi >= 1.0 and not root.is_run:
                boundary.append(val)
                continue
            if root.is_run and hi >= 1.0:
                boundary.append(val)
            levels.append(TangentLevel(lo, k, val, root.s_hi))
    levels.sort(key=lambda lv: (lv.value, lv.s))
    return TangentSpectrum(levels, g0, sorted(boundary))


def circle_orbit_check(H: RadialHamiltonian, spectrum: TangentSpectrum | None = None,
                       steps: int = 4000) -> list[dict]:
    """Re-derive every tangent value as ``action_of_loop`` of the integrated
    circle orbit (the dynamical oracle).  Flat runs are probed at their midpoint.
    """
    from .action import action_of_loop
    from .flow import integrate_orbit

    spectrum = spectrum if spectrum is not None else tangent_spectrum(H)
    rows = []
    for lv in spectrum.levels:
        s = lv.s if lv.s_hi is None else 0.5 * (lv.s + lv.s_hi)
        trace = integrate_orbit(H, (np.sqrt(s), 0.0), (0.0, 1.0), steps=steps)
        oracle = action_of_loop(H, trace)
        rows.append({"s": s, "k": lv.k, "value": lv.value, "oracle_value": oracle,
                     "abs_err": abs(oracle - lv.value)})
    return rows


def resonant_levels(g, K: int, grid: int = GRID) -> list[dict]:
    """Circles of minimal period ``q <= K``: ``g'(s) = -pi p / q`` with gcd(p, q) = 1.

    Each entry carries ``s`` (and ``s_hi`` for flat runs), ``p``, ``q`` and the
    mean action ``g(s) - s g'(s)``.
    """
    prof = _profile_fn(g)
    gp = prof(np.linspace(0, 1, grid + 1), 1)
    lo, hi = float(gp.min()), float(gp.max())
    out = []
    for q in range(1, K + 1):
        p_min = int(np.ceil(-hi * q / np.pi - 1e-12))
        p_max = int(np.floor(-lo * q / np.pi + 1e-12))
        for p in range(p_min, p_max + 1):
            if gcd(p, q) != 1:
                continue
            for root in solve_slope(prof, -np.pi * p / q, grid):
                s = root.s
                val = float(prof(np.array(s)) - s * prof(np.array(s), 1))
                out.append({"s": s, "s_hi": root.s_hi, "p": p, "q": q, "mean_action": val})
    return out


# ---------------------------------------------------------------- staircase


@dataclass
class GapCertificate:
    nonneg_values: list[float]
    gap_holds: bool
    M: float
    min_positive: float | None


def staircase_gap_certificate(lam: float, eps: float, M: float, **bump) -> GapCertificate:
    """Check that the non-negative tangent values of the staircase lie in
    ``{0} union [M, inf)`` (up to 1e-6)."""
    G = build_staircase(lam, eps, M, **bump)
    spec = tangent_spectrum(G)
    vals = [v for v in spec.values if v >= -1e-12]
    pos = [v for v in vals if v > 1e-9]
    holds = all(v >= M - 1e-6 for v in pos)
    return GapCertificate(vals, holds, M, min(pos) if pos else None)


# ----------------------------------------------------- rotation invariants


@dataclass
class RotationInvariants:
    rho: float
    c_plus: float
    c_minus: float
    derivation: list[str]

    @property
    def gamma(self) -> float:
        return self.c_plus - self.c_minus

    def to_dict(self) -> dict:
        return asdict(self) | {"gamma": self.gamma}


def _c_plus_rotation(rho: float) -> tuple[float, list[str]]:
    a = np.pi * rho
    chain = [f"spectrum of the rotation by rho = {rho:g} is {{pi rho}} = {{{a:.12g}}} (origin only)",
             "membership: c_+ lies in spec u {0} u {pi}"]
    if 0.0 <= rho <= 1.0:
        chain.append("0 <= rho <= 1: c_+ is a spectral value, hence pi rho")
        return a, chain
    if -1.0 < rho < 0.0:
        chain.append("-1 < rho < 0: pi rho < 0 is excluded by c_+ >= 0 and pi is excluded by "
                     "monotonicity against rho = 0 (c_+ = 0), so c_+ = 0")
        return 0.0, chain
    if rho > 1.0:
        chain.append("rho > 1: pi rho exceeds the bound c_+ <= pi; monotonicity from rho = 1 "
                     "(c_+ = pi) forces c_+ = pi")
        return np.pi, chain
    chain.append("rho <= -1: c_+ >= 0 rules out pi rho; monotonicity against rho = 0 gives c_+ <= 0, "
                 "so c_+ = 0")
    return 0.0, chain


def rotation_spectral_invariants(rho: float) -> RotationInvariants:
    """``c_+ = clamp(pi rho, 0, pi)``, ``c_- = clamp(pi rho, -pi, 0)`` with the
    reasoning that pins each value."""
    cp, chain = _c_plus_rotation(rho)
    cm_dual, chain_dual = _c_plus_rotation(-rho)
    chain += [f"duality: c_-(rho) = -c_+(-rho)"] + ["  " + c for c in chain_dual]
    cm = -cm_dual + 0.0
    cp_closed = float(np.clip(np.pi * rho, 0.0, np.pi))
    cm_closed = float(np.clip(np.pi * rho, -np.pi, 0.0))
    assert abs(cp - cp_closed) < 1e-15 and abs(cm - cm_closed) < 1e-15
    return RotationInvariants(float(rho), cp_closed, cm_closed, chain)


def subadditivity_check_rotations(rho1: float, rho2: float, tol: float = 1e-12) -> bool:
    """``c_+(rho1 + rho2) <= c_+(rho1) + c_+(rho2)`` for composed rotations."""
    c = lambda r: rotation_spectral_invariants(r).c_plus  # noqa: E731
    return bool(c(rho1 + rho2) <= c(rho1) + c(rho2) + tol)


@dataclass
class MonotonicityReport:
    consistent: bool
    bound_1: tuple[str, float]
    bound_2: tuple[str, float]
    method: str


def _pinned_c_plus(G) -> tuple[str, float] | None:
    """('exact', c) or ('lower', c) when closed-form reasoning pins c_+ of ``G``."""
    if isinstance(G, RotationFamily):
        return "exact", rotation_spectral_invariants(G.rho).c_plus
    if isinstance(G, RadialPoly):
        c = np.asarray(G.coeffs, dtype=float)
        if np.allclose(c, 0.0, atol=1e-15):
            return "exact", 0.0
        c_adj = np.trim_zeros(c, "b")
        if len(c_adj) == 2 and abs(c_adj[0] + c_adj[1]) < 1e-12:
            return "exact", rotation_spectral_invariants(c_adj[0] / np.pi).c_plus
        return None
    if isinstance(G, RadialStaircase):
        cert = staircase_gap_certificate(G.lam, G.eps, G.M, bump_lo=G.bump_lo, bump_hi=G.bump_hi)
        return ("lower", G.M) if cert.gap_holds else None
    return None


def monotonicity_check_radial(g1, g2, samples: int = 2001) -> MonotonicityReport:
    """Check ``c_+(g1) >= c_+(g2)`` for ``g1 >= g2`` whenever the closed forms pin it.

    Raises :class:`IndeterminateCase` when the available bounds cannot decide.
    """
    s = np.linspace(0.0, 1.0, samples)
    if np.any(g1.profile(s) < g2.profile(s) - 1e-12):
        raise ValueError("profiles are not ordered: need g1 >= g2 pointwise")
    if g1.to_dict() == g2.to_dict():
        return MonotonicityReport(True, ("same", np.nan), ("same", np.nan), "identical profiles")
    b1, b2 = _pinned_c_plus(g1), _pinned_c_plus(g2)
    if b1 is None or b2 is None:
        raise IndeterminateCase("c_+ of at least one profile is not pinned by closed-form reasoning")
    kind1, v1 = b1
    kind2, v2 = b2
    if kind2 == "exact" and v1 >= v2 - 1e-12:
        return MonotonicityReport(True, b1, b2, f"{kind1} bound {v1:.6g} >= exact {v2:.6g}")
    if kind1 == "exact" and kind2 == "exact":
        return MonotonicityReport(False, b1, b2, "exact values out of order")
    raise IndeterminateCase(f"bounds ({kind1} {v1:.6g}, {kind2} {v2:.6g}) do not decide the order")


# ------------------------------------------------------------------ sweeps


def radial_sweep(families: Iterable[tuple[dict, RadialHamiltonian]], steps: int = 4000) -> list[dict]:
    """Tangent values vs the dynamics oracle for each ``(params, H)``."""
    rows = []
    for params, H in families:
        for row in circle_orbit_check(H, steps=steps):
            rows.append({"family": json.dumps(params, sort_keys=True)} | row)
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    cols = ["family", "s", "k", "value", "oracle_value", "abs_err"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({c: r[c] for c in cols})


def tangent_curve(g, n: int = 201) -> np.ndarray:
    """Plot data: columns ``s, g(s), g'(s), g(s) - s g'(s)``."""
    prof = _profile_fn(g)
    s = np.linspace(0.0, 1.0, n)
    g0, g1 = prof(s), prof(s, 1)
    return np.column_stack([s, g0, g1, g0 - s * g1])
