"""Executable checks of the disc results on computable families.

Each check returns a :class:`VerificationVerdict`.  Sampled spectra only bound
the true infimum from above and the supremum from below, so a check that fails
to find a witness reports ``INCONCLUSIVE``.  ``VIOLATION`` is reserved for a
closed-form quantity contradicting a statement by more than ten times the
tolerance.
"""
from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .action import DISC_AREA, calabi_report
from .errors import BoundaryViolation, IndeterminateCase, PreconditionRho
from .flow import propagate
from .hamiltonians import (FourierMode, HamiltonianSpec, PerturbedRadial, RadialPoly,
                           RotationFamily, build_mollified, describe, is_identically_zero,
                           negate, zero_hamiltonian)
from .radial import rotation_spectral_invariants, _pinned_c_plus, tangent_spectrum
from .spectrum import (_json_default, boundary_rotation_number, find_periodic_orbits,
                       radial_profile)


class Status(str, enum.Enum):
    WITNESS_FOUND = "WITNESS_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"
    VIOLATION = "VIOLATION"


@dataclass
class VerificationVerdict:
    check_name: str
    status: Status
    evidence: dict = field(default_factory=dict)
    family: dict | None = None
    runtime_s: float | None = None

    @property
    def witnessed(self) -> bool:
        return self.status is Status.WITNESS_FOUND

    def to_dict(self) -> dict:
        return {"check_name": self.check_name, "status": self.status.value,
                "evidence": self.evidence, "family": self.family, "runtime_s": self.runtime_s}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), default=_json_default, **kw)

    def line(self) -> str:
        fam = self.family.get("kind", "?") if isinstance(self.family, dict) else "?"
        return f"{self.check_name:<22} {fam:<18} {self.status.value}"


def _timed(fn: Callable) -> Callable:
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        v = fn(*a, **kw)
        v.runtime_s = time.perf_counter() - t0
        return v

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _family(H) -> dict | None:
    try:
        return H.to_dict()
    except NotImplementedError:
        return {"kind": describe(H)}


def _require_boundary(H: HamiltonianSpec):
    if not H.vanishes_on_boundary():
        raise BoundaryViolation(f"H does not vanish on the unit circle (max {H.boundary_max():.3g})")


def _interior_sample(H, K: int, grid: int):
    orbits = find_periodic_orbits(H, K, grid)
    vals = sorted({round(o.mean_action, 12) for o in orbits if o.interior})
    return orbits, [float(v) for v in vals]


# ---------------------------------------------------------------- Hutchings


@_timed
def check_hutchings(H: HamiltonianSpec, K: int = 16, grid: int = 64, tol: float = 1e-6,
                    orbits=None) -> VerificationVerdict:
    """Bracket the area-normalised Calabi invariant by the sampled interior
    mean action spectrum: ``min(sample) <= Cal_norm <= max(sample)``."""
    _require_boundary(H)
    cal = calabi_report(H)
    cal_norm = cal["calabi_normalized"]
    if orbits is None:
        orbits, sample = _interior_sample(H, K, grid)
    else:
        sample = sorted({float(o.mean_action) for o in orbits if o.interior})
    ev = {"calabi_normalized": cal_norm, "calabi_H": cal["calabi_H"],
          "calabi_sigma": cal["calabi_sigma"], "K": K, "grid": grid, "tol": tol,
          "sample_size": len(sample), "dropped_seeds": getattr(orbits, "dropped", 0),
          "sample_min": min(sample) if sample else None,
          "sample_max": max(sample) if sample else None,
          "note": "sampled extrema bound the true inf from above and sup from below"}
    if isinstance(H, RotationFamily):
        exact = math.pi * H.rho
        ev["closed_form"] = exact
        if abs(cal_norm - exact) > 10 * tol:
            return VerificationVerdict("hutchings", Status.VIOLATION, ev, _family(H))
    ok = bool(sample) and sample[0] - tol <= cal_norm <= sample[-1] + tol
    return VerificationVerdict("hutchings", Status.WITNESS_FOUND if ok else Status.INCONCLUSIVE,
                               ev, _family(H))


def check_hutchings_inverse(H: HamiltonianSpec, K: int = 16, grid: int = 64,
                            tol: float = 1e-6) -> VerificationVerdict:
    """The same bracket for the inverse isotopy (autonomous ``H`` only)."""
    v = check_hutchings(negate(H), K, grid, tol)
    v.check_name = "hutchings_inverse"
    return v


# ------------------------------------------------------------------ closure


@_timed
def check_boundary_in_closure(H: HamiltonianSpec, K: int = 16, tol: float | None = None,
                              grid: int = 64, orbits=None,
                              rotation_iterates: int = 10_000) -> VerificationVerdict:
    """Look for an interior mean action within ``tol`` of the boundary mean
    action ``a = pi rho``; default ``tol = max(0.1, 4 pi / K)``."""
    if tol is None:
        tol = max(0.1, 4 * DISC_AREA / K)
    rho = boundary_rotation_number(H, rotation_iterates)
    a = DISC_AREA * rho
    if orbits is None:
        orbits, sample = _interior_sample(H, K, grid)
    else:
        sample = sorted({float(o.mean_action) for o in orbits if o.interior})
    dist = min((abs(v - a) for v in sample), default=math.inf)
    nearest = min(sample, key=lambda v: abs(v - a)) if sample else None
    ev = {"a": a, "rho": rho, "K": K, "tol": tol, "nearest": nearest, "distance": dist,
          "sample_size": len(sample)}
    ok = dist <= tol
    return VerificationVerdict("closure", Status.WITNESS_FOUND if ok else Status.INCONCLUSIVE,
                               ev, _family(H))


# ------------------------------------------------------------------ Brouwer


@_timed
def check_quantitative_brouwer(H: HamiltonianSpec, grid: int = 64, slack: float = 1e-6,
                               rotation_iterates: int = 10_000) -> VerificationVerdict:
    """Search interior fixed points with ``|sigma(x) - pi k| <= pi`` where
    ``a = pi rho`` lies in ``[k pi, (k + 1) pi)``."""
    _require_boundary(H)
    rho = boundary_rotation_number(H, rotation_iterates)
    a = DISC_AREA * rho
    k = math.floor(rho + 1e-9)
    fixed = [o for o in find_periodic_orbits(H, 1, grid) if o.interior]
    rows = [{"point": list(o.point), "sigma": o.action_total,
             "gap": abs(o.action_total - math.pi * k)} for o in fixed]
    wit = [r for r in rows if r["gap"] <= math.pi + slack]
    ev = {"a": a, "rho": rho, "k": k, "bound": math.pi, "slack": slack,
          "fixed_points": len(rows), "witnesses": wit,
          "best": min(wit, key=lambda r: r["gap"]) if wit else None}
    return VerificationVerdict("brouwer", Status.WITNESS_FOUND if wit else Status.INCONCLUSIVE,
                               ev, _family(H))


# --------------------------------------------------------------------- wind


def _collar_seeds(n: int, n_r: int, n_theta: int) -> np.ndarray:
    r = 1.0 + (np.arange(n_r) + 0.5) / (n_r * n)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    return np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])


def collar_windings(H: HamiltonianSpec, n: int, n_r: int = 8, n_theta: int = 32,
                    steps: int = 2000, refined: bool = True):
    """Windings of time-one segments of the refined mollification ``H_n``
    started in the collar ``1 < |z| < 1 + 1/n``.

    Returns ``(windings, kept)``; ``kept`` is False for segments that enter the
    open unit disc.
    """
    Hn = build_mollified(H, n, refined=refined)
    seeds = _collar_seeds(n, n_r, n_theta)

    def integrands(t, x, y, vx, vy):
        r2 = x * x + y * y
        dtheta = (x * vy - y * vx) / r2 / (2 * np.pi)
        inside = np.maximum(0.0, 1.0 - np.sqrt(r2))
        return np.stack([dtheta, inside])

    res = propagate(Hn, seeds, 1.0, steps, extra=integrands, n_extra=2)
    wind, depth = res.extra
    kept = depth <= 1e-12
    return wind, kept


@_timed
def check_wind_bound(H: HamiltonianSpec, n_list: Iterable[int] = (8, 32, 128), n_r: int = 8,
                     n_theta: int = 32, steps: int = 2000, margin: float = 1e-3,
                     rotation_iterates: int = 10_000) -> VerificationVerdict:
    """Windings of collar orbit segments of the refined mollifications stay
    below one in absolute value when ``|rho| < 1``."""
    _require_boundary(H)
    rho = boundary_rotation_number(H, rotation_iterates)
    if abs(rho) >= 1:
        raise PreconditionRho(f"boundary rotation number {rho:.6g} has |rho| >= 1")
    per_n = []
    for n in sorted(n_list):
        wind, kept = collar_windings(H, n, n_r, n_theta, steps)
        w = wind[kept]
        per_n.append({"n": n, "segments": int(len(wind)), "kept": int(kept.sum()),
                      "min_wind": float(w.min()) if w.size else None,
                      "max_wind": float(w.max()) if w.size else None,
                      "max_abs_wind": float(np.abs(w).max()) if w.size else None})
    last = per_n[-1]
    ok = last["kept"] > 0 and last["max_abs_wind"] < 1 - margin
    ev = {"rho": rho, "margin": margin, "autonomous": H.autonomous, "per_n": per_n}
    return VerificationVerdict("wind", Status.WITNESS_FOUND if ok else Status.INCONCLUSIVE,
                               ev, _family(H))


# --------------------------------------------------------------- membership


def _in(v: float, allowed: Iterable[float], tol: float) -> bool:
    return any(abs(v - a) <= tol for a in allowed)


def membership_clauses(rho: float, tol: float = 1e-12) -> list[dict]:
    """Every applicable membership statement for the rotation by ``rho``."""
    inv = rotation_spectral_invariants(rho)
    cp, cm = inv.c_plus, inv.c_minus
    spec = [math.pi * rho]
    A = DISC_AREA
    out = []

    def add(name, applies, holds):
        if applies:
            out.append({"rho": rho, "clause": name, "holds": bool(holds)})

    add("c+ in spec+{0,A}", True, _in(cp, spec + [0.0, A], tol))
    add("c- in spec+{0,-A}", True, _in(cm, spec + [0.0, -A], tol))
    add("c+ in spec+{0} (-1<rho<=1)", -1 < rho <= 1, _in(cp, spec + [0.0], tol))
    add("c+ in spec (0<=rho<=1)", 0 <= rho <= 1, _in(cp, spec, tol))
    add("c- in spec+{0} (-1<=rho<1)", -1 <= rho < 1, _in(cm, spec + [0.0], tol))
    add("c- in spec (-1<=rho<=0)", -1 <= rho <= 0, _in(cm, spec, tol))
    add("rho>0 => c+>0", rho > 0, cp > 0)
    add("rho<0 => c-<0", rho < 0, cm < 0)
    add("c+ non-spectral (rho>1 or rho<0)", rho > 1 or rho < 0, not _in(cp, spec, tol))
    add("c- non-spectral (rho>0 or rho<-1)", rho > 0 or rho < -1, not _in(cm, spec, tol))
    add("c- <= 0 <= c+", True, cm <= 0 <= cp)
    add("gamma <= A", True, inv.gamma <= A + tol)
    dual = rotation_spectral_invariants(-rho)
    add("duality c+(rho) = -c-(-rho)", True, abs(cp + dual.c_minus) <= tol)
    return out


@_timed
def check_membership(family: str = "rotation", params=None, tol: float = 1e-12) -> VerificationVerdict:
    """Membership of the closed-form invariants in the (extended) spectrum.

    ``family="rotation"``: ``params`` is an iterable of ``rho`` values
    (default 41 values on ``[-2, 2]``).  ``family="radial"``: ``params`` is a
    radial Hamiltonian whose ``c_+`` is pinned in closed form (rotation, zero
    or linear profile); other profiles give ``INCONCLUSIVE``.
    """
    if family == "rotation":
        rhos = np.linspace(-2, 2, 41) if params is None else np.atleast_1d(params)
        clauses = [c for r in rhos for c in membership_clauses(float(r), tol)]
        fails = [c for c in clauses if not c["holds"]]
        corner = [c for c in clauses if "non-spectral" in c["clause"]]
        ev = {"rhos": [float(r) for r in rhos], "clauses_checked": len(clauses),
              "failures": fails, "non_spectral_corner_cases": len(corner),
              "note": "homotopy invariance is exercised only through this sweep"}
        status = Status.VIOLATION if fails else Status.WITNESS_FOUND
        return VerificationVerdict("membership", status, ev, {"kind": "rotation_sweep"})
    if family == "radial":
        H = params
        prof = radial_profile(H)
        if prof is None:
            raise ValueError("radial membership needs a radial autonomous Hamiltonian")
        pinned = _pinned_c_plus(H)
        ts = tangent_spectrum(prof)
        spec = ts.values
        ev = {"spec_period_one": spec}
        if pinned is None or pinned[0] != "exact":
            ev["reason"] = "c_+ not pinned in closed form for this profile"
            return VerificationVerdict("membership", Status.INCONCLUSIVE, ev, _family(H))
        how, cp = pinned
        holds = _in(cp, spec + [0.0, DISC_AREA], 1e-9)
        ev |= {"c_plus": cp, "pinned_by": how, "holds": holds}
        return VerificationVerdict("membership", Status.WITNESS_FOUND if holds else Status.VIOLATION,
                                   ev, _family(H))
    raise ValueError("family must be 'rotation' or 'radial'")


# ------------------------------------------------------------------- suites


def perturbed_families() -> list[PerturbedRadial]:
    base = RadialPoly((0.0, 4.0, -4.0))
    return [PerturbedRadial(base, (FourierMode(0.05, 2, 1),)),
            PerturbedRadial(base, (FourierMode(0.03, 1),)),
            PerturbedRadial(base, (FourierMode(0.05, 3, 0, 0.3),))]


def shipped_families() -> list[HamiltonianSpec]:
    """Families the default suite runs on."""
    return ([zero_hamiltonian()]
            + [RotationFamily(r) for r in (0.25, 0.37, 0.5, 0.75)]
            + [RadialPoly((0.0, 4.0, -4.0))]
            + perturbed_families())


def _budget(H, K: int, grid: int, K_perturbed: int, grid_perturbed: int):
    if radial_profile(H) is None and not is_identically_zero(H):
        return min(K, K_perturbed), min(grid, grid_perturbed)
    return K, grid


def run_all(families: Iterable[HamiltonianSpec] | None = None, K: int = 16, grid: int = 64,
            K_perturbed: int = 4, grid_perturbed: int = 16, tol: float = 1e-6,
            checks: Iterable[str] = ("hutchings", "closure", "brouwer", "wind", "membership"),
            ) -> list[VerificationVerdict]:
    """Run the selected checks on every family.

    Non-radial families use the smaller ``K_perturbed`` / ``grid_perturbed``
    budget for orbit search.  The wind check is skipped (recorded as
    ``INCONCLUSIVE`` with the reason) when ``|rho| >= 1``.  Results are sorted
    by check name, then family.
    """
    fams = list(shipped_families() if families is None else families)
    checks = list(checks)
    out: list[VerificationVerdict] = []
    for H in fams:
        k, g = _budget(H, K, grid, K_perturbed, grid_perturbed)
        orbits = None
        if "hutchings" in checks or "closure" in checks:
            orbits = find_periodic_orbits(H, k, g)
        if "hutchings" in checks:
            out.append(check_hutchings(H, k, g, tol, orbits=orbits))
        if "closure" in checks:
            out.append(check_boundary_in_closure(H, k, None, g, orbits=orbits))
        if "brouwer" in checks:
            out.append(check_quantitative_brouwer(H, g))
        if "wind" in checks:
            try:
                out.append(check_wind_bound(H))
            except PreconditionRho as e:
                out.append(VerificationVerdict("wind", Status.INCONCLUSIVE,
                                               {"skipped": str(e)}, _family(H)))
    if "membership" in checks:
        out.append(check_membership("rotation"))
    out.sort(key=lambda v: (v.check_name, json.dumps(v.family, sort_keys=True, default=str)))
    return out


def exit_code(verdicts: Iterable[VerificationVerdict]) -> int:
    """0 if every verdict is a witness, 1 on any violation, else 2."""
    st = [v.status for v in verdicts]
    if Status.VIOLATION in st:
        return 1
    return 0 if all(s is Status.WITNESS_FOUND for s in st) else 2


__all__ = ["Status", "VerificationVerdict", "check_hutchings", "check_hutchings_inverse",
           "check_boundary_in_closure", "check_quantitative_brouwer", "check_wind_bound",
           "collar_windings", "check_membership", "membership_clauses", "shipped_families",
           "perturbed_families", "run_all", "exit_code", "IndeterminateCase"]
