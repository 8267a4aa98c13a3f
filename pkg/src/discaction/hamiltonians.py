"""Time-periodic Hamiltonians on the plane.

Conventions: ``omega = dx ^ dy`` and ``i_X omega = dH`` so that
``X_H = (dH/dy, -dH/dx)``.  For a radial ``H = g(s)``, ``s = x**2 + y**2``, the
angular speed is ``-2 g'(s)``; the rigid rotation by ``2 pi rho`` per unit time
is generated by ``g(s) = pi rho (1 - s)``.

Every family evaluates through :meth:`HamiltonianSpec.jet`, which returns the
value, gradient and (optionally) Hessian on broadcast arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import ClassVar

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize

from .errors import BoundaryViolation, InvalidShape
from .geometry import as_xy
from .smooth import MollifierProfile, bump, smoothstep

BOUNDARY_TOL = 1e-10


@lru_cache(maxsize=256)
def _poly_derivs(coeffs: tuple) -> tuple:
    """Coefficient tuples of a polynomial and its first two derivatives."""
    c = np.asarray(coeffs, dtype=float)
    return tuple(tuple(P.polyder(c, nu)) if nu else coeffs for nu in range(3))


def _horner(s, coeffs: tuple):
    """Evaluate ``sum_i c_i s**i`` (cheaper than ``polyval`` for short tuples)."""
    if not coeffs:
        return np.zeros_like(s)
    acc = np.full_like(s, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * s + c
    return acc


class HamiltonianSpec:
    """Base class.  Subclasses implement :meth:`jet` and ``to_dict``."""

    kind: ClassVar[str] = ""
    autonomous: ClassVar[bool] = True
    radial: ClassVar[bool] = False

    def jet(self, t, x, y, order: int = 1):
        """Return ``(H, Hx, Hy)`` or, with ``order=2``, also ``(Hxx, Hxy, Hyy)``."""
        raise NotImplementedError

    def value(self, t, x, y):
        return self.jet(t, x, y, order=0)[0]

    def gradient(self, t, x, y):
        return self.jet(t, x, y, order=1)[1:3]

    def hessian(self, t, x, y):
        return self.jet(t, x, y, order=2)[3:6]

    def vector_field(self, t, x, y):
        _, hx, hy = self.jet(t, x, y, order=1)
        return hy, -hx

    def boundary_max(self, n_theta: int = 256, n_t: int = 16) -> float:
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        t = np.arange(n_t)[:, None] / n_t
        vals = self.value(t, np.cos(theta)[None, :], np.sin(theta)[None, :])
        return float(np.max(np.abs(vals)))

    def vanishes_on_boundary(self, tol: float = BOUNDARY_TOL) -> bool:
        return self.boundary_max() <= tol

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __add__(self, other: "HamiltonianSpec") -> "LinearCombination":
        return LinearCombination((self, other), (1.0, 1.0))

    def __neg__(self) -> "HamiltonianSpec":
        return LinearCombination((self,), (-1.0,))


def _broadcast(t, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.asarray(t, dtype=float), x, y


class RadialHamiltonian(HamiltonianSpec):
    """Autonomous ``H(z) = g(|z|**2)``; subclasses provide ``profile(s, nu)``."""

    radial = True

    def profile(self, s, nu: int = 0):
        raise NotImplementedError

    def jet(self, t, x, y, order: int = 1):
        _, x, y = _broadcast(t, x, y)
        s = x * x + y * y
        g = self.profile(s, 0)
        if order == 0:
            return (g,)
        g1 = self.profile(s, 1)
        out = (g, 2 * x * g1, 2 * y * g1)
        if order == 1:
            return out
        g2 = self.profile(s, 2)
        return out + (2 * g1 + 4 * x * x * g2, 4 * x * y * g2, 2 * g1 + 4 * y * y * g2)

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class RotationFamily(RadialHamiltonian):
    """Rigid rotation by ``2 pi rho`` per unit time: ``g(s) = pi rho (1 - s)``."""

    rho: float

    kind: ClassVar[str] = "rotation_family"

    def profile(self, s, nu: int = 0):
        s = np.asarray(s, dtype=float)
        c = np.pi * self.rho
        if nu == 0:
            return c * (1.0 - s)
        if nu == 1:
            return np.full_like(s, -c)
        return np.zeros_like(s)

    def is_zero(self) -> bool:
        return self.rho == 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rho": float(self.rho)}


@dataclass(frozen=True)
class RadialPoly(RadialHamiltonian):
    """Polynomial profile ``g(s) = sum_i c_i s**i`` (ascending coefficients).

    Coefficients are orthogonally projected onto ``sum(c) = 0`` so that
    ``g(1) = 0``.
    """

    coeffs: tuple = (0.0,)

    kind: ClassVar[str] = "radial_poly"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        c = c - c.sum() / len(c)
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def _c(self):
        return np.asarray(self.coeffs)

    def profile(self, s, nu: int = 0):
        return _horner(np.asarray(s, dtype=float), _poly_derivs(self.coeffs)[nu])

    def is_zero(self) -> bool:
        return not np.any(self._c)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coeffs": list(self.coeffs)}


def zero_hamiltonian() -> RadialPoly:
    return RadialPoly((0.0,))


@dataclass(frozen=True)
class RadialStaircase(RadialHamiltonian):
    """Profile equal to ``lam`` up to ``s = 1 - 2 eps``, rising monotonically to
    zero before ``1 - eps``, followed by one bump of height ``M`` supported in
    ``(bump_lo, bump_hi)`` inside ``(1 - eps, 1)``.

    ``lam`` enters linearly, so the family is smooth in ``lam``.
    """

    lam: float
    eps: float
    M: float
    bump_lo: float | None = None
    bump_hi: float | None = None

    kind: ClassVar[str] = "radial_staircase"

    def __post_init__(self):
        if self.lam > 0:
            raise ValueError("lam must be <= 0")
        if not 0 < self.eps < 0.25:
            raise ValueError("eps must lie in (0, 1/4)")
        if self.M <= 0:
            raise ValueError("M must be positive")
        w = self.eps / 8
        if self.bump_lo is None:
            object.__setattr__(self, "bump_lo", 1 - self.eps + w)
        if self.bump_hi is None:
            object.__setattr__(self, "bump_hi", 1 - w)
        if not (1 - self.eps < self.bump_lo < self.bump_hi < 1):
            raise InvalidShape(
                f"bump support [{self.bump_lo}, {self.bump_hi}] must sit strictly inside "
                f"({1 - self.eps}, 1)")

    @property
    def ramp(self) -> tuple[float, float]:
        """Interval on which the profile climbs from ``lam`` to 0."""
        return 1 - 2 * self.eps, 1 - self.eps - self.eps / 8

    def profile(self, s, nu: int = 0):
        s = np.asarray(s, dtype=float)
        s0, s1 = self.ramp
        u = (s - s0) / (s1 - s0)
        lo, hi = self.bump_lo, self.bump_hi
        v = (2 * s - lo - hi) / (hi - lo)
        dv = 2 / (hi - lo)
        if nu == 0:
            return self.lam * (1 - smoothstep(u)) + self.M * bump(v)
        du = 1 / (s1 - s0)
        return (-self.lam * smoothstep(u, nu) * du ** nu
                + self.M * bump(v, nu) * dv ** nu)

    def is_zero(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "eps": self.eps, "M": self.M,
                "bump_lo": self.bump_lo, "bump_hi": self.bump_hi}


@dataclass(frozen=True)
class FourierMode:
    """Term ``amplitude * r**m * cos(m theta + 2 pi l t + phase)``."""

    amplitude: float
    m: int
    l: int = 0
    phase: float = 0.0

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "m": self.m, "l": self.l, "phase": self.phase}


@dataclass(frozen=True)
class PerturbedRadial(HamiltonianSpec):
    """Radial base plus ``envelope(s) * sum(modes)``; the envelope vanishes at s=1.

    Each mode is ``Re(w (x + i y)**m)`` with ``w = amplitude * exp(i(2 pi l t +
    phase))``, a polynomial in ``x, y`` and hence smooth at the origin.
    """

    base: RadialHamiltonian
    modes: tuple = ()
    envelope: tuple = (1.0, -1.0)

    kind: ClassVar[str] = "perturbed_radial"

    def __post_init__(self):
        modes = tuple(m if isinstance(m, FourierMode) else FourierMode(**m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "envelope", tuple(float(c) for c in self.envelope))
        if abs(sum(self.envelope)) > 1e-14:
            raise BoundaryViolation("perturbation envelope must vanish at s = 1")
        if any(m.m < 0 for m in modes):
            raise ValueError("angular mode numbers must be non-negative")

    @property
    def autonomous(self) -> bool:  # type: ignore[override]
        return all(m.l == 0 for m in self.modes)

    def jet(self, t, x, y, order: int = 1):
        t, x, y = _broadcast(t, x, y)
        base = self.base.jet(t, x, y, order)
        shape = np.broadcast(t, x).shape
        out = [b if b.shape == shape else np.broadcast_to(b, shape).copy() for b in base]
        if not self.modes:
            return tuple(out)
        s = x * x + y * y
        cs = _poly_derivs(self.envelope)
        e = _horner(s, cs[0])
        z = x + 1j * y
        Q = 0.0
        Q1 = 0.0
        Q2 = 0.0
        for mode in self.modes:
            w = mode.amplitude * np.exp(1j * (2 * np.pi * mode.l * t + mode.phase))
            Q = Q + w * z ** mode.m
            if mode.m >= 1 and order >= 1:
                Q1 = Q1 + w * mode.m * z ** (mode.m - 1)
            if mode.m >= 2 and order >= 2:
                Q2 = Q2 + w * mode.m * (mode.m - 1) * z ** (mode.m - 2)
        q = np.real(Q)
        out[0] = out[0] + e * q
        if order == 0:
            return (out[0],)
        e1 = _horner(s, cs[1])
        ex, ey = 2 * x * e1, 2 * y * e1
        qx, qy = np.real(Q1), -np.imag(Q1)
        out[1] = out[1] + ex * q + e * qx
        out[2] = out[2] + ey * q + e * qy
        if order == 1:
            return tuple(out)
        e2 = _horner(s, cs[2])
        exx, exy, eyy = 2 * e1 + 4 * x * x * e2, 4 * x * y * e2, 2 * e1 + 4 * y * y * e2
        qxx, qxy = np.real(Q2), -np.imag(Q2)
        qyy = -qxx
        out[3] = out[3] + exx * q + 2 * ex * qx + e * qxx
        out[4] = out[4] + exy * q + ex * qy + ey * qx + e * qxy
        out[5] = out[5] + eyy * q + 2 * ey * qy + e * qyy
        return tuple(out)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(),
                "modes": [m.to_dict() for m in self.modes], "envelope": list(self.envelope)}


@lru_cache(maxsize=64)
def _mollifier(refined: bool, n: int) -> MollifierProfile:
    return MollifierProfile(refined=refined, n=n)


@dataclass(frozen=True)
class Mollified(HamiltonianSpec):
    """Compactly supported extension ``H_n(t, 1 + r, theta) = H(t, 1 + rho_n(r), theta)``
    of a boundary-vanishing ``base``, with ``rho_n(r) = rho(n r) / n``.

    Agrees with ``base`` on the closed unit disc and vanishes for
    ``|z| >= 1 + 1/n``.
    """

    base: HamiltonianSpec
    n: int
    refined: bool = False
    fd_step: float = field(default=1e-6, repr=False, compare=False)

    kind: ClassVar[str] = "mollified"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def autonomous(self) -> bool:  # type: ignore[override]
        return self.base.autonomous

    @property
    def mollifier(self) -> MollifierProfile:
        return _mollifier(self.refined, self.n if self.refined else 1)

    @property
    def support_radius(self) -> float:
        return 1.0 + 1.0 / self.n

    def _jet1(self, t, x, y, order):
        t, x, y = _broadcast(t, x, y)
        shape = np.broadcast(t, x, y).shape
        x = np.broadcast_to(x, shape)
        y = np.broadcast_to(y, shape)
        t = np.broadcast_to(t, shape)
        R = np.hypot(x, y)
        out = [np.zeros(shape) for _ in range(3 if order else 1)]
        inside = R <= 1.0
        if np.any(inside):
            vals = self.base.jet(t[inside], x[inside], y[inside], min(order, 1))
            for k, v in enumerate(vals):
                out[k][inside] = v
        collar = (~inside) & (R < self.support_radius)
        if np.any(collar):
            Rc = R[collar]
            rho_n, drho_n = self.mollifier.scaled(Rc - 1.0, self.n)
            Rp = 1.0 + rho_n
            ux, uy = x[collar] / Rc, y[collar] / Rc
            vals = self.base.jet(t[collar], ux * Rp, uy * Rp, min(order, 1))
            out[0][collar] = vals[0]
            if order:
                gx, gy = vals[1], vals[2]
                g_rad = gx * ux + gy * uy
                g_ang = -gx * uy + gy * ux
                a = drho_n * g_rad
                b = (Rp / Rc) * g_ang
                out[1][collar] = a * ux - b * uy
                out[2][collar] = a * uy + b * ux
        return out

    def jet(self, t, x, y, order: int = 1):
        out = self._jet1(t, x, y, order)
        if order < 2:
            return tuple(out)
        # Hessian by central differences of the analytic gradient
        h = self.fd_step
        gxp = self._jet1(t, np.asarray(x) + h, y, 1)
        gxm = self._jet1(t, np.asarray(x) - h, y, 1)
        gyp = self._jet1(t, x, np.asarray(y) + h, 1)
        gym = self._jet1(t, x, np.asarray(y) - h, 1)
        hxx = (gxp[1] - gxm[1]) / (2 * h)
        hyy = (gyp[2] - gym[2]) / (2 * h)
        hxy = 0.5 * ((gxp[2] - gxm[2]) + (gyp[1] - gym[1])) / (2 * h)
        return tuple(out) + (hxx, hxy, hyy)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "n": int(self.n),
                "refined": bool(self.refined)}


@dataclass(frozen=True)
class LinearCombination(HamiltonianSpec):
    """Pointwise ``sum_i w_i H_i``."""

    terms: tuple
    weights: tuple = ()

    kind: ClassVar[str] = "linear_combination"

    def __post_init__(self):
        terms = tuple(self.terms)
        weights = tuple(float(w) for w in (self.weights or (1.0,) * len(terms)))
        if len(weights) != len(terms):
            raise ValueError("terms and weights differ in length")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "weights", weights)

    @property
    def autonomous(self) -> bool:  # type: ignore[override]
        return all(h.autonomous for h in self.terms)

    def jet(self, t, x, y, order: int = 1):
        acc = None
        for w, h in zip(self.weights, self.terms):
            vals = h.jet(t, x, y, order)
            if acc is None:
                acc = [w * v for v in vals]
            else:
                acc = [a + w * v for a, v in zip(acc, vals)]
        if acc is None:
            shape = np.broadcast(np.asarray(t), np.asarray(x), np.asarray(y)).shape
            return tuple(np.zeros(shape) for _ in range({0: 1, 1: 3, 2: 6}[order]))
        return tuple(acc)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "terms": [h.to_dict() for h in self.terms],
                "weights": list(self.weights)}


@dataclass(frozen=True)
class PrecomposedRotation(HamiltonianSpec):
    """``K(z) + H(t, R_{2 pi k t} z)`` with ``K = pi (-k)(1 - s)``.

    Generates the full-turn rotation path by ``-2 pi k`` composed after the
    isotopy of ``base``.
    """

    base: HamiltonianSpec
    k: int

    kind: ClassVar[str] = "precomposed_rotation"

    @property
    def autonomous(self) -> bool:  # type: ignore[override]
        return self.k == 0 and self.base.autonomous

    def jet(self, t, x, y, order: int = 1):
        t, x, y = _broadcast(t, x, y)
        a = 2 * np.pi * self.k * t
        c, s = np.cos(a), np.sin(a)
        xr, yr = c * x - s * y, s * x + c * y
        vals = list(self.base.jet(t, xr, yr, order))
        if order >= 1:
            gx, gy = vals[1], vals[2]
            vals[1], vals[2] = c * gx + s * gy, -s * gx + c * gy
        if order >= 2:
            hxx, hxy, hyy = vals[3], vals[4], vals[5]
            # R^T Hess R
            vals[3] = c * c * hxx + 2 * c * s * hxy + s * s * hyy
            vals[4] = -c * s * hxx + (c * c - s * s) * hxy + c * s * hyy
            vals[5] = s * s * hxx - 2 * c * s * hxy + c * c * hyy
        frame = RotationFamily(-float(self.k)).jet(t, x, y, order)
        return tuple(v + f for v, f in zip(vals, frame))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "k": int(self.k)}


# ---------------------------------------------------------------- operations

def evaluate(H: HamiltonianSpec, t: float, z) -> float | np.ndarray:
    """Value ``H(t, z)`` for a point or an (N, 2) array of points."""
    p = as_xy(z)
    return H.value(t, p[..., 0], p[..., 1])


def hamiltonian_vector_field(H: HamiltonianSpec, t: float, z) -> np.ndarray:
    """``X_{H^t}(z) = (dH/dy, -dH/dx)``."""
    p = as_xy(z)
    vx, vy = H.vector_field(t, p[..., 0], p[..., 1])
    return np.stack([vx, vy], axis=-1)


def is_identically_zero(H: HamiltonianSpec, samples: int = 24) -> bool:
    """Exact for radial and rotation families; sampled otherwise."""
    if isinstance(H, RadialHamiltonian):
        return H.is_zero()
    g = np.linspace(-1, 1, samples)
    X, Y = np.meshgrid(g, g)
    inside = X ** 2 + Y ** 2 <= 1
    for t in np.linspace(0, 1, 7, endpoint=False):
        vals = H.jet(t, X[inside], Y[inside], 1)
        if any(np.max(np.abs(v)) > 0 for v in vals):
            return False
    return True


def build_mollified(base: HamiltonianSpec, n: int, refined: bool = False) -> Mollified:
    bmax = base.boundary_max()
    if bmax > BOUNDARY_TOL:
        raise BoundaryViolation(f"base Hamiltonian reaches {bmax:.3g} on the unit circle")
    return Mollified(base, int(n), bool(refined))


def precompose_rotation(H: HamiltonianSpec, k: int) -> HamiltonianSpec:
    """Hamiltonian of the isotopy ``R_{-2 pi k t} o phi_t``; closed forms are kept
    where the family allows it."""
    k = int(k)
    if k == 0:
        return H
    if isinstance(H, RotationFamily):
        return RotationFamily(H.rho - k)
    if isinstance(H, RadialPoly):
        c = list(H.coeffs) + [0.0] * max(0, 2 - len(H.coeffs))
        c[0] -= np.pi * k
        c[1] += np.pi * k
        return RadialPoly(tuple(c))
    if isinstance(H, PrecomposedRotation):
        return precompose_rotation(H.base, H.k + k)
    if H.radial:
        return LinearCombination((RotationFamily(-float(k)), H), (1.0, 1.0))
    return PrecomposedRotation(H, k)


def build_staircase(lam: float, eps: float, M: float, **bump) -> RadialStaircase:
    return RadialStaircase(lam, eps, M, **bump)


def negate(H: HamiltonianSpec) -> HamiltonianSpec:
    """Hamiltonian of the inverse isotopy; only valid for autonomous ``H``."""
    if not H.autonomous:
        raise NotImplementedError("inverse isotopy of a time-dependent Hamiltonian")
    if isinstance(H, RotationFamily):
        return RotationFamily(-H.rho)
    if isinstance(H, RadialPoly):
        return RadialPoly(tuple(-c for c in H.coeffs))
    if isinstance(H, PerturbedRadial) and isinstance(H.base, (RadialPoly, RotationFamily)):
        modes = tuple(FourierMode(-m.amplitude, m.m, m.l, m.phase) for m in H.modes)
        return PerturbedRadial(negate(H.base), modes, H.envelope)
    return LinearCombination((H,), (-1.0,))


# ------------------------------------------------------------- Hofer norms

def _region_disc(region) -> tuple[float, float, bool]:
    """Return (r_min, r_max, include_zero) for a region specification."""
    if isinstance(region, str):
        name, _, arg = region.partition(":")
    else:
        name, arg = region[0], region[1]
    name = name.lower()
    if name == "disc":
        return 0.0, 1.0, False
    if name == "plane":
        return 0.0, None, True
    if name == "annulus":
        n = int(arg)
        return 1.0, 1.0 + 1.0 / n, False
    raise ValueError(f"unknown region {region!r}")


def _extremes(H, t, r_lo, r_hi, n_r=129, n_theta=256):
    r = np.sqrt(np.linspace(r_lo ** 2, r_hi ** 2, n_r))
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    X, Y = R * np.cos(TH), R * np.sin(TH)
    vals = H.value(t, X, Y)
    best = []
    for sign in (1.0, -1.0):
        i = np.unravel_index(np.argmax(sign * vals), vals.shape)
        x0 = np.array([R[i], TH[i]])

        def f(p):
            return -sign * float(H.value(t, p[0] * np.cos(p[1]), p[0] * np.sin(p[1])))

        res = minimize(f, x0, method="L-BFGS-B",
                       bounds=[(r_lo, r_hi), (x0[1] - 0.5, x0[1] + 0.5)])
        best.append(max(sign * vals[i], -res.fun) * sign)
    return best[0], best[1]


def hofer_norm(H: HamiltonianSpec, region="disc", n_t: int = 64) -> float:
    """``int_0^1 (max_E H_t - min_E H_t) dt`` over ``region``.

    ``region`` is ``"disc"``, ``"plane"`` or ``"annulus:n"`` (``1 <= |z| <= 1 + 1/n``).
    On the plane a non-mollified ``H`` is extended by zero outside the disc.
    """
    r_lo, r_hi, include_zero = _region_disc(region)
    if r_hi is None:
        r_hi = H.support_radius if isinstance(H, Mollified) else 1.0
    times = [0.0] if H.autonomous else (np.arange(n_t) + 0.5) / n_t
    osc = []
    for t in times:
        hi, lo = _extremes(H, t, r_lo, r_hi)
        if include_zero:
            hi, lo = max(hi, 0.0), min(lo, 0.0)
        osc.append(hi - lo)
    return float(np.mean(osc))


def grad_bound_outside_disc(H: Mollified, rel_tol: float = 0.01, max_doublings: int = 6) -> float:
    """Sampled ``sup |grad H_n|`` over ``1 <= |z| <= 1 + 1/n`` and one period in t.

    The sampling grid is doubled until the estimate moves by less than ``rel_tol``.
    """
    if not isinstance(H, Mollified):
        raise TypeError("grad_bound_outside_disc expects a Mollified Hamiltonian")
    n_r, n_th, n_t = 17, 64, 1 if H.autonomous else 8
    prev = None
    for _ in range(max_doublings + 1):
        r = np.linspace(1.0, H.support_radius, n_r)
        th = 2 * np.pi * np.arange(n_th) / n_th
        R, TH = np.meshgrid(r, th, indexing="ij")
        X, Y = R * np.cos(TH), R * np.sin(TH)
        best = 0.0
        for t in np.arange(n_t) / n_t:
            gx, gy = H.gradient(t, X, Y)
            best = max(best, float(np.max(np.hypot(gx, gy))))
        if prev is not None and abs(best - prev) <= rel_tol * max(abs(best), 1e-300):
            return best
        if prev is not None and best == 0.0 == prev:
            return 0.0
        prev = best
        n_r = 2 * n_r - 1
        n_th *= 2
        if not H.autonomous:
            n_t *= 2
    return prev


def sup_outside_disc(H: Mollified, n_r: int = 257, n_theta: int = 128, n_t: int = 8) -> float:
    """Sampled ``sup |H_n|`` over the collar ``1 <= |z| <= 1 + 1/n``."""
    r = np.linspace(1.0, H.support_radius, n_r)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    X, Y = R * np.cos(TH), R * np.sin(TH)
    times = [0.0] if H.autonomous else np.arange(n_t) / n_t
    return float(max(np.max(np.abs(H.value(t, X, Y))) for t in times))


def mollifier_diagnostics(base: HamiltonianSpec, n_list=(4, 8, 16, 32, 64, 128, 256),
                          outer_samples: int = 4096) -> dict:
    """Support, sup-norm and gradient bound of the mollified extensions of
    ``base`` outside the unit disc, plus the slope floor of the refined cut-off.

    ``support_leak`` is the largest ``|H_n|`` sampled on ``1 + 1/n <= |z| <= 2``
    (zero when the support claim holds exactly).  ``sup_slope`` is the
    least-squares log-log slope of the sup-norm against ``n``.
    """
    rows = []
    for n in n_list:
        Hn = build_mollified(base, n)
        r = np.linspace(Hn.support_radius, 2.0, outer_samples)
        th = np.linspace(0.0, 2 * np.pi, outer_samples, endpoint=False)
        leak = float(np.max(np.abs(Hn.value(0.0, r * np.cos(th), r * np.sin(th)))))
        refined = MollifierProfile(refined=True, n=n) if n >= 2 else None
        rows.append({
            "n": int(n),
            "support_radius": Hn.support_radius,
            "support_leak": leak,
            "sup_outside": sup_outside_disc(Hn),
            "grad_outside": grad_bound_outside_disc(Hn),
            "refined_min_slope": refined.slope_bounds()[0] if refined else None,
            "refined_slope_floor": -1.0 / n,
        })
    ns = np.array([row["n"] for row in rows], dtype=float)
    sups = np.array([row["sup_outside"] for row in rows])
    slope = float(np.polyfit(np.log(ns), np.log(sups), 1)[0]) if np.all(sups > 0) and len(ns) > 1 else None
    return {"rows": rows, "sup_slope": slope, "plain_profile_sup": MollifierProfile().sup()}


# ------------------------------------------------------------ serialization

def to_dict(H: HamiltonianSpec) -> dict:
    return H.to_dict()


def from_dict(d: dict) -> HamiltonianSpec:
    kind = d["kind"]
    if kind == "rotation_family":
        return RotationFamily(float(d["rho"]))
    if kind == "radial_poly":
        return RadialPoly(tuple(d["coeffs"]))
    if kind == "radial_staircase":
        return RadialStaircase(float(d.get("lambda", d.get("lam"))), float(d["eps"]), float(d["M"]),
                               d.get("bump_lo"), d.get("bump_hi"))
    if kind == "perturbed_radial":
        return PerturbedRadial(from_dict(d["base"]),
                               tuple(FourierMode(**m) for m in d.get("modes", [])),
                               tuple(d.get("envelope", (1.0, -1.0))))
    if kind == "mollified":
        return Mollified(from_dict(d["base"]), int(d["n"]), bool(d.get("refined", False)))
    if kind == "linear_combination":
        return LinearCombination(tuple(from_dict(t) for t in d["terms"]), tuple(d.get("weights", ())))
    if kind == "precomposed_rotation":
        return PrecomposedRotation(from_dict(d["base"]), int(d["k"]))
    raise ValueError(f"unknown Hamiltonian kind {kind!r}")


def describe(H: HamiltonianSpec) -> str:
    """Short human-readable label."""
    if isinstance(H, RotationFamily):
        return f"rotation(rho={H.rho:g})"
    if isinstance(H, RadialPoly):
        if H.is_zero():
            return "zero"
        return "radial_poly(" + ",".join(f"{c:g}" for c in H.coeffs) + ")"
    if isinstance(H, RadialStaircase):
        return f"staircase(lam={H.lam:g},eps={H.eps:g},M={H.M:g})"
    if isinstance(H, PerturbedRadial):
        amp = max((abs(m.amplitude) for m in H.modes), default=0.0)
        return f"perturbed({describe(H.base)},amp={amp:g},modes={len(H.modes)})"
    if isinstance(H, Mollified):
        return f"mollified({describe(H.base)},n={H.n}{',refined' if H.refined else ''})"
    if isinstance(H, PrecomposedRotation):
        return f"precomposed({describe(H.base)},k={H.k})"
    return H.kind

