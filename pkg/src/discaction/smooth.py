"""C-infinity transition and bump functions with closed-form derivatives, and
the cut-off profiles used to build compactly supported extensions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import expit

# below this distance from 0 or 1 the step is flat to double precision
_FLAT = 1.0 / 740.0


def smoothstep(u, nu: int = 0):
    """Smooth step equal to 0 for ``u <= 0`` and 1 for ``u >= 1``.

    ``S(u) = expit(1/(1-u) - 1/u)`` on (0, 1); every derivative vanishes at the
    endpoints.  ``nu`` selects the derivative order (0, 1 or 2).
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    if nu == 0:
        out[u >= 1 - _FLAT] = 1.0
    inner = (u > _FLAT) & (u < 1 - _FLAT)
    if not np.any(inner):
        return out
    v = u[inner]
    w = 1.0 / (1.0 - v) - 1.0 / v
    L = expit(w)
    if nu == 0:
        out[inner] = L
        return out
    L1 = L * (1.0 - L)
    w1 = 1.0 / (1.0 - v) ** 2 + 1.0 / v ** 2
    if nu == 1:
        out[inner] = L1 * w1
        return out
    if nu == 2:
        L2 = L1 * (1.0 - 2.0 * L)
        w2 = 2.0 / (1.0 - v) ** 3 - 2.0 / v ** 3
        out[inner] = L2 * w1 ** 2 + L1 * w2
        return out
    raise ValueError("nu must be 0, 1 or 2")


def bump(v, nu: int = 0):
    """Bump ``exp(1 - 1/(1 - v**2))`` on (-1, 1), zero outside, peak 1 at v=0.

    Its only critical point inside the support is the peak.
    """
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    q = 1.0 - v * v
    inner = q > 1.5e-3
    if not np.any(inner):
        return out
    vi, qi = v[inner], q[inner]
    B = np.exp(1.0 - 1.0 / qi)
    if nu == 0:
        out[inner] = B
    elif nu == 1:
        out[inner] = -2.0 * vi * B / qi ** 2
    elif nu == 2:
        out[inner] = B * (4 * vi ** 2 / qi ** 4 - 2 / qi ** 2 - 8 * vi ** 2 / qi ** 3)
    else:
        raise ValueError("nu must be 0, 1 or 2")
    return out


@dataclass(frozen=True)
class MollifierProfile:
    """Cut-off ``rho`` with ``rho(r) = r`` for r <= 0, ``rho >= 0`` and
    ``rho = 0`` for r >= 1.

    The plain profile is ``r * (1 - S(r))``.  The refined profile for index
    ``n`` has slope in ``[-1/n, 1]``: it rises with slope one, turns over and
    descends with slope ``-1/n`` back to zero.
    """

    refined: bool = False
    n: int = 1

    def __post_init__(self):
        if self.refined and self.n < 2:
            raise ValueError("refined profile needs n >= 2")

    # refined slope: 1 - (1 + c) S(r / a) + c S((r - b) / a), c = 1/n
    @property
    def _c(self) -> float:
        return 1.0 / self.n

    @property
    def _a(self) -> float:
        c = self._c
        return 2 * c / (1 + 2 * c)

    @cached_property
    def _step_integral(self) -> CubicHermiteSpline:
        # I(u) = int_0^u S, tabulated once on a fine grid
        u = np.linspace(0.0, 1.0, 4097)
        xg, wg = np.polynomial.legendre.leggauss(12)
        lo, hi = u[:-1], u[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * xg[None, :]
        panels = (smoothstep(nodes) * wg[None, :]).sum(axis=1) * half
        integral = np.concatenate([[0.0], np.cumsum(panels)])
        integral[-1] = 0.5  # exact by symmetry S(u) + S(1-u) = 1
        return CubicHermiteSpline(u, integral, smoothstep(u))

    def _I(self, u):
        u = np.clip(u, 0.0, 1.0)
        return self._step_integral(u)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if not self.refined:
            return np.where(r >= 1.0, 0.0, r * (1.0 - smoothstep(r)))
        c, a = self._c, self._a
        b = 1.0 - a
        rr = np.clip(r, 0.0, 1.0)
        val = (rr
               - (1 + c) * (a * self._I(rr / a) + np.maximum(rr - a, 0.0))
               + c * a * self._I((rr - b) / a))
        val = np.where(r >= 1.0, 0.0, val)
        val = np.maximum(val, 0.0)
        return np.where(r <= 0.0, r, val)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if not self.refined:
            d = 1.0 - smoothstep(r) - r * smoothstep(r, 1)
            return np.where(r >= 1.0, 0.0, np.where(r <= 0.0, 1.0, d))
        c, a = self._c, self._a
        b = 1.0 - a
        d = 1.0 - (1 + c) * smoothstep(r / a) + c * smoothstep((r - b) / a)
        return np.where(r >= 1.0, 0.0, np.where(r <= 0.0, 1.0, d))

    def scaled(self, r, n: int):
        """``rho(n r) / n`` and its derivative ``rho'(n r)``."""
        r = np.asarray(r, dtype=float)
        return self(n * r) / n, self.derivative(n * r)

    def sup(self, samples: int = 20001) -> float:
        r = np.linspace(0.0, 1.0, samples)
        return float(np.max(self(r)))

    def slope_bounds(self, samples: int = 20001) -> tuple[float, float]:
        r = np.linspace(-0.5, 1.5, samples)
        d = self.derivative(r)
        return float(d.min()), float(d.max())

    def to_dict(self) -> dict:
        return {"refined": self.refined, "n": self.n}
