"""Planar primitives: the Liouville form, sampled loops, winding, length and area.

Everything works with ``omega = dx ^ dy`` and its primitive
``lambda0 = (x dy - y dx) / 2``.  The squared radius ``s = x**2 + y**2`` is the
radial coordinate used throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CenterOnLoop, OutsideAnnulus, UndersampledLoop

# largest admissible angle change between consecutive samples
MAX_ANGLE_STEP = np.pi / 2


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    @classmethod
    def from_polar(cls, r: float, theta: float) -> "PlanePoint":
        return cls(r * np.cos(theta), r * np.sin(theta))

    @classmethod
    def from_s(cls, s: float, theta: float = 0.0) -> "PlanePoint":
        return cls.from_polar(np.sqrt(s), theta)

    @property
    def s(self) -> float:
        return self.x * self.x + self.y * self.y

    @property
    def r(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def theta(self) -> float:
        return float(np.arctan2(self.y, self.x))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def as_xy(z) -> np.ndarray:
    """Coerce a PlanePoint, pair, or (N, 2) array into a float ndarray."""
    if isinstance(z, PlanePoint):
        return z.as_array()
    return np.asarray(z, dtype=float)


def squared_radius(x, y):
    return np.asarray(x) ** 2 + np.asarray(y) ** 2


def polar(x, y):
    """Return ``(s, theta)`` with ``s = r**2``."""
    return squared_radius(x, y), np.arctan2(y, x)


def from_polar_s(s, theta):
    r = np.sqrt(s)
    return r * np.cos(theta), r * np.sin(theta)


def liouville_pairing(p, v) -> float | np.ndarray:
    """Evaluate ``lambda0_p(v) = (x v_y - y v_x) / 2``.

    Works on single points or on stacked ``(..., 2)`` arrays.
    """
    p = as_xy(p)
    v = as_xy(v)
    return 0.5 * (p[..., 0] * v[..., 1] - p[..., 1] * v[..., 0])


@dataclass(frozen=True)
class LoopSample:
    """A closed loop sampled on the uniform grid ``t_j = j / N`` of [0, 1).

    The last point connects back to the first one.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (N, 2)")
        if len(pts) < 8:
            raise ValueError("a loop needs at least 8 samples")
        if not np.all(np.isfinite(pts)):
            raise ValueError("loop contains non-finite samples")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.points)) / len(self.points)

    def reversed(self) -> "LoopSample":
        return LoopSample(self.points[::-1].copy())

    @classmethod
    def from_function(cls, curve: Callable[[np.ndarray], np.ndarray], n: int) -> "LoopSample":
        """Sample ``curve(t) -> (N, 2)`` on ``n`` uniform times in [0, 1)."""
        t = np.arange(n) / n
        return cls(np.asarray(curve(t), dtype=float).reshape(n, 2))

    @classmethod
    def circle(cls, radius: float = 1.0, n: int = 10_000, turns: int = 1,
               center=(0.0, 0.0)) -> "LoopSample":
        """Round circle traversed ``turns`` times (negative for clockwise)."""
        t = np.arange(n) / n
        ang = 2 * np.pi * turns * t
        cx, cy = center
        return cls(np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)]))

    @classmethod
    def constant(cls, point, n: int = 64) -> "LoopSample":
        return cls(np.tile(as_xy(point), (n, 1)))


def _points_of(loop) -> np.ndarray:
    if isinstance(loop, LoopSample):
        return loop.points
    return np.asarray(loop, dtype=float)


def loop_length(loop, closed: bool = True) -> float:
    """Euclidean length of the polygon through the samples."""
    pts = _points_of(loop)
    seg = np.diff(pts, axis=0)
    length = np.hypot(seg[:, 0], seg[:, 1]).sum()
    if closed:
        length += np.hypot(*(pts[0] - pts[-1]))
    return float(length)


def angle_lift(points, center=(0.0, 0.0), closed: bool = False,
               tol: float = 1e-9) -> np.ndarray:
    """Continuous lift of the polar angle of ``points`` about ``center``.

    Increments are wrapped to (-pi, pi]; a single increment larger than
    ``MAX_ANGLE_STEP`` raises :class:`UndersampledLoop`.  With ``closed`` the
    closing segment is included, so the result has one extra entry.
    """
    pts = _points_of(points) - as_xy(center)
    dist = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(dist <= tol):
        raise CenterOnLoop(f"loop passes within {tol:g} of the center")
    if closed:
        pts = np.vstack([pts, pts[:1]])
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    d = np.diff(ang)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    if d.size and np.max(np.abs(d)) > MAX_ANGLE_STEP:
        raise UndersampledLoop(
            f"angle step {np.max(np.abs(d)):.3f} rad exceeds {MAX_ANGLE_STEP:.3f}; resample finer")
    return ang[0] + np.concatenate([[0.0], np.cumsum(d)])


def winding_number(loop, center=(0.0, 0.0), closed: bool | None = None) -> float:
    """Total lifted angle change about ``center`` divided by ``2 pi``.

    A :class:`LoopSample` is treated as closed; raw point arrays default to an
    open segment (the return is then any real number).
    """
    if closed is None:
        closed = isinstance(loop, LoopSample)
    lift = angle_lift(loop, center, closed=closed)
    return float((lift[-1] - lift[0]) / (2 * np.pi))


def enclosed_area(loop) -> float:
    """Signed shoelace area of the closed polygon, i.e. the integral of lambda0."""
    pts = _points_of(loop)
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(0.5 * np.sum(x * yn - xn * y))


def enclosed_area_extrapolated(loop) -> float:
    """Shoelace area with one Richardson step against the every-other subsample.

    For smooth loops the polygon error is O(h**2); combining the full and the
    half-resolution polygons cancels that term.  Needs an even sample count.
    """
    pts = _points_of(loop)
    if len(pts) % 2 or len(pts) < 16:
        return enclosed_area(pts)
    return (4.0 * enclosed_area(pts) - enclosed_area(pts[::2])) / 3.0


def degree_length_check(loop, delta: float, tol: float = 1e-6,
                        annulus_tol: float = 1e-9) -> dict:
    """Compare ``|area - pi * deg|`` with ``length * delta`` for a loop in the
    annulus ``1 <= |z| <= 1 + delta``.
    """
    pts = _points_of(loop)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r < 1 - annulus_tol) or np.any(r > 1 + delta + annulus_tol):
        raise OutsideAnnulus(
            f"loop radii span [{r.min():.6g}, {r.max():.6g}], annulus is [1, {1 + delta:g}]")
    deg = round(winding_number(pts, closed=True))
    lhs = abs(enclosed_area(pts) - np.pi * deg)
    rhs = loop_length(pts) * delta
    return {"lhs": float(lhs), "rhs": float(rhs), "degree": int(deg), "holds": bool(lhs <= rhs + tol)}
