"""Hyperboloid, ball and half-space models of H^n with boosts and reflections.

Points are stored on the upper sheet x0^2 - x1^2 - ... - xn^2 = 1 of the
hyperboloid.  Boosts and reflections are linear there; the ball and half-space
models are only conversion targets.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Sequence

import numpy as np

from src.core.errors import DomainError, InvalidPointError, OutOfModelError


LORENTZ_TOLERANCE = 1e-12


def lorentz_inner(a: Sequence[float], b: Sequence[float]) -> float:
    """Return -a0 b0 + sum(ai bi)."""

    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    return float(-x[0] * y[0] + np.dot(x[1:], y[1:]))


def _renormalized(coords: np.ndarray) -> np.ndarray:
    out = np.array(coords, dtype=float)
    out[0] = math.sqrt(1.0 + float(np.dot(out[1:], out[1:])))
    return out


@dataclass(frozen=True)
class HPoint:
    """A point of H^n in hyperboloid coordinates (x0, x1, ..., xn)."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) < 3:
            raise InvalidPointError("HPoint needs at least three coordinates (n >= 2)")
        if not all(math.isfinite(c) for c in self.coords):
            raise InvalidPointError(f"Non-finite coordinates: {self.coords}")
        x0 = self.coords[0]
        if x0 < 1.0 - LORENTZ_TOLERANCE:
            raise InvalidPointError(f"x0 = {x0!r} is below 1 (lower sheet or off the hyperboloid)")
        drift = abs(lorentz_inner(self.coords, self.coords) + 1.0)
        if drift > LORENTZ_TOLERANCE * max(1.0, x0 * x0):
            raise InvalidPointError(f"Lorentz constraint violated by {drift:.3e}")

    @classmethod
    def from_array(cls, coords: Sequence[float], *, renormalize: bool = True) -> "HPoint":
        array = np.asarray(coords, dtype=float)
        if renormalize:
            array = _renormalized(array)
        return cls(tuple(float(c) for c in array))

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass(frozen=True)
class BallPoint:
    """A point of the open unit ball B^n."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(c * c for c in self.coords))
        if not norm < 1.0:
            raise OutOfModelError(f"|b| = {norm!r} is not inside the unit ball")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass(frozen=True)
class HalfSpacePoint:
    """A point (y1, ..., y_{n-1}, t) of the upper half-space, t > 0."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.coords or not self.coords[-1] > 0.0:
            raise OutOfModelError("Half-space points need a positive last coordinate")


@dataclass(frozen=True)
class Foliation:
    """Foliation of H^n by the leaves U_t = A_t(U), U = {x_k = 0}."""

    direction_index: int = 1
    leaf_parameter: float = 0.0

    def __post_init__(self) -> None:
        if self.direction_index < 1:
            raise DomainError("Foliation direction index starts at 1")

    def check(self, p: HPoint) -> None:
        if self.direction_index > p.dim:
            raise DomainError(
                f"Direction {self.direction_index} does not exist in H^{p.dim}"
            )


def origin(n: int) -> HPoint:
    """Return (1, 0, ..., 0) in H^n."""

    return HPoint((1.0,) + (0.0,) * n)


def point_at(distance: float, n: int, axis: int = 1) -> HPoint:
    """Return the point at geodesic distance ``distance`` from the origin along an axis."""

    coords = [0.0] * (n + 1)
    coords[0] = math.cosh(distance)
    coords[axis] = math.sinh(distance)
    return HPoint.from_array(coords)


def dist(a: HPoint, b: HPoint) -> float:
    """Geodesic distance via sinh(rho/2) = sqrt(<a-b, a-b>)/2."""

    if a.dim != b.dim:
        raise InvalidPointError(f"Points live in H^{a.dim} and H^{b.dim}")
    diff = a.array - b.array
    q = max(0.0, lorentz_inner(diff, diff))
    return 2.0 * math.asinh(0.5 * math.sqrt(q))


def ball_to_hyperboloid(b: BallPoint) -> HPoint:
    x = b.array
    r2 = float(np.dot(x, x))
    scale = 1.0 / (1.0 - r2)
    return HPoint.from_array(np.concatenate(([(1.0 + r2) * scale], 2.0 * x * scale)))


def hyperboloid_to_ball(p: HPoint) -> BallPoint:
    x = p.array
    return BallPoint(tuple(float(c) for c in x[1:] / (1.0 + x[0])))


def hyperboloid_to_half_space(p: HPoint) -> HalfSpacePoint:
    x = p.array
    denom = x[0] - x[-1]
    return HalfSpacePoint(tuple(float(c) for c in np.append(x[1:-1] / denom, 1.0 / denom)))


def half_space_to_hyperboloid(h: HalfSpacePoint) -> HPoint:
    y = np.asarray(h.coords[:-1], dtype=float)
    t = h.coords[-1]
    y2 = float(np.dot(y, y))
    x0 = (1.0 + y2 + t * t) / (2.0 * t)
    xn = (y2 + t * t - 1.0) / (2.0 * t)
    return HPoint.from_array(np.concatenate(([x0], y / t, [xn])))


def boost(t: float, p: HPoint, f: Foliation) -> HPoint:
    """Hyperbolic rotation A_t in the (x0, x_k) plane."""

    f.check(p)
    k = f.direction_index
    x = p.array
    ch, sh = math.cosh(t), math.sinh(t)
    x0, xk = x[0], x[k]
    x[0] = ch * x0 + sh * xk
    x[k] = sh * x0 + ch * xk
    return HPoint.from_array(x)


def reflect(lam: float, p: HPoint, f: Foliation) -> HPoint:
    """Reflection I_lam = A_lam o I o A_-lam across the leaf U_lam."""

    q = boost(-lam, p, f).array
    q[f.direction_index] = -q[f.direction_index]
    return boost(lam, HPoint.from_array(q), f)


def leaf_coordinate(p: HPoint, f: Foliation) -> float:
    """Return t such that p lies on U_t."""

    f.check(p)
    x = p.coords
    return math.atanh(x[f.direction_index] / x[0])


def _check_radii(r, rp) -> None:
    if np.any(np.asarray(r) < 0.0) or np.any(np.asarray(rp) < 0.0):
        raise DomainError("Geodesic radii must be nonnegative")


def cosh_dist_radial(r, rp, theta):
    """Hyperbolic law of cosines: cosh r cosh r' - sinh r sinh r' cos(theta)."""

    _check_radii(r, rp)
    value = np.cosh(r) * np.cosh(rp) - np.sinh(r) * np.sinh(rp) * np.cos(theta)
    value = np.maximum(value, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def radial_distance(r, rp, theta):
    """Distance from the law of cosines without cancellation at small separations."""

    _check_radii(r, rp)
    half = np.sinh(0.5 * (np.asarray(r) - np.asarray(rp))) ** 2 + (
        np.sinh(r) * np.sinh(rp) * np.sin(0.5 * np.asarray(theta)) ** 2
    )
    value = 2.0 * np.arcsinh(np.sqrt(half))
    return float(value) if np.ndim(value) == 0 else value
