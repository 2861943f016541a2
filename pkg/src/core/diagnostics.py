"""Checks run on radial profiles: direct principal value, moving planes, decay and HLS."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import special

from src.core import quadrature
from src.core.errors import AccuracyError, DomainError, SamplingError, ShapeError
from src.core.geometry import (
    Foliation,
    HPoint,
    boost,
    dist,
    leaf_coordinate,
    origin,
    radial_distance,
    reflect,
)
from src.core.kernels import (
    KernelConstants,
    ProblemParams,
    calibrate_normalization,
    operator_kernel,
    sphere_area,
)
from src.core.solver import RadialOperatorMatrix, radial_operator_matrix
from src.core.spectral import RadialFunction, laplace_beltrami


_LOGGER = logging.getLogger(__name__)

MEAN_ORDER = 64
PV_REFINE_RTOL = 1e-3
PV_FAR_CUTOFF = 150.0
DECAY_THRESHOLD = 1e-6


# Direct principal value.


def spherical_mean(u: RadialFunction, n: int, r: float, rho) -> np.ndarray:
    """Mean of u over the sphere of radius rho about a point at distance r from the centre."""

    rho = np.asarray(rho, dtype=float)
    x, w = quadrature.gauss_legendre(MEAN_ORDER)
    theta = 0.5 * math.pi * (x + 1.0)
    weights = w * np.sin(theta) ** (n - 2)
    weights = weights / weights.sum()
    samples = u(radial_distance(r, rho[..., None], theta))
    return samples @ weights


def _local_spacing(grid: np.ndarray, r: float) -> float:
    k = int(np.clip(np.searchsorted(grid, r), 1, grid.size - 1))
    return float(grid[k] - grid[k - 1])


def _far_cutoff(n: int) -> float:
    return min(PV_FAR_CUTOFF, 600.0 / (n - 1))


def _pv_at(u: RadialFunction, params: ProblemParams, r: float, delta: float,
           constants: KernelConstants, lap: float) -> float:
    n = params.n
    area = sphere_area(n)
    centre = float(u(r))

    def measure(rho: np.ndarray) -> np.ndarray:
        return (
            np.asarray(operator_kernel(params, rho, constants))
            * area * np.sinh(rho) ** (n - 1)
        )

    taylor = lap / (2.0 * n)
    rho, w = quadrature.composite_rule([0.0, delta], 16)
    remainder = centre - spherical_mean(u, n, r, rho) + taylor * rho**2
    near = float(np.sum(w * measure(rho) * remainder))

    grading = quadrature.grading_for(1.0 - 2.0 * params.s)
    rho, w = quadrature.graded_rule(0.0, delta, grading, 16, "left")
    moment = float(np.sum(w * measure(rho) * rho**2))

    cutoff = _far_cutoff(n)
    log_edges = quadrature.uniform_breakpoints(math.log(delta), math.log(cutoff), 0.25)
    log_rho, w = quadrature.composite_rule(log_edges, 16)
    rho = np.exp(log_rho)
    weight = measure(rho)
    far = float(np.sum(w * rho * weight * (centre - spherical_mean(u, n, r, rho))))

    # tail beyond the cutoff: measure ~ rho^(-1-s) (a0 + a1/rho), spherical mean vanishes
    tail_rho = rho[-32:]
    basis = np.column_stack([tail_rho ** (-1.0 - params.s), tail_rho ** (-2.0 - params.s)])
    (a0, a1), *_ = np.linalg.lstsq(basis, weight[-32:], rcond=None)
    s = params.s
    tail = centre * (a0 * cutoff**-s / s + a1 * cutoff ** (-1.0 - s) / (1.0 + s))
    return near - taylor * moment + far + tail


def direct_fractional_laplacian(
    u: RadialFunction,
    params: ProblemParams,
    x: HPoint,
    constants: Optional[KernelConstants] = None,
) -> float:
    """PV int (u(x) - u(xi)) k(d(x, xi)) dxi with k the operator kernel, u radial about the origin.

    The ball of radius delta around x is handled through the second-order
    mean-value expansion M(rho) = u(x) + Delta u(x) rho^2 / (2n) + O(rho^4).
    """

    if x.dim != params.n:
        raise ShapeError(f"Point lives in H^{x.dim}, parameters describe H^{params.n}")
    constants = constants or calibrate_normalization(params)
    r = dist(origin(params.n), x)
    lap = float(laplace_beltrami(u, params.n, r))
    delta = 2.0 * _local_spacing(u.grid, r)
    coarse = _pv_at(u, params, r, delta, constants, lap)
    fine = _pv_at(u, params, r, 0.5 * delta, constants, lap)
    scale = max(abs(fine), abs(lap))
    if abs(fine - coarse) > PV_REFINE_RTOL * scale:
        raise AccuracyError(
            f"Principal value at r={r:.6g} moved by {abs(fine - coarse):.3e} under "
            f"delta refinement {delta:.3g} -> {0.5 * delta:.3g} (scale {scale:.3e})"
        )
    _LOGGER.debug("direct PV at r=%g: %.12e (delta=%g)", r, fine, 0.5 * delta)
    return fine


# Moving planes.


@dataclass(frozen=True)
class MovingPlaneReport:
    lambdas: tuple[float, ...]
    min_w: tuple[float, ...]
    negative_fraction: tuple[float, ...]
    samples: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "min_w": list(self.min_w),
            "negative_fraction": list(self.negative_fraction),
            "samples": list(self.samples),
        }


def _leaf_samples(
    rng: np.random.Generator, n: int, f: Foliation, lam: float, count: int,
    width: float, reach: float,
) -> list[HPoint]:
    points = []
    k = f.direction_index
    for _ in range(count):
        direction = rng.standard_normal(n)
        direction[k - 1] = 0.0
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        radius = reach * rng.uniform()
        coords = np.concatenate(([math.cosh(radius)], math.sinh(radius) * direction / norm))
        leaf = lam - width * (1.0 - rng.uniform())
        point = boost(leaf, HPoint.from_array(coords), f)
        if leaf_coordinate(point, f) < lam:
            points.append(point)
    return points


def moving_plane_sweep(
    u: RadialFunction,
    center: HPoint,
    f: Foliation,
    lambdas: Sequence[float],
    *,
    samples: int = 256,
    width: float = 2.0,
    reach: float = 3.0,
    seed: int = 0,
) -> MovingPlaneReport:
    """w_lam(x) = u(d(x_lam, c)) - u(d(x, c)) on seeded sample clouds inside Sigma_lam."""

    f.check(center)
    if samples < 1 or width <= 0.0:
        raise SamplingError("Moving-plane sweeps need a positive sample count and width")
    rng = np.random.default_rng(seed)
    # Differences below this are interpolation roundoff, not sign changes.
    floor = 64.0 * np.finfo(float).eps * float(np.max(np.abs(u.values)))
    mins, fractions, counts = [], [], []
    for lam in lambdas:
        points = _leaf_samples(rng, center.dim, f, float(lam), samples, width, reach)
        if not points:
            raise SamplingError(f"No samples landed inside Sigma_lambda for lambda={lam:g}")
        here = np.array([dist(p, center) for p in points])
        mirrored = np.array([dist(reflect(float(lam), p, f), center) for p in points])
        w = u(mirrored) - u(here)
        mins.append(float(np.min(w)))
        fractions.append(float(np.mean(w < -floor)))
        counts.append(len(points))
        _LOGGER.debug("lambda=%g: min w=%.3e, negative fraction=%.3f", lam, mins[-1], fractions[-1])
    return MovingPlaneReport(
        tuple(float(lam) for lam in lambdas), tuple(mins), tuple(fractions), tuple(counts)
    )


# Decay.


@dataclass(frozen=True)
class DecayReport:
    decays: bool
    rate: float
    inconclusive: bool

    def as_dict(self) -> dict:
        return {"decays": self.decays, "rate": self.rate, "inconclusive": self.inconclusive}


def decay_check(u: RadialFunction, params: ProblemParams) -> DecayReport:
    """Tail below 1e-6 of the peak and a negative log-linear rate on [rho_max/2, rho_max]."""

    grid, values = u.grid, u.values
    peak = float(np.max(np.abs(values)))
    window = (grid >= 0.5 * u.rho_max) & (values > 0.0)
    if u.rho_max < 3.0 or window.sum() < 5 or peak == 0.0:
        _LOGGER.info("Decay check inconclusive for n=%d: grid too short or tail empty", params.n)
        return DecayReport(decays=False, rate=math.nan, inconclusive=True)
    rate = float(np.polyfit(grid[window], np.log(values[window]), 1)[0])
    small = float(np.max(np.abs(values[grid >= 0.5 * u.rho_max]))) < DECAY_THRESHOLD * peak
    return DecayReport(decays=bool(small and rate < 0.0), rate=rate, inconclusive=False)


# Hardy–Littlewood–Sobolev.


def _check_hls_exponent(n: int, lam: float) -> None:
    if not 0.0 < lam < n:
        raise DomainError(f"HLS exponent must lie in (0, {n}), got {lam!r}")


def hls_constant(n: int, lam: float) -> float:
    """pi^(lam/2) Gamma(n/2 - lam/2)/Gamma(n - lam/2) (Gamma(n/2)/Gamma(n))^(-1 + lam/n)."""

    _check_hls_exponent(n, lam)
    log_c = (
        0.5 * lam * math.log(math.pi)
        + special.gammaln(0.5 * (n - lam))
        - special.gammaln(n - 0.5 * lam)
        + (lam / n - 1.0) * (special.gammaln(0.5 * n) - special.gammaln(n))
    )
    return float(np.exp(log_c))


def hls_kernel(lam: float):
    return lambda rho: (2.0 * np.sinh(0.5 * rho)) ** (-lam)


def radial_norm(f: RadialFunction, n: int, p: float) -> float:
    """(|S^(n-1)| int |f|^p sinh^(n-1) drho)^(1/p)."""

    rho, w = quadrature.composite_rule(f.grid, 8)
    mass = sphere_area(n) * np.sum(w * np.abs(f(rho)) ** p * np.sinh(rho) ** (n - 1))
    return float(mass ** (1.0 / p))


def hls_ratio(
    f: RadialFunction,
    g: RadialFunction,
    lam: float,
    n: int,
    *,
    matrix: Optional[RadialOperatorMatrix] = None,
) -> float:
    """int int f(x) g(y) (2 sinh(rho/2))^-lam / (||f||_p ||g||_p), p = 2n/(2n - lam)."""

    _check_hls_exponent(n, lam)
    if f.grid.shape != g.grid.shape or not np.allclose(f.grid, g.grid):
        raise ShapeError("HLS pairs must share one radial grid")
    p = 2.0 * n / (2.0 * n - lam)
    norms = radial_norm(f, n, p) * radial_norm(g, n, p)
    if norms == 0.0:
        return 0.0
    if matrix is None:
        matrix = radial_operator_matrix(hls_kernel(lam), n, f.grid, n - 1.0 - lam)
    matrix.check_grid(f.grid)
    inner = matrix.apply(g.values)
    pairing = float(np.dot(matrix.volume_weights, f.values * inner))
    return pairing / norms
