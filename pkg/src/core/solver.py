"""Radial integral operators on H^n and the fixed-point solver for u = int G_s u^p dV."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from src.core import quadrature
from src.core.errors import (
    AccuracyError,
    DomainError,
    ParameterError,
    ShapeError,
    TrivialFixedPointError,
)
from src.core.geometry import radial_distance
from src.core.kernels import GreenTable, ProblemParams, sphere_area
from src.core.settings import worker_count
from src.core.spectral import RadialFunction


_LOGGER = logging.getLogger(__name__)

SPACINGS = ("log", "uniform", "mixed")
REGULAR_ORDER = 12
GRADED_ORDER = 16
THETA_ORDER = 48
DIAGONAL_RTOL = 1e-4
CRITICAL_TOL = 1e-4

KernelFn = Callable[[np.ndarray], np.ndarray]


def make_grid(
    rho_min: float = 0.01,
    rho_max: float = 15.0,
    nodes: int = 200,
    spacing: str = "mixed",
) -> np.ndarray:
    """Radial grid starting at 0.

    ``log`` puts nodes-1 geometric nodes on [rho_min, rho_max]; ``uniform`` is
    equispaced; ``mixed`` uses a quarter of the nodes geometrically from rho_min
    and continues uniformly, with the last geometric step equal to the uniform one.
    """

    if spacing not in SPACINGS:
        raise DomainError(f"Unknown grid spacing {spacing!r}; expected one of {SPACINGS}")
    if nodes < 8:
        raise DomainError(f"A radial grid needs at least 8 nodes, got {nodes}")
    if not 0.0 < rho_min < rho_max:
        raise DomainError(f"Need 0 < rho_min < rho_max, got {rho_min!r}, {rho_max!r}")

    if spacing == "uniform":
        return np.linspace(0.0, rho_max, nodes)
    if spacing == "log":
        return np.concatenate(([0.0], np.geomspace(rho_min, rho_max, nodes - 1)))

    geometric = max(2, nodes // 4)
    uniform = nodes - 1 - geometric

    def step_gap(turn: float) -> float:
        ratio = (turn / rho_min) ** (1.0 / (geometric - 1))
        return turn * (1.0 - 1.0 / ratio) - (rho_max - turn) / uniform

    turn = brentq(step_gap, rho_min * (1.0 + 1e-9), rho_max, xtol=1e-14)
    head = np.geomspace(rho_min, turn, geometric)
    tail = np.linspace(turn, rho_max, uniform + 1)[1:]
    return np.concatenate(([0.0], head, tail))


@dataclass(frozen=True, eq=False)
class RadialOperatorMatrix:
    """A[i, j]: weight of the grid value at r_j in int K(rho(x, y)) u(y) dV_y at |x| = r_i.

    Columns use piecewise-linear hat functions, so entries are nonnegative for a
    nonnegative kernel.  ``volume_weights`` are int phi_j dV.
    """

    grid: np.ndarray
    entries: np.ndarray
    volume_weights: np.ndarray
    angular_nodes: int
    radial_nodes: int

    def apply(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != self.grid.shape:
            raise ShapeError(f"Values {values.shape} do not match the grid {self.grid.shape}")
        return self.entries @ values

    def check_grid(self, grid) -> None:
        grid = np.asarray(grid, dtype=float)
        if grid.shape != self.grid.shape or not np.allclose(grid, self.grid, rtol=0, atol=1e-14):
            raise ShapeError("Profile grid does not match the operator grid")


def _theta_rule(r: np.ndarray, rp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-r' angular nodes/weights on [0, pi], log-graded toward theta = 0."""

    x, w = quadrature.gauss_legendre(THETA_ORDER)
    v = 0.5 * (x + 1.0)
    dv = 0.5 * w
    scale = np.sqrt(np.sinh(r) * np.sinh(rp))
    with np.errstate(divide="ignore", invalid="ignore"):
        theta0 = np.where(scale > 0.0, 0.1 * np.abs(r - rp) / scale, 0.5)
    theta0 = np.clip(theta0, 1e-14, 0.5)[:, None]

    xs, ws = quadrature.gauss_legendre(8)
    head = 0.5 * theta0 * (xs[None, :] + 1.0)
    head_w = 0.5 * theta0 * ws[None, :]
    span = np.log(math.pi / theta0)
    tail = theta0 * np.exp(span * v[None, :])
    tail_w = tail * span * dv[None, :]
    return np.hstack([head, tail]), np.hstack([head_w, tail_w])


def angular_kernel(kernel: KernelFn, n: int, r, rp) -> np.ndarray:
    """a(r, r') = |S^(n-2)| int_0^pi K(rho(r, r', theta)) sin^(n-2) theta dtheta."""

    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    r, rp = np.broadcast_arrays(r, rp)
    flat_r, flat_rp = r.ravel(), rp.ravel()
    theta, weights = _theta_rule(flat_r, flat_rp)
    rho = radial_distance(flat_r[:, None], flat_rp[:, None], theta)
    values = np.asarray(kernel(rho), dtype=float) * np.sin(theta) ** (n - 2) * weights
    out = sphere_area(n - 1) * values.sum(axis=1)
    return out.reshape(r.shape)


def _scatter_hat(
    grid: np.ndarray, interval: np.ndarray, nodes: np.ndarray, mass: np.ndarray
) -> np.ndarray:
    """Distribute node masses onto the two hat functions of their interval."""

    t = (nodes - grid[interval]) / (grid[interval + 1] - grid[interval])
    out = np.bincount(interval, weights=mass * (1.0 - t), minlength=grid.size)
    out += np.bincount(interval + 1, weights=mass * t, minlength=grid.size)
    return out


def _regular_nodes(grid: np.ndarray):
    nodes, weights = quadrature.composite_rule(grid, REGULAR_ORDER)
    interval = np.repeat(np.arange(grid.size - 1), REGULAR_ORDER)
    return nodes, weights, interval


def _adjacent_nodes(grid: np.ndarray, i: int, grading: int, order: int):
    pieces = []
    if i > 0:
        nodes, weights = quadrature.graded_rule(grid[i - 1], grid[i], grading, order, "right")
        pieces.append((nodes, weights, np.full(nodes.size, i - 1)))
    if i < grid.size - 1:
        nodes, weights = quadrature.graded_rule(grid[i], grid[i + 1], grading, order, "left")
        pieces.append((nodes, weights, np.full(nodes.size, i)))
    return tuple(np.concatenate(parts) for parts in zip(*pieces))


def _row_mass(kernel: KernelFn, n: int, grid: np.ndarray, r: float, nodes, weights, interval):
    density = angular_kernel(kernel, n, np.full_like(nodes, r), nodes)
    return _scatter_hat(grid, interval, nodes, weights * density * np.sinh(nodes) ** (n - 1))


def _row(
    kernel: KernelFn,
    n: int,
    grid: np.ndarray,
    i: int,
    grading: int,
    regular: tuple[np.ndarray, np.ndarray, np.ndarray],
) -> tuple[np.ndarray, int]:
    r = grid[i]
    nodes, weights, interval = regular
    keep = (interval != i) & (interval != i - 1)
    row = _row_mass(kernel, n, grid, r, nodes[keep], weights[keep], interval[keep])
    near = _adjacent_nodes(grid, i, grading, GRADED_ORDER)
    adjacent = _row_mass(kernel, n, grid, r, *near)
    refined = _row_mass(kernel, n, grid, r, *_adjacent_nodes(grid, i, grading, GRADED_ORDER + 8))
    row += adjacent
    count = int(keep.sum()) + near[0].size
    total = row.sum()
    drift = abs(refined.sum() - adjacent.sum())
    if not np.all(np.isfinite(row)) or drift > DIAGONAL_RTOL * max(abs(total), 1e-300):
        raise AccuracyError(
            f"Diagonal quadrature did not settle at row {i} (r={r:.6g}): "
            f"graded orders {GRADED_ORDER}/{GRADED_ORDER + 8} differ by {drift:.3e}, "
            f"row sum {total:.6e}, grading {grading}"
        )
    return row, count


def radial_operator_matrix(
    kernel: KernelFn,
    n: int,
    grid: Sequence[float],
    singular_exponent: float,
    *,
    workers: Optional[int] = None,
) -> RadialOperatorMatrix:
    """Radialize int K(rho(x, y)) u(y) dV_y onto grid values of u.

    ``singular_exponent`` is the power of |r - r'| in the angular kernel near
    the diagonal; it sets the grading of the two intervals touching r_i.
    """

    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 4 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0.0):
        raise ShapeError("Operator grids start at 0 and increase strictly")
    grading = quadrature.grading_for(singular_exponent) + 1
    workers = workers or worker_count()
    entries = np.zeros((grid.size, grid.size))
    node_counts = np.zeros(grid.size, dtype=int)
    regular = _regular_nodes(grid)

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(_row, kernel, n, grid, i, grading, regular): i
            for i in range(grid.size)
        }
        for future in concurrent.futures.as_completed(futures):
            i = futures[future]
            entries[i], node_counts[i] = future.result()

    nodes, weights, interval = regular
    volume = sphere_area(n) * _scatter_hat(
        grid, interval, nodes, weights * np.sinh(nodes) ** (n - 1)
    )

    _LOGGER.debug(
        "Assembled %dx%d radial operator with %d workers, %d radial nodes",
        grid.size, grid.size, workers, int(node_counts.sum()),
    )
    return RadialOperatorMatrix(
        grid=grid,
        entries=entries,
        volume_weights=volume,
        angular_nodes=THETA_ORDER + 8,
        radial_nodes=int(node_counts.sum()),
    )


def radial_green_matrix(
    params: ProblemParams,
    grid: Sequence[float],
    *,
    table: Optional[GreenTable] = None,
    workers: Optional[int] = None,
) -> RadialOperatorMatrix:
    """Radial form of u -> int G_s(rho(x, y)) u(y) dV_y."""

    table = table or GreenTable(params)
    return radial_operator_matrix(
        table, params.n, grid, 2.0 * params.s - 1.0, workers=workers
    )


@dataclass(frozen=True, eq=False)
class SolveReport:
    profile: RadialFunction
    amplitude: float
    iterations: int
    residual: float
    monotone_flag: bool
    mu: float
    change: float
    converged: bool
    critical: bool

    def as_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "iterations": self.iterations,
            "residual": self.residual,
            "monotone_flag": self.monotone_flag,
            "mu": self.mu,
            "change": self.change,
            "converged": self.converged,
            "critical": self.critical,
        }


def is_nonincreasing(values, rtol: float = 1e-12) -> bool:
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(values) <= rtol * np.max(np.abs(values))))


def residual(u: RadialFunction, params: ProblemParams, matrix: RadialOperatorMatrix) -> float:
    """Relative sup-norm of u - T(u^p) over the grid interior."""

    matrix.check_grid(u.grid)
    scale = float(np.max(np.abs(u.values)))
    if scale == 0.0:
        return 0.0
    image = matrix.apply(np.maximum(u.values, 0.0) ** params.p)
    return float(np.max(np.abs(u.values - image)[:-1]) / scale)


def check_exponent(params: ProblemParams, allow_critical: bool) -> None:
    if params.p > params.critical_exponent and not params.is_critical:
        raise ParameterError(
            f"p={params.p:g} exceeds the critical exponent (n+2s)/(n-2s)="
            f"{params.critical_exponent:g}"
        )
    if params.is_critical and not allow_critical:
        raise ParameterError(
            f"p={params.p:g} is the critical exponent (n+2s)/(n-2s); convergence is not "
            "guaranteed, pass allow_critical to run anyway"
        )


def picard_solve(
    params: ProblemParams,
    grid: Sequence[float],
    tol: float = 1e-6,
    max_iter: int = 500,
    *,
    allow_critical: bool = False,
    damping: float = 0.5,
    initial: Optional[Sequence[float]] = None,
    matrix: Optional[RadialOperatorMatrix] = None,
) -> SolveReport:
    """Normalized power iteration v <- T(v^p) / ||T(v^p)||_inf.

    At a fixed point v = T(v^p)/mu, and u = mu^(-1/(p-1)) v solves u = T(u^p).
    Non-convergence is reported through ``converged``, not raised.  At the critical
    exponent both stopping tests use max(tol, CRITICAL_TOL).
    """

    check_exponent(params, allow_critical)
    grid = np.asarray(grid, dtype=float)
    matrix = matrix or radial_green_matrix(params, grid)
    matrix.check_grid(grid)

    v = np.exp(-grid) if initial is None else np.asarray(initial, dtype=float)
    if v.shape != grid.shape:
        raise ShapeError("Initial profile does not match the grid")
    peak = float(np.max(np.abs(v)))
    if peak == 0.0 or not np.any(v > 0.0):
        raise TrivialFixedPointError("Initial profile is zero; u = 0 is the trivial fixed point")
    v = np.maximum(v, 0.0) / peak

    p = params.p
    # At the critical exponent the normalized iterate creeps instead of settling.
    limit = max(tol, CRITICAL_TOL) if params.is_critical else tol
    mu = math.nan
    last_step = 0.0
    change = math.inf
    res = math.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        image = matrix.apply(v**p)
        new_mu = float(np.max(image))
        if not math.isfinite(new_mu) or new_mu <= 0.0:
            _LOGGER.warning("Iteration %d: sup-norm factor %r, stopping", iterations, new_mu)
            break
        candidate = image / new_mu
        step = new_mu - mu if math.isfinite(mu) else 0.0
        if step * last_step < 0.0:
            candidate = damping * candidate + (1.0 - damping) * v
            candidate /= np.max(candidate)
        last_step = step
        change = float(np.max(np.abs(candidate - v)))
        v, mu = candidate, new_mu
        amplitude = mu ** (-1.0 / (p - 1.0))
        res = residual(RadialFunction(grid, amplitude * v), params, matrix)
        _LOGGER.debug("Iteration %d: mu=%.12e change=%.3e residual=%.3e", iterations, mu, change, res)
        if change < limit and res < limit:
            converged = True
            break

    amplitude = mu ** (-1.0 / (p - 1.0)) if math.isfinite(mu) and mu > 0.0 else math.nan
    values = amplitude * v if math.isfinite(amplitude) else v
    profile = RadialFunction(grid, values)
    report = SolveReport(
        profile=profile,
        amplitude=float(amplitude),
        iterations=iterations,
        residual=float(res),
        monotone_flag=is_nonincreasing(values),
        mu=float(mu),
        change=float(change),
        converged=converged,
        critical=params.is_critical,
    )
    if params.is_critical:
        _LOGGER.warning("Critical exponent p=%g: convergence is not guaranteed", p)
    _LOGGER.info(
        "picard_solve n=%d s=%g p=%g: converged=%s after %d iterations, residual=%.3e",
        params.n, params.s, p, converged, iterations, res,
    )
    return report
