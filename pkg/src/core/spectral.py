"""Radial spherical (Helgason) transform on H^n.

Conventions used throughout:

    f^(lam) = |S^(n-1)| int_0^inf f(rho) L_lam(rho) sinh^(n-1) rho drho
    f(rho)  = int_0^inf f^(lam) L_lam(rho) nu_n(lam) dlam,   nu_n = 2 D_n |c(lam)|^-2

with spherical functions normalized by L_lam(0) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from src.core import quadrature
from src.core.errors import AccuracyError, DomainError, ShapeError, TransformDivergenceError
from src.core.kernels import (
    ProblemParams,
    abel_integral,
    iterated_operator_taylor,
    plancherel_constant,
    sphere_area,
)
from src.core.specfun import log_gamma_abs


_LOGGER = logging.getLogger(__name__)

DECAY_RATIO = 1e-10
TRUNCATION_RATIO = 1e-8
CLOSED_FORM_MIN_RHO = 0.1
RADIAL_ORDER = 6


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Samples of a radial profile; cubic spline inside the grid, zero beyond it."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ShapeError(f"Grid {grid.shape} and values {values.shape} do not match")
        if grid.size < 4 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0.0):
            raise ShapeError("Radial grids start at 0, increase strictly and hold >= 4 nodes")
        if not np.all(np.isfinite(values)):
            raise ValueError("Radial function values must be finite")

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.grid, self.values, bc_type=((1, 0.0), (2, 0.0)))

    @property
    def rho_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, rho, nu: int = 0) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.asarray(self.spline(np.clip(rho, 0.0, self.rho_max), nu), dtype=float)
        return np.where(rho > self.rho_max, 0.0, out)

    def with_values(self, values) -> "RadialFunction":
        return RadialFunction(self.grid, np.asarray(values, dtype=float))

    def decays(self, ratio: float = DECAY_RATIO, n: Optional[int] = None) -> bool:
        """Tail below ratio * peak; with n, both measured against the transform weight.

        The weight sinh^(n-1)(rho) (1 + rho) e^(-rho0 rho) is the volume density times
        the envelope of L_0.
        """

        magnitude = np.abs(self.values)
        if n is not None:
            with np.errstate(divide="ignore"):
                log_weight = (
                    (n - 1) * (self.grid + np.log(-np.expm1(-2.0 * self.grid)) - math.log(2.0))
                    + np.log1p(self.grid)
                    - 0.5 * (n - 1) * self.grid
                )
            magnitude = magnitude * np.exp(log_weight)
        peak = float(np.max(magnitude))
        return peak == 0.0 or float(magnitude[-1]) <= ratio * peak


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Samples of a spherical-transform image on lam >= 0 with quadrature weights."""

    lambda_grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambda_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        weights = np.ones_like(lam) if self.weights is None else np.asarray(self.weights, float)
        object.__setattr__(self, "lambda_grid", lam)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if lam.shape != values.shape or lam.shape != weights.shape:
            raise ShapeError("Spectral grid, values and weights must have one shape")
        if np.any(lam < 0.0) or np.any(np.diff(lam) <= 0.0):
            raise ShapeError("Spectral grids are increasing and nonnegative")
        if not np.all(np.isfinite(values)):
            raise ValueError("Spectral values must be finite")

    def with_values(self, values) -> "SpectralDensity":
        return SpectralDensity(self.lambda_grid, values, self.weights)


def lambda_grid(lambda_max: float = 12.0, panels: int = 24, order: int = 16) -> SpectralDensity:
    """Composite Gauss–Legendre template on [0, lambda_max] (values are zero)."""

    if lambda_max <= 0.0 or panels < 1:
        raise DomainError("lambda_max and panels must be positive")
    nodes, weights = quadrature.composite_rule(np.linspace(0.0, lambda_max, panels + 1), order)
    return SpectralDensity(nodes, np.zeros_like(nodes), weights)


# Plancherel density.


def log_abs_c_function(n: int, lam) -> np.ndarray:
    """log|c(lam)| for lam != 0 in the Jacobi-function normalization."""

    lam = np.asarray(lam, dtype=float)
    rho0 = 0.5 * (n - 1)
    return (
        rho0 * math.log(2.0)
        + special.gammaln(0.5 * n)
        + log_gamma_abs(1j * lam)
        - log_gamma_abs(0.5 * (rho0 + 1j * lam))
        - log_gamma_abs(0.5 * (rho0 + 1.0 + 1j * lam))
    )


def plancherel_density(n: int, lam):
    """nu_n(lam) = 2 D_n |c(lam)|^-2, the inversion weight on lam >= 0 (even in lam)."""

    lam = np.abs(np.asarray(lam, dtype=float))
    out = np.zeros_like(lam)
    live = lam > 0.0
    out[live] = 2.0 * plancherel_constant(n) * np.exp(-2.0 * log_abs_c_function(n, lam[live]))
    return float(out) if np.ndim(out) == 0 else out


# Spherical functions.


def _double_factorial(k: int) -> float:
    return float(np.prod(np.arange(k, 0, -2))) if k > 0 else 1.0


def _cosine_gap_source(lam: np.ndarray):
    """Taylor producer for (cos(lam rho) - 1) / lam^2, smooth through lam = 0."""

    def source(rho: np.ndarray, order: int) -> np.ndarray:
        phase = lam * rho
        rows = [-0.5 * rho**2 * np.sinc(phase / (2.0 * math.pi)) ** 2]
        if order >= 1:
            rows.append(-rho * np.sinc(phase / math.pi))
        for k in range(2, order + 1):
            rows.append(lam ** (k - 2) * np.cos(phase + 0.5 * math.pi * k) / math.factorial(k))
        return np.stack([np.broadcast_to(r, np.broadcast(lam, rho).shape) for r in rows])

    return source


def _closed_form_taylor(n: int, lam: np.ndarray, rho: np.ndarray, extra: int = 0) -> np.ndarray:
    m = (n - 1) // 2
    norm = _double_factorial(2 * m - 1)
    for k in range(1, m):
        norm = norm / (k * k + lam**2)
    values = iterated_operator_taylor(_cosine_gap_source(lam), m, rho, sign=-1, extra=extra)
    return norm * values


def _mehler(n: int, lam: np.ndarray, rho: float) -> np.ndarray:
    """C_n sinh^(2-n) rho int_0^rho cos(lam t) (cosh rho - cosh t)^((n-3)/2) dt."""

    if rho == 0.0:
        return np.ones_like(lam)
    a = 0.5 * (n - 3)
    span = float(np.max(np.abs(lam))) * rho if lam.size else 0.0
    order = 8 * int(math.ceil((24 + 0.75 * span) / 8.0))
    x, w = quadrature.gauss_jacobi(order, a, 0.0)
    t = 0.5 * rho * (1.0 + x)
    log_base = (
        math.log(2.0)
        + np.log(np.sinh(0.5 * (rho + t)))
        + np.log(np.sinh(0.25 * rho * (1.0 - x)))
        - np.log1p(-x)
    )
    log_const = (
        0.5 * (n - 1) * math.log(2.0)
        + special.gammaln(0.5 * n)
        - 0.5 * math.log(math.pi)
        - special.gammaln(0.5 * (n - 1))
        + (2 - n) * math.log(math.sinh(rho))
        + math.log(0.5 * rho)
    )
    weight = w * np.exp(a * log_base + log_const)
    return np.cos(np.multiply.outer(lam, t)) @ weight


def spherical_table(n: int, lambdas: Sequence[float], rhos: Sequence[float]) -> np.ndarray:
    """L_lam(rho) for every (lam, rho) pair, shape (len(lambdas), len(rhos))."""

    lam = np.abs(np.asarray(lambdas, dtype=float))
    rho = np.asarray(rhos, dtype=float)
    if np.any(rho < 0.0):
        raise DomainError("Spherical functions need rho >= 0")
    table = np.empty((lam.size, rho.size))
    use_closed = (n % 2 == 1) & (rho >= CLOSED_FORM_MIN_RHO)
    if np.any(use_closed):
        table[:, use_closed] = _closed_form_taylor(
            n, lam[:, None], rho[None, use_closed]
        )[0]
    for index in np.flatnonzero(~use_closed):
        table[:, index] = _mehler(n, lam, float(rho[index]))
    return table


def _abel_spherical(n: int, lam: float, rho: float) -> float:
    """Even n: Abel integral of the (n+1)-dimensional spherical function, normalized at 0."""

    step = min(1.0, 1.0 / (1.0 + abs(lam)))
    lifted = lambda r: spherical_table(n + 1, [lam], r)[0]  # noqa: E731
    raw = abel_integral(lifted, rho, max_step=step)
    base = abel_integral(lifted, 0.0, max_step=step)
    return raw / base


def spherical_function(n: int, lam: float, rho: float) -> float:
    """L_lam(rho) with L_lam(0) = 1."""

    if rho < 0.0:
        raise DomainError("Spherical functions need rho >= 0")
    if rho == 0.0:
        return 1.0
    if n % 2 == 0:
        return float(_abel_spherical(n, float(lam), float(rho)))
    return float(spherical_table(n, [lam], [rho])[0, 0])


def spherical_function_jet(n: int, lam: float, rho: float, order: int = 2) -> np.ndarray:
    """Derivatives 0..order of L_lam at rho (odd n, rho > 0)."""

    if n % 2 == 0:
        raise DomainError("Jets of spherical functions are available for odd n")
    taylor = _closed_form_taylor(n, np.asarray(float(lam)), np.asarray(float(rho)), extra=order)
    return np.array([taylor[k] * math.factorial(k) for k in range(order + 1)], dtype=float)


# Transforms.


def _lambda_template(lambdas: Union[SpectralDensity, Sequence[float]], weights=None):
    if isinstance(lambdas, SpectralDensity):
        return lambdas.lambda_grid, lambdas.weights
    lam = np.asarray(lambdas, dtype=float)
    return lam, (np.ones_like(lam) if weights is None else np.asarray(weights, float))


def radial_nodes(f: RadialFunction, order: int = RADIAL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes on every grid interval where the profile is not identically zero."""

    nonzero = np.flatnonzero(f.values != 0.0)
    if nonzero.size == 0:
        return np.empty(0), np.empty(0)
    last = min(int(nonzero[-1]) + 1, f.grid.size - 1)
    return quadrature.composite_rule(f.grid[: last + 1], order)


def spherical_transform(
    f: RadialFunction,
    n: int,
    lambdas: Union[SpectralDensity, Sequence[float]],
    weights=None,
) -> SpectralDensity:
    """f^(lam) = |S^(n-1)| int f L_lam sinh^(n-1) drho on the given lam grid."""

    lam, lam_weights = _lambda_template(lambdas, weights)
    if not f.decays(n=n):
        raise TransformDivergenceError(
            f"Profile tail {f.values[-1]:.3e} at rho={f.rho_max:g} exceeds {DECAY_RATIO:g} of "
            f"its peak once weighted by the volume density of H^{n}"
        )
    rho, w = radial_nodes(f)
    if rho.size == 0:
        return SpectralDensity(lam, np.zeros_like(lam), lam_weights)
    integrand = f(rho) * np.sinh(rho) ** (n - 1) * w * sphere_area(n)
    keep = integrand != 0.0
    table = spherical_table(n, lam, rho[keep])
    return SpectralDensity(lam, table @ integrand[keep], lam_weights)


def inverse_spherical_transform(
    F: SpectralDensity, n: int, grid: Sequence[float]
) -> RadialFunction:
    """f(rho) = int F(lam) L_lam(rho) nu_n(lam) dlam on the supplied radial grid."""

    grid = np.asarray(grid, dtype=float)
    density = plancherel_density(n, F.lambda_grid)
    weighted = F.values * density * F.weights
    peak = float(np.max(np.abs(F.values * density))) if F.values.size else 0.0
    if peak > 0.0:
        edge = float(np.max(np.abs(F.values[-4:] * density[-4:])))
        if edge > TRUNCATION_RATIO * peak:
            raise AccuracyError(
                f"Spectral truncation at lambda={F.lambda_grid[-1]:g}: edge/peak = "
                f"{edge / peak:.3e} exceeds {TRUNCATION_RATIO:g}"
            )
    if not np.any(weighted):
        return RadialFunction(grid, np.zeros_like(grid))
    table = spherical_table(n, F.lambda_grid, grid)
    return RadialFunction(grid, weighted @ table)


def apply_multiplier(F: SpectralDensity, n: int, exponent: float) -> SpectralDensity:
    """Pointwise product with (lam^2 + (n-1)^2/4)^exponent."""

    if exponent == 0.0:
        return F
    symbol = (F.lambda_grid**2 + 0.25 * (n - 1) ** 2) ** exponent
    return F.with_values(F.values * symbol)


def fractional_laplacian_radial(
    f: RadialFunction,
    params: ProblemParams,
    lambdas: Optional[SpectralDensity] = None,
    exponent: Optional[float] = None,
) -> RadialFunction:
    """(-Delta)^s f through transform, multiplier and inverse."""

    lambdas = lambdas if lambdas is not None else lambda_grid()
    power = params.s if exponent is None else exponent
    spectrum = spherical_transform(f, params.n, lambdas)
    return inverse_spherical_transform(apply_multiplier(spectrum, params.n, power), params.n, f.grid)


def laplace_beltrami(f: RadialFunction, n: int, rho) -> np.ndarray:
    """f'' + (n-1) coth(rho) f' for a radial profile; n f''(0) at the origin."""

    rho = np.asarray(rho, dtype=float)
    second = f(rho, 2)
    first = f(rho, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = second + (n - 1) * first / np.tanh(rho)
    return np.where(rho == 0.0, n * second, out)


# Spectral Green's function.


def _green_lambda_rule(rho: float, lam_max: float) -> tuple[np.ndarray, np.ndarray]:
    near = [0.0, *quadrature.geometric_breakpoints(0.02, min(1.28, lam_max))]
    width = min(0.5, 1.0 / rho)
    far = quadrature.uniform_breakpoints(near[-1], lam_max, width)[1:] if lam_max > near[-1] else []
    return quadrature.composite_rule(np.concatenate([near, far]), 16)


def green_spectral(params: ProblemParams, rho: float) -> float:
    """G_s(rho) = int (lam^2 + rho0^2)^-s L_lam(rho) nu_n(lam) dlam.

    The lam-integral is not absolutely convergent, so it is evaluated as
    Gamma(s)^-1 int_0^inf t^(s-1) e^(-t rho0^2) [int e^(-t lam^2) L_lam nu_n dlam] dt.
    """

    if not rho > 0.0:
        raise DomainError("green_spectral needs rho > 0")
    n, s = params.n, params.s
    c2 = params.rho0**2
    t_min = rho * rho / 160.0
    t_max = 45.0 / c2
    u_edges = quadrature.uniform_breakpoints(math.log(t_min), math.log(t_max), 0.5)
    u, u_weights = quadrature.composite_rule(u_edges, 12)
    t = np.exp(u)

    lam_max = math.sqrt(45.0 / t_min)
    lam, lam_weights = _green_lambda_rule(rho, lam_max)
    profile = spherical_table(n, lam, [rho])[:, 0] * plancherel_density(n, lam) * lam_weights
    damped = np.exp(-np.multiply.outer(t, lam * lam)) @ profile
    outer = u_weights * t**s * np.exp(-t * c2) * damped
    value = float(np.sum(outer)) / special.gamma(s)
    _LOGGER.debug(
        "green_spectral n=%d s=%g rho=%g: %d t-nodes, %d lam-nodes, value=%.12e",
        n, s, rho, t.size, lam.size, value,
    )
    if not value > 0.0:
        raise AccuracyError(f"Spectral Green's function at rho={rho:g} is not positive: {value}")
    return value
