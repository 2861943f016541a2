"""Check suites behind ``hyperfrac check``: each claim is measured and compared to a tolerance."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Callable, Optional

import numpy as np
from scipy import special

from src.cli.config import RunConfig
from src.core.diagnostics import (
    direct_fractional_laplacian,
    hls_constant,
    hls_kernel,
    hls_ratio,
    moving_plane_sweep,
)
from src.core.geometry import Foliation, origin, point_at
from src.core.kernels import (
    ProblemParams,
    UNDERFLOW_EXPONENT,
    calibrate_normalization,
    fit_loglog_slope,
    fit_tail_rate,
    green,
    singular_kernel,
    sphere_area,
)
from src.core import quadrature
from src.core.solver import radial_green_matrix, radial_operator_matrix
from src.core.spectral import (
    RadialFunction,
    apply_multiplier,
    fractional_laplacian_radial,
    inverse_spherical_transform,
    plancherel_density,
    spherical_transform,
)


_LOGGER = logging.getLogger(__name__)

MAXPRINCIPLE_PROFILES = 20
HLS_WIDTHS = np.geomspace(0.3, 3.0, 10)
BUMP_REACH = 8.0
BUMP_STEP = 0.01
TAIL_STEP = 0.05
POTENTIAL_REACH = 72.0


@dataclass(frozen=True)
class Claim:
    claim: str
    measured: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "claim": self.claim,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _within(claim: str, measured: float, expected: float, tolerance: float) -> Claim:
    error = abs(measured - expected)
    return Claim(claim, float(measured), float(tolerance), bool(error <= tolerance))


def _relative(claim: str, error: float, tolerance: float) -> Claim:
    return Claim(claim, float(error), float(tolerance), bool(error <= tolerance))


def bump(grid: np.ndarray, width: float = 1.0) -> RadialFunction:
    return RadialFunction(grid, np.exp(-((grid / width) ** 2)))


def _tail_window(params: ProblemParams, start: float, stop: float) -> np.ndarray:
    limit = 0.9 * UNDERFLOW_EXPONENT / (params.n - 1)
    return np.linspace(min(start, 0.5 * limit), min(stop, limit), 24)


def asymptotics(config: RunConfig) -> list[Claim]:
    params = ProblemParams(config.n, config.s)
    tol = config.checks
    near = np.geomspace(1e-4, 1e-2, 12)
    tail = _tail_window(params, 10.0, 20.0)
    n, s = params.n, params.s
    claims = [
        _within(
            f"G_s(rho) ~ rho^(2s-n) near 0: log-log slope {2 * s - n:g}",
            fit_loglog_slope(near, green(params, near)), 2 * s - n, tol.slope_tol,
        ),
        _within(
            f"K_(n,s)(rho) ~ rho^(-n-2s) near 0: log-log slope {-n - 2 * s:g}",
            fit_loglog_slope(near, singular_kernel(params, near)), -n - 2 * s, tol.slope_tol,
        ),
    ]
    rate = fit_tail_rate(tail, green(params, tail), s - 1.0)
    claims.append(
        _relative(f"G_s tail rate n-1 = {n - 1}", abs(rate - (n - 1)) / (n - 1), tol.tail_tol)
    )
    rate = fit_tail_rate(tail, singular_kernel(params, tail), -1.0 - s)
    claims.append(
        _relative(f"K_(n,s) tail rate n-1 = {n - 1}", abs(rate - (n - 1)) / (n - 1), tol.tail_tol)
    )

    grid = np.geomspace(1e-3, min(30.0, 0.9 * UNDERFLOW_EXPONENT / (n - 1)), 200)
    g = np.asarray(green(params, grid))
    k = np.asarray(singular_kernel(params, grid))
    claims.append(Claim("G_s positive on the log grid", float(np.sum(g <= 0)), 0.0, bool(np.all(g > 0))))
    claims.append(Claim("K_(n,s) positive on the log grid", float(np.sum(k <= 0)), 0.0, bool(np.all(k > 0))))
    increases = int(np.sum(np.diff(g) >= 0.0))
    claims.append(Claim("G_s strictly decreasing on the log grid", float(increases), 0.0, increases == 0))
    return claims


def _max_relative(a: np.ndarray, b: np.ndarray, scale: Optional[float] = None) -> float:
    scale = scale if scale is not None else float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale)


def bump_grid(reach: float = BUMP_REACH, step: float = BUMP_STEP) -> np.ndarray:
    """Uniform grid covering the support of the bump to below e^(-reach^2)."""

    return np.linspace(0.0, reach, int(round(reach / step)) + 1)


def _extend(grid: np.ndarray, stop: float, step: float = TAIL_STEP) -> np.ndarray:
    tail = np.arange(grid[-1] + step, stop + 0.5 * step, step)
    return np.concatenate([grid, tail])


def inversion(config: RunConfig) -> list[Claim]:
    """G * g through the multiplier, then (-Delta)^s back to g."""

    params = ProblemParams(config.n, config.s)
    tol = config.checks
    lambdas = config.lambdas()
    grid = bump_grid()
    source = bump(grid)

    spectrum = spherical_transform(source, params.n, lambdas)
    round_trip = inverse_spherical_transform(spectrum, params.n, grid)
    claims = [
        _relative(
            "inverse(transform(g)) = g",
            _max_relative(round_trip.values, source.values), tol.transform_tol,
        )
    ]
    # G_s * g weighted by sinh^(n-1) L_0 falls off only like e^(-rho0 rho).
    wide = _extend(grid, max(config.rho_max, POTENTIAL_REACH / (params.n - 1)))
    potential = inverse_spherical_transform(
        apply_multiplier(spectrum, params.n, -params.s), params.n, wide
    )
    recovered = fractional_laplacian_radial(potential, params, lambdas)
    claims.append(
        _relative(
            "(-Delta)^s (G_s * g) = g",
            _max_relative(recovered.values[: grid.size], source.values), tol.inversion_tol,
        )
    )

    radial = config.grid()
    matrix = radial_green_matrix(params, radial, workers=config.workers)
    direct = matrix.apply(bump(radial).values)
    claims.append(
        _relative(
            "spectral G_s * g matches the radial Green operator",
            _max_relative(direct, potential(radial)), 10.0 * tol.inversion_tol,
        )
    )
    return claims


def plancherel(config: RunConfig) -> list[Claim]:
    n = config.n
    tol = config.checks
    lam = np.linspace(0.05, 10.0, 40)
    claims = [
        _relative(
            "n=2 density equals lam tanh(pi lam) / (2 pi)",
            _max_relative(plancherel_density(2, lam), lam * np.tanh(math.pi * lam) / (2 * math.pi)),
            1e-12,
        ),
        _relative(
            "n=3 density equals lam^2 / (2 pi^2)",
            _max_relative(plancherel_density(3, lam), lam**2 / (2 * math.pi**2)),
            1e-12,
        ),
    ]
    lambdas = config.lambdas()
    f = bump(bump_grid())
    spectrum = spherical_transform(f, n, lambdas)
    rho, w = quadrature.composite_rule(f.grid, 8)
    energy = sphere_area(n) * float(np.sum(w * f(rho) ** 2 * np.sinh(rho) ** (n - 1)))
    dual = float(
        np.sum(spectrum.weights * spectrum.values**2 * plancherel_density(n, spectrum.lambda_grid))
    )
    claims.append(_relative("Plancherel identity ||f||^2 = int |f^|^2 nu", abs(dual - energy) / energy, tol.transform_tol))
    back = inverse_spherical_transform(spectrum, n, f.grid)
    claims.append(
        _relative("inverse(transform(f)) = f", _max_relative(back.values, f.values), tol.transform_tol)
    )
    return claims


def negative_well(grid: np.ndarray, depth: float, radius: float) -> RadialFunction:
    """-depth (1 - (rho/radius)^2)^3 inside the ball, 0 outside: interior minimum at 0."""

    inside = np.clip(1.0 - (grid / radius) ** 2, 0.0, None)
    return RadialFunction(grid, -depth * inside**3)


def maxprinciple(config: RunConfig) -> list[Claim]:
    params = ProblemParams(config.n, config.s)
    constants = calibrate_normalization(params)
    grid = config.grid()
    rng = np.random.default_rng(0)
    values = []
    for _ in range(MAXPRINCIPLE_PROFILES):
        well = negative_well(grid, rng.uniform(0.5, 2.0), rng.uniform(1.0, 3.0))
        values.append(direct_fractional_laplacian(well, params, origin(params.n), constants))
    worst = float(max(values))
    claims = [
        Claim(
            f"(-Delta)^s u < 0 at an interior negative minimum ({MAXPRINCIPLE_PROFILES} profiles)",
            worst, 0.0, worst < 0.0,
        )
    ]
    foliation = Foliation(direction_index=1)
    center = point_at(0.5, params.n)
    sweep = moving_plane_sweep(bump(grid), center, foliation, [0.0, 0.25, 0.5])
    floor = float(min(sweep.min_w))
    claims.append(Claim("w_lambda >= -1e-6 for planes behind the centre", floor, 1e-6, floor >= -1e-6))
    return claims


def _hls_oracle(n: int, lam: float) -> float:
    return float(
        np.exp(
            0.5 * lam * np.log(np.pi)
            + special.gammaln(0.5 * n - 0.5 * lam)
            - special.gammaln(n - 0.5 * lam)
            + (-1.0 + lam / n) * (special.gammaln(0.5 * n) - special.gammaln(n))
        )
    )


def hls(config: RunConfig, lambda_exp: float) -> list[Claim]:
    n = config.n
    constant = hls_constant(n, lambda_exp)
    oracle = _hls_oracle(n, lambda_exp)
    claims = [_relative("C_(n,lambda) matches the scipy gammaln oracle", abs(constant - oracle) / oracle, 1e-10)]
    grid = config.grid()
    matrix = radial_operator_matrix(
        hls_kernel(lambda_exp), n, grid, n - 1.0 - lambda_exp, workers=config.workers
    )
    ratios = [hls_ratio(bump(grid, w), bump(grid, w), lambda_exp, n, matrix=matrix) for w in HLS_WIDTHS]
    worst = float(max(ratios)) / constant
    claims.append(Claim(f"HLS ratio / C_(n,lambda) < 1 over {len(ratios)} bumps", worst, 1.0, worst < 1.0))
    return claims


SUITES: dict[str, Callable[..., list[Claim]]] = {
    "asymptotics": asymptotics,
    "inversion": inversion,
    "plancherel": plancherel,
    "maxprinciple": maxprinciple,
    "hls": hls,
}
