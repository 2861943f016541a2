"""Closed-form Green's function G_s and singular kernel K_{n,s} on H^n.

Odd n uses the iterated operator (-d/drho / sinh rho)^m, m = (n-1)/2, applied to

    green:  rho^(s-1/2) K_{s-1/2}(rho0 rho)
    kernel: rho^-(s+1/2) K_{s+1/2}(rho0 rho)

with rho0 = (n-1)/2.  Even n applies n/2 steps and then the Abel-type
integral.  The Green normalization alpha is fixed against the spectral
representation; the principal-value normalization follows from alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import logging
import math
from typing import Callable

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from src.core import quadrature
from src.core.errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    ParameterError,
    UnsupportedOrderError,
)
from src.core.specfun import (
    MAX_JET_ORDER,
    csch_taylor,
    power_taylor,
    scaled_bessel_k_taylor,
    taylor_derivative,
    taylor_mul,
)


_LOGGER = logging.getLogger(__name__)

TaylorSource = Callable[[np.ndarray, int], np.ndarray]

CALIBRATION_POINT = 1.0
CALIBRATION_CHECKS = (0.1, 0.5, 2.0, 5.0)
CALIBRATION_RTOL = {"odd": 1e-6, "even": 1e-5}
UNDERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class ProblemParams:
    """Dimension n, fractional order s and nonlinearity exponent p."""

    n: int
    s: float
    p: float = 2.0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"Dimension n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.s < 1.0:
            raise ParameterError(f"Fractional order s must lie in (0, 1), got {self.s!r}")
        if not self.p > 1.0:
            raise ParameterError(f"Exponent p must exceed 1, got {self.p!r}")

    @property
    def rho0(self) -> float:
        return 0.5 * (self.n - 1)

    @property
    def critical_exponent(self) -> float:
        return (self.n + 2.0 * self.s) / (self.n - 2.0 * self.s)

    @property
    def is_critical(self) -> bool:
        return math.isclose(self.p, self.critical_exponent, rel_tol=1e-12)

    @property
    def is_subcritical(self) -> bool:
        return self.p < self.critical_exponent and not self.is_critical

    @property
    def odd(self) -> bool:
        return self.n % 2 == 1


@dataclass(frozen=True)
class KernelConstants:
    """Normalizations of G_s, K_{n,s} and the Plancherel measure."""

    c_ns: float
    c1: float
    alpha: float
    dn: float
    pv_scale: float


def sphere_area(n: int) -> float:
    """|S^(n-1)|, the area of the unit sphere in R^n."""

    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def plancherel_constant(n: int) -> float:
    """D_n = (2^(3-n) pi |S^(n-1)|)^-1."""

    return 1.0 / (2.0 ** (3 - n) * math.pi * sphere_area(n))


def displayed_c_ns(n: int, s: float) -> float:
    return 2.0 * 4.0 * math.sqrt(2.0) * math.gamma(n + s) / (
        3.0 * math.gamma(0.5 * n) * math.gamma(-s)
    )


def kernel_c1(n: int, s: float) -> float:
    return 1.0 / (
        2.0 ** (n - 2 + 2 * s) * math.gamma(0.5 * (n - 1)) * math.gamma(0.5 * (1 + 2 * s))
    )


# Jet sources and the iterated operator.


def bessel_source(nu: float, scale: float, power: float) -> TaylorSource:
    """Taylor producer for rho -> rho**power * K_nu(scale * rho)."""

    def source(rho: np.ndarray, order: int) -> np.ndarray:
        return taylor_mul(
            power_taylor(rho, power, order), scaled_bessel_k_taylor(nu, scale, rho, order)
        )

    return source


def iterated_operator_taylor(
    source: TaylorSource, m: int, rho, sign: int = -1, extra: int = 0
) -> np.ndarray:
    """Taylor coefficients (orders 0..extra) of (sign d/drho / sinh rho)^m source."""

    if m < 0 or m + extra > MAX_JET_ORDER:
        raise UnsupportedOrderError(
            f"Operator power {m} (+{extra} derivatives) exceeds jet support {MAX_JET_ORDER}"
        )
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0.0)):
        raise DomainError("The iterated operator needs rho > 0")
    values = source(rho, m + extra)
    csch = csch_taylor(rho, m + extra)
    for _ in range(m):
        values = sign * taylor_mul(taylor_derivative(values), csch)
    return values


def iterated_operator(source: TaylorSource, m: int, rho, sign: int = -1):
    """(sign d/drho / sinh rho)^m applied to a function given by its jets."""

    value = iterated_operator_taylor(source, m, rho, sign)[0]
    return float(value) if np.ndim(value) == 0 else value


# Abel-type integral.


def _abel_edges(rho: float, reach: float, max_step: float) -> np.ndarray:
    first = 1e-3 * min(1.0, rho) if rho > 0.0 else 1e-3
    near = quadrature.geometric_breakpoints(first, min(1.0, reach))
    edges = [0.0, *near]
    if reach > 1.0:
        edges.extend(quadrature.uniform_breakpoints(1.0, reach, max_step)[1:])
    return np.asarray(edges)


def abel_integral(
    func: Callable[[np.ndarray], np.ndarray],
    rho: float,
    *,
    max_step: float = 1.0,
    rtol: float = 1e-13,
    reach: float = 40.0,
    max_reach: float = 640.0,
) -> float:
    """Integral of sinh r (cosh r - cosh rho)^(-1/2) func(r) over r > rho.

    With v^2 = cosh r - cosh rho the integral becomes 2 * int_0^inf func(r(v)) dv,
    which is free of the endpoint singularity.
    """

    if rho < 0.0:
        raise DomainError("abel_integral needs rho >= 0")
    half = math.sinh(0.5 * rho) ** 2
    while True:
        h_edges = _abel_edges(rho, reach, max_step)
        r_edges = rho + h_edges
        v_edges = np.sqrt(2.0 * np.sinh(0.5 * (r_edges + rho)) * np.sinh(0.5 * h_edges))
        nodes, weights = quadrature.composite_rule(v_edges, 16)
        r = 2.0 * np.arcsinh(np.sqrt(half + 0.5 * nodes**2))
        contributions = 2.0 * weights * np.asarray(func(r), dtype=float)
        total = float(np.sum(contributions))
        tail = float(np.sum(contributions[r > rho + reach - 5.0]))
        if abs(tail) <= rtol * abs(total) or tail == 0.0:
            return total
        if reach >= max_reach:
            raise ConvergenceError(
                f"Abel integral at rho={rho:g} did not converge: tail {tail:.3e} "
                f"of total {total:.3e} beyond r={rho + reach:g}"
            )
        reach *= 2.0


# Closed forms.


def _underflow_limit(params: ProblemParams) -> float:
    return UNDERFLOW_EXPONENT / (params.n - 1)


def _check_rho(rho) -> np.ndarray:
    array = np.asarray(rho, dtype=float)
    if np.any(~(array > 0.0)):
        raise DomainError("Kernels are evaluated at rho > 0")
    return array


def _shape(params: ProblemParams, rho: np.ndarray, nu: float, power: float) -> np.ndarray:
    source = bessel_source(nu, params.rho0, power)
    flat = np.atleast_1d(rho).ravel()
    out = np.zeros_like(flat)
    live = flat <= _underflow_limit(params)
    if params.odd:
        m = (params.n - 1) // 2
        if np.any(live):
            out[live] = iterated_operator_taylor(source, m, flat[live], sign=-1)[0]
        return out.reshape(rho.shape)
    m = params.n // 2

    def integrand(r: np.ndarray) -> np.ndarray:
        values = np.zeros_like(r)
        ok = r <= _underflow_limit(params)
        if np.any(ok):
            values[ok] = iterated_operator_taylor(source, m, r[ok], sign=-1)[0]
        return values

    for index in np.flatnonzero(live):
        out[index] = abel_integral(integrand, float(flat[index]))
    return out.reshape(rho.shape)


def green_shape(params: ProblemParams, rho) -> np.ndarray:
    """G_s up to the constant alpha."""

    return _shape(params, _check_rho(rho), params.s - 0.5, params.s - 0.5)


def kernel_shape(params: ProblemParams, rho) -> np.ndarray:
    """K_{n,s} without C1 (and without 1/sqrt(pi) for even n)."""

    return _shape(params, _check_rho(rho), params.s + 0.5, -(params.s + 0.5))


def underflows(params: ProblemParams, rho) -> np.ndarray:
    """True where G_s and K_{n,s} are reported as 0 because of underflow."""

    return np.asarray(rho, dtype=float) > _underflow_limit(params)


def _report_underflow(params: ProblemParams, rho, what: str) -> None:
    flags = underflows(params, rho)
    if np.any(flags):
        _LOGGER.debug(
            "%s: %d of %d radii beyond rho=%.6g reported as 0 (underflow)",
            what, int(np.count_nonzero(flags)), flags.size, _underflow_limit(params),
        )


@lru_cache(maxsize=64)
def _calibrate(n: int, s: float) -> KernelConstants:
    from src.core.spectral import green_spectral

    params = ProblemParams(n, s)
    shape = float(green_shape(params, CALIBRATION_POINT))
    reference = green_spectral(params, CALIBRATION_POINT)
    alpha = reference / shape
    rtol = CALIBRATION_RTOL["odd" if params.odd else "even"]
    for rho in CALIBRATION_CHECKS:
        closed = alpha * float(green_shape(params, rho))
        spectral = green_spectral(params, rho)
        mismatch = abs(closed - spectral) / abs(spectral)
        _LOGGER.debug("calibration n=%d s=%g rho=%g mismatch=%.3e", n, s, rho, mismatch)
        if mismatch > rtol:
            raise CalibrationError(
                f"Green's function shape disagrees with the spectral representation at "
                f"rho={rho:g} (relative mismatch {mismatch:.3e}, n={n}, s={s:g})"
            )
    if alpha <= 0.0:
        raise CalibrationError(f"Calibrated alpha={alpha:.6e} is not positive")

    c1 = kernel_c1(n, s)
    basis = 1.0 if n % 2 == 1 else 1.0 / math.sqrt(math.pi)
    pv_scale = (
        alpha * special.gamma(s) * (2.0 * params.rho0) ** (2.0 * s)
        / abs(special.gamma(-s)) / (c1 * basis)
    )
    constants = KernelConstants(
        c_ns=displayed_c_ns(n, s),
        c1=c1,
        alpha=alpha,
        dn=plancherel_constant(n),
        pv_scale=float(pv_scale),
    )
    _LOGGER.info("Calibrated n=%d s=%g: alpha=%.12e pv_scale=%.12e", n, s, alpha, pv_scale)
    return constants


def calibrate_normalization(params: ProblemParams) -> KernelConstants:
    """Fix alpha against green_spectral at rho* = 1 and verify the shape elsewhere."""

    return _calibrate(int(params.n), float(params.s))


def _finish(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def green(params: ProblemParams, rho, constants: KernelConstants | None = None):
    """G_s(rho), positive and strictly decreasing; 0 beyond the underflow limit."""

    constants = constants or calibrate_normalization(params)
    _report_underflow(params, rho, "green")
    return _finish(constants.alpha * green_shape(params, rho))


def singular_kernel(params: ProblemParams, rho):
    """K_{n,s}(rho) with the C1 normalization."""

    scale = kernel_c1(params.n, params.s)
    if not params.odd:
        scale /= math.sqrt(math.pi)
    _report_underflow(params, rho, "singular_kernel")
    return _finish(scale * kernel_shape(params, rho))


def operator_kernel(params: ProblemParams, rho, constants: KernelConstants | None = None):
    """pv_scale * K_{n,s}: the off-diagonal kernel of (-Delta)^s."""

    constants = constants or calibrate_normalization(params)
    return _finish(constants.pv_scale * np.asarray(singular_kernel(params, rho)))


class GreenTable:
    """Log-log cubic spline of G_s for fast repeated evaluation."""

    def __init__(
        self,
        params: ProblemParams,
        rho_max: float = 40.0,
        rho_min: float = 1e-5,
        nodes: int = 600,
        constants: KernelConstants | None = None,
    ):
        self.params = params
        self.rho_min = rho_min
        self.rho_max = min(rho_max, 0.95 * _underflow_limit(params))
        rho = np.geomspace(rho_min, self.rho_max, nodes)
        values = np.asarray(green(params, rho, constants))
        self._log_rho = np.log(rho)
        self._log_values = np.log(values)
        self._spline = CubicSpline(self._log_rho, self._log_values)
        self._near_slope = 2.0 * params.s - params.n

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        safe = np.maximum(rho, 1e-300)
        log_rho = np.log(safe)
        out = np.empty_like(rho)
        inside = (rho >= self.rho_min) & (rho <= self.rho_max)
        out[inside] = np.exp(self._spline(log_rho[inside]))
        below = rho < self.rho_min
        out[below] = np.exp(
            self._log_values[0] + self._near_slope * (log_rho[below] - self._log_rho[0])
        )
        above = rho > self.rho_max
        if np.any(above):
            p = self.params
            out[above] = np.exp(
                self._log_values[-1]
                - (p.n - 1) * (rho[above] - self.rho_max)
                + (p.s - 1.0) * (log_rho[above] - self._log_rho[-1])
            )
        return out


# Fits used by the asymptotic checks.


def fit_loglog_slope(rho, values) -> float:
    """Least-squares slope of log(values) against log(rho)."""

    return float(np.polyfit(np.log(rho), np.log(values), 1)[0])


def fit_tail_rate(rho, values, power: float) -> float:
    """Exponential decay rate k in values ~ rho**power * exp(-k rho) (1 + b/rho)."""

    rho = np.asarray(rho, dtype=float)
    target = np.log(np.asarray(values, dtype=float)) - power * np.log(rho)
    basis = np.column_stack([np.ones_like(rho), rho, 1.0 / rho])
    coeffs, *_ = np.linalg.lstsq(basis, target, rcond=None)
    return float(-coeffs[1])
