"""Modified Bessel functions with derivative jets, and Gamma utilities.

Values come from scipy.special (kv, iv, loggamma).  Derivatives are never
taken numerically: K and I jets use the order recurrences

    K_nu^(k)(z) = (-1/2)^k sum_j C(k, j) K_{nu-k+2j}(z)
    I_nu^(k)(z) = 2^-k    sum_j C(k, j) I_{nu-k+2j}(z)

and products/quotients of jets use truncated Taylor arithmetic on arrays of
shape (order + 1, *points).
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Sequence

import numpy as np
from scipy import special

from src.core.errors import DomainError, PoleError, UnsupportedOrderError


MAX_BESSEL_ORDER = 5.0
MAX_JET_ORDER = 12


@dataclass(frozen=True)
class Jet:
    """Derivatives 0..order of a scalar function at base_point (not Taylor-scaled)."""

    base_point: float
    order: int
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.order + 1:
            raise ValueError(
                f"Jet of order {self.order} needs {self.order + 1} coefficients, "
                f"got {len(self.coeffs)}"
            )
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError(f"Jet coefficients must be finite: {self.coeffs}")

    @classmethod
    def from_derivatives(cls, base_point: float, derivatives: Sequence[float]) -> "Jet":
        values = tuple(float(d) for d in derivatives)
        return cls(float(base_point), len(values) - 1, values)

    @property
    def value(self) -> float:
        return self.coeffs[0]


# Truncated Taylor arithmetic.  Arrays hold f^(k)/k! along axis 0.


def taylor_from_derivatives(derivs: np.ndarray) -> np.ndarray:
    derivs = np.asarray(derivs, dtype=float)
    scale = np.array([1.0 / math.factorial(k) for k in range(derivs.shape[0])])
    return derivs * scale.reshape((-1,) + (1,) * (derivs.ndim - 1))


def taylor_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product truncated to the shorter order."""

    order = min(a.shape[0], b.shape[0])
    out = np.zeros((order,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for k in range(order):
        for j in range(k + 1):
            out[k] = out[k] + a[j] * b[k - j]
    return out


def taylor_reciprocal(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a, dtype=float)
    out[0] = 1.0 / a[0]
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0], dtype=float)
        for j in range(1, k + 1):
            acc = acc + a[j] * out[k - j]
        out[k] = -acc / a[0]
    return out


def taylor_derivative(a: np.ndarray) -> np.ndarray:
    """Taylor coefficients of f' from those of f (one order shorter)."""

    k = np.arange(1, a.shape[0], dtype=float).reshape((-1,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def sinh_taylor(x, order: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    sh, ch = np.sinh(x), np.cosh(x)
    return np.stack(
        [(sh if k % 2 == 0 else ch) / math.factorial(k) for k in range(order + 1)]
    )


def csch_taylor(x, order: int) -> np.ndarray:
    return taylor_reciprocal(sinh_taylor(x, order))


def power_taylor(x, exponent: float, order: int) -> np.ndarray:
    """Taylor coefficients of t**exponent at t = x > 0."""

    x = np.asarray(x, dtype=float)
    # binom(exponent, k) as a running product, finite for negative integer exponents.
    coeffs = np.cumprod([1.0] + [(exponent - j) / (j + 1) for j in range(order)])
    return np.stack([c * x ** (exponent - k) for k, c in enumerate(coeffs)])


# Bessel functions.


def _flush_order(nu: float) -> float:
    """Subnormal orders read as 0; scipy returns NaN for them."""

    return 0.0 if abs(nu) < np.finfo(float).tiny else float(nu)


def _check_order(nu: float) -> None:
    if abs(nu) > MAX_BESSEL_ORDER:
        raise UnsupportedOrderError(
            f"Bessel order {nu!r} is outside the supported window |nu| <= {MAX_BESSEL_ORDER}"
        )


def _check_argument(z) -> np.ndarray:
    array = np.asarray(z, dtype=float)
    if np.any(~(array > 0.0)):
        raise DomainError("Modified Bessel functions need z > 0")
    return array


def _check_jet_order(m: int) -> None:
    if m < 0 or m > MAX_JET_ORDER:
        raise UnsupportedOrderError(
            f"Jet order {m} is outside the supported window 0..{MAX_JET_ORDER}"
        )


def _scalar_or_array(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def bessel_k(nu: float, z):
    """K_nu(z) for z > 0; underflows to 0 for z beyond ~700."""

    _check_order(nu)
    return _scalar_or_array(special.kv(_flush_order(nu), _check_argument(z)))


def bessel_i(nu: float, z):
    """I_nu(z) for z > 0."""

    _check_order(nu)
    return _scalar_or_array(special.iv(_flush_order(nu), _check_argument(z)))


def bessel_k_derivatives(nu: float, z, m: int) -> np.ndarray:
    """Array of d^k/dz^k K_nu(z), k = 0..m, stacked along axis 0."""

    z = np.asarray(z, dtype=float)
    rows = []
    for k in range(m + 1):
        acc = np.zeros_like(z)
        for j in range(k + 1):
            acc = acc + special.binom(k, j) * special.kv(_flush_order(nu - k + 2 * j), z)
        rows.append((-0.5) ** k * acc)
    return np.stack(rows)


def bessel_i_derivatives(nu: float, z, m: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    rows = []
    for k in range(m + 1):
        acc = np.zeros_like(z)
        for j in range(k + 1):
            acc = acc + special.binom(k, j) * special.iv(_flush_order(nu - k + 2 * j), z)
        rows.append(0.5**k * acc)
    return np.stack(rows)


def bessel_k_jet(nu: float, z: float, m: int) -> Jet:
    _check_order(nu)
    _check_jet_order(m)
    _check_argument(z)
    return Jet.from_derivatives(z, bessel_k_derivatives(nu, float(z), m))


def bessel_i_jet(nu: float, z: float, m: int) -> Jet:
    _check_order(nu)
    _check_jet_order(m)
    _check_argument(z)
    return Jet.from_derivatives(z, bessel_i_derivatives(nu, float(z), m))


def scaled_bessel_k_taylor(nu: float, scale: float, x, order: int) -> np.ndarray:
    """Taylor coefficients of t -> K_nu(scale * t) at t = x."""

    derivs = bessel_k_derivatives(nu, scale * np.asarray(x, dtype=float), order)
    factors = np.array([scale**k for k in range(order + 1)])
    return taylor_from_derivatives(derivs * factors.reshape((-1,) + (1,) * (derivs.ndim - 1)))


# Gamma utilities.


def log_gamma_complex_abs(a: float, b: float) -> float:
    """log|Gamma(a + ib)|."""

    if b == 0.0 and a <= 0.0 and float(a).is_integer():
        raise PoleError(f"Gamma has a pole at {a!r}")
    return float(np.real(special.loggamma(complex(a, b))))


def log_gamma_abs(values) -> np.ndarray:
    """Vectorized log|Gamma(z)| for complex z away from the poles."""

    return np.real(special.loggamma(np.asarray(values, dtype=complex)))
