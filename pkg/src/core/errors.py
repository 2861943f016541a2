"""Exception hierarchy shared by the hyperfrac numerics and CLI."""

from __future__ import annotations


class HyperfracError(RuntimeError):
    """Base class for every error raised by the library."""


class ParameterError(HyperfracError):
    """Raised when (n, s, p) or a grid/run parameter is outside its window."""


class InvalidPointError(HyperfracError):
    """Raised when a hyperboloid point violates the Lorentz constraint."""


class OutOfModelError(HyperfracError):
    """Raised when a ball or half-space point lies outside its model."""


class DomainError(HyperfracError):
    """Raised when a function argument is outside its mathematical domain."""


class UnsupportedOrderError(HyperfracError):
    """Raised when a Bessel order or jet order exceeds the supported window."""


class PoleError(HyperfracError):
    """Raised when the Gamma function is evaluated at a pole."""


class ConvergenceError(HyperfracError):
    """Raised when a truncated integral fails its tail estimate."""


class CalibrationError(HyperfracError):
    """Raised when closed-form and spectral Green's functions differ in shape."""


class AccuracyError(HyperfracError):
    """Raised when a quadrature or refinement check misses its tolerance."""


class TransformDivergenceError(HyperfracError):
    """Raised when a radial profile decays too slowly to be transformed."""


class TrivialFixedPointError(HyperfracError):
    """Raised when the fixed-point iteration is started from the zero profile."""


class SamplingError(HyperfracError):
    """Raised when a moving-plane sample set is empty."""


class ShapeError(HyperfracError):
    """Raised when a profile and an operator live on different grids."""
