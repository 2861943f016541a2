"""Cached Gauss rules and composite/graded panel quadrature."""

from __future__ import annotations

from functools import lru_cache
import math
from typing import Sequence

import numpy as np
from scipy import special


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=256)
def _jacobi(order: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_jacobi(order, alpha, beta)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Return Gauss–Legendre nodes and weights on [-1, 1]."""

    return _legendre(int(order))


def gauss_jacobi(order: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Return Gauss–Jacobi nodes and weights for (1-x)^alpha (1+x)^beta on [-1, 1]."""

    return _jacobi(int(order), round(float(alpha), 12), round(float(beta), 12))


def composite_rule(breakpoints: Sequence[float], order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre on every panel [b_k, b_{k+1}], concatenated."""

    edges = np.asarray(breakpoints, dtype=float)
    x, w = gauss_legendre(order)
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_rule(
    a: float,
    b: float,
    grading: int,
    order: int = 16,
    singular_end: str = "left",
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre in v with x = a + (b - a) v**grading, clustering at one end."""

    x, w = gauss_legendre(order)
    v = 0.5 * (x + 1.0)
    dv = 0.5 * w
    length = b - a
    if singular_end == "left":
        nodes = a + length * v**grading
    else:
        nodes = b - length * v**grading
    weights = abs(length) * grading * v ** (grading - 1) * dv
    return nodes, weights


def grading_for(exponent: float) -> int:
    """Grading that turns an |x|^exponent endpoint singularity into at least |v|^1."""

    if exponent >= 1.0:
        return 1
    return max(2, int(math.ceil(2.0 / (exponent + 1.0))))


def geometric_breakpoints(start: float, stop: float, ratio: float = 2.0) -> np.ndarray:
    """Breakpoints start, start*ratio, ... ending exactly at stop."""

    if stop <= start:
        return np.array([start, stop])
    count = max(1, int(math.ceil(math.log(stop / start) / math.log(ratio))))
    return np.geomspace(start, stop, count + 1)


def uniform_breakpoints(start: float, stop: float, width: float) -> np.ndarray:
    """Breakpoints with panel width at most ``width``."""

    count = max(1, int(math.ceil((stop - start) / width)))
    return np.linspace(start, stop, count + 1)
