"""Gauss rules on intervals and triangles, plus graded composite rules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Conical-product rule on the reference triangle (0,0),(1,0),(0,1).

    Exact for bivariate polynomials up to the requested total degree.
    Returns points of shape (n, 2) and weights summing to 1/2.
    """
    n = max(1, degree // 2 + 1)
    # x-direction carries the (1-x) Jacobian: Gauss-Jacobi with alpha=1.
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xj = (xj + 1.0) / 2.0
    wj = wj / 4.0  # (1-t) dt on [-1,1] maps to 2*(1-x) 2dx; net factor 1/4
    xu, wu = gauss01(n)
    X = np.repeat(xj, n)
    U = np.tile(xu, n)
    W = np.repeat(wj, n) * np.tile(wu, n)
    pts = np.column_stack([X, (1.0 - X) * U])
    return pts, W


def triangle_points(tri: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Map the reference rule onto the physical triangle ``tri`` (3x2 array)."""
    ref, w = triangle_rule(degree)
    a, b, c = np.asarray(tri, dtype=float)
    pts = a + np.outer(ref[:, 0], b - a) + np.outer(ref[:, 1], c - a)
    jac = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    return pts, w * jac


def _graded_toward_zero(levels: int) -> list[tuple[float, float]]:
    # Beyond ~2^-42 the mapped quadrature nodes collapse onto the endpoint.
    levels = min(levels, 42)
    out = []
    hi = 1.0
    for _ in range(levels):
        lo = hi / 2.0
        out.append((lo, hi))
        hi = lo
    out.append((0.0, hi))
    return out[::-1]


def graded_intervals(levels: int, left: bool, right: bool) -> list[tuple[float, float]]:
    """Dyadic partition of [0,1] graded toward the flagged endpoint(s)."""
    if not left and not right:
        return [(0.0, 1.0)]
    if left and right:
        half = _graded_toward_zero(levels)
        lo = [(a / 2.0, b / 2.0) for a, b in half]
        hi = [(1.0 - b / 2.0, 1.0 - a / 2.0) for a, b in half[::-1]]
        return lo + hi
    if left:
        return _graded_toward_zero(levels)
    return [(1.0 - b, 1.0 - a) for a, b in _graded_toward_zero(levels)[::-1]]


def composite_gauss01(n: int, intervals: list[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss rule on each subinterval of [0,1]."""
    x, w = gauss01(n)
    xs = []
    ws = []
    for a, b in intervals:
        xs.append(a + (b - a) * x)
        ws.append((b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)
