"""Polynomial helpers: 1D edge bases and bivariate coefficient arrays.

1D polynomials live on the normalized edge parameter sigma in [0,1] and are
stored as monomial coefficient vectors ``c`` with p(sigma) = sum c[m] sigma^m.
Bivariate polynomials are stored as coefficient matrices ``c`` with
p(x, y) = sum c[i, j] x^i y^j (numpy.polynomial.polynomial convention).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly


# ----------------------------------------------------------------------------
# 1D bases on the normalized edge parameter
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def shifted_legendre(max_degree: int) -> np.ndarray:
    """Coefficients of the shifted Legendre polynomials P_i(2*sigma - 1).

    Returns an array T of shape (max_degree+1, max_degree+1) with
    P_i(2 sigma - 1) = sum_m T[i, m] sigma^m.  The family is orthogonal on
    [0, 1] with int P_i P_j = delta_ij / (2i + 1).
    """
    T = np.zeros((max_degree + 1, max_degree + 1))
    T[0, 0] = 1.0
    if max_degree >= 1:
        T[1, 0] = -1.0
        T[1, 1] = 2.0
    x = np.array([-1.0, 2.0])  # 2*sigma - 1
    for i in range(1, max_degree):
        rec = npoly.polymul(x, T[i, : i + 1]) * (2 * i + 1) / (i + 1)
        rec[: i] -= T[i - 1, : i] * i / (i + 1)
        T[i + 1, : i + 2] = rec
    return T


@lru_cache(maxsize=None)
def flux_basis(k: int) -> np.ndarray:
    """Discontinuous flux basis of a degree-k scheme: Legendre of degree < k.

    Shape (k, k): row i holds the sigma-monomial coefficients of P_i(2s-1).
    """
    return shifted_legendre(k - 1)[: k, : k].copy()


@lru_cache(maxsize=None)
def trace_bubble(i: int) -> np.ndarray:
    """Hierarchic edge bubble of degree i >= 2 (integrated Legendre).

    N_i = (P_i - P_{i-2}) / sqrt(2 (2i - 1)); vanishes at sigma = 0 and 1.
    """
    if i < 2:
        raise ValueError("edge bubbles start at degree 2")
    T = shifted_legendre(i)
    return (T[i] - T[i - 2]) / np.sqrt(2.0 * (2 * i - 1))


def hat_functions() -> tuple[np.ndarray, np.ndarray]:
    """Linear traces (1-sigma, sigma) attached to the edge start/end node."""
    return np.array([1.0, -1.0]), np.array([0.0, 1.0])


def eval1d(coeff: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return npoly.polyval(sigma, coeff)


def integrate01(coeff: np.ndarray) -> float:
    m = np.arange(len(coeff))
    return float(np.sum(coeff / (m + 1)))


def product_integral01(a: np.ndarray, b: np.ndarray) -> float:
    return integrate01(npoly.polymul(a, b))


# ----------------------------------------------------------------------------
# Bivariate polynomials
# ----------------------------------------------------------------------------

def poly2_eval(c: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return npoly.polyval2d(x, y, c)


def poly2_grad(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cx = npoly.polyder(c, axis=0) if c.shape[0] > 1 else np.zeros((1, 1))
    cy = npoly.polyder(c, axis=1) if c.shape[1] > 1 else np.zeros((1, 1))
    return np.atleast_2d(cx), np.atleast_2d(cy)


def poly2_laplacian(c: np.ndarray) -> np.ndarray:
    cxx = npoly.polyder(c, m=2, axis=0) if c.shape[0] > 2 else np.zeros((1, 1))
    cyy = npoly.polyder(c, m=2, axis=1) if c.shape[1] > 2 else np.zeros((1, 1))
    return poly2_add(np.atleast_2d(cxx), np.atleast_2d(cyy))


def poly2_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows = max(a.shape[0], b.shape[0])
    cols = max(a.shape[1], b.shape[1])
    out = np.zeros((rows, cols))
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


def poly2_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0.0:
                out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def poly2_trim(c: np.ndarray, tol: float = 0.0) -> np.ndarray:
    c = np.atleast_2d(c)
    rows = c.shape[0]
    while rows > 1 and np.all(np.abs(c[rows - 1]) <= tol):
        rows -= 1
    cols = c.shape[1]
    while cols > 1 and np.all(np.abs(c[:rows, cols - 1]) <= tol):
        cols -= 1
    return c[:rows, :cols].copy()


def scaled_monomial(ax: int, ay: int, center: np.ndarray, scale: float) -> np.ndarray:
    """Coefficients of ((x-cx)/h)^ax * ((y-cy)/h)^ay."""
    gx = np.array([[-center[0] / scale], [1.0 / scale]])
    gy = np.array([[-center[1] / scale, 1.0 / scale]])
    out = np.ones((1, 1))
    for _ in range(ax):
        out = poly2_mul(out, gx)
    for _ in range(ay):
        out = poly2_mul(out, gy)
    return out


def poly2_on_segment(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Restrict p(x,y) to the segment a + sigma (b - a); 1D coefficients in sigma."""
    xs = np.array([a[0], b[0] - a[0]])
    ys = np.array([a[1], b[1] - a[1]])
    total = np.zeros(1)
    xpow = np.ones(1)
    for i in range(c.shape[0]):
        ypow = np.ones(1)
        row = np.zeros(1)
        for j in range(c.shape[1]):
            if c[i, j] != 0.0:
                row = npoly.polyadd(row, c[i, j] * ypow)
            ypow = npoly.polymul(ypow, ys)
        total = npoly.polyadd(total, npoly.polymul(row, xpow))
        xpow = npoly.polymul(xpow, xs)
    return np.atleast_1d(total)


def poly2_normal_derivative(c: np.ndarray, a: np.ndarray, b: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """1D sigma-coefficients of n . grad p along the segment a->b."""
    cx, cy = poly2_grad(c)
    part_x = poly2_on_segment(cx, a, b) * normal[0]
    part_y = poly2_on_segment(cy, a, b) * normal[1]
    return npoly.polyadd(part_x, part_y)


def poly2_integrate_triangles(c: np.ndarray, triangles: list[np.ndarray]) -> float:
    """Exact integral of p over a union of triangles (Gauss of matching degree)."""
    from .quadrature import triangle_points

    degree = (c.shape[0] - 1) + (c.shape[1] - 1)
    total = 0.0
    for tri in triangles:
        pts, w = triangle_points(tri, degree)
        total += float(np.sum(w * poly2_eval(c, pts[:, 0], pts[:, 1])))
    return total
