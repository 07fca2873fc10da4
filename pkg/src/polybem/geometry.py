"""Planar polygon primitives: areas, kernels, inscribed circles, predicates.

Polygons are (m, 2) float arrays with vertices in counter-clockwise order.
Consecutive collinear vertices are legal (hanging nodes are ordinary
vertices), so no routine here may assume strict convexity at a vertex.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import InvalidPolygon, NotStarShaped

EPS = 1e-12


def polygon_array(loop) -> np.ndarray:
    pts = np.asarray(loop, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InvalidPolygon("polygon needs at least 3 points of dimension 2")
    return pts


def signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    acc = x[-1] * y[0] - x[0] * y[-1]
    acc += float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))
    return 0.5 * acc


def centroid(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.concatenate([x[1:], x[:1]]), np.concatenate([y[1:], y[:1]])
    cross = x * yn - xn * y
    a = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return np.array([cx, cy])


def diameter(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=2))))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_properly_intersect(p1, p2, q1, q2, eps: float) -> bool:
    """True if the open segments cross or overlap (shared endpoints excluded)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    # Collinear overlap check.
    def on_open_segment(a, b, c):
        if abs(_orient(a, b, c)) > eps:
            return False
        t = np.dot(c - a, b - a) / max(np.dot(b - a, b - a), eps)
        return eps < t < 1.0 - eps
    return any((
        on_open_segment(q1, q2, p1), on_open_segment(q1, q2, p2),
        on_open_segment(p1, p2, q1), on_open_segment(p1, p2, q2),
    ))


def is_simple(pts: np.ndarray) -> bool:
    """Simple closed polygon: no repeated vertices, no crossing sides."""
    m = len(pts)
    scale = max(diameter(pts), EPS)
    eps = EPS * scale * scale
    for i in range(m):
        if np.linalg.norm(pts[i] - pts[(i + 1) % m]) <= EPS * scale:
            return False
    for i in range(m):
        a1, a2 = pts[i], pts[(i + 1) % m]
        for j in range(i + 1, m):
            if j == i or (j + 1) % m == i or (i + 1) % m == j:
                continue  # adjacent sides share an endpoint
            b1, b2 = pts[j], pts[(j + 1) % m]
            if segments_properly_intersect(a1, a2, b1, b2, eps):
                return False
    return True


def _clip_halfplane(poly: list[np.ndarray], a: np.ndarray, d: np.ndarray, eps: float) -> list[np.ndarray]:
    """Keep the part of convex ``poly`` left of the directed line a + t d."""
    if not poly:
        return poly
    out: list[np.ndarray] = []
    m = len(poly)
    dist = [d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0]) for p in poly]
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        dp, dq = dist[i], dist[(i + 1) % m]
        if dp >= -eps:
            out.append(p)
        if (dp > eps and dq < -eps) or (dp < -eps and dq > eps):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return out


def polygon_kernel(loop) -> np.ndarray:
    """Visibility kernel of a simple CCW polygon via half-plane intersection.

    Returns the (possibly empty) convex kernel polygon.  An empty result
    means the polygon is not star-shaped with respect to any point.
    """
    pts = polygon_array(loop)
    if signed_area(pts) <= 0:
        raise InvalidPolygon("polygon must be counter-clockwise with positive area")
    if not is_simple(pts):
        raise InvalidPolygon("polygon is self-intersecting")
    scale = diameter(pts)
    eps = EPS * scale
    lo = pts.min(axis=0) - scale
    hi = pts.max(axis=0) + scale
    kernel = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
              np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
    m = len(pts)
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        kernel = _clip_halfplane(kernel, a, b - a, eps)
        if not kernel:
            return np.zeros((0, 2))
    out = np.array(kernel)
    if len(out) >= 3 and abs(signed_area(out)) < (eps * scale):
        return np.zeros((0, 2))
    return out


def inscribed_circle(kernel) -> tuple[np.ndarray, float]:
    """Chebyshev center and radius of a convex polygon.

    The optimum of this tiny linear program is attained with three active
    side constraints (or at an endpoint of a degenerate optimal segment,
    which again has three active sides), so all constraint triples are
    enumerated in a single batched solve.  Ties in the radius are broken by
    the lexicographically smallest center.
    """
    kernel = np.asarray(kernel, dtype=float)
    if kernel.size == 0 or len(kernel) < 3:
        raise NotStarShaped("empty kernel: polygon is not star-shaped w.r.t. a circle")
    m = len(kernel)
    scale = max(diameter(kernel), EPS)
    normals = []
    offsets = []
    for i in range(m):
        a, b = kernel[i], kernel[(i + 1) % m]
        t = b - a
        ln = np.linalg.norm(t)
        if ln <= EPS * scale:
            continue
        n = np.array([t[1], -t[0]]) / ln  # outward: n.x <= n.a inside
        normals.append(n)
        offsets.append(float(np.dot(n, a)))
    N = np.array(normals)
    b = np.array(offsets)
    nc = len(N)
    if nc < 3:
        raise NotStarShaped("kernel degenerates to a point or segment")
    triples = np.array(list(combinations(range(nc), 3)))
    A = np.concatenate([N[triples], np.ones((len(triples), 3, 1))], axis=2)
    rhs = b[triples]
    det = np.linalg.det(A)
    good = np.abs(det) > 1e-14
    sols = np.full((len(triples), 3), np.nan)
    if np.any(good):
        sols[good] = np.linalg.solve(A[good], rhs[good][..., None])[..., 0]
    tol = 1e-9 * scale
    slack = b[None, :] - sols[:, :2] @ N.T - sols[:, 2:3]
    feasible = good & (sols[:, 2] > tol) & np.all(slack >= -tol, axis=1)
    if not np.any(feasible):
        raise NotStarShaped("kernel admits no positive inscribed circle")
    r_max = np.max(sols[feasible, 2])
    cand = feasible & (sols[:, 2] >= r_max - tol)
    idx = np.flatnonzero(cand)
    order = np.lexsort((sols[idx, 1], sols[idx, 0]))
    best = sols[idx[order[0]]]
    center = best[:2]
    r_final = float(np.min(b - N @ center))
    return center, r_final


def star_center(loop) -> tuple[np.ndarray, float]:
    """Kernel circle (center, radius) of a star-shaped polygon."""
    return inscribed_circle(polygon_kernel(loop))


def point_in_polygon(pts: np.ndarray, p: np.ndarray, boundary: str = "exclude") -> bool:
    """Winding-number containment test; ``boundary`` in {'include', 'exclude'}."""
    scale = max(diameter(pts), EPS)
    eps = EPS * scale
    m = len(pts)
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        t = b - a
        ln2 = float(np.dot(t, t))
        if ln2 <= eps * eps:
            continue
        u = float(np.dot(p - a, t) / ln2)
        if -eps <= u <= 1 + eps:
            closest = a + np.clip(u, 0.0, 1.0) * t
            if np.linalg.norm(p - closest) <= eps:
                return boundary == "include"
    wn = 0
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        if a[1] <= p[1]:
            if b[1] > p[1] and _orient(a, b, p) > 0:
                wn += 1
        else:
            if b[1] <= p[1] and _orient(a, b, p) < 0:
                wn -= 1
    return wn != 0


def segment_inside_polygon(pts: np.ndarray, a: np.ndarray, b: np.ndarray, samples: int = 32) -> bool:
    """Sampling check that the open segment a-b stays inside the polygon."""
    for t in np.linspace(0.0, 1.0, samples + 2)[1:-1]:
        if not point_in_polygon(pts, a + t * (b - a), boundary="include"):
            return False
    return True
