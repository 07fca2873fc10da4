"""Per-element 2D Laplace boundary element machinery.

Every element boundary is a list of straight panels.  With the normalized
panel parameter tau in [0,1], x = A + sigma*L*d on the test panel and
y = A' + tau*L'*d' on the trial panel, all kernel integrals against
monomials tau^m reduce to the recurrence families

    D_m = int tau^m / R,   C_m = int tau^m (tau-p) / R,
    W_m = int tau^m * 0.5*ln R,   E_m = int tau^m / R^2,
    G_m = int tau^m (tau-p) / R^2,       R(tau) = (tau-p)^2 + q^2,

where (p, q) are the target coordinates in the trial panel frame (q is the
signed distance in units of the panel length).  Inner integration is exact;
outer integration uses Gauss rules graded toward shared vertices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .config import SolverConfig
from .errors import OutsideElement, SingleLayerNotSPD, SingularEvaluation
from .geometry import point_in_polygon
from .polynomials import (
    flux_basis,
    hat_functions,
    poly2_eval,
    poly2_grad,
    poly2_laplacian,
    poly2_trim,
    trace_bubble,
)
from .quadrature import composite_gauss01, gauss01, graded_intervals

TWO_PI = 2.0 * math.pi
_ONLINE_Q = 2e-4  # relative |q| window for the collinear-limit branch of E_0


def fundamental_solution(x, y) -> float:
    """-log|x-y| / (2 pi), the free-space kernel of minus the Laplacian."""
    r = math.hypot(x[0] - y[0], x[1] - y[1])
    if r == 0.0:
        raise SingularEvaluation("fundamental solution evaluated on its diagonal")
    return -math.log(r) / TWO_PI


@lru_cache(maxsize=None)
def _log_table(size: int) -> np.ndarray:
    """J[m, n] = int_0^1 int_0^1 s^n t^m ln|s-t| ds dt, exact rationals."""

    def harm(n):
        return sum(Fraction(1, i) for i in range(1, n + 1))

    J = np.zeros((size, size))
    for m in range(size):
        for n in range(size):
            s = sum(Fraction(1, (m + 1 - i) * (n + i + 1)) for i in range(m + 1))
            val = (-harm(n + 1) / (n + 1) + harm(m + n + 2) / (m + n + 2)
                   - Fraction(1, (m + n + 2) ** 2) - s) / (m + 1)
            J[m, n] = float(val)
    return J


def kernel_families(p: np.ndarray, q: np.ndarray, max_degree: int, want_grad: bool = False):
    """Closed-form panel integral families, vectorized over targets.

    Returns (W, D) or (W, D, E) with trailing axis running over the monomial
    degree; W has max_degree+1 entries, D and E have max_degree+3 so that
    gradient formulas can reach one extra degree.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    top = max_degree + 2
    R1 = (1.0 - p) ** 2 + q * q
    R0 = p * p + q * q
    s = p * (p - 1.0)  # > 0 iff the target projects outside the panel span
    online = q == 0.0  # exactly collinear targets (p outside [0,1] then)
    p_off = np.where((np.abs(p) < 1e-300) | (np.abs(1.0 - p) < 1e-300), 0.5, p)
    D0_line = -1.0 / (1.0 - p_off) - 1.0 / p_off
    with np.errstate(divide="ignore", invalid="ignore"):
        D0_ang = np.arctan2(q, q * q + s) / np.where(online, 1.0, q)
    D0 = np.where(online, D0_line, D0_ang)
    C0 = 0.5 * (np.log(R1) - np.log(R0))
    shape = p.shape
    D = np.empty(shape + (top + 1,))
    C = np.empty(shape + (top + 1,))
    D[..., 0] = D0
    C[..., 0] = C0
    q2 = q * q
    for j in range(1, top + 1):
        C[..., j] = 1.0 / j - q2 * D[..., j - 1] + p * C[..., j - 1]
        D[..., j] = C[..., j - 1] + p * D[..., j - 1]
    W = np.empty(shape + (max_degree + 1,))
    lr1 = 0.5 * np.log(R1)
    for m_ in range(max_degree + 1):
        W[..., m_] = (lr1 - C[..., m_ + 1]) / (m_ + 1)
    if not want_grad:
        return W, D
    # E0 via the antiderivative cancels to O(q^2) for collinear-ish targets;
    # switch to the q->0 limit once |q| is small against the offset s.
    limit_e = (s > 0.0) & (np.abs(q) <= _ONLINE_Q * s)
    E0_line = -1.0 / (3.0 * (1.0 - p_off) ** 3) - 1.0 / (3.0 * p_off ** 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        E0_off = (((1.0 - p) / R1 + p / R0) + D0) / np.where(limit_e | online, 1.0, 2.0 * q2)
    E0 = np.where(limit_e | online, E0_line, E0_off)
    G0 = 0.5 * (1.0 / R0 - 1.0 / R1)
    E = np.empty(shape + (top + 1,))
    G = np.empty(shape + (top + 1,))
    E[..., 0] = E0
    G[..., 0] = G0
    for j in range(1, top + 1):
        G[..., j] = D[..., j - 1] - q2 * E[..., j - 1] + p * G[..., j - 1]
        E[..., j] = G[..., j - 1] + p * E[..., j - 1]
    return W, D, E


@dataclass
class Panel:
    """Straight boundary segment in canonical (low node id first) direction."""

    a: np.ndarray
    b: np.ndarray
    length: float
    direction: np.ndarray
    normal: np.ndarray  # outward unit normal of the element
    side: int           # index of the parent element side
    sub: int = 0
    n_sub: int = 1

    def frame(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(p, q) coordinates of targets x (n,2) in this panel's frame."""
        dx = x - self.a
        p = (dx @ self.direction) / self.length
        q = (dx @ self.normal) / self.length
        return p, q


def _build_panels(points: np.ndarray, node_ids, n_sub: int) -> list[Panel]:
    m = len(points)
    panels = []
    for side in range(m):
        i, j = side, (side + 1) % m
        pa, pb = points[i], points[j]
        flip = node_ids[j] < node_ids[i]
        if flip:
            pa, pb = pb, pa
        seg = pb - pa
        length = float(np.linalg.norm(seg))
        if length == 0.0:
            raise SingularEvaluation(f"zero-length side {side}")
        d = seg / length
        # CCW loop: outward normal of the loop direction is (dy, -dx).
        n = np.array([d[1], -d[0]]) if not flip else np.array([-d[1], d[0]])
        for s in range(n_sub):
            a = pa + (s / n_sub) * seg
            b = pa + ((s + 1) / n_sub) * seg
            panels.append(Panel(a, b, length / n_sub, d, n, side, s, n_sub))
    return panels


def _shared_vertex_flags(pe: Panel, pf: Panel, scale: float) -> tuple[bool, bool]:
    tol = 1e-12 * scale

    def close(u, v):
        return abs(u[0] - v[0]) <= tol and abs(u[1] - v[1]) <= tol

    left = close(pe.a, pf.a) or close(pe.a, pf.b)
    right = close(pe.b, pf.a) or close(pe.b, pf.b)
    return left, right


def _point_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    t = b - a
    denom = float(t @ t)
    u = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ t) / denom))
    return float(np.hypot(*(p - (a + u * t)))), u


def _outer_rule(pe: Panel, pf: Panel, n_gauss: int, cfg: SolverConfig, scale: float):
    left, right = _shared_vertex_flags(pe, pf, scale)
    if left or right:
        ivs = graded_intervals(cfg.graded_levels, left, right)
        return composite_gauss01(n_gauss, ivs)
    # Disjoint pair: find the true segment gap and the nearest parameter on E.
    da, _ = _point_segment(pf.a, pe.a, pe.b)
    db, _ = _point_segment(pf.b, pe.a, pe.b)
    d0, u0 = _point_segment(pe.a, pf.a, pf.b)
    d1, u1 = _point_segment(pe.b, pf.a, pf.b)
    best = min((da, None), (db, None), (d0, 0.0), (d1, 1.0), key=lambda t: t[0])
    gap = best[0]
    if gap >= cfg.near_pair_factor * max(pe.length, pf.length):
        return gauss01(n_gauss)
    # The outer integrand is analytic but steep around the closest point of E;
    # split there and grade both halves toward it.
    if best[1] is None:
        near_pt = pf.a if da <= db else pf.b
        _, split = _point_segment(near_pt, pe.a, pe.b)
    else:
        split = best[1]
    levels = max(6, cfg.graded_levels // 2)
    ivs = []
    if split > 1e-12:
        ivs += [(split * a, split * b)
                for a, b in graded_intervals(levels, left=False, right=True)]
    if split < 1.0 - 1e-12:
        ivs += [(split + (1.0 - split) * a, split + (1.0 - split) * b)
                for a, b in graded_intervals(levels, left=True, right=False)]
    return composite_gauss01(n_gauss, ivs)


def _pair_blocks(pe: Panel, pf: Panel, k: int, cfg: SolverConfig, scale: float):
    """(V, K) blocks in sigma-monomials: test degrees 0..k-1 on panel E,
    trial flux degrees 0..k-1 and trace degrees 0..k on panel F."""
    nm = k + 1  # monomial degrees 0..k on either side
    if pe is pf:
        J = _log_table(nm)
        inv = 1.0 / (np.arange(nm) + 1.0)
        V = -(pe.length ** 2 / TWO_PI) * (math.log(pe.length) * np.outer(inv, inv) + J)
        return V, np.zeros((nm, nm))
    sig, w = _outer_rule(pe, pf, cfg.bem_outer_points(k), cfg, scale)
    x = pe.a + sig[:, None] * (pe.b - pe.a)
    p, q = pf.frame(x)
    W, D = kernel_families(p, q, k)
    log_lf = math.log(pf.length)
    inner_v = pf.length * (W[:, :nm] + log_lf / (np.arange(nm) + 1.0))  # (nq, nm)
    inner_k = (q / TWO_PI)[:, None] * D[:, :nm]                          # (nq, nm)
    powers = sig[:, None] ** np.arange(nm)                               # (nq, nm)
    wt = w[:, None] * powers
    V = -(pe.length / TWO_PI) * (wt.T @ inner_v)
    K = pe.length * (wt.T @ inner_k)
    return V, K


def particular_polynomial(p: np.ndarray) -> np.ndarray:
    """A polynomial q with -Laplace(q) = p, exact in coefficients.

    The constant term maps to the radial bump -c (x^2+y^2)/4; higher terms
    are integrated twice in x with the induced y-remainder recursed away.
    The identity -Laplace(q) = p is re-verified before returning.
    """
    p = poly2_trim(np.atleast_2d(np.asarray(p, dtype=float)))
    rows, cols = p.shape
    work_rows = rows + 2 * ((cols + 1) // 2) + 2
    q = np.zeros((work_rows + 2, cols + 2))
    r = np.zeros((work_rows, cols))
    r[:rows, :cols] = -p  # target: Laplace(q) = -p
    for j in range(cols - 1, -1, -1):      # highest y-degree first
        for i in range(work_rows):
            c = r[i, j]
            if c == 0.0:
                continue
            if i == 0 and j == 0:
                q[2, 0] += c / 4.0
                q[0, 2] += c / 4.0
                r[0, 0] = 0.0
                continue
            # t = c x^(i+2) y^j / ((i+1)(i+2)); Laplace(t) = c x^i y^j + extra
            denom = (i + 1.0) * (i + 2.0)
            q[i + 2, j] += c / denom
            r[i, j] = 0.0
            if j >= 2:
                r[i + 2, j - 2] -= c * j * (j - 1.0) / denom
    lap = poly2_laplacian(q)
    check = np.zeros((max(lap.shape[0], rows), max(lap.shape[1], cols)))
    check[: lap.shape[0], : lap.shape[1]] += lap
    check[:rows, :cols] += p
    scale = max(1.0, np.abs(p).max())
    if np.abs(check).max() > 1e-10 * scale:
        raise SingularEvaluation("particular polynomial failed its Laplacian check")
    return poly2_trim(q)


class ElementBemOperator:
    """Galerkin single/double-layer operators of one polygonal element.

    Trace space: continuous, edgewise polynomials of degree k (hat functions
    plus integrated-Legendre bubbles).  Flux space: discontinuous edgewise
    Legendre polynomials, also of degree k, so that conormal derivatives of
    edgewise degree-k harmonic polynomials are captured exactly.  The trace
    degrees of freedom are ordered [nodal per loop vertex] + [per side,
    bubble degrees 2..k].
    """

    def __init__(self, points: np.ndarray, node_ids, k: int, cfg: SolverConfig,
                 n_sub: int = 1):
        self.k = int(k)
        self.cfg = cfg
        self.n_sub = int(n_sub)
        self.points = np.asarray(points, dtype=float)
        self.m = len(self.points)
        self.node_ids = list(node_ids)
        self.panels = _build_panels(self.points, self.node_ids, self.n_sub)
        self.n_panels = len(self.panels)
        self.flux_per_panel = self.k + 1
        self.n_flux = self.n_panels * self.flux_per_panel
        self.n_trace = self.m * self.k
        self.scale = float(np.max(np.ptp(self.points, axis=0)))
        self._leg = flux_basis(self.k + 1)  # (k+1, k+1): Legendre -> monomials
        self._trace_mono = self._build_trace_table()
        self._assemble()

    # -- trace bookkeeping -------------------------------------------------

    def _side_orientation(self, side: int) -> bool:
        """True if the canonical edge direction agrees with the loop."""
        i, j = side, (side + 1) % self.m
        return self.node_ids[i] < self.node_ids[j]

    def _build_trace_table(self) -> np.ndarray:
        """(n_panels*(k+1), n_trace): sigma-monomial coefficients per panel."""
        k = self.k
        tab = np.zeros((self.n_panels * (k + 1), self.n_trace))
        hat_start, hat_end = hat_functions()

        def add(panel_idx: int, coeff: np.ndarray, tdof: int) -> None:
            rows = slice(panel_idx * (k + 1), panel_idx * (k + 1) + len(coeff))
            tab[rows, tdof] += coeff

        for pi, panel in enumerate(self.panels):
            side = panel.side
            i, j = side, (side + 1) % self.m
            lo_pos, hi_pos = (i, j) if self._side_orientation(side) else (j, i)
            for tdof, full in ((lo_pos, hat_start), (hi_pos, hat_end)):
                add(pi, self._compose_sub(full, panel), tdof)
            for deg in range(2, k + 1):
                tdof = self.m + side * (k - 1) + (deg - 2)
                add(pi, self._compose_sub(trace_bubble(deg), panel), tdof)
        return tab

    def _compose_sub(self, coeff: np.ndarray, panel: Panel) -> np.ndarray:
        """Restrict an edge polynomial to a sub-panel: sigma -> (sub+s)/n."""
        if panel.n_sub == 1:
            return coeff
        shift = np.array([panel.sub / panel.n_sub, 1.0 / panel.n_sub])
        out = np.zeros(1)
        acc = np.ones(1)
        from numpy.polynomial import polynomial as npoly
        for c in coeff:
            out = npoly.polyadd(out, c * acc)
            acc = npoly.polymul(acc, shift)
        full = np.zeros(len(coeff))
        full[: len(out)] = out
        return full

    # -- assembly -------------------------------------------------------------

    def _assemble(self) -> None:
        k = self.k
        kf = self.flux_per_panel
        npan = self.n_panels
        V = np.zeros((self.n_flux, self.n_flux))
        Kmat = np.zeros((self.n_flux, npan * (k + 1)))
        for ei, pe in enumerate(self.panels):
            re = slice(ei * kf, ei * kf + kf)
            for fi, pf in enumerate(self.panels):
                vb, kb = _pair_blocks(pe, pf, k, self.cfg, self.scale)
                V[re, fi * kf : fi * kf + kf] += self._leg @ vb @ self._leg.T
                Kmat[re, fi * (k + 1) : (fi + 1) * (k + 1)] += self._leg @ kb
        V = 0.5 * (V + V.T)
        self.V = V
        # Mass between flux (Legendre) and panel trace monomials, panel-diagonal.
        moment = 1.0 / (np.arange(kf)[:, None] + np.arange(k + 1)[None, :] + 1.0)
        mass = np.zeros((self.n_flux, npan * (k + 1)))
        for pi, panel in enumerate(self.panels):
            block = panel.length * (self._leg @ moment)
            mass[pi * kf : (pi + 1) * kf, pi * (k + 1) : (pi + 1) * (k + 1)] = block
        self._mass_mono = mass
        B = (0.5 * mass + Kmat) @ self._trace_mono
        self.B = B
        try:
            self._cho = cho_factor(V)
        except LinAlgError as exc:
            raise SingleLayerNotSPD(
                f"single-layer matrix not SPD (h_K = {self.scale:.3g})") from exc
        self.C = cho_solve(self._cho, B)
        # Symmetric Dirichlet-to-Neumann stiffness: hypersingular part via the
        # tangential-derivative identity (D u, v) = (V u', v'), plus the
        # single-layer energy of the Galerkin fluxes.
        self._trace_deriv = self._build_deriv_table()
        hyper = self._trace_deriv.T @ V @ self._trace_deriv
        energy = self.C.T @ self.B
        self.S0 = hyper + 0.5 * (energy + energy.T)

    def _build_deriv_table(self) -> np.ndarray:
        """Arc-length derivative of every trace dof in flux Legendre dofs."""
        k = self.k
        kf = self.flux_per_panel
        out = np.zeros((self.n_flux, self.n_trace))
        for pi, panel in enumerate(self.panels):
            sign = 1.0 if self._side_orientation(panel.side) else -1.0
            rows = self._trace_mono[pi * (k + 1) : (pi + 1) * (k + 1), :]
            der = np.zeros((kf, self.n_trace))
            for m_ in range(1, k + 1):
                der[m_ - 1] = m_ * rows[m_]
            der *= sign / panel.length
            out[pi * kf : (pi + 1) * kf, :] = np.linalg.solve(self._leg.T, der)
        return out

    # -- solves ----------------------------------------------------------------

    def bie_rhs(self, trace_coeffs: np.ndarray) -> np.ndarray:
        """Moments ((1/2 I + K) trace, flux basis) for given trace dof values."""
        return self.B @ trace_coeffs

    def solve_flux(self, trace_coeffs: np.ndarray) -> np.ndarray:
        """Galerkin Neumann trace (Legendre coefficients per panel)."""
        return self.C @ trace_coeffs

    def solve_flux_rhs(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._cho, rhs)

    def flux_panel_poly(self, flux: np.ndarray, panel_idx: int) -> np.ndarray:
        """Sigma-monomial coefficients of the flux on one panel."""
        kf = self.flux_per_panel
        block = flux[panel_idx * kf : (panel_idx + 1) * kf]
        return self._leg.T @ block

    def trace_panel_poly(self, trace_coeffs: np.ndarray, panel_idx: int) -> np.ndarray:
        rows = slice(panel_idx * (self.k + 1), (panel_idx + 1) * (self.k + 1))
        return self._trace_mono[rows] @ trace_coeffs

    # -- potentials ---------------------------------------------------------------

    def potentials(self, x: np.ndarray, want_grad: bool = False):
        """Layer-potential evaluation matrices at interior targets.

        Returns (SL, DL) with SL of shape (n, n_flux) acting on Legendre flux
        coefficients and DL of shape (n, n_trace) acting on trace dofs; with
        ``want_grad`` also (SLg, DLg) with a trailing xy axis.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = len(x)
        k = self.k
        kf = self.flux_per_panel
        SL = np.zeros((n, self.n_flux))
        DL = np.zeros((n, self.n_panels * (k + 1)))
        SLg = np.zeros((n, self.n_flux, 2)) if want_grad else None
        DLg = np.zeros((n, self.n_panels * (k + 1), 2)) if want_grad else None
        for pi, panel in enumerate(self.panels):
            p, q = panel.frame(x)
            if want_grad:
                W, D, E = kernel_families(p, q, k, want_grad=True)
            else:
                W, D = kernel_families(p, q, k)
            L = panel.length
            logl = math.log(L)
            sl_mono = -(L / TWO_PI) * (W[:, :kf] + logl / (np.arange(kf) + 1.0))
            SL[:, pi * kf : (pi + 1) * kf] = sl_mono @ self._leg.T
            DL[:, pi * (k + 1) : (pi + 1) * (k + 1)] = (q / TWO_PI)[:, None] * D[:, : k + 1]
            if want_grad:
                dx = x - panel.a
                dvec = panel.direction
                for m_ in range(kf):
                    g = -(dx * D[:, m_, None] - L * dvec[None, :] * D[:, m_ + 1, None]) / (TWO_PI * L)
                    SLg[:, pi * kf : (pi + 1) * kf, :] += g[:, None, :] * self._leg.T[m_][None, :, None]
                for m_ in range(k + 1):
                    term = (panel.normal[None, :] / L) * D[:, m_, None]
                    term = term - (2.0 * q[:, None] / L ** 2) * (
                        dx * E[:, m_, None] - L * dvec[None, :] * E[:, m_ + 1, None])
                    DLg[:, pi * (k + 1) + m_, :] = term / TWO_PI
        DL = DL @ self._trace_mono_expanded()
        if want_grad:
            DLg = np.einsum("npc,pt->ntc", DLg, self._trace_mono_expanded())
            return SL, DL, SLg, DLg
        return SL, DL

    def _trace_mono_expanded(self) -> np.ndarray:
        return self._trace_mono

    def evaluate(self, trace_coeffs: np.ndarray, x: np.ndarray,
                 flux: np.ndarray | None = None, want_grad: bool = False):
        """Harmonic extension of a boundary trace at interior targets."""
        if flux is None:
            flux = self.solve_flux(trace_coeffs)
        if want_grad:
            SL, DL, SLg, DLg = self.potentials(x, want_grad=True)
            val = SL @ flux - DL @ trace_coeffs
            grad = np.einsum("nfc,f->nc", SLg, flux) - np.einsum("ntc,t->nc", DLg, trace_coeffs)
            return val, grad
        SL, DL = self.potentials(x)
        return SL @ flux - DL @ trace_coeffs

    # -- norms on the boundary ------------------------------------------------------

    def flux_l2_norm2(self, flux: np.ndarray) -> float:
        """Squared L2(boundary) norm of a Legendre flux vector."""
        total = 0.0
        kf = self.flux_per_panel
        weights = 1.0 / (2.0 * np.arange(kf) + 1.0)
        for pi, panel in enumerate(self.panels):
            block = flux[pi * kf : (pi + 1) * kf]
            total += panel.length * float(np.sum(block * block * weights))
        return total


def check_inside(points: np.ndarray, x: np.ndarray) -> None:
    for xi in np.atleast_2d(x):
        if not point_in_polygon(points, xi, boundary="exclude"):
            raise OutsideElement(f"point {tuple(xi)} is not strictly inside the element")
