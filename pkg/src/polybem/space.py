"""Degree-of-freedom layout for the trial space: nodal + edge + element parts.

The global harmonic space carries one dof per non-Dirichlet node and k-1
hierarchic dofs per non-Dirichlet edge.  Element bubbles (dim P^{k-2} per
element) never couple across elements and are kept element-local.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DataOrderTooHigh, InvalidOrder, MissingDirichlet
from .mesh import DIRICHLET, PolygonalMesh, edge_key
from .polynomials import hat_functions, product_integral01, trace_bubble
from .quadrature import gauss01


def bubble_exponents(k: int) -> list[tuple[int, int]]:
    """Monomial exponents (in x, y order per layer) spanning P^(k-2)."""
    return [(j, i - j) for i in range(k - 1) for j in range(i + 1)]


class DofHandler:
    """Deterministic numbering: free nodes, then free edge dofs, by id."""

    def __init__(self, mesh: PolygonalMesh, k: int):
        if k < 1:
            raise InvalidOrder(f"approximation order must be >= 1, got {k}")
        if not any(edge.boundary_class == DIRICHLET for edge in mesh.edges):
            raise MissingDirichlet("mesh carries no Dirichlet boundary edge")
        self.mesh = mesh
        self.k = k
        self.node_dof: dict[int, int] = {}
        self.edge_dof: dict[tuple[tuple[int, int], int], int] = {}
        idx = 0
        for node in mesh.nodes:
            if node.boundary_class != DIRICHLET:
                self.node_dof[node.id] = idx
                idx += 1
        for edge in mesh.edges:
            if edge.boundary_class == DIRICHLET:
                continue
            for i in range(2, k + 1):
                self.edge_dof[(edge.nodes, i)] = idx
                idx += 1
        self.n_harmonic = idx
        self.n_bubble_per_element = k * (k - 1) // 2
        self.n_bubble = self.n_bubble_per_element * mesh.n_elements

    def element_dofs(self, eid: int) -> tuple[list[int], list]:
        """Global indices aligned with the element trace layout.

        Returns (globals, constrained) where ``globals[t]`` is -1 for
        Dirichlet-constrained trace dofs and ``constrained[t]`` names the
        constraint (node id or (edge key, degree)) or None.
        """
        loop = self.mesh.elements[eid].loop
        m = len(loop)
        out: list[int] = []
        constrained: list = []
        for nid in loop:
            out.append(self.node_dof.get(nid, -1))
            constrained.append(nid if nid not in self.node_dof else None)
        for s in range(m):
            key = edge_key(loop[s], loop[(s + 1) % m])
            for i in range(2, self.k + 1):
                dof = self.edge_dof.get((key, i), -1)
                out.append(dof)
                constrained.append((key, i) if dof < 0 else None)
        return out, constrained


@dataclass
class DiscreteFunction:
    """Trial-space function: harmonic coefficients + Dirichlet data + bubbles."""

    handler: DofHandler
    coeffs: np.ndarray
    dirichlet_nodes: dict[int, float] = field(default_factory=dict)
    dirichlet_edges: dict[tuple[tuple[int, int], int], float] = field(default_factory=dict)
    bubbles: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.handler.k

    def element_trace(self, eid: int) -> np.ndarray:
        """Trace dof values of the element, in operator trace order."""
        globals_, constrained = self.handler.element_dofs(eid)
        out = np.zeros(len(globals_))
        for t, g in enumerate(globals_):
            if g >= 0:
                out[t] = self.coeffs[g]
            else:
                c = constrained[t]
                if isinstance(c, tuple):
                    out[t] = self.dirichlet_edges.get(c, 0.0)
                else:
                    out[t] = self.dirichlet_nodes.get(c, 0.0)
        return out

    def nodal_value(self, nid: int) -> float:
        dof = self.handler.node_dof.get(nid)
        if dof is not None:
            return float(self.coeffs[dof])
        return self.dirichlet_nodes.get(nid, 0.0)


def element_trace_table(mesh: PolygonalMesh, eid: int, k: int):
    """Boundary trace polynomials (per side, sigma-monomials) of all trace dofs.

    Order matches the element operator: nodal functions by loop position,
    then per side the bubbles of degree 2..k.  Sides are parameterized in
    canonical direction (lower node id first).
    """
    loop = mesh.elements[eid].loop
    m = len(loop)
    hat_lo, hat_hi = hat_functions()
    n_trace = m * k
    table = [[np.zeros(k + 1) for _ in range(m)] for _ in range(n_trace)]
    for s in range(m):
        a, b = loop[s], loop[(s + 1) % m]
        lo_pos, hi_pos = (s, (s + 1) % m) if a < b else ((s + 1) % m, s)
        table[lo_pos][s][: 2] += hat_lo
        table[hi_pos][s][: 2] += hat_hi
        for deg in range(2, k + 1):
            tdof = m + s * (k - 1) + (deg - 2)
            table[tdof][s][: deg + 1] += trace_bubble(deg)
    return table


def project_edge_data(g, a: np.ndarray, b: np.ndarray, k: int, n_quad: int = 24) -> np.ndarray:
    """Edgewise polynomial fit of callable boundary data, exact for degree <= k.

    Endpoint values are interpolated; the remainder is L2-fitted in the
    hierarchic bubbles.  Returns sigma-monomial coefficients of degree <= k.
    """
    va = float(g(a[0], a[1]))
    vb = float(g(b[0], b[1]))
    coeff = np.zeros(k + 1)
    coeff[0] = va
    coeff[1] = vb - va
    if k >= 2:
        sig, w = gauss01(n_quad)
        pts = a[None, :] + sig[:, None] * (b - a)[None, :]
        resid = np.asarray(g(pts[:, 0], pts[:, 1]), dtype=float) - (va + (vb - va) * sig)
        basis = np.array([npoly.polyval(sig, trace_bubble(d)) for d in range(2, k + 1)])
        gram = (basis * w) @ basis.T
        rhs = (basis * w) @ resid
        c = np.linalg.solve(gram, rhs)
        for i, d in enumerate(range(2, k + 1)):
            coeff[: d + 1] += c[i] * trace_bubble(d)
    return coeff


def dirichlet_interpolant(mesh: PolygonalMesh, handler: DofHandler,
                          edge_data: dict[tuple[int, int], np.ndarray]):
    """Constrained coefficients from edgewise polynomial Dirichlet data.

    ``edge_data`` maps Dirichlet edge keys to sigma-monomial coefficients in
    canonical direction.  Nodal coefficients are endpoint values; bubble
    coefficients are the hierarchic expansion of the residual (exact for
    polynomial data).  Raises DataOrderTooHigh if data exceeds degree k and
    checks value agreement at shared nodes.
    """
    k = handler.k
    node_values: dict[int, float] = {}
    edge_coeffs: dict[tuple[tuple[int, int], int], float] = {}
    for key, coeff in edge_data.items():
        coeff = np.asarray(coeff, dtype=float)
        if len(coeff) > k + 1 and np.any(np.abs(coeff[k + 1 :]) > 0):
            raise DataOrderTooHigh(
                f"edge {key}: data degree {len(coeff) - 1} exceeds order {k}")
        va = float(npoly.polyval(0.0, coeff))
        vb = float(npoly.polyval(1.0, coeff))
        for nid, val in ((key[0], va), (key[1], vb)):
            if nid in node_values and abs(node_values[nid] - val) > 1e-10 * (1 + abs(val)):
                raise DataOrderTooHigh(
                    f"Dirichlet data discontinuous at node {nid}")
            node_values[nid] = val
        if k >= 2:
            resid = npoly.polysub(coeff, np.array([va, vb - va]))
            bubbles = [trace_bubble(d) for d in range(2, k + 1)]
            gram = np.array([[product_integral01(bi, bj) for bj in bubbles] for bi in bubbles])
            rhs = np.array([product_integral01(resid, bi) for bi in bubbles])
            c = np.linalg.solve(gram, rhs)
            for i, deg in enumerate(range(2, k + 1)):
                edge_coeffs[(key, deg)] = float(c[i])
    return node_values, edge_coeffs
