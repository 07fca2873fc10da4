"""Polygonal mesh data model with star-shaped elements.

Elements are simple CCW polygons, each star-shaped with respect to a maximal
inscribed circle (center ``z_K``, radius ``rho_K``).  Hanging nodes are kept
as ordinary, possibly collinear, loop vertices of the neighbouring element,
so the mesh is always conforming in the polygonal sense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidPolygon,
    MeshInconsistent,
    NoAdmissibleChord,
    NotAdjacent,
    NotStarShaped,
    UnionNotStarShaped,
)
from . import geometry as geo

INTERIOR = "interior"
DIRICHLET = "dirichlet"
NEUMANN = "neumann"
TAG_TO_CLASS = {"D": DIRICHLET, "N": NEUMANN}
CLASS_TO_TAG = {DIRICHLET: "D", NEUMANN: "N"}


def edge_key(a: int, b: int) -> tuple[int, int]:
    """Canonical undirected edge key; also fixes the edge orientation a < b."""
    return (a, b) if a < b else (b, a)


@dataclass
class Node:
    id: int
    x: float
    y: float
    boundary_class: str = INTERIOR

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass
class Edge:
    id: int
    nodes: tuple[int, int]
    elements: tuple[int, ...]
    boundary_class: str
    length: float


@dataclass
class Element:
    id: int
    loop: list[int]
    kernel_center: np.ndarray | None = None
    kernel_radius: float | None = None
    diameter: float | None = None
    area: float | None = None

    def invalidate(self) -> None:
        self.kernel_center = None
        self.kernel_radius = None
        self.diameter = None
        self.area = None


@dataclass
class Patch:
    kind: str
    anchor: object
    members: list
    diameter: float


@dataclass
class RegularityLimits:
    sigma_max: float = 20.0
    c_max: float = 20.0


@dataclass
class RegularityReport:
    sigma: np.ndarray
    c: np.ndarray
    alpha: np.ndarray
    aux_aspect: np.ndarray
    sigma_mesh: float
    c_mesh: float
    sigma_tri_bound: float
    edge_count_bound: float
    max_edge_count: int
    passed: bool
    failures: list[int] = field(default_factory=list)


class PolygonalMesh:
    """Nodes, polygonal elements and derived edge topology."""

    def __init__(self, points, loops, boundary_tags=None, check: bool = True):
        pts = np.asarray(points, dtype=float)
        self.nodes = [Node(i, float(p[0]), float(p[1])) for i, p in enumerate(pts)]
        self.elements = [Element(i, list(map(int, loop))) for i, loop in enumerate(loops)]
        self.boundary_tags: dict[tuple[int, int], str] = dict(boundary_tags or {})
        self._side_map: dict[tuple[int, int], list[int]] = {}
        self._edges: list[Edge] | None = None
        self._edge_index: dict[tuple[int, int], int] | None = None
        self._rebuild_sides()
        self.rebuild()
        self.domain_area = float(sum(self.element_area(e.id) for e in self.elements))
        if check:
            self.check_consistency()

    # -- basic access ------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def edges(self) -> list[Edge]:
        if self._edges is None:
            self._build_edge_table()
        return self._edges

    @property
    def edge_index(self) -> dict[tuple[int, int], int]:
        if self._edges is None:
            self._build_edge_table()
        return self._edge_index

    def points(self) -> np.ndarray:
        return np.array([[n.x, n.y] for n in self.nodes])

    def element_points(self, eid: int) -> np.ndarray:
        loop = self.elements[eid].loop
        return np.array([[self.nodes[i].x, self.nodes[i].y] for i in loop])

    def element_sides(self, eid: int):
        """Pairs (node id, node id) of consecutive loop vertices."""
        loop = self.elements[eid].loop
        return [(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]

    def h_max(self) -> float:
        return max(self.element_diameter(e.id) for e in self.elements)

    # -- derived topology ----------------------------------------------------

    def _rebuild_sides(self) -> None:
        self._side_map = {}
        for elem in self.elements:
            self._register_loop(elem.id, elem.loop)

    def _register_loop(self, eid: int, loop: list[int]) -> None:
        m = len(loop)
        for i in range(m):
            a, b = loop[i], loop[(i + 1) % m]
            if a == b:
                raise MeshInconsistent(f"element {eid} repeats node {a}")
            self._side_map.setdefault(edge_key(a, b), []).append(eid)

    def _unregister_loop(self, eid: int, loop: list[int]) -> None:
        m = len(loop)
        for i in range(m):
            key = edge_key(loop[i], loop[(i + 1) % m])
            owners = self._side_map[key]
            owners.remove(eid)
            if not owners:
                del self._side_map[key]

    def _side_is_boundary(self, key: tuple[int, int]) -> bool:
        return len(self._side_map[key]) == 1

    def rebuild(self) -> None:
        """Invalidate the derived edge table; it is rebuilt lazily on access."""
        self._edges = None
        self._edge_index = None

    def _build_edge_table(self) -> None:
        order: list[tuple[int, int]] = []
        seen = set()
        for elem in self.elements:
            for a, b in self.element_sides(elem.id):
                key = edge_key(a, b)
                if key not in seen:
                    seen.add(key)
                    order.append(key)
        edges = []
        index = {}
        for i, key in enumerate(order):
            elems = tuple(self._side_map[key])
            if len(elems) > 2:
                raise MeshInconsistent(f"edge {key} has {len(elems)} incident elements")
            a, b = key
            length = math.hypot(self.nodes[b].x - self.nodes[a].x, self.nodes[b].y - self.nodes[a].y)
            if len(elems) == 2:
                cls = INTERIOR
            else:
                cls = TAG_TO_CLASS[self.boundary_tags.get(key, "D")]
            edges.append(Edge(i, key, elems, cls, length))
            index[key] = i
        self._edges = edges
        self._edge_index = index
        for node in self.nodes:
            node.boundary_class = INTERIOR
        for edge in edges:
            if edge.boundary_class == NEUMANN:
                for nid in edge.nodes:
                    if self.nodes[nid].boundary_class == INTERIOR:
                        self.nodes[nid].boundary_class = NEUMANN
        for edge in edges:
            if edge.boundary_class == DIRICHLET:
                for nid in edge.nodes:
                    self.nodes[nid].boundary_class = DIRICHLET

    # -- per-element geometry ----------------------------------------------

    def element_area(self, eid: int) -> float:
        elem = self.elements[eid]
        if elem.area is None:
            elem.area = geo.signed_area(self.element_points(eid))
        return elem.area

    def element_diameter(self, eid: int) -> float:
        elem = self.elements[eid]
        if elem.diameter is None:
            elem.diameter = geo.diameter(self.element_points(eid))
        return elem.diameter

    def element_circle(self, eid: int) -> tuple[np.ndarray, float]:
        elem = self.elements[eid]
        if elem.kernel_center is None:
            center, radius = geo.star_center(self.element_points(eid))
            elem.kernel_center = center
            elem.kernel_radius = radius
        return elem.kernel_center, elem.kernel_radius

    def aux_triangles(self, eid: int) -> list[tuple[tuple[int, int], np.ndarray]]:
        """Fan triangulation from z_K: one triangle per boundary edge."""
        center, _ = self.element_circle(eid)
        out = []
        for a, b in self.element_sides(eid):
            tri = np.array([[self.nodes[a].x, self.nodes[a].y],
                            [self.nodes[b].x, self.nodes[b].y],
                            center])
            out.append((edge_key(a, b), tri))
        return out

    # -- consistency ---------------------------------------------------------

    def check_consistency(self, full: bool = False, tol: float = 1e-10) -> None:
        total = 0.0
        for elem in self.elements:
            pts = self.element_points(elem.id)
            if len(set(elem.loop)) != len(elem.loop):
                raise MeshInconsistent(f"element {elem.id} repeats a node")
            area = geo.signed_area(pts)
            if area <= 0:
                raise MeshInconsistent(f"element {elem.id} is not CCW (area {area})")
            if not geo.is_simple(pts):
                raise MeshInconsistent(f"element {elem.id} is not a simple polygon")
            total += area
        if abs(total - self.domain_area) > tol * max(self.domain_area, 1.0):
            raise MeshInconsistent(
                f"area partition broken: sum {total!r} vs domain {self.domain_area!r}")
        for key in self.boundary_tags:
            idx = self.edge_index.get(key)
            if idx is None or len(self.edges[idx].elements) != 1:
                raise MeshInconsistent(f"tagged edge {key} is not a boundary edge")
        if full:
            for elem in self.elements:
                center, rho = self.element_circle(elem.id)
                for key, tri in self.aux_triangles(elem.id):
                    area = abs(geo.signed_area(tri))
                    h_e = self.edges[self.edge_index[key]].length
                    if area + 1e-12 < 0.5 * h_e * rho:
                        raise MeshInconsistent(
                            f"aux triangle of element {elem.id} edge {key} too small")

    # -- regularity ----------------------------------------------------------

    def regularity_report(self, limits: RegularityLimits | None = None) -> RegularityReport:
        limits = limits or RegularityLimits()
        n = self.n_elements
        sigma = np.zeros(n)
        cc = np.zeros(n)
        alpha = np.zeros(n)
        aspect = np.zeros(n)
        counts = np.zeros(n, dtype=int)
        failures = []
        for elem in self.elements:
            eid = elem.id
            _, rho = self.element_circle(eid)
            h = self.element_diameter(eid)
            sides = self.element_sides(eid)
            h_e_min = min(self.edges[self.edge_index[edge_key(a, b)]].length for a, b in sides)
            sigma[eid] = h / rho
            cc[eid] = h / h_e_min
            alpha[eid] = min(math.pi / 3.0, math.asin(min(1.0, 1.0 / sigma[eid])))
            counts[eid] = len(sides)
            worst = 0.0
            for _, tri in self.aux_triangles(eid):
                area = abs(geo.signed_area(tri))
                per = sum(np.linalg.norm(tri[i] - tri[(i + 1) % 3]) for i in range(3))
                rho_t = 2.0 * area / per
                worst = max(worst, geo.diameter(tri) / rho_t)
            aspect[eid] = worst
            if sigma[eid] > limits.sigma_max or cc[eid] > limits.c_max:
                failures.append(eid)
        sigma_mesh = float(sigma.max())
        c_mesh = float(cc.max())
        return RegularityReport(
            sigma=sigma, c=cc, alpha=alpha, aux_aspect=aspect,
            sigma_mesh=sigma_mesh, c_mesh=c_mesh,
            sigma_tri_bound=3.0 * c_mesh * sigma_mesh,
            edge_count_bound=2.0 * sigma_mesh * c_mesh,
            max_edge_count=int(counts.max()),
            passed=not failures, failures=failures)

    # -- patches ---------------------------------------------------------------

    def build_patches(self) -> "PatchTables":
        return PatchTables(self)

    # -- refinement ------------------------------------------------------------

    def _candidate_slots(self, eid: int):
        loop = self.elements[eid].loop
        pts = self.element_points(eid)
        m = len(loop)
        slots = []
        for i in range(m):
            slots.append(("n", i, pts[i]))
            slots.append(("m", i, 0.5 * (pts[i] + pts[(i + 1) % m])))
        return slots

    @staticmethod
    def _children_loops(slots, sa: int, sb: int):
        """Slot walk: node points of both children for chord slot positions."""
        n_slots = len(slots)

        def walk(start, stop):
            out = [slots[start][2]]
            i = (start + 1) % n_slots
            while i != stop:
                kind, idx, p = slots[i]
                if kind == "n":
                    out.append(p)
                i = (i + 1) % n_slots
            out.append(slots[stop][2])
            return out

        return walk(sa, sb), walk(sb, sa)

    def split_element(self, element_id: int, check: bool = True) -> tuple[int, int]:
        """Split one element along an admissible chord into two children.

        Chord endpoints are boundary nodes or side midpoints.  Candidates whose
        chord passes within 0.25*rho_K of z_K are ranked by area imbalance,
        then chord length, then lexicographic position; the first candidate
        with two star-shaped children wins.  If none qualifies the proximity
        filter is dropped and the pair maximizing min(rho_A, rho_B) is taken.
        """
        center, rho = self.element_circle(element_id)
        slots = self._candidate_slots(element_id)
        n_slots = len(slots)
        pts = np.array([s[2] for s in slots])

        # Shoelace prefix sums over the augmented (node + midpoint) loop; the
        # midpoints are collinear so the augmented polygon has the parent area.
        x, y = pts[:, 0], pts[:, 1]
        xn, yn = np.concatenate([x[1:], x[:1]]), np.concatenate([y[1:], y[:1]])
        prefix = np.concatenate([[0.0], np.cumsum(x * yn - xn * y)])
        total = 0.5 * prefix[-1]

        sa_all, sb_all = np.triu_indices(n_slots, k=2)
        gap = np.minimum(sb_all - sa_all, n_slots - (sb_all - sa_all))
        keep = gap >= 2
        sa_all, sb_all = sa_all[keep], sb_all[keep]
        pa, pb = pts[sa_all], pts[sb_all]
        close = pb[:, 0] * pa[:, 1] - pa[:, 0] * pb[:, 1]
        area_a = 0.5 * (prefix[sb_all] - prefix[sa_all] + close)
        area_b = total - area_a
        # Distance from z_K to each chord.
        chord = pb - pa
        denom = np.maximum(np.einsum("ij,ij->i", chord, chord), 1e-300)
        u = np.clip(np.einsum("ij,ij->i", center - pa, chord) / denom, 0.0, 1.0)
        foot = pa + u[:, None] * chord
        dist = np.hypot(foot[:, 0] - center[0], foot[:, 1] - center[1])
        near = dist <= 0.25 * rho + 1e-12
        valid = (area_a > 1e-14 * abs(total)) & (area_b > 1e-14 * abs(total))
        imbalance = np.abs(area_a - area_b)
        length = np.sqrt(denom)
        lo_is_a = (pa[:, 0] < pb[:, 0]) | ((pa[:, 0] == pb[:, 0]) & (pa[:, 1] <= pb[:, 1]))
        lo = np.where(lo_is_a[:, None], pa, pb)
        hi = np.where(lo_is_a[:, None], pb, pa)
        order = np.lexsort((hi[:, 1], hi[:, 0], lo[:, 1], lo[:, 0], length, imbalance))

        def star_radii(sa, sb):
            la, lb = self._children_loops(slots, sa, sb)
            try:
                _, ra = geo.star_center(np.array(la))
                _, rb = geo.star_center(np.array(lb))
            except (NotStarShaped, InvalidPolygon):
                return None
            return ra, rb

        chosen = None
        for idx in order:
            if not (near[idx] and valid[idx]):
                continue
            radii = star_radii(sa_all[idx], sb_all[idx])
            if radii is not None:
                chosen = (int(sa_all[idx]), int(sb_all[idx]))
                break
        if chosen is None:
            best = None
            poly = self.element_points(element_id)
            for idx in order:
                if not valid[idx]:
                    continue
                if not geo.segment_inside_polygon(poly, pts[sa_all[idx]], pts[sb_all[idx]]):
                    continue
                radii = star_radii(sa_all[idx], sb_all[idx])
                if radii is None:
                    continue
                score = min(radii)
                if best is None or score > best[0]:
                    best = (score, int(sa_all[idx]), int(sb_all[idx]))
            if best is None:
                raise NoAdmissibleChord(f"element {element_id} admits no star-shaped split")
            chosen = (best[1], best[2])

        return self._apply_split(element_id, chosen[0], chosen[1], check=check)

    def _apply_split(self, element_id: int, sa: int, sb: int, check: bool) -> tuple[int, int]:
        elem = self.elements[element_id]
        loop = elem.loop
        m = len(loop)
        slots = self._candidate_slots(element_id)
        self._unregister_loop(element_id, loop)

        def slot_node(slot) -> int:
            kind, idx, p = slots[slot]
            if kind == "n":
                return loop[idx]
            a, b = loop[idx], loop[(idx + 1) % m]
            nid = len(self.nodes)
            key = edge_key(a, b)
            owners = self._side_map.get(key, [])
            is_boundary = len(owners) == 0  # parent already unregistered
            tag = self.boundary_tags.pop(key, None)
            if tag is None and is_boundary:
                tag = "D"
            cls = TAG_TO_CLASS[tag] if is_boundary else INTERIOR
            self.nodes.append(Node(nid, float(p[0]), float(p[1]), cls))
            # Absorb the new node into the neighbour loop (hanging node).
            for other in list(owners):
                oloop = self.elements[other].loop
                for j in range(len(oloop)):
                    if {oloop[j], oloop[(j + 1) % len(oloop)]} == {a, b}:
                        self._unregister_loop(other, oloop)
                        oloop.insert(j + 1, nid)
                        self._register_loop(other, oloop)
                        break
            if not is_boundary and tag is not None:
                # interior side carried a stale tag; drop it
                tag = None
            if tag is not None:
                self.boundary_tags[edge_key(a, nid)] = tag
                self.boundary_tags[edge_key(nid, b)] = tag
            return nid

        node_a = slot_node(sa)
        node_b = slot_node(sb)

        def walk_ids(start_slot, stop_slot, start_node, stop_node):
            ids = [start_node]
            i = (start_slot + 1) % len(slots)
            while i != stop_slot:
                kind, idx, _ = slots[i]
                if kind == "n":
                    ids.append(loop[idx])
                i = (i + 1) % len(slots)
            ids.append(stop_node)
            return ids

        loop_a = walk_ids(sa, sb, node_a, node_b)
        loop_b = walk_ids(sb, sa, node_b, node_a)
        child_a = element_id
        child_b = len(self.elements)
        self.elements[element_id] = Element(child_a, loop_a)
        self.elements.append(Element(child_b, loop_b))
        self._register_loop(child_a, loop_a)
        self._register_loop(child_b, loop_b)
        self.rebuild()
        if check:
            self.check_consistency()
        return child_a, child_b

    # -- coarsening --------------------------------------------------------------

    def glue_elements(self, id1: int, id2: int, check: bool = True) -> int:
        """Replace two edge-adjacent elements by their star-shaped union."""
        if id1 == id2:
            raise NotAdjacent("cannot glue an element with itself")
        sides1 = self.element_sides(id1)
        sides2 = {(b, a) for a, b in self.element_sides(id2)}
        shared = [s for s in sides1 if s in sides2]
        if not shared:
            raise NotAdjacent(f"elements {id1} and {id2} share no full edge")
        removed = {edge_key(a, b) for a, b in shared}
        succ = {}
        for a, b in self.element_sides(id1) + self.element_sides(id2):
            if edge_key(a, b) in removed:
                continue
            if a in succ:
                raise NotAdjacent("union boundary is not a single cycle")
            succ[a] = b
        if not succ:
            raise NotAdjacent("union has empty boundary")
        start = min(succ)
        union = [start]
        nxt = succ[start]
        while nxt != start:
            union.append(nxt)
            if nxt not in succ or len(union) > len(succ):
                raise InvalidPolygon("union boundary is not a simple closed loop")
            nxt = succ[nxt]
        if len(union) != len(succ):
            raise InvalidPolygon("union boundary splits into several loops")

        pts = np.array([[self.nodes[i].x, self.nodes[i].y] for i in union])
        if not geo.is_simple(pts) or geo.signed_area(pts) <= 0:
            raise InvalidPolygon("union is not a simple CCW polygon")
        try:
            geo.star_center(pts)
        except (NotStarShaped, InvalidPolygon) as exc:
            raise UnionNotStarShaped(str(exc)) from None

        used_elsewhere = set()
        for elem in self.elements:
            if elem.id in (id1, id2):
                continue
            used_elsewhere.update(elem.loop)

        union = self._drop_redundant_nodes(union, used_elsewhere)

        last = len(self.elements) - 1
        self.elements[id1] = Element(id1, union)
        if id2 != last:
            moved = self.elements[last]
            moved.id = id2
            self.elements[id2] = moved
        self.elements.pop()
        self._delete_orphan_nodes()
        self._rebuild_sides()
        self.rebuild()
        if check:
            self.check_consistency()
        return id1

    def _drop_redundant_nodes(self, union: list[int], used_elsewhere: set[int]) -> list[int]:
        """Remove collinear union vertices that no other element references."""
        changed = True
        while changed and len(union) > 3:
            changed = False
            for i, nid in enumerate(union):
                if nid in used_elsewhere:
                    continue
                p = self.nodes[nid].position
                a = self.nodes[union[i - 1]].position
                b = self.nodes[union[(i + 1) % len(union)]].position
                scale = max(np.linalg.norm(b - a), 1e-300)
                if abs((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) > 1e-12 * scale * scale:
                    continue
                k1 = edge_key(union[i - 1], nid)
                k2 = edge_key(nid, union[(i + 1) % len(union)])
                t1 = self.boundary_tags.get(k1)
                t2 = self.boundary_tags.get(k2)
                if t1 != t2:
                    continue
                self.boundary_tags.pop(k1, None)
                self.boundary_tags.pop(k2, None)
                if t1 is not None:
                    self.boundary_tags[edge_key(union[i - 1], union[(i + 1) % len(union)])] = t1
                union.pop(i)
                changed = True
                break
        return union

    def _delete_orphan_nodes(self) -> None:
        used = set()
        for elem in self.elements:
            used.update(elem.loop)
        orphans = sorted((n.id for n in self.nodes if n.id not in used), reverse=True)
        for oid in orphans:
            last = len(self.nodes) - 1
            if oid != last:
                moved = self.nodes[last]
                moved.id = oid
                self.nodes[oid] = moved
                for elem in self.elements:
                    elem.loop = [oid if v == last else v for v in elem.loop]
                self.boundary_tags = {
                    edge_key(oid if a == last else a, oid if b == last else b): t
                    for (a, b), t in self.boundary_tags.items()}
            self.nodes.pop()

    # -- transforms -----------------------------------------------------------

    def scaled(self, factor: float) -> "PolygonalMesh":
        pts = self.points() * factor
        loops = [list(e.loop) for e in self.elements]
        return PolygonalMesh(pts, loops, dict(self.boundary_tags))

    def copy(self) -> "PolygonalMesh":
        return PolygonalMesh(self.points(), [list(e.loop) for e in self.elements],
                             dict(self.boundary_tags))

    # -- text format ------------------------------------------------------------

    def write(self, path: str) -> None:
        lines = ["POLYMESH 1", f"NODES {self.n_nodes}"]
        for n in self.nodes:
            lines.append(f"{n.id} {n.x:.17g} {n.y:.17g}")
        lines.append(f"ELEMENTS {self.n_elements}")
        for e in self.elements:
            lines.append(f"{e.id} {len(e.loop)} " + " ".join(map(str, e.loop)))
        boundary = [(edge.nodes, CLASS_TO_TAG[edge.boundary_class])
                    for edge in self.edges if len(edge.elements) == 1]
        lines.append(f"BOUNDARY {len(boundary)}")
        for (a, b), tag in boundary:
            lines.append(f"{a} {b} {tag}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def read(cls, path: str) -> "PolygonalMesh":
        with open(path, "r", encoding="utf-8") as fh:
            tokens = fh.read().split("\n")
        lines = [ln.strip() for ln in tokens if ln.strip()]
        if lines[0] != "POLYMESH 1":
            raise InvalidPolygon(f"bad header {lines[0]!r}, expected 'POLYMESH 1'")
        pos = 1
        section, count = lines[pos].split()
        if section != "NODES":
            raise InvalidPolygon("expected NODES section")
        n = int(count)
        pts = np.zeros((n, 2))
        for i in range(n):
            nid, x, y = lines[pos + 1 + i].split()
            pts[int(nid)] = (float(x), float(y))
        pos += 1 + n
        section, count = lines[pos].split()
        if section != "ELEMENTS":
            raise InvalidPolygon("expected ELEMENTS section")
        m = int(count)
        loops: list[list[int]] = [[] for _ in range(m)]
        for i in range(m):
            parts = lines[pos + 1 + i].split()
            eid, cnt = int(parts[0]), int(parts[1])
            loops[eid] = [int(v) for v in parts[2 : 2 + cnt]]
        pos += 1 + m
        tags = {}
        if pos < len(lines):
            section, count = lines[pos].split()
            if section != "BOUNDARY":
                raise InvalidPolygon("expected BOUNDARY section")
            for i in range(int(count)):
                a, b, tag = lines[pos + 1 + i].split()
                tags[edge_key(int(a), int(b))] = tag
        return cls(pts, loops, tags)


class PatchTables:
    """Node/edge/element neighbourhoods of a mesh (six patch kinds)."""

    def __init__(self, mesh: PolygonalMesh):
        self.mesh = mesh
        node_elements: dict[int, list[int]] = {n.id: [] for n in mesh.nodes}
        for elem in mesh.elements:
            for nid in elem.loop:
                node_elements[nid].append(elem.id)
        self.node_elements = node_elements
        # Aux triangles whose closure contains z: the two fan triangles at z
        # inside every element around z.
        node_aux: dict[int, list[tuple[int, tuple[int, int]]]] = {n.id: [] for n in mesh.nodes}
        for elem in mesh.elements:
            loop = elem.loop
            m = len(loop)
            for i, nid in enumerate(loop):
                node_aux[nid].append((elem.id, edge_key(loop[i - 1], nid)))
                node_aux[nid].append((elem.id, edge_key(nid, loop[(i + 1) % m])))
        self.node_aux = node_aux

    def omega_z(self, nid: int) -> list[int]:
        return sorted(self.node_elements[nid])

    def omega_tilde_z(self, nid: int) -> list[tuple[int, tuple[int, int]]]:
        return sorted(self.node_aux[nid])

    def omega_E(self, key: tuple[int, int]) -> list[int]:
        a, b = key
        return sorted(set(self.node_elements[a]) | set(self.node_elements[b]))

    def omega_tilde_E(self, key: tuple[int, int]) -> list[int]:
        return sorted(self.mesh.edges[self.mesh.edge_index[key]].elements)

    def omega_K(self, eid: int) -> list[int]:
        out = set()
        for nid in self.mesh.elements[eid].loop:
            out.update(self.node_elements[nid])
        return sorted(out)

    def omega_tilde_K(self, eid: int) -> list[int]:
        out = set()
        for a, b in self.mesh.element_sides(eid):
            out.update(self.mesh.edges[self.mesh.edge_index[edge_key(a, b)]].elements)
        return sorted(out)

    def patch(self, kind: str, anchor) -> Patch:
        mesh = self.mesh
        if kind == "omega_z":
            members = self.omega_z(anchor)
            pts = np.vstack([mesh.element_points(e) for e in members])
        elif kind == "omega_tilde_z":
            members = self.omega_tilde_z(anchor)
            tris = []
            for eid, key in members:
                for k2, tri in mesh.aux_triangles(eid):
                    if k2 == key:
                        tris.append(tri)
            pts = np.vstack(tris)
        elif kind == "omega_E":
            members = self.omega_E(anchor)
            pts = np.vstack([mesh.element_points(e) for e in members])
        elif kind == "omega_tilde_E":
            members = self.omega_tilde_E(anchor)
            pts = np.vstack([mesh.element_points(e) for e in members])
        elif kind == "omega_K":
            members = self.omega_K(anchor)
            pts = np.vstack([mesh.element_points(e) for e in members])
        elif kind == "omega_tilde_K":
            members = self.omega_tilde_K(anchor)
            pts = np.vstack([mesh.element_points(e) for e in members])
        else:
            raise ValueError(f"unknown patch kind {kind!r}")
        return Patch(kind, anchor, members, geo.diameter(pts))


# ----------------------------------------------------------------------------
# Structured generators
# ----------------------------------------------------------------------------

def generate_structured(kind: str, n: int, domain=(0.0, 0.0, 1.0, 1.0), tag: str = "D") -> PolygonalMesh:
    """Structured meshes on an axis-aligned rectangle.

    ``squares``: n x n congruent squares.  ``l_tiles``: every cell is split
    into an L-shaped element (cell minus its upper-right quadrant) and the
    small square quadrant; mid-side nodes of neighbouring cells are absorbed
    into the loops so the mesh stays conforming.
    """
    if n < 1:
        raise ValueError("need n >= 1 subdivisions")
    x0, y0, x1, y1 = map(float, domain)
    if kind == "squares":
        xs = np.linspace(x0, x1, n + 1)
        ys = np.linspace(y0, y1, n + 1)
        idx = lambda i, j: j * (n + 1) + i
        pts = [(xs[i], ys[j]) for j in range(n + 1) for i in range(n + 1)]
        loops = [[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]
                 for j in range(n) for i in range(n)]
    elif kind == "l_tiles":
        # Half-step lattice: every needed point is (x0 + i*s/2, y0 + j*s/2).
        sx = (x1 - x0) / n
        sy = (y1 - y0) / n
        lattice: dict[tuple[int, int], int] = {}
        pts = []

        def node(i: int, j: int) -> int:
            key = (i, j)
            if key not in lattice:
                lattice[key] = len(pts)
                pts.append((x0 + i * sx / 2.0, y0 + j * sy / 2.0))
            return lattice[key]

        loops = []
        for cy in range(n):
            for cx in range(n):
                i, j = 2 * cx, 2 * cy
                ell = [node(i, j)]
                if cy > 0:
                    ell.append(node(i + 1, j))
                ell += [node(i + 2, j), node(i + 2, j + 1), node(i + 1, j + 1),
                        node(i + 1, j + 2), node(i, j + 2)]
                if cx > 0:
                    ell.append(node(i, j + 1))
                loops.append(ell)
                loops.append([node(i + 1, j + 1), node(i + 2, j + 1),
                              node(i + 2, j + 2), node(i + 1, j + 2)])
    else:
        raise ValueError(f"unknown structured mesh kind {kind!r}")

    mesh = PolygonalMesh(np.array(pts), loops)
    if tag != "D":
        for edge in mesh.edges:
            if len(edge.elements) == 1:
                mesh.boundary_tags[edge.nodes] = tag
        mesh.rebuild()
    return mesh


def refine_elements(mesh: PolygonalMesh, element_ids) -> list[tuple[int, int, int]]:
    """Split the listed elements in ascending id order.

    Returns (parent id, child id, child id) triples; the first child reuses
    the parent slot.
    """
    forest = []
    for eid in sorted(element_ids):
        ca, cb = mesh.split_element(eid, check=False)
        forest.append((eid, ca, cb))
    mesh.check_consistency()
    return forest
