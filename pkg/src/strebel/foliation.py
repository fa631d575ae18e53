"""Vertical foliation: separatrices, critical graph, cylinders and minimal parts.

Separatrices are followed exactly.  Inside a rectangle a vertical leaf keeps
its x coordinate, and a gluing changes it by ``x -> o' + (x - o)`` or
``x -> o' + L - (x - o)``, so hitting a marked point is an exact equality
test in the coordinate field.

The decomposition cuts every rectangle into vertical strips along all
finite leaves through marked points.  A strip whose top maps exactly onto
another strip, and so on around a cycle, sweeps out a band of closed
leaves; bands separated only by leaves free of singularities are merged
into cylinders.  Strips that never close up belong to minimal components.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .iet import IET, FirstReturnError, Transversal, UECertificate, certify, first_return
from .numeric import Scalar, as_scalar
from .surface import Surface, _UnionFind

__all__ = [
    "IncompleteGraphError",
    "FoliationError",
    "SaddleConnection",
    "CriticalGraph",
    "RibbonComponent",
    "Cylinder",
    "MinimalComponent",
    "FoliationDecomposition",
    "default_budget",
    "trace_separatrices",
    "decompose_vertical",
    "ribbon_topology",
    "masur_case",
]

Germ = Tuple[int, Scalar, Scalar, int]  # (rect, x, y, angle) with angle odd


class IncompleteGraphError(RuntimeError):
    """A separatrix could not be resolved within the length budget."""


class FoliationError(ValueError):
    pass


def budget_scale() -> Scalar:
    raw = os.environ.get("STREBEL_BUDGET_SCALE")
    return as_scalar(raw) if raw else Scalar(1)


def default_budget(surface: Surface) -> Scalar:
    hmax = max(surface.heights)
    return Scalar(64) * hmax * surface.n_rects ** 2 * budget_scale()


@dataclass(frozen=True)
class Leaf:
    start: Germ
    end: Optional[Germ]  # arrival germ, None for budget rays
    length: Scalar
    pieces: Tuple[Tuple[int, Scalar, Scalar, Scalar], ...]  # (rect, x, y_from, y_to)
    status: str  # connection | closed | budget


def trace_leaf(surface: Surface, germ: Germ, budget: Scalar, stop_vertex: Optional[int] = None) -> Leaf:
    """Follow the vertical leaf leaving ``germ`` until it reaches a singular point.

    Regular marked points are passed straight through.  When
    ``stop_vertex`` is a regular vertex the leaf also stops on returning to it.
    """
    i, x, y, a = germ
    up = a % 4 == 1
    length = Scalar(0)
    pieces = []
    while True:
        w, h = surface.widths[i], surface.heights[i]
        target = None
        if x == 0 or x == w:
            side = "left" if x == 0 else "right"
            for k in surface.side_segs[(i, side)]:
                seg = surface.segs[k]
                for p in (seg.offset, seg.offset + seg.length):
                    if 0 < p < h and ((up and p > y) or (not up and p < y)):
                        if target is None or (p < target if up else p > target):
                            target = p
        end_y = target if target is not None else (h if up else Scalar(0))
        step = end_y - y if up else y - end_y
        pieces.append((i, x, y, end_y))
        length = length + step
        if length > budget:
            return Leaf(germ, None, length, tuple(pieces), "budget")
        pt = (i, x, end_y)
        if pt in surface.vertex_of:
            v = surface.vertex_of[pt]
            back = surface.normalize_ray(i, x, end_y, 3 if up else 1)
            if surface.is_singular(v):
                return Leaf(germ, back, length, tuple(pieces), "connection")
            if v == stop_vertex:
                return Leaf(germ, back, length, tuple(pieces), "closed")
            i, x, y, a = surface.turn(*back, 2)
            up = a % 4 == 1
            continue
        side = "top" if up else "bottom"
        k = surface.segment_at(i, side, x)
        k2, x2 = surface.map_through(k, x - surface.segs[k].offset)
        other = surface.segs[k2]
        i = other.rect
        x = x2
        up = other.side == "bottom"
        y = Scalar(0) if up else surface.heights[i]


@dataclass(frozen=True)
class SaddleConnection:
    start: Tuple[int, int]  # (vertex, germ index)
    end: Tuple[int, int]
    length: Scalar
    pieces: Tuple[Tuple[int, Scalar, Scalar, Scalar], ...]


@dataclass
class CriticalGraph:
    """Finite critical graph with its ribbon structure.

    ``germs[v]`` lists the vertical germs of singular vertex ``v`` in
    counter-clockwise order; half-edges are pairs ``(v, index)``.
    """

    surface: Surface
    vertices: List[int]
    germs: Dict[int, List[Germ]]
    edges: List[SaddleConnection]
    rays: List[Tuple[int, int]]
    budget: Scalar
    leaves: List[Leaf] = field(default_factory=list)
    regular_leaves: List[Leaf] = field(default_factory=list)

    @property
    def incomplete(self) -> bool:
        """Budget rays cannot be genuine on surfaces with rational data."""
        return bool(self.rays) and self.surface.is_rational()

    def infinite_rays(self) -> Dict[int, int]:
        out = {v: 0 for v in self.vertices}
        for v, _ in self.rays:
            out[v] += 1
        return out

    def partner(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """The involution on half-edges; ray stubs are fixed points."""
        iota = {h: h for h in self.rays}
        for e in self.edges:
            iota[e.start] = e.end
            iota[e.end] = e.start
        return iota

    def components(self) -> List[List[int]]:
        uf = _UnionFind()
        for v in self.vertices:
            uf.find(v)
        for e in self.edges:
            uf.union(e.start[0], e.end[0])
        groups: Dict[int, List[int]] = {}
        for v in self.vertices:
            groups.setdefault(uf.find(v), []).append(v)
        return sorted(groups.values())

    def boundary_cycles(self) -> List[List[Tuple[int, int]]]:
        """Orbits of ``sigma o iota`` on half-edges."""
        iota = self.partner()
        seen, cycles = set(), []
        for v in self.vertices:
            for g in range(len(self.germs[v])):
                h = (v, g)
                if h in seen:
                    continue
                cyc = []
                while h not in seen:
                    seen.add(h)
                    cyc.append(h)
                    u, k = iota[h]
                    h = (u, (k + 1) % len(self.germs[u]))
                cycles.append(cyc)
        return cycles

    def edge_length(self, h: Tuple[int, int]) -> Optional[Scalar]:
        for e in self.edges:
            if h in (e.start, e.end):
                return e.length
        return None

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"id": v, "coneAngle": self.surface.cone_angles[v],
                 "puncture": v in self.surface.puncture_vertices, "germs": len(self.germs[v])}
                for v in self.vertices
            ],
            "edges": [
                {"from": list(e.start), "to": list(e.end), "length": str(e.length),
                 "decimal": f"{float(e.length):.12f}"}
                for e in self.edges
            ],
            "infiniteRays": [{"vertex": v, "germ": g, "status": "budget"} for v, g in self.rays],
            "budget": str(self.budget),
            "incomplete": self.incomplete,
        }


def trace_separatrices(surface: Surface, budget=None) -> CriticalGraph:
    budget = as_scalar(budget) if budget is not None else default_budget(surface)
    singular = [v for v in range(len(surface.cone_angles)) if surface.is_singular(v)]
    germs = {v: surface.vertical_germs(v) for v in singular}
    index = {g: (v, k) for v in singular for k, g in enumerate(germs[v])}
    edges, rays, leaves = [], [], []
    for v in singular:
        for k, g in enumerate(germs[v]):
            leaf = trace_leaf(surface, g, budget)
            leaves.append(leaf)
            if leaf.status == "budget":
                rays.append((v, k))
                continue
            end = index[leaf.end]
            if (v, k) <= end:
                edges.append(SaddleConnection((v, k), end, leaf.length, leaf.pieces))
    regular = []
    for v in range(len(surface.cone_angles)):
        if not surface.is_singular(v):
            for g in surface.vertical_germs(v):
                regular.append(trace_leaf(surface, g, budget, stop_vertex=v))
    return CriticalGraph(surface, singular, germs, edges, rays, budget, leaves, regular)


# ---------------------------------------------------------------- topology
@dataclass(frozen=True)
class RibbonComponent:
    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    cycles: Tuple[Tuple[Tuple[int, int], ...], ...]
    genus: int
    n_boundary: int
    marked: int

    @property
    def euler(self) -> int:
        return len(self.vertices) - len(self.edges)

    @property
    def teichmuller_dim(self) -> int:
        return 3 * self.genus - 3 + self.n_boundary + self.marked

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": list(self.edges), "g": self.genus,
                "n": self.n_boundary, "markedPunctures": self.marked}


def is_puncture_vertex(surface: Surface, v: int) -> bool:
    """Explicit punctures and simple poles (cone angle pi) are punctures of X."""
    return v in surface.puncture_vertices or surface.cone_angles[v] == 1


def ribbon_topology(graph: CriticalGraph) -> List[RibbonComponent]:
    if graph.incomplete:
        raise IncompleteGraphError("critical graph is incomplete")
    cycles = graph.boundary_cycles()
    out = []
    for comp in graph.components():
        vs = set(comp)
        es = tuple(k for k, e in enumerate(graph.edges) if e.start[0] in vs)
        cyc = tuple(tuple(c) for c in cycles if c[0][0] in vs)
        chi = len(comp) - len(es)
        n = len(cyc)
        two_g = 2 - n - chi
        if two_g < 0 or two_g % 2:
            raise AssertionError("ribbon Euler count is inconsistent")
        marked = sum(1 for v in comp if is_puncture_vertex(graph.surface, v))
        out.append(RibbonComponent(tuple(comp), es, cyc, two_g // 2, n, marked))
    return out


def masur_case(graph: CriticalGraph) -> bool:
    """True when every component of the critical graph is a tree."""
    if graph.incomplete:
        raise IncompleteGraphError("critical graph is incomplete")
    return all(c.euler == 1 for c in ribbon_topology(graph))


# ----------------------------------------------------------- decomposition
@dataclass(frozen=True)
class Cylinder:
    height: Scalar
    circumference: Scalar
    strips: Tuple[Tuple[int, Scalar, Scalar], ...]

    kind = "cylinder"

    @property
    def area(self) -> Scalar:
        return self.height * self.circumference

    @property
    def modulus(self) -> Scalar:
        """Circumference over height; scales by lambda along the ray."""
        return self.circumference / self.height


@dataclass(frozen=True)
class MinimalComponent:
    area: Scalar
    strips: Tuple[Tuple[int, Scalar, Scalar], ...]
    transversal: Transversal
    first_return: IET
    certificate: UECertificate

    kind = "minimal"

    @property
    def ue_status(self) -> str:
        return "certified" if self.certificate.status == "certified" else "unknown"


@dataclass
class FoliationDecomposition:
    surface: Surface
    graph: CriticalGraph
    components: List[object]

    @property
    def cylinders(self) -> List[Cylinder]:
        return [c for c in self.components if c.kind == "cylinder"]

    @property
    def minimal(self) -> List[MinimalComponent]:
        return [c for c in self.components if c.kind == "minimal"]

    def total_area(self) -> Scalar:
        s = Scalar(0)
        for c in self.components:
            s = s + c.area
        return s

    def to_json(self) -> dict:
        comps = []
        for k, c in enumerate(self.components):
            d = {"id": k, "kind": c.kind, "area": str(c.area)}
            if c.kind == "cylinder":
                d["cylinder"] = {
                    "height": str(c.height),
                    "circumference": str(c.circumference),
                    "modulus": str(c.modulus),
                    "decimal": {"height": f"{float(c.height):.12f}",
                                "circumference": f"{float(c.circumference):.12f}",
                                "modulus": f"{float(c.modulus):.12f}"},
                }
            else:
                t = c.transversal
                d["minimal"] = {
                    "transversal": {"rect": self.surface.rect_ids[t.rect], "x0": str(t.x0), "x1": str(t.x1)},
                    "firstReturn": c.first_return.to_json(),
                    "ueStatus": c.ue_status,
                }
            comps.append(d)
        return {"components": comps, "criticalGraph": self.graph.to_json()}


def _strip_of(cuts: List[Scalar], x: Scalar, left: bool) -> Optional[int]:
    """Index of the strip having ``x`` as its left (``left``) or right edge."""
    for k in range(len(cuts) - 1):
        if (cuts[k] == x) if left else (cuts[k + 1] == x):
            return k
    return None


def decompose_vertical(surface: Surface, graph: Optional[CriticalGraph] = None) -> FoliationDecomposition:
    graph = graph if graph is not None else trace_separatrices(surface)
    if graph.incomplete:
        raise IncompleteGraphError("critical graph is incomplete: a separatrix exhausted the budget")
    n = surface.n_rects
    cutset = [{Scalar(0), surface.widths[i]} for i in range(n)]
    for leaf in graph.leaves + graph.regular_leaves:
        if leaf.status != "budget":
            for i, x, _, _ in leaf.pieces:
                cutset[i].add(x)
    cuts = [sorted(c) for c in cutset]
    strips = [(i, k) for i in range(n) for k in range(len(cuts[i]) - 1)]

    def bounds(s):
        i, k = s
        return cuts[i][k], cuts[i][k + 1]

    def exit_map(s, up: bool):
        """Exact successor ``(strip, entering_up)`` through the top or bottom, or None."""
        i, _ = s
        a, b = bounds(s)
        side = "top" if up else "bottom"
        for kk in surface.side_segs[(i, side)]:
            seg = surface.segs[kk]
            if seg.offset <= a and b <= seg.offset + seg.length:
                _, a2 = surface.map_through(kk, a - seg.offset)
                _, b2 = surface.map_through(kk, b - seg.offset)
                lo, hi = min(a2, b2), max(a2, b2)
                other = surface.segs[seg.partner]
                j = other.rect
                k1 = _strip_of(cuts[j], lo, True)
                if k1 is None or cuts[j][k1 + 1] != hi:
                    return None
                return (j, k1), other.side == "bottom"
        return None

    # follow bands
    band_of: Dict[Tuple[int, int], int] = {}
    bands = []  # (strips with direction, height, width)
    for s in strips:
        if s in band_of:
            continue
        path, cur, up, height, ok = [], s, True, Scalar(0), True
        while True:
            path.append((cur, up))
            height = height + surface.heights[cur[0]]
            nxt = exit_map(cur, up)
            if nxt is None:
                ok = False
                break
            cur, up = nxt
            if cur == s:
                if not up:
                    raise AssertionError("leaf returned reversed")
                break
            if len(path) > len(strips):
                ok = False
                break
        if ok:
            a, b = bounds(s)
            for t, _ in path:
                band_of[t] = len(bands)
            bands.append((path, height, b - a))
    periodic = set(band_of)

    # merge bands across boundaries free of singular points
    def line_singular(i, x) -> bool:
        for p in surface.marked_points:
            if p[0] == i and p[1] == x and surface.is_singular(surface.vertex_of[p]):
                return True
        return False

    def neighbour(i, k, left: bool):
        """Strip on the other side of the left/right edge of strip (i, k)."""
        if left and k > 0:
            return (i, k - 1)
        if not left and k < len(cuts[i]) - 2:
            return (i, k + 1)
        side = "left" if left else "right"
        kk = surface.side_segs[(i, side)][0]
        other = surface.segs[surface.segs[kk].partner]
        j = other.rect
        return (j, 0) if other.side == "left" else (j, len(cuts[j]) - 2)

    uf = _UnionFind()
    for b in range(len(bands)):
        uf.find(b)
    for b, (path, _, _) in enumerate(bands):
        for left in (True, False):
            if any(line_singular(t[0], bounds(t)[0 if left == up else 1]) for t, up in path):
                continue
            t0 = path[0][0]
            nb = neighbour(t0[0], t0[1], left)
            if nb in band_of:
                uf.union(b, band_of[nb])
    groups: Dict[int, List[int]] = {}
    for b in range(len(bands)):
        groups.setdefault(uf.find(b), []).append(b)
    components = []
    for members in sorted(groups.values()):
        heights = {bands[b][1] for b in members}
        if len(heights) != 1:
            raise AssertionError("merged bands have different heights")
        circ = Scalar(0)
        cyl_strips = []
        for b in members:
            circ = circ + bands[b][2]
            cyl_strips += [(t[0], *bounds(t)) for t, _ in bands[b][0]]
        components.append(Cylinder(heights.pop(), circ, tuple(sorted(cyl_strips))))

    # minimal components
    rest = [s for s in strips if s not in periodic]
    if rest:
        if not graph.rays:
            raise IncompleteGraphError("non-periodic strips without infinite separatrices")
        components += _minimal_components(surface, graph, cuts, rest)
    return FoliationDecomposition(surface, graph, components)


def _minimal_components(surface, graph, cuts, rest):
    uf = _UnionFind()
    restset = set(rest)
    for s in rest:
        uf.find(s)
    for s in rest:
        i, k = s
        a, b = cuts[i][k], cuts[i][k + 1]
        for side in ("top", "bottom"):
            for kk in surface.side_segs[(i, side)]:
                seg = surface.segs[kk]
                lo, hi = max(a, seg.offset), min(b, seg.offset + seg.length)
                if not lo < hi:
                    continue
                _, p = surface.map_through(kk, lo - seg.offset)
                _, q = surface.map_through(kk, hi - seg.offset)
                lo2, hi2 = min(p, q), max(p, q)
                j = surface.segs[seg.partner].rect
                for k2 in range(len(cuts[j]) - 1):
                    if cuts[j][k2] < hi2 and lo2 < cuts[j][k2 + 1] and (j, k2) in restset:
                        uf.union(s, (j, k2))
    groups: Dict[object, List] = {}
    for s in rest:
        groups.setdefault(uf.find(s), []).append(s)
    out = []
    for members in sorted(groups.values()):
        members.sort()
        area = Scalar(0)
        for i, k in members:
            area = area + (cuts[i][k + 1] - cuts[i][k]) * surface.heights[i]
        tau = _choose_transversal(surface, cuts, members)
        try:
            iet = first_return(surface, tau, graph.budget)
        except FirstReturnError as exc:
            raise IncompleteGraphError(str(exc)) from exc
        cert = certify(iet)
        if cert.status == "keane-violation":
            raise IncompleteGraphError("first return has a connection: a saddle connection was missed")
        out.append(MinimalComponent(area, tuple((i, cuts[i][k], cuts[i][k + 1]) for i, k in members),
                                    tau, iet, cert))
    return out


def _choose_transversal(surface, cuts, members) -> Transversal:
    """Maximal run of component strips on the lowest rectangle's bottom, cut at singular points."""
    i = members[0][0]
    ks = sorted(k for j, k in members if j == i)
    run = [ks[0]]
    for k in ks[1:]:
        if k == run[-1] + 1:
            run.append(k)
        else:
            break
    a, b = cuts[i][run[0]], cuts[i][run[-1] + 1]
    for p in sorted(surface.marked_points):
        if p[0] == i and p[2] == 0 and a < p[1] < b and surface.is_singular(surface.vertex_of[p]):
            b = p[1]
            break
    return Transversal(i, a, b)
