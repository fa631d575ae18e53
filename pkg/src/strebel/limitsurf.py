"""Limit surfaces of a Strebel ray as half-plane surfaces.

Each component of the critical graph, thickened by its ribbon structure,
becomes a half-plane surface: every boundary cycle made of saddle
connections only gets a semi-infinite cylinder, every cycle running along
infinite rays gets half planes (one per ray), giving a pole of order
``2 + rays``.  The topology follows from ``V - E = 2 - 2g - n``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .foliation import CriticalGraph, IncompleteGraphError, is_puncture_vertex
from .numeric import Scalar, as_scalar, parse_scalar
from .surface import TRANSLATION, Surface, SurfaceError, geodesic_flow

__all__ = [
    "RibbonGraph",
    "HalfPlaneModel",
    "build_limit_model",
    "limit_models",
    "dbar_distance",
    "flat_distance",
    "gh_epsilon_check",
    "EpsilonWitness",
    "STENCIL_ETA",
]

HalfEdge = Tuple[int, int]


@dataclass
class RibbonGraph:
    """Metric ribbon graph; half-edge ``(v, k)`` is the ``k``-th in ccw order at ``v``.

    ``iota`` pairs half-edges of finite edges; an infinite edge is a stub
    fixed by ``iota``.  ``lengths`` is keyed by half-edge.
    """

    degrees: Dict[int, int]
    iota: Dict[HalfEdge, HalfEdge]
    lengths: Dict[HalfEdge, Optional[Scalar]]
    marked: Dict[int, bool] = field(default_factory=dict)

    def half_edges(self) -> List[HalfEdge]:
        return [(v, k) for v in sorted(self.degrees) for k in range(self.degrees[v])]

    def sigma(self, h: HalfEdge) -> HalfEdge:
        v, k = h
        return (v, (k + 1) % self.degrees[v])

    @property
    def n_vertices(self) -> int:
        return len(self.degrees)

    @property
    def n_edges(self) -> int:
        return sum(1 for h in self.half_edges() if self.iota[h] != h) // 2

    @property
    def n_rays(self) -> int:
        return sum(1 for h in self.half_edges() if self.iota[h] == h)

    def boundary_cycles(self) -> List[List[HalfEdge]]:
        seen, out = set(), []
        for h in self.half_edges():
            if h in seen:
                continue
            cyc = []
            while h not in seen:
                seen.add(h)
                cyc.append(h)
                h = self.sigma(self.iota[h])
            out.append(cyc)
        return out

    def end_tags(self) -> List[dict]:
        tags = []
        for cyc in self.boundary_cycles():
            rays = sum(1 for h in cyc if self.iota[h] == h)
            if rays == 0:
                total = Scalar(0)
                for h in cyc:
                    total = total + self.lengths[h]
                tags.append({"end": "semiInfiniteCylinder", "length": total, "poleOrder": 2})
            else:
                tags.append({"end": "pole", "halfPlanes": rays, "poleOrder": 2 + rays})
        return tags

    def topology(self) -> Tuple[int, int, int]:
        chi = self.n_vertices - self.n_edges
        n = len(self.boundary_cycles())
        two_g = 2 - chi - n
        if two_g < 0 or two_g % 2:
            raise ValueError("ribbon data does not describe an orientable surface")
        return two_g // 2, n, sum(1 for v in self.degrees if self.marked.get(v))

    def canonical(self) -> str:
        """Isomorphism-invariant encoding of the metric ribbon graph."""
        best = None
        for h0 in self.half_edges():
            label = {h0: 0}
            order = [h0]
            pos = 0
            while pos < len(order):
                h = order[pos]
                pos += 1
                for nb in (self.sigma(h), self.iota[h]):
                    if nb not in label:
                        label[nb] = len(order)
                        order.append(nb)
            if len(order) != len(self.half_edges()):
                raise ValueError("canonical form needs a connected graph")
            code = tuple(
                (label[self.sigma(h)], label[self.iota[h]],
                 "inf" if self.lengths[h] is None else str(self.lengths[h]),
                 bool(self.marked.get(h[0])))
                for h in order
            )
            if best is None or code < best:
                best = code
        return json.dumps(best)

    @classmethod
    def from_json(cls, data: dict) -> "RibbonGraph":
        """Parse ``{"vertices": {v: [edge names in ccw order]}, "edges": {name: length | "inf"}}``."""
        names = list(data["vertices"])
        vid = {name: k for k, name in enumerate(names)}
        degrees, ends = {}, {}
        for name in names:
            seq = data["vertices"][name]
            degrees[vid[name]] = len(seq)
            for k, e in enumerate(seq):
                ends.setdefault(e, []).append((vid[name], k))
        iota, lengths = {}, {}
        for e, hs in ends.items():
            raw = data["edges"][e]
            length = None if raw in ("inf", None) else parse_scalar(raw)
            if len(hs) == 2:
                if length is None:
                    raise ValueError(f"edge {e} joins two vertices but has infinite length")
                iota[hs[0]], iota[hs[1]] = hs[1], hs[0]
            elif len(hs) == 1:
                if length is not None:
                    raise ValueError(f"edge {e} ends at a degree-one vertex but is finite")
                iota[hs[0]] = hs[0]
            else:
                raise ValueError(f"edge {e} has {len(hs)} ends")
            for h in hs:
                lengths[h] = length
        marked = {vid[v]: True for v in data.get("marked", [])}
        return cls(degrees, iota, lengths, marked)


@dataclass
class HalfPlaneModel:
    graph: RibbonGraph
    vertices: Tuple[int, ...]
    genus: int
    n_ends: int
    marked: int
    tags: List[dict]

    @property
    def trivial(self) -> bool:
        return 3 * self.genus - 3 + self.n_ends + self.marked <= 0

    def to_json(self) -> dict:
        tags = []
        for t in self.tags:
            t = dict(t)
            if "length" in t:
                t["length"] = str(t["length"])
            tags.append(t)
        return {"vertices": list(self.vertices), "g": self.genus, "n": self.n_ends,
                "markedPoints": self.marked, "edges": self.graph.n_edges, "rays": self.graph.n_rays,
                "ends": tags, "trivialTeichmullerSpace": self.trivial}


def _component_graph(graph: CriticalGraph, comp: Sequence[int]) -> RibbonGraph:
    iota_all = graph.partner()
    vs = list(comp)
    relabel = {v: k for k, v in enumerate(vs)}
    degrees = {relabel[v]: len(graph.germs[v]) for v in vs}
    iota, lengths = {}, {}
    edge_len = {}
    for e in graph.edges:
        edge_len[e.start] = edge_len[e.end] = e.length
    for v in vs:
        for k in range(len(graph.germs[v])):
            u, j = iota_all[(v, k)]
            iota[(relabel[v], k)] = (relabel[u], j)
            lengths[(relabel[v], k)] = edge_len.get((v, k))
    marked = {relabel[v]: is_puncture_vertex(graph.surface, v) for v in vs}
    return RibbonGraph(degrees, iota, lengths, marked)


def build_limit_model(graph: CriticalGraph, i: int) -> HalfPlaneModel:
    if graph.incomplete:
        raise IncompleteGraphError("critical graph is incomplete")
    comp = graph.components()[i]
    rg = _component_graph(graph, comp)
    g, n, marked = rg.topology()
    return HalfPlaneModel(rg, tuple(comp), g, n, marked, rg.end_tags())


def limit_models(graph: CriticalGraph) -> List[HalfPlaneModel]:
    return [build_limit_model(graph, i) for i in range(len(graph.components()))]


def model_from_ribbon(rg: RibbonGraph) -> HalfPlaneModel:
    g, n, marked = rg.topology()
    return HalfPlaneModel(rg, tuple(sorted(rg.degrees)), g, n, marked, rg.end_tags())


def dbar_distance(ma: Sequence[HalfPlaneModel], mb: Sequence[HalfPlaneModel],
                  pairs: Optional[Sequence[Tuple[int, int]]] = None) -> str:
    """Partial evaluation of the distance between limit surfaces.

    Returns ``exactZero``, ``infinite`` or ``notComputable``.
    """
    if pairs is None:
        if len(ma) != len(mb):
            return "infinite"
        pairs = [(k, k) for k in range(len(ma))]
    if sorted(a for a, _ in pairs) != list(range(len(ma))) or sorted(b for _, b in pairs) != list(range(len(mb))):
        return "infinite"
    verdict = "exactZero"
    for a, b in pairs:
        x, y = ma[a], mb[b]
        if (x.genus, x.n_ends, x.marked) != (y.genus, y.n_ends, y.marked):
            return "infinite"
        if x.trivial and y.trivial:
            continue
        if x.graph.canonical() == y.graph.canonical():
            continue
        verdict = "notComputable"
    return verdict


# ------------------------------------------------------------ flat metric
_STENCIL = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1),
            (1, 2), (2, 1), (-1, 2), (-2, 1), (-1, -2), (-2, -1), (1, -2), (2, -1)]
# worst direction lies halfway between 0 and atan(1/2)
STENCIL_ETA = 1 / math.cos(math.atan(0.5) / 2) - 1


def _units(value: Scalar, h: Fraction, what: str) -> int:
    if not value.is_rational:
        raise SurfaceError(f"{what} is irrational; grid needs rational data")
    q = value.to_fraction() / h
    if q.denominator != 1:
        raise SurfaceError(f"{what} = {value} is not a multiple of the grid step {h}")
    return int(q)


class GridSurface:
    """16-direction grid graph on a rectangle complex with step ``h``.

    Grid nodes on glued sides are identified; a stencil step that leaves
    a rectangle is continued through the gluing (with a half turn if
    needed) unless it passes through a marked point or a second side.
    ``keep(i, a)`` restricts the columns (in grid units) that are built.
    """

    def __init__(self, surface: Surface, h, keep=None):
        self.surface = surface
        h = as_scalar(h)
        if not h.is_rational or h <= 0:
            raise SurfaceError("grid step must be a positive rational")
        self.h = h.to_fraction()
        self.hf = float(self.h)
        for i in range(len(surface.rect_ids)):
            if min(surface.widths[i], surface.heights[i]) < h:
                raise SurfaceError("grid step larger than a rectangle dimension")
        self.A = [_units(w, self.h, "width") for w in surface.widths]
        self.B = [_units(v, self.h, "height") for v in surface.heights]
        self.segs = [(s.rect, s.side, _units(s.offset, self.h, "offset"), _units(s.length, self.h, "length"),
                      s.partner, s.orientation) for s in surface.segs]
        offset = 0
        self.raw_id = []
        for i in range(len(surface.rect_ids)):
            cols = np.array([keep is None or keep(i, a) for a in range(self.A[i] + 1)])
            ids = -np.ones((self.A[i] + 1, self.B[i] + 1), dtype=np.int64)
            n = int(cols.sum()) * (self.B[i] + 1)
            ids[cols, :] = np.arange(offset, offset + n).reshape(int(cols.sum()), self.B[i] + 1)
            offset += n
            self.raw_id.append(ids)
        parent = np.arange(offset)

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        for k, (i, side, o, L, pk, orient) in enumerate(self.segs):
            if pk < k:
                continue
            for t in range(L + 1):
                p = self._side_node(i, side, o + t)
                j, side2, o2, L2, _, _ = self.segs[pk]
                q = self._side_node(j, side2, o2 + (t if orient == TRANSLATION else L - t))
                a, b = self.raw_id[i][p], self.raw_id[j][q]
                if a >= 0 and b >= 0:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        roots = np.array([find(x) for x in range(offset)], dtype=np.int64)
        uniq, self.node_of_raw = np.unique(roots, return_inverse=True)
        self.n = len(uniq)
        self.graph = self._build_edges()

    def _side_node(self, i, side, t):
        if side == "bottom":
            return (t, 0)
        if side == "top":
            return (t, self.B[i])
        if side == "left":
            return (0, t)
        return (self.A[i], t)

    def node(self, i: int, a: int, b: int) -> int:
        r = self.raw_id[i][a, b]
        if r < 0:
            raise KeyError((i, a, b))
        return int(self.node_of_raw[r])

    def _build_edges(self):
        rows, cols, wts = [], [], []
        for i in range(len(self.surface.rect_ids)):
            ids = self.raw_id[i]
            A, B = self.A[i], self.B[i]
            for dx, dy in _STENCIL:
                if (dx, dy) < (0, 0):
                    continue  # undirected graph: one orientation per pair
                xs = slice(max(0, -dx), min(A + 1, A + 1 - dx))
                ys = slice(max(0, -dy), min(B + 1, B + 1 - dy))
                src = ids[xs, ys]
                dst = ids[max(0, dx):max(0, dx) + src.shape[0], max(0, dy):max(0, dy) + src.shape[1]]
                ok = (src >= 0) & (dst >= 0)
                rows.append(self.node_of_raw[src[ok]])
                cols.append(self.node_of_raw[dst[ok]])
                wts.append(np.full(int(ok.sum()), self.hf * math.hypot(dx, dy)))
            self._cross_edges(i, rows, cols, wts)
        r, c, w = np.concatenate(rows), np.concatenate(cols), np.concatenate(wts)
        keep = r != c
        lo, hi, w = np.minimum(r, c)[keep], np.maximum(r, c)[keep], w[keep]
        # duplicates (a side seen from both rectangles) must not be summed
        key = lo * self.n + hi
        order = np.lexsort((w, key))
        first = np.ones(len(order), dtype=bool)
        first[1:] = key[order][1:] != key[order][:-1]
        sel = order[first]
        return csr_matrix((w[sel], (lo[sel], hi[sel])), shape=(self.n, self.n))

    def _cross_edges(self, i, rows, cols, wts):
        A, B = self.A[i], self.B[i]
        ids = self.raw_id[i]
        r_out, c_out, w_out = [], [], []
        near = [(a, b) for a in range(A + 1) for b in range(B + 1)
                if (a < 2 or a > A - 2 or b < 2 or b > B - 2) and ids[a, b] >= 0]
        for a, b in near:
            for dx, dy in _STENCIL:
                tx = self._exit(a, dx, A)
                ty = self._exit(b, dy, B)
                t = min(tx, ty)
                if t >= 1 or t == 0:
                    continue
                if tx == ty:
                    continue  # through a corner
                if tx < ty:
                    side = "right" if dx > 0 else "left"
                    along = b + t * dy
                else:
                    side = "top" if dy > 0 else "bottom"
                    along = a + t * dx
                hit = None
                for k, (ri, sd, o, L, pk, orient) in enumerate(self.segs):
                    if ri == i and sd == side and o < along < o + L:
                        hit = k
                        break
                if hit is None:
                    continue  # through a marked point
                _, _, o, L, pk, orient = self.segs[hit]
                j, side2, o2, L2, _, _ = self.segs[pk]
                u = along - o
                u2 = o2 + (u if orient == TRANSLATION else L - u)
                sx, sy = (dx, dy) if orient == TRANSLATION else (-dx, -dy)
                if side2 in ("left", "right"):
                    px, py = (0 if side2 == "left" else self.A[j]), u2
                else:
                    px, py = u2, (0 if side2 == "bottom" else self.B[j])
                qx, qy = px + (1 - t) * sx, py + (1 - t) * sy
                qx, qy = Fraction(qx), Fraction(qy)
                if qx.denominator != 1 or qy.denominator != 1:
                    continue
                qx, qy = int(qx), int(qy)
                if not (0 <= qx <= self.A[j] and 0 <= qy <= self.B[j]):
                    continue
                tgt = self.raw_id[j][qx, qy]
                if tgt < 0:
                    continue
                r_out.append(self.node_of_raw[ids[a, b]])
                c_out.append(self.node_of_raw[tgt])
                w_out.append(self.hf * math.hypot(dx, dy))
        rows.append(np.array(r_out, dtype=np.int64))
        cols.append(np.array(c_out, dtype=np.int64))
        wts.append(np.array(w_out, dtype=float))

    @staticmethod
    def _exit(a, d, A):
        if d > 0:
            return Fraction(A - a, d)
        if d < 0:
            return Fraction(a, -d)
        return Fraction(10 ** 9)

    def distances(self, sources, limit=np.inf) -> np.ndarray:
        return dijkstra(self.graph, directed=False, indices=sources, limit=limit)


def _nearest_node(grid: GridSurface, point) -> Tuple[int, float]:
    i, x, y = point
    i = grid.surface.index[i] if isinstance(i, str) else i
    fx, fy = float(as_scalar(x)) / grid.hf, float(as_scalar(y)) / grid.hf
    a, b = min(max(round(fx), 0), grid.A[i]), min(max(round(fy), 0), grid.B[i])
    snap = math.hypot(a - fx, b - fy) * grid.hf
    return grid.node(i, a, b), snap


def flat_distance(surface: Surface, p, q, h) -> dict:
    """Grid approximation of the flat distance between ``p`` and ``q`` given as ``(rect, x, y)``."""
    grid = GridSurface(surface, h)
    a, sa = _nearest_node(grid, p)
    b, sb = _nearest_node(grid, q)
    v = float(grid.distances([a])[0, b])
    return {"value": v, "eta": STENCIL_ETA, "snap": sa + sb, "h": str(as_scalar(h)),
            "lower": v / (1 + STENCIL_ETA) - (sa + sb), "upper": v + sa + sb}


# ------------------------------------------------- Gromov-Hausdorff check
@dataclass
class EpsilonWitness:
    """Sampled correspondence between two pointed balls and its distortion bound."""

    lam: Scalar
    radius: Scalar
    h: Scalar
    model_lambda: Scalar
    samples: int
    max_deviation: float
    grid_error: float
    epsilon: float

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "r": str(self.radius), "h": str(self.h),
                "modelLambda": str(self.model_lambda), "samples": self.samples,
                "maxDeviation": self.max_deviation, "gridError": self.grid_error,
                "epsilon": self.epsilon}


def _aligned_cylinders(surface: Surface) -> Dict[int, Scalar]:
    """Map each rectangle to its cylinder circumference; each rectangle must span its cylinder."""
    from .foliation import decompose_vertical

    dec = decompose_vertical(surface)
    if dec.minimal:
        raise SurfaceError("GH check needs a completely periodic vertical foliation")
    circ = {}
    for cyl in dec.cylinders:
        for i, x0, x1 in cyl.strips:
            if x0 != 0 or x1 != surface.widths[i] or surface.widths[i] != cyl.circumference:
                raise SurfaceError("GH check needs a cylinder-aligned presentation "
                                   "(every rectangle spans the width of its cylinder)")
            circ[i] = cyl.circumference
    return circ


def _ball(grid: GridSurface, base: int, radius: float, stride: int):
    d0 = grid.distances([base])[0]
    nodes = []
    for i, ids in enumerate(grid.raw_id):
        for a in range(0, ids.shape[0], stride):
            for b in range(0, ids.shape[1], stride):
                if ids[a, b] >= 0:
                    nd = int(grid.node_of_raw[ids[a, b]])
                    if d0[nd] <= radius:
                        nodes.append((i, a, b, nd))
    seen, out = set(), []
    for item in nodes:
        if item[3] not in seen:
            seen.add(item[3])
            out.append(item)
    return out


def gh_epsilon_check(surface: Surface, lam, r, h, base=None, stride: int = 2) -> EpsilonWitness:
    """Bound the pointed GH distance between the ``r``-ball of ``X_lam`` and its limit.

    The limit ball is realized inside the surface flowed to a power of two
    ``lam'`` large enough that no short path wraps around a cylinder; the
    ball of ``X_lam`` is embedded by keeping each rectangle's left half at
    the left wall and its right half at the right wall.  ``base`` is
    ``(rect, x, y)`` on the critical graph, by default the first singular
    point.
    """
    lam, r, h = as_scalar(lam), as_scalar(r), as_scalar(h)
    circ = _aligned_cylinders(surface)
    rf = float(r)
    if any(lam * c < 4 * r for c in circ.values()):
        raise SurfaceError(f"ball of radius {r} does not embed at lambda = {lam}; need lambda * c >= 4r")
    need = max(float(lam), 8 * rf / float(min(circ.values())))
    lam2 = Scalar(1)
    while float(lam2) < need:
        lam2 = lam2 * 2
    if base is None:
        sing = surface.singularities
        base = sing[0].points[0] if sing else (0, Scalar(0), Scalar(0))
    bi, bx, by = base
    bi = surface.index[bi] if isinstance(bi, str) else bi
    if as_scalar(bx) not in (Scalar(0), surface.widths[bi]):
        raise SurfaceError("base point must lie on a vertical side (the critical graph)")

    reach = 2 * rf * (1 + STENCIL_ETA) + 4 * float(h)
    hf = float(h)

    def cropper(s):
        def keep(i, a):
            x, w = a * hf, float(s.widths[i])
            return x <= reach or w - x <= reach
        return keep

    xa = geodesic_flow(surface, lam)
    xb = geodesic_flow(surface, lam2)
    ga, gb = GridSurface(xa, h, cropper(xa)), GridSurface(xb, h, cropper(xb))
    ua = int(round(float(as_scalar(bx)) * float(lam) / hf))
    ub = ua if ua == 0 else gb.A[bi]
    base_a, base_b = ga.node(bi, ua, _grid_y(by, hf)), gb.node(bi, ub, _grid_y(by, hf))

    def embed(i, a, b):
        A, A2 = ga.A[i], gb.A[i]
        return gb.node(i, a if 2 * a <= A else A2 - (A - a), b)

    ball_a = _ball(ga, base_a, rf, stride)
    ball_b = _ball(gb, base_b, rf, stride)
    src_a = [t[3] for t in ball_a]
    img = [embed(i, a, b) for i, a, b, _ in ball_a]
    img_set = set(img)
    extra = [t[3] for t in ball_b if t[3] not in img_set]
    src_b = list(dict.fromkeys(img + extra))
    da = ga.distances(src_a, limit=reach)[:, src_a]
    db_full = gb.distances(src_b, limit=reach)
    col = {v: k for k, v in enumerate(src_b)}
    db = db_full[:, src_b]
    # pairs: (p, embed(p)) and, for model points outside the image, (nearest preimage, q)
    pa = list(range(len(src_a)))
    pb = [col[v] for v in img]
    for q in extra:
        k = int(np.argmin(db[col[q], [col[v] for v in img]]))
        pa.append(k)
        pb.append(col[q])
    pa, pb = np.array(pa), np.array(pb)
    dev_a = da[np.ix_(pa, pa)]
    dev_b = db[np.ix_(pb, pb)]
    finite = np.isfinite(dev_a) & np.isfinite(dev_b)
    dev = float(np.max(np.abs(dev_a - dev_b)[finite])) if finite.any() else 0.0
    if not finite.all():
        dev = max(dev, 2 * rf)  # pair out of reach on one side only
    grid_error = STENCIL_ETA * 2 * rf + hf
    return EpsilonWitness(lam, r, h, lam2, len(pa), dev, grid_error, dev + 2 * grid_error)


def _grid_y(y, hf: float) -> int:
    return int(round(float(as_scalar(y)) / hf))
