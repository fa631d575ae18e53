"""Half-translation surfaces presented as glued axis-parallel rectangles.

On each rectangle the quadratic differential is ``dz**2``, so the vertical
foliation is ``x = const``.  Sides are glued segment-by-segment either by a
translation (bottom<->top, left<->right) or by a half turn ``z -> -z + c``
(bottom<->bottom, top<->top, left<->left, right<->right).

Angles around vertices are counted in quarter turns (units of pi/2).  A
rectangle corner contributes one quarter turn, a subdivision point in the
interior of a side contributes two.  A vertex of total angle ``k*pi`` has
``k`` vertical germs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .numeric import FieldMismatchError, Scalar, as_scalar, parse_scalar

__all__ = [
    "SurfaceError",
    "Rectangle",
    "Segment",
    "SegmentGluing",
    "RectangleComplex",
    "Singularity",
    "Surface",
    "validate",
    "geodesic_flow",
    "area",
    "load_surface",
    "SIDES",
]

SIDES = ("bottom", "right", "top", "left")
TRANSLATION = "translation"
HALF_TURN = "halfTurn"

_TRANSLATION_PARTNER = {"bottom": "top", "top": "bottom", "left": "right", "right": "left"}

# sector [start, end) in quarter turns for every kind of boundary point
_SECTOR = {
    "bl": (0, 1), "br": (1, 2), "tr": (2, 3), "tl": (3, 4),
    "bottom": (0, 2), "right": (1, 3), "top": (2, 4), "left": (3, 5),
}
# side carrying the ccw end ray of each sector, and whether the adjacent
# segment starts (True) or ends (False) at the point
_END_RAY = {
    "bl": ("left", True), "br": ("bottom", False), "tr": ("right", False), "tl": ("top", True),
    "bottom": ("bottom", False), "right": ("right", False), "top": ("top", True), "left": ("left", True),
}


class SurfaceError(ValueError):
    """Invalid surface data (domain error)."""


@dataclass(frozen=True)
class Rectangle:
    id: str
    width: Scalar
    height: Scalar


@dataclass(frozen=True)
class Segment:
    rect: str
    side: str
    offset: Scalar
    length: Scalar


@dataclass(frozen=True)
class SegmentGluing:
    src: Segment
    dst: Segment
    orientation: str = TRANSLATION


@dataclass(frozen=True)
class RectangleComplex:
    """Unvalidated input data."""

    rectangles: Tuple[Rectangle, ...]
    gluings: Tuple[SegmentGluing, ...]
    punctures: Tuple[Tuple[str, Scalar, Scalar], ...] = ()
    field_d: int = 1

    @classmethod
    def from_json(cls, data: dict) -> "RectangleComplex":
        try:
            rects = tuple(
                Rectangle(str(r["id"]), parse_scalar(r["width"]), parse_scalar(r["height"]))
                for r in data["rectangles"]
            )

            def seg(s):
                return Segment(str(s["rect"]), s["side"], parse_scalar(s["offset"]), parse_scalar(s["length"]))

            gluings = tuple(
                SegmentGluing(seg(g["from"]), seg(g["to"]), g.get("orientation", TRANSLATION))
                for g in data["gluings"]
            )
            punct = tuple(
                (str(p["rect"]), parse_scalar(p["x"]), parse_scalar(p["y"])) for p in data.get("punctures", [])
            )
        except (KeyError, TypeError) as exc:
            raise SurfaceError(f"malformed surface file: {exc}") from exc
        return cls(rects, gluings, punct, int(data.get("field_d", 1)))


@dataclass(frozen=True)
class Singularity:
    id: int
    cone_angle: int  # k, the angle is k*pi
    is_puncture: bool
    points: Tuple[Tuple[int, Scalar, Scalar], ...]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass
class _Seg:
    idx: int
    rect: int
    side: str
    offset: Scalar
    length: Scalar
    partner: int = -1
    orientation: str = TRANSLATION


class Surface:
    """A validated rectangle complex with its vertex data.

    Instances are treated as immutable; :func:`geodesic_flow` and
    :meth:`rotate` return new surfaces.
    """

    def __init__(self, complex_: RectangleComplex):
        self.complex = complex_
        self.rect_ids: List[str] = [r.id for r in complex_.rectangles]
        self.index: Dict[str, int] = {}
        for i, r in enumerate(complex_.rectangles):
            if r.id in self.index:
                raise SurfaceError(f"duplicate rectangle id {r.id!r}")
            self.index[r.id] = i
        self.widths = [r.width for r in complex_.rectangles]
        self.heights = [r.height for r in complex_.rectangles]
        self._check_field()
        self.segs: List[_Seg] = []
        self.side_segs: Dict[Tuple[int, str], List[int]] = {}
        self._build_segments()
        self._build_vertices()

    # ------------------------------------------------------------------ build
    def _check_field(self):
        d = self.complex.field_d
        values = [*self.widths, *self.heights]
        for g in self.complex.gluings:
            values += [g.src.offset, g.src.length, g.dst.offset, g.dst.length]
        for p in self.complex.punctures:
            values += [p[1], p[2]]
        for v in values:
            if v.d != 1 and d != 1 and v.d != d:
                raise FieldMismatchError(f"value {v} outside Q(sqrt({d}))")
            if v.d != 1 and d == 1:
                d = v.d
        self.field_d = d
        if not self.rect_ids:
            raise SurfaceError("surface has no rectangles")
        for i in range(len(self.rect_ids)):
            if self.widths[i] <= 0 or self.heights[i] <= 0:
                raise SurfaceError(f"rectangle {self.rect_ids[i]!r} has non-positive dimensions")

    def side_extent(self, i: int, side: str) -> Scalar:
        return self.widths[i] if side in ("bottom", "top") else self.heights[i]

    def side_point(self, i: int, side: str, t: Scalar) -> Tuple[Scalar, Scalar]:
        """Coordinates of the point at parameter ``t`` along ``side``."""
        zero = Scalar(0)
        if side == "bottom":
            return (t, zero)
        if side == "top":
            return (t, self.heights[i])
        if side == "left":
            return (zero, t)
        return (self.widths[i], t)

    def _build_segments(self):
        uf = _UnionFind()
        for g in self.complex.gluings:
            ends = []
            for s in (g.src, g.dst):
                if s.rect not in self.index:
                    raise SurfaceError(f"gluing references unknown rectangle {s.rect!r}")
                if s.side not in SIDES:
                    raise SurfaceError(f"unknown side {s.side!r}")
                i = self.index[s.rect]
                if s.length <= 0 or s.offset < 0 or s.offset + s.length > self.side_extent(i, s.side):
                    raise SurfaceError(f"segment {s} does not fit its side")
                seg = _Seg(len(self.segs), i, s.side, s.offset, s.length, orientation=g.orientation)
                self.segs.append(seg)
                ends.append(seg)
            a, b = ends
            if a.length != b.length:
                raise SurfaceError(f"glued segments have different lengths: {g.src} / {g.dst}")
            horiz = {"bottom", "top"}
            if (a.side in horiz) != (b.side in horiz):
                raise SurfaceError(f"gluing mixes horizontal and vertical sides: {g.src.side}/{g.dst.side}")
            if g.orientation == TRANSLATION:
                ok = _TRANSLATION_PARTNER[a.side] == b.side
            elif g.orientation == HALF_TURN:
                ok = a.side == b.side
            else:
                raise SurfaceError(f"unknown gluing orientation {g.orientation!r}")
            if not ok:
                raise SurfaceError(f"{g.orientation} gluing cannot join {a.side} to {b.side}")
            a.partner, b.partner = b.idx, a.idx
            uf.union(a.rect, b.rect)
        for seg in self.segs:
            self.side_segs.setdefault((seg.rect, seg.side), []).append(seg.idx)
        for i in range(len(self.rect_ids)):
            for side in SIDES:
                idxs = sorted(self.side_segs.get((i, side), []), key=lambda k: self.segs[k].offset)
                self.side_segs[(i, side)] = idxs
                pos = Scalar(0)
                for k in idxs:
                    if self.segs[k].offset != pos:
                        raise SurfaceError(
                            f"side {side} of {self.rect_ids[i]!r} is not tiled by its segments at {pos}")
                    pos = pos + self.segs[k].length
                if pos != self.side_extent(i, side):
                    raise SurfaceError(f"side {side} of {self.rect_ids[i]!r} is not fully glued")
        roots = {uf.find(i) for i in range(len(self.rect_ids))}
        if len(roots) > 1:
            raise SurfaceError("surface is disconnected")

    def map_through(self, k: int, t: Scalar) -> Tuple[int, Scalar]:
        """Map parameter ``t`` (relative to segment ``k``'s offset) to the partner segment."""
        seg = self.segs[k]
        other = self.segs[seg.partner]
        tt = t if seg.orientation == TRANSLATION else seg.length - t
        return other.idx, other.offset + tt

    def segment_at(self, i: int, side: str, p: Scalar, *, starting: Optional[bool] = None) -> int:
        """Segment of ``side`` containing ``p``; with ``starting`` pick the one starting/ending at ``p``."""
        for k in self.side_segs[(i, side)]:
            s = self.segs[k]
            lo, hi = s.offset, s.offset + s.length
            if starting is True and lo == p:
                return k
            if starting is False and hi == p:
                return k
            if starting is None and lo < p < hi:
                return k
        raise KeyError((i, side, p, starting))

    def _point_kind(self, i: int, x: Scalar, y: Scalar) -> str:
        w, h = self.widths[i], self.heights[i]
        if y == 0:
            return "bl" if x == 0 else "br" if x == w else "bottom"
        if y == h:
            return "tl" if x == 0 else "tr" if x == w else "top"
        if x == 0:
            return "left"
        if x == w:
            return "right"
        raise ValueError("point is not on the rectangle boundary")

    def _build_vertices(self):
        pts = set()
        for i in range(len(self.rect_ids)):
            w, h = self.widths[i], self.heights[i]
            for c in ((Scalar(0), Scalar(0)), (w, Scalar(0)), (w, h), (Scalar(0), h)):
                pts.add((i, *c))
        for seg in self.segs:
            for t in (seg.offset, seg.offset + seg.length):
                pts.add((seg.rect, *self.side_point(seg.rect, seg.side, t)))
        uf = _UnionFind()
        for p in pts:
            uf.find(p)
        for seg in self.segs:
            if seg.idx > seg.partner:
                continue
            for t in (Scalar(0), seg.length):
                k2, t2 = self.map_through(seg.idx, t)
                o = self.segs[k2]
                uf.union((seg.rect, *self.side_point(seg.rect, seg.side, seg.offset + t)),
                         (o.rect, *self.side_point(o.rect, o.side, t2)))
        classes: Dict[object, List[tuple]] = {}
        for p in sorted(pts, key=lambda p: (p[0], p[1], p[2])):
            classes.setdefault(uf.find(p), []).append(p)
        self.marked_points = pts
        self.vertex_of: Dict[tuple, int] = {}
        self.vertex_quarters: List[int] = []
        self.vertex_points: List[Tuple[tuple, ...]] = []
        ordered = sorted(classes.values(), key=lambda ps: (ps[0][0], ps[0][2], ps[0][1]))
        for v, members in enumerate(ordered):
            q = 0
            for p in members:
                self.vertex_of[p] = v
                q += 1 if self._point_kind(*p) in ("bl", "br", "tr", "tl") else 2
            if q % 2:
                raise SurfaceError(f"vertex with odd quarter-angle sum at {members[0]}")
            self.vertex_quarters.append(q)
            self.vertex_points.append(tuple(members))
        self.puncture_vertices = set()
        for rid, x, y in self.complex.punctures:
            if rid not in self.index:
                raise SurfaceError(f"puncture on unknown rectangle {rid!r}")
            p = (self.index[rid], x, y)
            if p not in self.vertex_of:
                raise SurfaceError(f"puncture {rid}:{x},{y} is not a corner or side subdivision point")
            self.puncture_vertices.add(self.vertex_of[p])
        self.cone_angles = [q // 2 for q in self.vertex_quarters]

    # ------------------------------------------------------------- queries
    @property
    def n_rects(self) -> int:
        return len(self.rect_ids)

    def is_singular(self, v: int) -> bool:
        return self.cone_angles[v] != 2 or v in self.puncture_vertices

    @property
    def singularities(self) -> List[Singularity]:
        return [
            Singularity(v, self.cone_angles[v], v in self.puncture_vertices, self.vertex_points[v])
            for v in range(len(self.cone_angles))
            if self.is_singular(v)
        ]

    def euler_characteristic(self) -> int:
        """``V - E + F`` of the closed-up surface from the cell structure."""
        return len(self.vertex_points) - len(self.segs) // 2 + self.n_rects

    def genus(self) -> int:
        return (2 - self.euler_characteristic()) // 2

    def area(self) -> Scalar:
        total = Scalar(0)
        for w, h in zip(self.widths, self.heights):
            total = total + w * h
        return total

    def is_rational(self) -> bool:
        return self.field_d == 1 or all(
            v.is_rational for v in [*self.widths, *self.heights] + [s.offset for s in self.segs]
        )

    # ------------------------------------------------------ angular structure
    def sector(self, i: int, x: Scalar, y: Scalar) -> Tuple[int, int]:
        return _SECTOR[self._point_kind(i, x, y)]

    def cross_end(self, i: int, x: Scalar, y: Scalar) -> Tuple[int, Scalar, Scalar, int]:
        """Cross the ccw end ray of the sector at ``(i, x, y)``.

        Returns the next sector ``(j, x', y')`` and the angle of the crossed
        ray in the frame of rectangle ``j``.
        """
        kind = self._point_kind(i, x, y)
        start, end = _SECTOR[kind]
        side, starts_here = _END_RAY[kind]
        p = x if side in ("bottom", "top") else y
        k = self.segment_at(i, side, p, starting=starts_here)
        seg = self.segs[k]
        t = p - seg.offset
        k2, p2 = self.map_through(k, t)
        other = self.segs[k2]
        x2, y2 = self.side_point(other.rect, other.side, p2)
        rot = 0 if seg.orientation == TRANSLATION else 2
        angle = (end + rot) % 4
        s2, _ = self.sector(other.rect, x2, y2)
        if s2 % 4 != angle:
            raise AssertionError("inconsistent angular structure")
        return other.rect, x2, y2, s2

    def normalize_ray(self, i: int, x: Scalar, y: Scalar, a: int) -> Tuple[int, Scalar, Scalar, int]:
        """Express the ray of angle ``a`` at ``(i, x, y)`` in the sector that owns it."""
        start, end = self.sector(i, x, y)
        a = start + ((a - start) % 4)
        guard = 0
        while a >= end:
            i, x, y, a_new = self.cross_end(i, x, y)
            start, end = self.sector(i, x, y)
            a = a_new
            guard += 1
            if guard > 4 * len(self.marked_points) + 8:
                raise AssertionError("ray normalisation did not terminate")
        return i, x, y, a

    def turn(self, i: int, x: Scalar, y: Scalar, a: int, delta: int) -> Tuple[int, Scalar, Scalar, int]:
        """Rotate the ray ``a`` at a marked point counter-clockwise by ``delta`` quarter turns."""
        i, x, y, a = self.normalize_ray(i, x, y, a)
        while True:
            start, end = self.sector(i, x, y)
            if a + delta < end:
                return i, x, y, a + delta
            delta -= end - a
            i, x, y, a = self.cross_end(i, x, y)

    def vertex_sectors(self, v: int) -> List[Tuple[int, Scalar, Scalar]]:
        """Sectors around vertex ``v`` in counter-clockwise order."""
        i, x, y = self.vertex_points[v][0]
        out = [(i, x, y)]
        while True:
            i, x, y, _ = self.cross_end(i, x, y)
            if (i, x, y) == out[0]:
                return out
            out.append((i, x, y))
            if len(out) > len(self.vertex_points[v]) + 1:
                raise AssertionError("sector walk did not close")

    def vertical_germs(self, v: int) -> List[Tuple[int, Scalar, Scalar, int]]:
        """Vertical germs at ``v`` in ccw order as ``(rect, x, y, angle)``; angle 1 is up, 3 down."""
        germs = []
        for i, x, y in self.vertex_sectors(v):
            start, end = self.sector(i, x, y)
            for a in range(start, end):
                if a % 2 == 1:
                    germs.append((i, x, y, a))
        return germs

    # ---------------------------------------------------------- transforms
    def flow(self, lam) -> "Surface":
        return geodesic_flow(self, lam)

    def rotate(self) -> "Surface":
        """Rotate every rectangle by +90 degrees; the horizontal foliation becomes vertical."""
        c = self.complex
        rects = tuple(Rectangle(r.id, r.height, r.width) for r in c.rectangles)
        hmap = {r.id: r.height for r in c.rectangles}

        def rot_seg(s: Segment) -> Segment:
            h = hmap[s.rect]
            if s.side == "bottom":
                return Segment(s.rect, "right", s.offset, s.length)
            if s.side == "top":
                return Segment(s.rect, "left", s.offset, s.length)
            if s.side == "right":
                return Segment(s.rect, "top", h - s.offset - s.length, s.length)
            return Segment(s.rect, "bottom", h - s.offset - s.length, s.length)

        gl = tuple(SegmentGluing(rot_seg(g.src), rot_seg(g.dst), g.orientation) for g in c.gluings)
        # (x, y) -> (h - y, x)
        punct = tuple((rid, hmap[rid] - y, x) for rid, x, y in c.punctures)
        return Surface(RectangleComplex(rects, gl, punct, self.field_d))

    # ------------------------------------------------------------------ io
    def to_json(self) -> dict:
        c = self.complex
        order = {s: n for n, s in enumerate(SIDES)}

        def key(s: Segment):
            return (self.index[s.rect], order[s.side], s.offset)

        def seg_json(s: Segment):
            return {"rect": s.rect, "side": s.side, "offset": str(s.offset), "length": str(s.length)}

        gl = []
        for g in c.gluings:
            a, b = (g.src, g.dst) if key(g.src) <= key(g.dst) else (g.dst, g.src)
            gl.append((key(a), {"from": seg_json(a), "to": seg_json(b), "orientation": g.orientation}))
        gl.sort(key=lambda t: t[0])
        punct = sorted(c.punctures, key=lambda p: (self.index[p[0]], p[2], p[1]))
        return {
            "field_d": self.field_d,
            "rectangles": [
                {"id": r.id, "width": str(r.width), "height": str(r.height)} for r in c.rectangles
            ],
            "gluings": [g for _, g in gl],
            "punctures": [{"rect": r, "x": str(x), "y": str(y)} for r, x, y in punct],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def __eq__(self, other):
        return isinstance(other, Surface) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __repr__(self):
        return f"Surface({self.n_rects} rectangles, d={self.field_d}, area={self.area()})"


def validate(complex_: RectangleComplex) -> Surface:
    return Surface(complex_)


def load_surface(source) -> Surface:
    """Load a surface from a path, a JSON string, or an already parsed dict."""
    if isinstance(source, Surface):
        return source
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            with open(text) as fh:
                data = json.load(fh)
    return validate(RectangleComplex.from_json(data))


def geodesic_flow(surface: Surface, lam) -> Surface:
    """Apply ``z -> lam*x + i*y`` with ``lam = e^{2t}`` given exactly."""
    lam = as_scalar(lam)
    if lam <= 0:
        raise SurfaceError("flow parameter lambda must be positive")
    c = surface.complex
    rects = tuple(Rectangle(r.id, r.width * lam, r.height) for r in c.rectangles)

    def scale(s: Segment) -> Segment:
        if s.side in ("bottom", "top"):
            return Segment(s.rect, s.side, s.offset * lam, s.length * lam)
        return s

    gl = tuple(SegmentGluing(scale(g.src), scale(g.dst), g.orientation) for g in c.gluings)
    punct = tuple((r, x * lam, y) for r, x, y in c.punctures)
    return Surface(RectangleComplex(rects, gl, punct, surface.field_d))


def area(surface: Surface) -> Scalar:
    return surface.area()


def origami(right: List[int], up: List[int], *, punctures: Iterable[int] = ()) -> Surface:
    """Square-tiled surface from permutations: square ``k`` has ``right[k]`` to its right, ``up[k]`` above.

    ``punctures`` lists squares whose bottom-left corner is marked.
    """
    n = len(right)
    if sorted(right) != list(range(n)) or sorted(up) != list(range(n)):
        raise SurfaceError("origami data must be two permutations")
    one, zero = Scalar(1), Scalar(0)
    rects = tuple(Rectangle(f"s{k}", one, one) for k in range(n))
    gl = []
    for k in range(n):
        gl.append(SegmentGluing(Segment(f"s{k}", "right", zero, one), Segment(f"s{right[k]}", "left", zero, one)))
        gl.append(SegmentGluing(Segment(f"s{k}", "top", zero, one), Segment(f"s{up[k]}", "bottom", zero, one)))
    punct = tuple((f"s{k}", zero, zero) for k in punctures)
    return validate(RectangleComplex(rects, tuple(gl), punct, 1))
