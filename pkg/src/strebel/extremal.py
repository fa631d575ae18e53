"""Extremal length bounds and explicit quasiconformal maps.

Extremal length is bracketed, never solved for.  Lower bounds come from
admissible metrics (``L_rho**2 / A_rho``), upper bounds from embedded
annuli: ``Ext(F) <= 1/Mod(A) <= A_rho / L_rho(arcs)**2`` for any metric
``rho`` on an annulus ``A`` around ``F``, where the arcs join the two
boundary components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .foliation import FoliationDecomposition, decompose_vertical
from .numeric import LogRatio, Scalar, as_scalar
from .surface import TRANSLATION, Surface, geodesic_flow

__all__ = [
    "ExtremalError",
    "Curve",
    "ExtBounds",
    "ext_bounds",
    "kerckhoff_check",
    "walsh_limit_check",
    "AffineMapSpec",
    "affine_glue_map",
    "annulus_power_map",
    "qc_distortion_check",
    "kappa",
]


class ExtremalError(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    """Supported curve classes.

    ``torus``: primitive class ``(p, q)`` on a one-rectangle torus.
    ``vertical-core`` / ``horizontal-core``: core of the ``cylinder``-th
    cylinder of the vertical (resp. horizontal) foliation.
    """

    kind: str
    p: int = 0
    q: int = 0
    cylinder: int = 0

    @classmethod
    def parse(cls, text: str) -> "Curve":
        kind, _, arg = text.partition(":")
        if kind == "torus":
            p, q = (int(v) for v in arg.split(","))
            return cls("torus", p=p, q=q)
        if kind in ("vertical-core", "horizontal-core"):
            return cls(kind, cylinder=int(arg or 0))
        if kind == "horizontal":
            return cls("torus", 1, 0)
        if kind == "vertical":
            return cls("torus", 0, 1)
        raise ExtremalError(f"unsupported curve class {text!r}")


@dataclass(frozen=True)
class ExtBounds:
    lower: Scalar
    upper: Scalar

    def to_json(self) -> dict:
        return {"lower": str(self.lower), "upper": str(self.upper),
                "decimal": [f"{float(self.lower):.12f}", f"{float(self.upper):.12f}"]}


def _torus_dims(surface: Surface) -> Tuple[Scalar, Scalar]:
    if surface.n_rects != 1:
        raise ExtremalError("torus curves need a one-rectangle torus")
    segs = surface.segs
    plain = all(s.orientation == TRANSLATION and s.offset == 0 and
                s.length == surface.side_extent(0, s.side) for s in segs)
    if not plain or len(segs) != 4:
        raise ExtremalError("torus curves need plain opposite-side gluings")
    return surface.widths[0], surface.heights[0]


def _cylinder(surface: Surface, curve: Curve, decomposition=None):
    if curve.kind == "vertical-core":
        d = decomposition if decomposition is not None else decompose_vertical(surface)
    else:
        d = decompose_vertical(surface.rotate())
    cyls = d.cylinders
    if not 0 <= curve.cylinder < len(cyls):
        raise ExtremalError(f"no cylinder {curve.cylinder}")
    return cyls[curve.cylinder]


def ext_bounds(surface: Surface, curve: Curve, decomposition=None) -> ExtBounds:
    """Flat-metric lower bound and embedded-cylinder upper bound."""
    area = surface.area()
    if curve.kind == "torus":
        if math.gcd(curve.p, curve.q) != 1:
            raise ExtremalError("torus class must be primitive")
        w, h = _torus_dims(surface)
        l2 = w * w * curve.p ** 2 + h * h * curve.q ** 2
        # the complement of the closed geodesic through the marked point is one annulus
        return ExtBounds(l2 / area, l2 / area)
    if curve.kind in ("vertical-core", "horizontal-core"):
        cyl = _cylinder(surface, curve, decomposition)
        # core length is the leaf length, the annulus width is the circumference
        return ExtBounds(cyl.height * cyl.height / area, cyl.height / cyl.circumference)
    raise ExtremalError(f"unsupported curve class {curve.kind!r}")


def kerckhoff_check(surface: Surface, lam, curves: Sequence[Curve]) -> dict:
    """Best certified lower bound for ``d_T(X, flow(X, lam))`` over a finite curve list."""
    lam = as_scalar(lam)
    other = geodesic_flow(surface, lam)
    target = LogRatio(lam)
    rows, best = [], LogRatio.zero()
    for c in curves:
        a, b = ext_bounds(surface, c), ext_bounds(other, c)
        r = max(b.lower / a.upper, a.lower / b.upper)
        term = LogRatio(max(r, Scalar(1)))
        exact = a.lower == a.upper and b.lower == b.upper
        rows.append({"curve": c.kind if c.kind != "torus" else f"torus:{c.p},{c.q}",
                     "ratio": str(r), "term": term.to_json(), "exact": exact})
        best = max(best, term)
    return {"lambda": str(lam), "target": target.to_json(), "achieved": best.to_json(),
            "gap": (target - best).to_json(), "curves": rows, "_achieved": best, "_target": target}


# --------------------------------------------------------------- Walsh check
@dataclass
class _Crossing:
    cylinder: int
    width: Scalar  # horizontal length at lambda = 1
    height: Scalar


def _horizontal_core(surface: Surface, index: int):
    """A horizontal closed leaf in the ``index``-th horizontal cylinder: ``(rect, y)``."""
    rot = surface.rotate()
    cyl = decompose_vertical(rot).cylinders[index]
    for frac in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(3, 7)):
        i, a, b = cyl.strips[0]
        y = surface.heights[i] - (a + (b - a) * Scalar(frac))
        if not any(p[0] == i and p[2] == y for p in surface.marked_points):
            return i, y, cyl
    raise ExtremalError("could not place the horizontal core away from marked points")


def _trace_horizontal(surface: Surface, i: int, y: Scalar):
    """Pieces ``(rect, y, x0, x1)`` of the closed horizontal leaf through ``(i, 0, y)``."""
    start = (i, y, True)
    state = start
    pieces = []
    for _ in range(4 * len(surface.segs) + 4):
        i, y, right = state
        pieces.append((i, y, Scalar(0), surface.widths[i], right))
        side = "right" if right else "left"
        k = surface.segment_at(i, side, y)
        k2, y2 = surface.map_through(k, y - surface.segs[k].offset)
        other = surface.segs[k2]
        state = (other.rect, y2, other.side == "left")
        if state == start:
            return pieces
    raise ExtremalError("horizontal leaf did not close")


def _crossings(surface: Surface, dec: FoliationDecomposition, i: int, y: Scalar):
    """Split the horizontal leaf at its intersections with the critical graph."""
    pieces = _trace_horizontal(surface, i, y)
    cyl_of = {}
    for c, cyl in enumerate(dec.cylinders):
        for s in cyl.strips:
            cyl_of.setdefault(s[0], []).append((s[1], s[2], c))
    # events along the leaf: (position, kind, data)
    events = {}
    total = Scalar(0)
    for piece in pieces:
        total = total + surface.widths[piece[0]]
    pos = Scalar(0)
    for rect, yy, x0, x1, right in pieces:
        w = surface.widths[rect]
        for e in dec.graph.edges:
            for (r, x, ya, yb) in e.pieces:
                if r == rect and min(ya, yb) < yy < max(ya, yb):
                    t = (x - x0) if right else (x1 - x)
                    p = pos + t
                    if p == total:
                        p = Scalar(0)
                    d1 = _along(e, r, x, yy)
                    events[p] = min(d1, e.length - d1)
        pos = pos + w
    if not events:
        raise ExtremalError("curve does not cross the critical graph")
    events = list(events.items())
    events.sort(key=lambda t: t[0])
    crossings, gaps = [], []
    for n, (p, half) in enumerate(events):
        q = events[(n + 1) % len(events)][0]
        length = q - p if n + 1 < len(events) else total - p + events[0][0]
        mid = p + length / 2
        c = _cylinder_at(surface, pieces, cyl_of, mid)
        crossings.append(_Crossing(c, length, dec.cylinders[c].height))
        gaps.append(half)
    return crossings, gaps


def _along(edge, rect, x, y) -> Scalar:
    """Distance from the start of a saddle connection to the point ``(rect, x, y)`` on it."""
    acc = Scalar(0)
    for (r, xx, ya, yb) in edge.pieces:
        if r == rect and xx == x and min(ya, yb) <= y <= max(ya, yb):
            return acc + abs(y - ya)
        acc = acc + abs(yb - ya)
    raise AssertionError("point not on saddle connection")


def _cylinder_at(surface, pieces, cyl_of, s) -> int:
    pos = Scalar(0)
    for rect, yy, x0, x1, right in pieces:
        w = surface.widths[rect]
        if pos <= s < pos + w:
            x = (s - pos) if right else (w - (s - pos))
            for a, b, c in cyl_of.get(rect, []):
                if a <= x <= b:
                    return c
        pos = pos + w
    raise AssertionError("position outside the leaf")


def walsh_limit_check(surface: Surface, curve: Curve, lambdas: Sequence) -> dict:
    """Sandwich ``Ext_{X_t}(F) / lambda`` against ``E**2 = sum_j c_j i_j**2 / h_j``.

    For a horizontal core ``F`` the lower bound is the weighted flat metric
    (constant on each vertical cylinder), the upper bound the smaller of the
    horizontal cylinder itself and an annulus made of full-height
    rectangles in the crossed vertical cylinders joined through openings on
    the saddle connections, with ``rho = 1/|I|`` in the bulk and ``1/o`` in
    end zones of width ``o``.
    """
    dec = decompose_vertical(surface)
    if dec.minimal:
        raise ExtremalError("refined bounds need a surface without minimal components")
    rows = []
    if curve.kind == "vertical-core":
        e2 = Scalar(0)
        for lam in lambdas:
            lam = as_scalar(lam)
            b = ext_bounds(geodesic_flow(surface, lam), curve)
            rows.append(_row(lam, b.lower, b.upper, e2))
        return {"E2": str(e2), "rows": rows}
    if curve.kind != "horizontal-core":
        raise ExtremalError("walsh check supports horizontal and vertical cores")
    i, y, hcyl = _horizontal_core(surface, curve.cylinder)
    crossings, halves = _crossings(surface, dec, i, y)
    mult: Dict[int, int] = {}
    for c in crossings:
        mult[c.cylinder] = mult.get(c.cylinder, 0) + 1
    e2 = Scalar(0)
    for j, m in mult.items():
        cyl = dec.cylinders[j]
        e2 = e2 + cyl.circumference * m * m / cyl.height
    refined = all(m == 1 for m in mult.values())
    for lam in lambdas:
        lam = as_scalar(lam)
        lower = lam * e2
        flat = lam * hcyl.height / hcyl.circumference
        upper = flat
        if refined:
            upper = min(flat, _annulus_bound(crossings, halves, lam))
        rows.append(_row(lam, lower, upper, e2))
    return {"E2": str(e2), "E2decimal": f"{float(e2):.12f}", "refined": refined, "rows": rows}


def _annulus_bound(crossings: List[_Crossing], halves: List[Scalar], lam: Scalar) -> Scalar:
    n = len(crossings)
    # opening at the junction after crossing k
    openings = []
    for k in range(n):
        a, b = crossings[k], crossings[(k + 1) % n]
        o = min(2 * halves[(k + 1) % n], a.height, b.height, lam * a.width / 2, lam * b.width / 2)
        openings.append(o)
    total = Scalar(0)
    for k, c in enumerate(crossings):
        ol, orr = openings[k - 1], openings[k]
        w = lam * c.width
        total = total + (w - ol - orr) / c.height + c.height / ol + c.height / orr
    return total


def _row(lam, lower, upper, e2) -> dict:
    lo, hi = lower / lam, upper / lam
    row = {"lambda": str(lam), "lower": str(lo), "upper": str(hi),
           "decimal": [f"{float(lo):.12f}", f"{float(hi):.12f}"],
           "brackets": bool(lo <= e2 <= hi) if e2 != 0 else None}
    if e2 != 0:
        row["relativeWidth"] = float((hi - lo) / e2)
    else:
        row["relativeWidth"] = None
    return row


# ------------------------------------------------------------ affine bands
@dataclass(frozen=True)
class AffineMapSpec:
    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar
    a2: Scalar
    b2: Scalar
    c2: Scalar
    d2: Scalar

    @classmethod
    def make(cls, *vals) -> "AffineMapSpec":
        return cls(*(as_scalar(v) for v in vals))

    @property
    def B(self) -> Scalar:
        return self.b2 / self.b

    @property
    def C(self) -> Scalar:
        return self.a2 / self.a

    def slopes(self) -> Tuple[Scalar, Scalar, Scalar]:
        return (self.c2 / self.c, (self.d2 - self.c2) / (self.d - self.c), (self.b2 - self.d2) / (self.b - self.d))

    @property
    def epsilon(self) -> Scalar:
        """Largest relative deviation of the left-side slopes from ``B``."""
        return max(abs(s / self.B - 1) for s in self.slopes())

    def check(self):
        if not (0 < self.c < self.d < self.b and 0 < self.c2 < self.d2 < self.b2):
            raise ExtremalError("need 0 < c < d < b on both rectangles")
        if self.a <= 0 or self.a2 <= 0:
            raise ExtremalError("widths must be positive")
        if self.b > self.a:
            raise ExtremalError("the source rectangle must satisfy height <= width")
        if self.epsilon >= 1:
            raise ExtremalError("slope deviation must be below 1")

    def bands(self):
        """Per band: ``(y0, y1, s_k, v(0, y0))``; ``v(0, y) = v0 + s_k (y - y0)``."""
        s1, s2, s3 = self.slopes()
        zero = Scalar(0)
        return ((zero, self.c, s1, zero), (self.c, self.d, s2, self.c2), (self.d, self.b, s3, self.d2))

    def __call__(self, x, y):
        """Exact image of ``(x, y)`` from the three band formulas."""
        x, y = as_scalar(x), as_scalar(y)
        B, C = self.B, self.C
        c, d, b, a = self.c, self.d, self.b, self.a
        s1, s2, s3 = self.slopes()
        u = C * x
        t = x / a
        if y <= c:
            v = y * ((B - s1) * t + s1)
        elif y <= d:
            v = y * ((B - s2) * t + s2) + c * ((s2 - s1) * t + s1 - s2)
        else:
            v = self.b2 + (y - b) * ((B - s3) * t + s3)
        return u, v

    def partials(self, x: Scalar, y: Scalar, band: int):
        """``(u_x, u_y, v_x, v_y)`` inside ``band``; affine in x and y separately."""
        y0, y1, s, v0 = self.bands()[band]
        phi = v0 + s * (y - y0)
        psi = self.B * y
        t = x / self.a
        return self.C, Scalar(0), (psi - phi) / self.a, (1 - t) * s + t * self.B


def kappa(m: float, eps: float) -> float:
    """Constant with ``K <= M + kappa * eps``, ``M = max(C/B, B/C)``.

    From ``K + 1/K = K0 + 1/K0 + p**2/(C q)`` one gets
    ``K <= K0 + D + sqrt(D)`` with ``D = p**2/(C q)``; then
    ``q = B(1 + delta)``, ``|delta| <= eps`` and ``|p| <= B eps``
    (using ``b <= a``) give the closed form below.
    """
    return (m * (1 + eps) + math.sqrt(m * (1 - eps))) / (1 - eps)


def _dilatation(ux, uy, vx, vy) -> float:
    s = ux * ux + uy * uy + vx * vx + vy * vy
    j = abs(ux * vy - uy * vx)
    return (s + math.sqrt(max(s * s - 4 * j * j, 0.0))) / (2 * j)


def _dilatation_exact(ux: Scalar, uy: Scalar, vx: Scalar, vy: Scalar) -> Decimal:
    getcontext().prec = 50
    s = (ux * ux + uy * uy + vx * vx + vy * vy).to_decimal()
    j = abs(ux * vy - uy * vx).to_decimal()
    return (s + (s * s - 4 * j * j).sqrt()) / (2 * j)


def affine_glue_map(spec: AffineMapSpec, n: int = 64) -> dict:
    """Dilatation of the three-band map: symbolic corner maximum and grid samples."""
    spec.check()
    corner_max = Decimal(0)
    for band, (y0, y1, _, _) in enumerate(spec.bands()):
        for x in (Scalar(0), spec.a):
            for y in (y0, y1):
                corner_max = max(corner_max, _dilatation_exact(*spec.partials(x, y, band)))
    fa, fb = float(spec.a), float(spec.b)
    xs = (np.arange(n) + 0.5) / n * fa
    ys = (np.arange(n) + 0.5) / n * fb
    bands = [(float(y0), float(y1), float(s), float(v0)) for y0, y1, s, v0 in spec.bands()]
    B, C = float(spec.B), float(spec.C)
    sampled = 0.0
    for y in ys:
        k = 0 if y <= bands[0][1] else (1 if y <= bands[1][1] else 2)
        y0, _, s, v0 = bands[k]
        vx = (B * y - (v0 + s * (y - y0))) / fa
        for x in xs:
            t = x / fa
            sampled = max(sampled, _dilatation(C, 0.0, vx, (1 - t) * s + t * B))
    m = max(spec.C / spec.B, spec.B / spec.C)
    eps = float(spec.epsilon)
    kap = kappa(float(m), eps)
    bound = float(m) + kap * eps
    return {
        "B": str(spec.B), "C": str(spec.C), "epsilon": str(spec.epsilon),
        "symbolicMaxK": float(corner_max), "sampledMaxK": float(sampled),
        "target": float(m), "kappa": kap, "bound": bound,
        "withinBound": float(corner_max) <= bound + 1e-12,
        "samplesBelowSymbolic": bool(sampled <= float(corner_max) + 1e-12),
    }


def continuity_defects(spec: AffineMapSpec, xs: Sequence = (0, Fraction(1, 3), 1)) -> List[Scalar]:
    """Exact jumps of ``v`` across ``y = c`` and ``y = d`` at sample abscissae ``x = t*a``."""
    out = []
    s1, s2, s3 = spec.slopes()
    B = spec.B
    for t in xs:
        t = as_scalar(t)
        c, d, b = spec.c, spec.d, spec.b
        lo_c = c * ((B - s1) * t + s1)
        hi_c = c * ((B - s2) * t + s2) + c * ((s2 - s1) * t + s1 - s2)
        lo_d = d * ((B - s2) * t + s2) + c * ((s2 - s1) * t + s1 - s2)
        hi_d = spec.b2 + (d - b) * ((B - s3) * t + s3)
        out += [hi_c - lo_c, hi_d - lo_d]
    return out


# ------------------------------------------------------------- power map
def annulus_power_map(r, samples: int = 10_000, inner: float = 1.0, outer: float = 2.0, seed: int = 0) -> dict:
    """Dilatation of ``z -> |z|**(r-1) z`` from its real Jacobian at sample points."""
    r = float(as_scalar(r))
    if r <= 0:
        raise ExtremalError("ratio must be positive")
    rng = np.random.default_rng(seed)
    rad = np.sqrt(rng.uniform(inner ** 2, outer ** 2, samples))
    th = rng.uniform(0, 2 * np.pi, samples)
    x, y = rad * np.cos(th), rad * np.sin(th)
    mod = np.hypot(x, y)
    f = mod ** (r - 1)
    g = (r - 1) * mod ** (r - 3)
    # d/dx and d/dy of |z|^(r-1) (x + iy)
    ux, vx = f + g * x * x, g * x * y
    uy, vy = g * x * y, f + g * y * y
    s = ux ** 2 + uy ** 2 + vx ** 2 + vy ** 2
    j = np.abs(ux * vy - uy * vx)
    k = (s + np.sqrt(np.maximum(s * s - 4 * j * j, 0))) / (2 * j)
    target = max(r, 1 / r)
    return {"r": r, "target": target, "maxK": float(k.max()), "minK": float(k.min()),
            "maxError": float(np.abs(k - target).max()), "variance": float(k.var()), "samples": samples}


def qc_distortion_check(K, ext: ExtBounds) -> ExtBounds:
    """Admissible interval for ``Ext`` of the image family under a ``K``-qc map."""
    K = as_scalar(K)
    if K < 1:
        raise ExtremalError("dilatation must be at least 1")
    return ExtBounds(ext.lower / K, ext.upper * K)
