"""Interval exchanges: first returns, Rauzy-Veech induction, ergodic checks.

An IET is stored with labels ``0..n-1`` numbered in domain order; ``top``
is therefore the identity and ``bottom`` lists the labels in the order of
their images.  Lengths are exact :class:`Scalar` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numeric import Scalar, as_scalar
from .surface import Surface, TRANSLATION

__all__ = [
    "IET",
    "UECertificate",
    "Transversal",
    "FirstReturnError",
    "KeaneViolation",
    "first_return",
    "rauzy_induction",
    "certify",
    "birkhoff_deviation",
    "iet_topologically_equal",
    "rotation",
]

MAX_STEPS = 10_000


class FirstReturnError(ValueError):
    pass


class KeaneViolation(ValueError):
    """Induction produced a zero length: the IET has a connection."""


@dataclass(frozen=True)
class IET:
    lengths: Tuple[Scalar, ...]
    top: Tuple[int, ...]
    bottom: Tuple[int, ...]
    flips: Tuple[bool, ...] = ()
    words: Tuple[Tuple[str, ...], ...] = ()

    def __post_init__(self):
        n = len(self.lengths)
        if sorted(self.top) != list(range(n)) or sorted(self.bottom) != list(range(n)):
            raise ValueError("IET permutation is not a bijection")
        if any(l <= 0 for l in self.lengths):
            raise ValueError("IET lengths must be positive")
        if not self.flips:
            object.__setattr__(self, "flips", (False,) * n)

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def total(self) -> Scalar:
        s = Scalar(0)
        for l in self.lengths:
            s = s + l
        return s

    @property
    def has_flips(self) -> bool:
        return any(self.flips)

    def is_irreducible(self) -> bool:
        for k in range(1, self.n):
            if set(self.top[:k]) == set(self.bottom[:k]):
                return False
        return True

    def scaled(self, c) -> "IET":
        c = as_scalar(c)
        return IET(tuple(l * c for l in self.lengths), self.top, self.bottom, self.flips, self.words)

    def _starts(self, order):
        pos, out = Scalar(0), {}
        for lab in order:
            out[lab] = pos
            pos = pos + self.lengths[lab]
        return out

    def __call__(self, x):
        """Exact image of a point (flip-free IETs)."""
        x = as_scalar(x)
        top, bot = self._starts(self.top), self._starts(self.bottom)
        for lab in self.top:
            if top[lab] <= x < top[lab] + self.lengths[lab]:
                return bot[lab] + (x - top[lab])
        raise ValueError("point outside the IET domain")

    def float_tables(self):
        """Domain starts, lengths and translations as floats, in domain order."""
        top, bot = self._starts(self.top), self._starts(self.bottom)
        starts = np.array([float(top[l]) for l in self.top])
        shifts = np.array([float(bot[l] - top[l]) for l in self.top])
        return starts, shifts

    def to_json(self) -> dict:
        return {
            "lengths": [str(l) for l in self.lengths],
            "decimal": [f"{float(l):.12f}" for l in self.lengths],
            "top": list(self.top),
            "bottom": list(self.bottom),
            "flips": list(self.flips),
        }


def rotation(a, b) -> IET:
    """Two-interval exchange with lengths ``(a, b)``: a rotation by ``b`` on a circle of length ``a + b``."""
    return IET((as_scalar(a), as_scalar(b)), (0, 1), (1, 0))


@dataclass(frozen=True)
class Transversal:
    """Horizontal segment ``[x0, x1] x {0}`` on the bottom edge of a rectangle."""

    rect: int
    x0: Scalar
    x1: Scalar

    @property
    def length(self) -> Scalar:
        return self.x1 - self.x0


@dataclass
class _Piece:
    u0: Scalar
    u1: Scalar
    rect: int
    lo: Scalar
    hi: Scalar
    s: int  # +1 if x increases with u
    up: bool
    word: Tuple[int, ...]
    travelled: Scalar

    def u_at(self, x: Scalar) -> Scalar:
        return self.u0 + (x - self.lo) if self.s > 0 else self.u0 + (self.hi - x)

    def cut(self, a: Scalar, b: Scalar) -> Optional["_Piece"]:
        lo, hi = max(self.lo, a), min(self.hi, b)
        if not lo < hi:
            return None
        ua, ub = sorted((self.u_at(lo), self.u_at(hi)))
        return _Piece(ua, ub, self.rect, lo, hi, self.s, self.up, self.word, self.travelled)


def first_return(surface: Surface, tau: Transversal, budget=None) -> IET:
    """First return of the upward vertical flow to ``tau`` (one-sided, with flip data).

    Leaves coming back from above are reported with ``flip`` set since the
    two-sided return is then a linear involution rather than an IET.
    """
    from .foliation import default_budget

    budget = as_scalar(budget) if budget is not None else default_budget(surface)
    R, ta, tb = tau.rect, tau.x0, tau.x1
    if not (Scalar(0) <= ta < tb <= surface.widths[R]):
        raise FirstReturnError("transversal does not lie on its rectangle's bottom edge")
    queue = [_Piece(Scalar(0), tb - ta, R, ta, tb, 1, True, (R,), Scalar(0))]
    returns = []
    while queue:
        p = queue.pop()
        p.travelled = p.travelled + surface.heights[p.rect]
        if p.travelled > budget:
            raise FirstReturnError("first return not reached within the length budget")
        side = "top" if p.up else "bottom"
        if not p.up and p.rect == R:
            hit = p.cut(ta, tb)
            if hit is not None:
                returns.append((hit, False))
            rest = [q for q in (p.cut(Scalar(0), ta), p.cut(tb, surface.widths[R])) if q]
        else:
            rest = [p]
        for q in rest:
            for k in surface.side_segs[(q.rect, side)]:
                seg = surface.segs[k]
                sub = q.cut(seg.offset, seg.offset + seg.length)
                if sub is None:
                    continue
                other = surface.segs[seg.partner]
                if seg.orientation == TRANSLATION:
                    lo = other.offset + (sub.lo - seg.offset)
                    hi = other.offset + (sub.hi - seg.offset)
                    s = sub.s
                else:
                    lo = other.offset + seg.length - (sub.hi - seg.offset)
                    hi = other.offset + seg.length - (sub.lo - seg.offset)
                    s = -sub.s
                j = other.rect
                up = other.side == "bottom"
                nxt = _Piece(sub.u0, sub.u1, j, lo, hi, s, up, sub.word + (j,), sub.travelled)
                if up and j == R:
                    hit = nxt.cut(ta, tb)
                    if hit is not None:
                        returns.append((hit, True))
                    for r in (nxt.cut(Scalar(0), ta), nxt.cut(tb, surface.widths[R])):
                        if r is not None:
                            queue.append(r)
                else:
                    queue.append(nxt)
    returns.sort(key=lambda t: t[0].u0)
    # merge neighbours that are continuous in domain and image
    merged = []
    for p, below in returns:
        if merged:
            q, qb = merged[-1]
            if (qb == below and q.u1 == p.u0 and q.s == p.s == 1 and q.hi == p.lo) or (
                qb == below and q.u1 == p.u0 and q.s == p.s == -1 and p.hi == q.lo
            ):
                lo, hi = min(q.lo, p.lo), max(q.hi, p.hi)
                merged[-1] = (_Piece(q.u0, p.u1, R, lo, hi, q.s, True, q.word, q.travelled), qb)
                continue
        merged.append((p, below))
    total = Scalar(0)
    for p, _ in merged:
        total = total + (p.u1 - p.u0)
    if total != tb - ta:
        raise FirstReturnError("first-return pieces do not tile the transversal")
    lengths = tuple(p.u1 - p.u0 for p, _ in merged)
    order = sorted(range(len(merged)), key=lambda k: merged[k][0].lo)
    flips = tuple(p.s < 0 or not below for p, below in merged)
    words = tuple(tuple(surface.rect_ids[i] for i in p.word) for p, _ in merged)
    return IET(lengths, tuple(range(len(merged))), tuple(order), flips, words)


# ----------------------------------------------------------------- induction
@dataclass(frozen=True)
class UECertificate:
    status: str  # certified | asserted | unknown | keane-violation
    rauzy_path: Tuple[int, ...] = ()
    period_start: Optional[int] = None
    period_length: Optional[int] = None
    expansion_matrix: Optional[Tuple[Tuple[int, ...], ...]] = None
    pf_measure: Optional[Tuple[Scalar, ...]] = None
    steps: int = 0
    message: str = ""

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "rauzyPath": ["top" if m == 0 else "bottom" for m in self.rauzy_path],
            "periodStart": self.period_start,
            "periodLength": self.period_length,
            "expansionMatrix": [list(r) for r in self.expansion_matrix] if self.expansion_matrix else None,
            "pfMeasure": [str(x) for x in self.pf_measure] if self.pf_measure else None,
            "steps": self.steps,
            "message": self.message,
        }


@dataclass
class _RauzyState:
    top: List[int]
    bottom: List[int]
    lengths: List[Scalar]


def rauzy_step(state: _RauzyState) -> Tuple[int, int, int]:
    """One Rauzy-Veech move in place; returns ``(type, winner, loser)`` (type 0 = top wins)."""
    a, b = state.top[-1], state.bottom[-1]
    la, lb = state.lengths[a], state.lengths[b]
    if la == lb:
        raise KeaneViolation("equal last lengths: the IET has a connection")
    if la > lb:
        state.lengths[a] = la - lb
        state.bottom.pop()
        state.bottom.insert(state.bottom.index(a) + 1, b)
        return 0, a, b
    state.lengths[b] = lb - la
    state.top.pop()
    state.top.insert(state.top.index(b) + 1, a)
    return 1, b, a


def _projective_key(lengths: Sequence[Scalar]):
    total = Scalar(0)
    for l in lengths:
        total = total + l
    return tuple(l / total for l in lengths)


def rauzy_induction(iet: IET, max_steps: int = MAX_STEPS):
    """Run induction, yielding ``(step, move, state)``; stops on Keane violation."""
    st = _RauzyState(list(iet.top), list(iet.bottom), list(iet.lengths))
    for k in range(max_steps):
        move = rauzy_step(st)
        yield k, move, st


def _primitive(m: np.ndarray) -> bool:
    n = m.shape[0]
    p = (m > 0).astype(np.int64)
    acc = p.copy()
    # Wielandt bound on the exponent of a primitive matrix
    for _ in range((n - 1) ** 2 + 1):
        if (acc > 0).all():
            return True
        acc = ((acc @ p) > 0).astype(np.int64)
    return bool((acc > 0).all())


def certify(iet: IET, max_steps: int = MAX_STEPS) -> UECertificate:
    """Certify unique ergodicity by exact projective periodicity of the Rauzy path."""
    if iet.has_flips:
        return UECertificate("unknown", message="IET has flips; certification not attempted")
    if not iet.is_irreducible():
        raise ValueError("reducible permutation")
    n = iet.n
    st = _RauzyState(list(iet.top), list(iet.bottom), list(iet.lengths))
    seen: Dict[tuple, int] = {}
    history = [tuple(st.lengths)]
    moves: List[Tuple[int, int, int]] = []
    for k in range(max_steps + 1):
        key = (tuple(st.top), tuple(st.bottom), _projective_key(st.lengths))
        if key in seen:
            j = seen[key]
            m = np.eye(n, dtype=object)
            for t, win, lose in moves[j:k]:
                e = np.eye(n, dtype=object)
                e[win, lose] = 1
                m = m.dot(e)
            mat = np.array(m, dtype=np.int64)
            path = tuple(t for t, _, _ in moves)
            if not _primitive(mat):
                return UECertificate("unknown", path, j, k - j, _tuplize(mat), steps=k,
                                     message="periodic path with non-primitive matrix")
            vec = history[j]
            return UECertificate("certified", path, j, k - j, _tuplize(mat), _projective_key(vec), steps=k)
        seen[key] = k
        if k == max_steps:
            break
        try:
            moves.append(rauzy_step(st))
        except KeaneViolation as exc:
            return UECertificate("keane-violation", tuple(t for t, _, _ in moves), steps=k, message=str(exc))
        history.append(tuple(st.lengths))
    return UECertificate("unknown", tuple(t for t, _, _ in moves), steps=max_steps,
                         message="no projective period within maxSteps")


def _tuplize(m) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in m)


# ------------------------------------------------------------------ ergodic
def sample_grid(total: float, size: int = 257) -> np.ndarray:
    """Equispaced grid on ``[0, total)`` shifted by the golden offset."""
    theta = (5 ** 0.5 - 1) / 2 % (1.0 / size)
    return (np.arange(size) / size + theta) * total


def birkhoff_deviation(iet: IET, cert: UECertificate, cells: Sequence, n_list: Sequence[int],
                       grid_size: int = 257) -> List[dict]:
    """Sup over a sample grid of ``|(1/n) #{k < n : T^k x in R_i} - mu(R_i)|``.

    ``cells`` are the widths of a partition of the domain; the reference
    measure is normalized length, the invariant measure of every IET.
    """
    if cert.status not in ("certified", "asserted"):
        raise ValueError("birkhoff_deviation needs a certified or asserted measure")
    if iet.has_flips:
        raise ValueError("flipped IETs are not iterated")
    total = float(iet.total)
    widths = np.array([float(as_scalar(c)) for c in cells])
    if abs(widths.sum() - total) > 1e-12 * max(1.0, total):
        raise ValueError("cells do not partition the transversal")
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    mu = widths / total
    starts, shifts = iet.float_tables()
    x = sample_grid(total, grid_size)
    counts = np.zeros((len(widths), grid_size))
    n_max = max(n_list)
    wanted = set(n_list)
    rows = []
    for k in range(1, n_max + 1):
        cell = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(widths) - 1)
        counts[cell, np.arange(grid_size)] += 1
        idx = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(starts) - 1)
        x = np.mod(x + shifts[idx], total)
        if k in wanted:
            dev = np.abs(counts / k - mu[:, None]).max(axis=1)
            rows.append({"n": k, "deviation": [float(d) for d in dev], "sup": float(dev.max())})
    return rows


def iet_topologically_equal(a: IET, b: IET, max_steps: int = MAX_STEPS) -> str:
    """Conservative comparison of two flip-free IETs through their Rauzy paths."""
    if a.has_flips or b.has_flips:
        return "undecided"
    if (a.top, a.bottom) != (b.top, b.bottom):
        return "distinct"
    ca, cb = certify(a, max_steps), certify(b, max_steps)
    if "keane-violation" in (ca.status, cb.status):
        return "distinct" if ca.status != cb.status else "undecided"
    if ca.status != "certified" or cb.status != "certified":
        return "undecided"

    def tail(c):
        return c.rauzy_path[c.period_start:c.period_start + c.period_length]

    ta, tb = tail(ca), tail(cb)
    if len(ta) != len(tb):
        return "distinct"
    # periodic words must agree up to a synchronized shift, with matching states
    sa = _states(a, ca)
    sb = _states(b, cb)
    for shift in range(len(ta)):
        if ta[shift:] + ta[:shift] == tb and sa[shift] == sb[0]:
            return "equivalent"
    return "distinct"


def _states(iet: IET, cert: UECertificate):
    st = _RauzyState(list(iet.top), list(iet.bottom), list(iet.lengths))
    for _ in range(cert.period_start):
        rauzy_step(st)
    out = []
    for _ in range(cert.period_length):
        out.append((tuple(st.top), tuple(st.bottom)))
        rauzy_step(st)
    return out
