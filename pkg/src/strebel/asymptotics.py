"""Moduli, limiting distances and the detour metric for pairs of Strebel rays.

The modulus of a component is ``m = a / i(G, H(q))``.  For a cylinder
``a`` is its circumference and ``i(G, H(q))`` its height, so ``m`` is
circumference over height and ``m -> lambda * m`` along the ray.  For a
minimal component only the ratio ``m'/m`` is normalization free; it is
``(len(tau')/len(tau))**2 * Area / Area'`` for matched transversals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .foliation import FoliationDecomposition
from .iet import iet_topologically_equal
from .limitsurf import dbar_distance, limit_models
from .numeric import LogRatio, Scalar, as_scalar, logratio_max

__all__ = [
    "CorrespondenceError",
    "Correspondence",
    "ModulusEntry",
    "RayPairReport",
    "modulus_ratios",
    "limiting_distance",
    "asymptotic_test",
    "detour_metric",
    "shifted_modulus_term",
    "modulus_term",
]


class CorrespondenceError(ValueError):
    pass


@dataclass
class Correspondence:
    """Component matching between two decompositions.

    ``pairs`` lists ``(component in A, component in B)``; ``graph_pairs``
    matches critical-graph components; ``asserted`` holds indices into
    ``pairs`` whose minimal components are declared equivalent (and uniquely
    ergodic) by the caller.
    """

    pairs: List[Tuple[int, int]]
    graph_pairs: Optional[List[Tuple[int, int]]] = None
    asserted: Tuple[int, ...] = ()

    @classmethod
    def by_order(cls, a: FoliationDecomposition, b: FoliationDecomposition) -> "Correspondence":
        if len(a.components) != len(b.components):
            raise CorrespondenceError("component counts differ")
        return cls([(k, k) for k in range(len(a.components))])

    @classmethod
    def from_json(cls, data: dict) -> "Correspondence":
        pairs = [tuple(p) for p in data["pairs"]]
        gp = [tuple(p) for p in data["graphPairs"]] if "graphPairs" in data else None
        return cls(pairs, gp, tuple(data.get("asserted", ())))


@dataclass(frozen=True)
class ModulusEntry:
    kind: str
    ratio: Scalar
    m: Optional[Scalar] = None
    m_prime: Optional[Scalar] = None

    def to_json(self) -> dict:
        d = {"kind": self.kind, "ratio": str(self.ratio), "decimal": f"{float(self.ratio):.12f}"}
        if self.m is not None:
            d["m"], d["mPrime"] = str(self.m), str(self.m_prime)
        return d


def _check(a, b, corr: Correspondence):
    ka = sorted(p[0] for p in corr.pairs)
    kb = sorted(p[1] for p in corr.pairs)
    if ka != list(range(len(a.components))) or kb != list(range(len(b.components))):
        raise CorrespondenceError("correspondence is not a bijection of components")
    for n, (i, j) in enumerate(corr.pairs):
        ca, cb = a.components[i], b.components[j]
        if ca.kind != cb.kind:
            raise CorrespondenceError(f"pair {n} matches a {ca.kind} with a {cb.kind}")
        if ca.kind == "minimal" and n not in corr.asserted:
            if iet_topologically_equal(ca.first_return, cb.first_return) != "equivalent":
                raise CorrespondenceError(f"minimal pair {n} is not certified equivalent")


def modulus_ratios(a: FoliationDecomposition, b: FoliationDecomposition,
                   corr: Optional[Correspondence] = None) -> List[ModulusEntry]:
    corr = corr or Correspondence.by_order(a, b)
    _check(a, b, corr)
    out = []
    for i, j in corr.pairs:
        ca, cb = a.components[i], b.components[j]
        if ca.kind == "cylinder":
            out.append(ModulusEntry("cylinder", cb.modulus / ca.modulus, ca.modulus, cb.modulus))
        else:
            q = cb.transversal.length / ca.transversal.length
            out.append(ModulusEntry("minimal", q * q * ca.area / cb.area))
    return out


def modulus_term(ratios: Sequence) -> LogRatio:
    """``1/2 log max_j max(r_j, 1/r_j)``."""
    rs = [as_scalar(getattr(r, "ratio", r)) for r in ratios]
    return logratio_max([LogRatio(max(r, 1 / r)) for r in rs])


def detour_metric(ratios: Sequence) -> Tuple[LogRatio, LogRatio]:
    """Detour distance ``delta`` and the optimal shift ``sigma*`` from ratios ``m'_j / m_j``."""
    rs = [as_scalar(getattr(r, "ratio", r)) for r in ratios]
    up = max(rs)
    down = max(1 / r for r in rs)
    delta = LogRatio(up) + LogRatio(down)
    sigma = LogRatio(down / up, Fraction(1, 4))
    return delta, sigma


def shifted_modulus_term(ratios: Sequence, sigma: LogRatio) -> LogRatio:
    """Modulus term after shifting the second ray by ``sigma`` (ratios times ``e^{2 sigma}``)."""
    rs = [as_scalar(getattr(r, "ratio", r)) for r in ratios]
    return max(LogRatio(max(rs)) + sigma, LogRatio(max(1 / r for r in rs)) - sigma)


@dataclass
class RayPairReport:
    verdict: str  # absolutelyContinuous | notEquivalent
    modulus_term: Optional[LogRatio]
    limit_surface_term: str  # exactZero | infinite | notComputable
    distance_kind: str  # exact | lowerBound | infinite
    distance: Optional[LogRatio]
    asymptotic: str  # yes | no | undecided
    ratios: List[ModulusEntry] = field(default_factory=list)
    delta: Optional[LogRatio] = None
    sigma_star: Optional[LogRatio] = None
    reason: str = ""

    def to_json(self) -> dict:
        def lr(x):
            return None if x is None else x.to_json()

        return {
            "verdict": self.verdict,
            "modulusTerm": lr(self.modulus_term),
            "limitSurfaceTerm": self.limit_surface_term,
            "limitingDistance": {"kind": self.distance_kind, "value": lr(self.distance)},
            "asymptotic": self.asymptotic,
            "ratios": [r.to_json() for r in self.ratios],
            "detour": lr(self.delta),
            "sigmaStar": lr(self.sigma_star),
            "reason": self.reason,
        }


def limiting_distance(a: FoliationDecomposition, b: FoliationDecomposition,
                      corr: Optional[Correspondence] = None) -> RayPairReport:
    try:
        corr = corr or Correspondence.by_order(a, b)
        ratios = modulus_ratios(a, b, corr)
    except CorrespondenceError as exc:
        return RayPairReport("notEquivalent", None, "infinite", "infinite", None, "no", reason=str(exc))
    term = modulus_term(ratios)
    delta, sigma = detour_metric(ratios)
    dbar = dbar_distance(limit_models(a.graph), limit_models(b.graph), corr.graph_pairs)
    if dbar == "exactZero":
        kind, dist = "exact", term
    elif dbar == "infinite":
        return RayPairReport("notEquivalent", term, dbar, "infinite", None, "no", ratios, delta, sigma,
                             reason="limit surfaces have different topological types")
    else:
        kind, dist = "lowerBound", term
    first = ratios[0].ratio
    modular = all(r.ratio == first for r in ratios)
    if not modular or dbar == "infinite":
        asym = "no"
    elif dbar == "exactZero":
        asym = "yes"
    else:
        asym = "undecided"
    return RayPairReport("absolutelyContinuous", term, dbar, kind, dist, asym, ratios, delta, sigma)


def asymptotic_test(a, b, corr=None) -> str:
    return limiting_distance(a, b, corr).asymptotic
