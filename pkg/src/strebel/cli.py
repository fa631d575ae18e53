"""Command-line entry point: ``python -m strebel <subcommand> ...``.

Every report is JSON with a fixed key order; exact values are strings and
floats are rounded to 12 significant digits, so identical inputs give
byte-identical output.  Exit status is 0 on success, 2 on a domain error
(a JSON error object is printed) and 3 when a length budget runs out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .asymptotics import Correspondence, CorrespondenceError, detour_metric, limiting_distance
from .extremal import (AffineMapSpec, Curve, ExtremalError, affine_glue_map, annulus_power_map, ext_bounds,
                       kerckhoff_check, walsh_limit_check)
from .foliation import FoliationError, IncompleteGraphError, budget_scale, decompose_vertical, \
    masur_case, ribbon_topology, trace_separatrices
from .iet import IET, KeaneViolation, birkhoff_deviation, certify
from .limitsurf import RibbonGraph, flat_distance, gh_epsilon_check, limit_models, model_from_ribbon
from .numeric import FieldMismatchError, LogRatio, Scalar, parse_scalar
from .surface import Surface, SurfaceError, geodesic_flow, load_surface

EXIT_OK, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3


@dataclass
class RunConfig:
    """Parsed command line; budgets are echoed into every report."""

    subcommand: str
    inputs: List[str] = field(default_factory=list)
    budget: Optional[str] = None
    max_steps: int = 10_000
    grid_size: int = 257
    output: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {"subcommand": self.subcommand, "inputs": list(self.inputs), "budget": self.budget,
                "budgetScale": str(budget_scale()), "maxSteps": self.max_steps,
                "gridSize": self.grid_size, "seed": self.seed}


class BudgetExhausted(RuntimeError):
    pass


def _clean(obj):
    """Make a report JSON-ready: drop private keys, round floats, stringify exact values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, LogRatio):
        return obj.to_json()
    if isinstance(obj, Scalar):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float) or hasattr(obj, "__float__"):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    return str(obj)


def _read(path: str) -> Surface:
    if path == "-":
        return load_surface(json.loads(sys.stdin.read()))
    return load_surface(path)


def _read_json(path: str) -> dict:
    if path == "-":
        return json.loads(sys.stdin.read())
    with open(path) as fh:
        return json.load(fh)


def _scalars(text: str) -> List[Scalar]:
    return [parse_scalar(t) for t in text.split(",") if t.strip()]


def _decompose(surface: Surface, cfg: RunConfig):
    budget = parse_scalar(cfg.budget) if cfg.budget else None
    graph = trace_separatrices(surface, budget)
    try:
        return decompose_vertical(surface, graph)
    except IncompleteGraphError as exc:
        raise BudgetExhausted(str(exc)) from exc


# ------------------------------------------------------------ subcommands
def cmd_validate(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    return {"valid": True, "rectangles": s.n_rects, "area": str(s.area()),
            "eulerCharacteristic": s.euler_characteristic(), "genus": s.genus(),
            "singularities": [{"id": v.id, "coneAngle": f"{v.cone_angle} pi", "puncture": v.is_puncture}
                              for v in s.singularities],
            "surface": s.to_json()}


def cmd_decompose(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    dec = _decompose(s, cfg)
    cyl = ", ".join(f"(h={c.height}, c={c.circumference})" for c in dec.cylinders)
    summary = f"{len(dec.cylinders)} cylinder(s) {cyl}; {len(dec.minimal)} minimal component(s)"
    topo = [c.to_json() for c in ribbon_topology(dec.graph)]
    return {"summary": summary, **dec.to_json(), "ribbonComponents": topo,
            "masurCase": masur_case(dec.graph), "config": cfg.echo()}


def cmd_flow(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    return geodesic_flow(s, parse_scalar(cfg.options["lambda"])).to_json()


def cmd_iet(cfg: RunConfig) -> dict:
    o = cfg.options
    if o.get("lengths"):
        n = len(_scalars(o["lengths"]))
        top = [int(t) for t in o["top"].split(",")] if o.get("top") else list(range(n))
        bottom = [int(t) for t in o["bottom"].split(",")]
        iets = [IET(tuple(_scalars(o["lengths"])), tuple(top), tuple(bottom))]
    else:
        dec = _decompose(_read(cfg.inputs[0]), cfg)
        iets = [c.first_return for c in dec.minimal]
    out = []
    for t in iets:
        cert = certify(t, cfg.max_steps)
        row = {"iet": t.to_json(), "certificate": cert.to_json()}
        if o.get("deviation") and cert.status == "certified":
            ns = [int(v) for v in o["deviation"].split(",")]
            row["deviation"] = birkhoff_deviation(t, cert, t.lengths, ns, cfg.grid_size)
        out.append(row)
    return {"iets": out, "config": cfg.echo()}


def _models_json(surface: Surface, cfg: RunConfig) -> list:
    budget = parse_scalar(cfg.budget) if cfg.budget else None
    graph = trace_separatrices(surface, budget)
    try:
        return [m.to_json() for m in limit_models(graph)]
    except IncompleteGraphError as exc:
        raise BudgetExhausted(str(exc)) from exc


def cmd_limit_surface(cfg: RunConfig) -> dict:
    if cfg.options.get("graph"):
        rg = RibbonGraph.from_json(_read_json(cfg.options["graph"]))
        return {"models": [model_from_ribbon(rg).to_json()], "canonical": rg.canonical()}
    return {"models": _models_json(_read(cfg.inputs[0]), cfg), "config": cfg.echo()}


def _pair(cfg: RunConfig):
    a, b = _decompose(_read(cfg.inputs[0]), cfg), _decompose(_read(cfg.inputs[1]), cfg)
    corr = Correspondence.from_json(_read_json(cfg.options["correspondence"])) \
        if cfg.options.get("correspondence") else None
    return limiting_distance(a, b, corr)


def cmd_limit_distance(cfg: RunConfig) -> dict:
    return {**_pair(cfg).to_json(), "config": cfg.echo()}


def cmd_asymptotic(cfg: RunConfig) -> dict:
    rep = _pair(cfg)
    return {"asymptotic": rep.asymptotic, "verdict": rep.verdict, "limitSurfaceTerm": rep.limit_surface_term,
            "reason": rep.reason, "config": cfg.echo()}


def cmd_detour(cfg: RunConfig) -> dict:
    delta, sigma = detour_metric(_scalars(cfg.options["ratios"]))
    return {"delta": delta.pretty(), "sigma": sigma.pretty(),
            "deltaDecimal": delta.to_json()["decimal"], "sigmaDecimal": sigma.to_json()["decimal"]}


def cmd_ext(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    curves = [Curve.parse(c) for c in cfg.options["curve"].split(";")]
    out = {"bounds": [{"curve": c.kind, **ext_bounds(s, c).to_json()} for c in curves]}
    if cfg.options.get("lambda"):
        out["kerckhoff"] = kerckhoff_check(s, parse_scalar(cfg.options["lambda"]), curves)
    return out


def cmd_qc_affine(cfg: RunConfig) -> dict:
    o = cfg.options
    out = {}
    if o.get("spec"):
        out["affine"] = affine_glue_map(AffineMapSpec.make(*_scalars(o["spec"])), int(o.get("samples") or 64))
    if o.get("power"):
        out["powerMap"] = annulus_power_map(parse_scalar(o["power"]), seed=cfg.seed)
    if not out:
        raise ValueError("qc-affine needs --spec and/or --power")
    return out


def cmd_walsh(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    return walsh_limit_check(s, Curve.parse(cfg.options["curve"]), _scalars(cfg.options["lambdas"]))


def cmd_gh_check(cfg: RunConfig) -> dict:
    s = _read(cfg.inputs[0])
    o = cfg.options
    if o.get("points"):
        p, q = [tuple(t.split(":")) for t in o["points"].split(";")]
        p = (p[0], parse_scalar(p[1]), parse_scalar(p[2]))
        q = (q[0], parse_scalar(q[1]), parse_scalar(q[2]))
        return flat_distance(s, p, q, parse_scalar(o["h"]))
    rows = [gh_epsilon_check(s, lam, parse_scalar(o["r"]), parse_scalar(o["h"])).to_json()
            for lam in _scalars(o["lambda"])]
    return {"rows": rows}


COMMANDS = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "flow": cmd_flow,
    "iet": cmd_iet,
    "limit-surface": cmd_limit_surface,
    "limit-distance": cmd_limit_distance,
    "asymptotic": cmd_asymptotic,
    "detour": cmd_detour,
    "ext": cmd_ext,
    "qc-affine": cmd_qc_affine,
    "walsh": cmd_walsh,
    "gh-check": cmd_gh_check,
}

_OPTIONS = {
    "validate": [], "decompose": [], "flow": ["lambda"],
    "iet": ["lengths", "top", "bottom", "deviation"],
    "limit-surface": ["graph"], "limit-distance": ["correspondence"], "asymptotic": ["correspondence"],
    "detour": ["ratios"], "ext": ["curve", "lambda"], "qc-affine": ["spec", "samples", "power"],
    "walsh": ["curve", "lambdas"], "gh-check": ["lambda", "r", "h", "points"],
}
_N_INPUTS = {"validate": 1, "decompose": 1, "flow": 1, "iet": "?", "limit-surface": "?",
             "limit-distance": 2, "asymptotic": 2, "detour": 0, "ext": 1, "qc-affine": 0,
             "walsh": 1, "gh-check": 1}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strebel", description="Strebel rays on half-translation surfaces")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        n = _N_INPUTS[name]
        if n:
            p.add_argument("inputs", nargs=n, help="surface JSON file, or - for stdin")
        p.add_argument("--budget", help="length budget for separatrices (exact scalar)")
        p.add_argument("--max-steps", type=int, default=10_000)
        p.add_argument("--grid-size", type=int, default=257)
        p.add_argument("--format", choices=["json", "text"], default="json")
        p.add_argument("--seed", type=int, default=0)
        for opt in _OPTIONS[name]:
            p.add_argument(f"--{opt}")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    inputs = getattr(ns, "inputs", None) or []
    if isinstance(inputs, str):
        inputs = [inputs]
    opts = {k: getattr(ns, k) for k in _OPTIONS[ns.subcommand]}
    return RunConfig(ns.subcommand, list(inputs), ns.budget, ns.max_steps, ns.grid_size, ns.format, ns.seed, opts)


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        return "\n".join(f"{pad}{k}:" + ("\n" + _text(v, indent + 1) if isinstance(v, (dict, list)) and v
                                         else f" {v}") for k, v in obj.items())
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}" for v in obj)
    return f"{pad}{obj}"


def run(cfg: RunConfig):
    """Execute one subcommand; returns ``(exit status, report)``."""
    try:
        report = COMMANDS[cfg.subcommand](cfg)
        return EXIT_OK, _clean(report)
    except BudgetExhausted as exc:
        return EXIT_BUDGET, {"error": {"type": "budgetExhausted", "message": str(exc),
                                       "budget": cfg.budget or "default"}}
    except (SurfaceError, FoliationError, FieldMismatchError, CorrespondenceError, ExtremalError,
            KeaneViolation, ValueError, KeyError, TypeError, OSError) as exc:
        return EXIT_DOMAIN, {"error": {"type": type(exc).__name__, "message": str(exc)}}


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_config(sys.argv[1:] if argv is None else argv)
    status, report = run(cfg)
    if cfg.output == "text" and status == EXIT_OK:
        print(_text(report))
    else:
        print(json.dumps(report, indent=2))
    return status


if __name__ == "__main__":
    sys.exit(main())
