"""Write the shipped surface fixtures to fixtures/*.json.

Run from the repository root: ``python scripts/make_fixtures.py``.
Every fixture is validated and written in canonical form.
"""

import json
from pathlib import Path

from strebel import load_surface, origami, parse_scalar

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def side(rect, name, offset, length):
    return {"rect": rect, "side": name, "offset": str(offset), "length": str(length)}


def glue(a, b, orientation="translation"):
    return {"from": a, "to": b, "orientation": orientation}


def twisted_torus(d, a, label):
    """Unit square whose top is shifted by ``a`` before gluing; the vertical flow is a rotation by ``a``."""
    r = "s0"
    a = parse_scalar(a)
    return {
        "field_d": d,
        "rectangles": [{"id": r, "width": "1", "height": "1"}],
        "gluings": [
            glue(side(r, "bottom", 0, a), side(r, "top", 1 - a, a)),
            glue(side(r, "bottom", a, 1 - a), side(r, "top", 0, 1 - a)),
            glue(side(r, "right", 0, 1), side(r, "left", 0, 1)),
        ],
        "punctures": [{"rect": r, "x": "0", "y": "0"}],
        "_label": label,
    }


def pillowcase(w, h):
    """One ``w x h`` rectangle folded by half turns on every side: four poles, one cylinder."""
    r = "p0"
    w, h = parse_scalar(w), parse_scalar(h)
    hw, hh = w / 2, h / 2
    return {
        "field_d": 1,
        "rectangles": [{"id": r, "width": str(w), "height": str(h)}],
        "gluings": [
            glue(side(r, "left", 0, hh), side(r, "left", hh, hh), "halfTurn"),
            glue(side(r, "right", 0, hh), side(r, "right", hh, hh), "halfTurn"),
            glue(side(r, "top", 0, hw), side(r, "top", hw, hw), "halfTurn"),
            glue(side(r, "bottom", 0, hw), side(r, "bottom", hw, hw), "halfTurn"),
        ],
        "punctures": [],
    }


def half_turn_pillow():
    """A 2 x 1 horizontal cylinder with top and bottom folded in half."""
    r = "q0"
    return {
        "field_d": 1,
        "rectangles": [{"id": r, "width": "2", "height": "1"}],
        "gluings": [
            glue(side(r, "right", 0, 1), side(r, "left", 0, 1)),
            glue(side(r, "top", 0, 1), side(r, "top", 1, 1), "halfTurn"),
            glue(side(r, "bottom", 0, 1), side(r, "bottom", 1, 1), "halfTurn"),
        ],
        "punctures": [],
    }


def _normalize(data):
    data = {k: v for k, v in data.items() if not k.startswith("_")}
    return load_surface(data).to_json()


def fixtures():
    return {
        "torus": origami([0], [0], punctures=[0]).to_json(),
        "l_origami": origami([1, 0, 2], [2, 1, 0]).to_json(),
        "golden_torus": _normalize(twisted_torus(5, "-1/2+1/2*sqrt(5)", "golden")),
        "silver_torus": _normalize(twisted_torus(2, "-1+sqrt(2)", "silver")),
        "pillowcase_a": _normalize(pillowcase(2, 1)),
        "pillowcase_b": _normalize(pillowcase(4, 2)),
        "half_turn_pillow": _normalize(half_turn_pillow()),
    }


CORRESPONDENCE = {"pairs": [[0, 0]], "graphPairs": [[0, 0], [1, 1]]}


def main():
    OUT.mkdir(exist_ok=True)
    for name, data in fixtures().items():
        (OUT / f"{name}.json").write_text(json.dumps(data, indent=2) + "\n")
        print("wrote", name)
    (OUT / "correspondences").mkdir(exist_ok=True)
    (OUT / "correspondences" / "pillowcase.json").write_text(json.dumps(CORRESPONDENCE, indent=2) + "\n")


if __name__ == "__main__":
    main()
