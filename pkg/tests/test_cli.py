import json
import subprocess
import sys
from pathlib import Path

import pytest

from strebel.cli import main, parse_config, run

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def call(*argv):
    return run(parse_config([str(a) for a in argv]))


def test_detour_report():
    status, rep = call("detour", "--ratios", "1,1/4")
    assert status == 0
    assert rep["delta"] == "log 2"
    assert rep["sigma"] == "1/2 log 2"
    assert rep["deltaDecimal"] == "0.693147180560"


def test_decompose_l_origami():
    status, rep = call("decompose", FIX / "l_origami.json")
    assert status == 0
    cyl = sorted((c["cylinder"]["height"], c["cylinder"]["circumference"]) for c in rep["components"])
    assert cyl == [("1", "1"), ("2", "1")]
    assert rep["config"]["budgetScale"] == "1"


def test_flow_then_decompose_pipeline():
    flow = subprocess.run([sys.executable, "-m", "strebel", "flow", str(FIX / "torus.json"), "--lambda", "2"],
                          capture_output=True, text=True, check=True)
    dec = subprocess.run([sys.executable, "-m", "strebel", "decompose", "-"], input=flow.stdout,
                         capture_output=True, text=True, check=True)
    rep = json.loads(dec.stdout)
    assert rep["components"][0]["cylinder"]["circumference"] == "2"


def test_reports_are_byte_identical(capsys):
    outs = []
    for _ in range(2):
        main(["limit-distance", str(FIX / "l_origami.json"), str(FIX / "l_origami.json")])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_domain_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rectangles": []}')
    status, rep = call("validate", bad)
    assert status == 2
    assert set(rep["error"]) == {"type", "message"}


def test_budget_exhaustion_exit_code():
    status, rep = call("decompose", FIX / "torus.json", "--budget", "1/2")
    assert status == 3
    assert rep["error"]["type"] == "budgetExhausted"


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        parse_config(["frobnicate"])


def test_asymptotic_with_correspondence():
    status, rep = call("asymptotic", FIX / "pillowcase_a.json", FIX / "pillowcase_b.json",
                       "--correspondence", FIX / "correspondences" / "pillowcase.json")
    assert status == 0
    assert rep["asymptotic"] == "yes"


def test_ext_and_walsh_subcommands():
    status, rep = call("ext", FIX / "torus.json", "--curve", "horizontal;vertical", "--lambda", "4")
    assert status == 0
    assert rep["kerckhoff"]["achieved"]["exact"] == "log 2"
    status, rep = call("walsh", FIX / "l_origami.json", "--curve", "horizontal-core:0", "--lambdas", "1,1024")
    assert status == 0
    assert rep["E2"] == "3/2"


def test_validate_round_trip(tmp_path):
    status, rep = call("validate", FIX / "golden_torus.json")
    assert status == 0
    path = tmp_path / "again.json"
    path.write_text(json.dumps(rep["surface"]))
    status2, rep2 = call("validate", path)
    assert rep2["surface"] == rep["surface"]
