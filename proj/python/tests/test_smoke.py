import json
import os
from pathlib import Path

import pytest

import stratcause as sc

DATA = Path(os.environ.get("STRATCAUSE_DATA", Path(__file__).resolve().parents[2] / "tests" / "data"))
STAGES = str(DATA / "stages.csv")


def test_stages_bounds():
    joint = sc.load_counts(STAGES)
    assert len(joint) == 3
    assert joint.total_n == 192
    pn = sc.bounds(joint, sc.Quantity.PN)
    assert pn.lower == 0.0
    assert pn.upper == pytest.approx(169 / 217, abs=1e-12)
    baseline = sc.bounds(joint, sc.Quantity.PN, method="tian-pearl")
    assert baseline.upper == 1.0
    pns = sc.bounds(joint, sc.Quantity.PNS)
    assert pns.upper == pytest.approx(0.168166, abs=1e-6)
    assert pn.to_dict()["terms"][2]["upper_label"] == "P(y'_x'|s)-P(x',y'|s)"


def test_measured_experimental_and_clamp():
    joint = sc.load_counts(STAGES)
    exp = {"strata": [
        {"key": {"stage": "s1"}, "p_y_do_x": 0.10, "p_y_do_xprime": 0.15},
        {"key": {"stage": "s2"}, "p_y_do_x": 0.25, "p_y_do_xprime": 0.40},
        {"key": {"stage": "s3"}, "p_y_do_x": 0.99, "p_y_do_xprime": 0.80},
    ]}
    with pytest.raises(sc.IncompatibilityError):
        sc.bounds(joint, sc.Quantity.PNS, experimental=exp)
    iv = sc.bounds(joint, sc.Quantity.PNS, experimental=exp, clamp=True)
    assert 0.0 <= iv.lower <= iv.upper <= 1.0


def test_point_estimates_setting1():
    joint = sc.joint_from_dict(json.loads(json.dumps(sc.load_counts(STAGES).to_dict())))
    est = sc.pn_point(joint)
    assert est.n == 192
    assert est.warnings
    sim = sc.simulate(1, n=1000, reps=50, seed=3, threads=2)
    cell = next(r for r in sim["results"] if r["quantity"] == "PN" and r["stratifier"] == "S")
    assert cell["population_avar"] == pytest.approx(0.00340594990382, rel=1e-9)


def test_simulate_is_deterministic():
    a = sc.simulate(2, n=500, reps=40, seed=11, threads=1)
    b = sc.simulate(2, n=500, reps=40, seed=11, threads=4)
    assert a == b


def test_verify_and_cli():
    joint = sc.load_counts(STAGES)
    report = sc.verify(joint)
    assert report["passed"]
    status, out, err = sc.run_cli(["bounds", "--data", STAGES, "--quantity", "PN"])
    assert status == 0
    assert "[0.000, 0.779]" in out
    status, _, err = sc.run_cli(["bounds", "--data", "/missing.csv"])
    assert status == 1
    assert "/missing.csv" in err


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        sc.load_counts("/missing.csv")
    with pytest.raises(sc.Error):
        sc.pn_point(sc.load_counts(STAGES).collapse(["age"]))
