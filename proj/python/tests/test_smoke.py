import json
import math
import pathlib

import pytest

import hypercert

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"

QUICK = {
    "seed": 7,
    "model": {"family": "doubling"},
    "max_period": 6,
    "shadowing": {"trials": 10},
    "conjugacy": {"resolution": 4096, "holder_pairs": 200},
    "adapted_metric": {"grid": 4096},
}


def test_version():
    assert hypercert.__version__.count(".") == 2


def test_doubling_model():
    d = hypercert.MapModel.doubling()
    assert d.dim == 1 and d.degree == 2
    assert d([0.3])[0] == pytest.approx(0.6)
    assert d.jacobian([0.1]) == [[2.0]]


def test_cat_model():
    c = hypercert.MapModel.cat_map()
    assert c([0.1, 0.2]) == pytest.approx([0.4, 0.3])
    spec = hypercert.lyapunov_spectrum(c, [0.2, 0.7], 5000)
    assert spec[0] == pytest.approx(math.log((3 + math.sqrt(5)) / 2), rel=1e-3)


def test_periodic_orbit_counts():
    orbits = hypercert.periodic_orbits(hypercert.MapModel.doubling(), 4)
    by_period = {}
    for o in orbits:
        by_period[o["period"]] = by_period.get(o["period"], 0) + 1
    # necklace counts for two symbols
    assert by_period == {1: 1, 2: 1, 3: 2, 4: 3}


def test_hyperbolic_times_and_pliss():
    assert hypercert.hyperbolic_times([-1.5, 0.0, -2.0, 1.0], 0.5) == [1, 3]
    c = hypercert.pliss_density([-1.5] * 50, 0.3, 0.5)
    assert c["actual"] == 50
    assert c["actual"] >= c["guaranteed"]


def test_certify_report_matches_schema():
    jsonschema = pytest.importorskip("jsonschema")
    referencing = pytest.importorskip("referencing")
    report = hypercert.certify(QUICK)
    assert report["verdict"]["verdict"] == "expanding"
    assert report["checks"]["nue"]["constants"]["varsigma"] == 0.5

    config_schema = json.loads((SCHEMAS / "config.schema.json").read_text())
    report_schema = json.loads((SCHEMAS / "report.schema.json").read_text())
    registry = referencing.Registry().with_resources(
        [(s["$id"], referencing.Resource.from_contents(s)) for s in (config_schema, report_schema)]
    )
    jsonschema.Draft7Validator(report_schema, registry=registry).validate(report)
    jsonschema.Draft7Validator(config_schema).validate(QUICK)


def test_certify_is_deterministic():
    a = hypercert.certify_json(json.dumps(QUICK))
    b = hypercert.certify_json(json.dumps(QUICK))
    assert a == b
    assert hypercert.certify(QUICK, seed=8)["config"]["seed"] == 8


def test_bad_config_names_field():
    bad = dict(QUICK, max_period=0)
    with pytest.raises(ValueError, match="max_period"):
        hypercert.certify(bad)


def test_certify_file_writes_reports(tmp_path):
    cfg = tmp_path / "quick.json"
    cfg.write_text(json.dumps(dict(QUICK, output={"name": "quick"})))
    paths = hypercert.certify_file(str(cfg), str(tmp_path / "out"))
    assert any(p.endswith("quick.report.json") for p in paths)
    for p in paths:
        assert pathlib.Path(p).stat().st_size > 0


def test_lift_plot():
    svg = hypercert.lift_plot_svg(hypercert.MapModel.perturbed_doubling(1.5))
    assert svg.startswith("<svg")
    assert 'class="diagonal"' in svg
    with pytest.raises(ValueError):
        hypercert.lift_plot_svg(hypercert.MapModel.cat_map())


def test_selftest_subset():
    results = hypercert.selftest([1, 2])
    assert [r["id"] for r in results] == [1, 2]
    assert all(r["pass"] for r in results)
