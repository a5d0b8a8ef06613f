import json
import logging

import numpy as np
import pytest

from minend import cli, hopf, levelset
from minend import sinhgordon as sg
from minend.errors import ConfigInvalid, EmptyInput

SMALL_GRID = {"u": [-1.0, 1.0], "height": 1.0, "spacing": 0.1}


def write_config(tmp_path, **data):
    data.setdefault("out", str(tmp_path / "out"))
    p = tmp_path / "config.json"
    p.write_text(json.dumps(data))
    return p


# --- parsing ---------------------------------------------------------------

@pytest.mark.parametrize("text, m, poly, laurent", [
    ("1", 0, (), ()),
    ("z^2 + 5 + 2i/z", 2, (5, 0), (2j,)),
    ("z - 3", 1, (-3,), ()),
    ("z^3 + (1-2i)*z - i/z - 0.5/z^2", 3, (0, 1 - 2j, 0), (-1j, -0.5)),
    ("2i/z + z", 1, (0,), (2j,)),
])
def test_parse_sqrt_phi(text, m, poly, laurent):
    d = hopf.validate(cli.parse_sqrt_phi(text))
    assert d.m == m
    assert d.poly == pytest.approx(poly)
    assert d.laurent == pytest.approx(laurent)


@pytest.mark.parametrize("text", ["", "z^", "3/", "q + 1", "2i/"])
def test_parse_sqrt_phi_rejects(text):
    with pytest.raises(ConfigInvalid):
        cli.parse_sqrt_phi(text)


def test_coefficient_arrays():
    cfg = cli.load_config({"sqrt_phi": {"poly": [[2, 1, 0], [0, 5, 0]], "laurent": [[1, 0, 2]]}})
    assert cfg.hopf == hopf.HopfData(2, (5, 0), (2j,))
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": {"poly": [[0.5, 1, 0]]}})


def test_levels():
    assert cli._level_value("-0.5C0", 10.0) == -5.0
    assert cli._level_value("C0", 10.0) == 10.0
    assert cli._level_value(3, 10.0) == 3.0
    with pytest.raises(ConfigInvalid):
        cli._level_value("twoC0", 1.0)


def test_config_errors():
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": "1", "colour": "red"})
    with pytest.raises(ConfigInvalid):
        cli.load_config({"stages": ["trace"]})
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": "1 + 0.3/z"})  # real residue
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": "1", "stages": ["paint"]})
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": "1", "tolerances": {"solve": -1}})
    # developed sections would be too coarse for the curvature estimates
    with pytest.raises(ConfigInvalid):
        cli.load_config({"sqrt_phi": "1", "grid": {"spacing": 0.05}})
    cli.load_config({"sqrt_phi": "1", "grid": {"spacing": 0.05}, "stages": ["solve"]})


def test_stage_order_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="minend.cli"):
        cfg = cli.load_config({"sqrt_phi": "1", "stages": ["develop", "thresholds", "solve"]})
    assert cfg.stages == ["thresholds", "solve", "develop"]
    assert "reordered" in caplog.text


def test_parser():
    args = cli.build_parser().parse_args(["trace", "--config", "c.json", "--seed-levels", "0,C0"])
    assert args.command == "trace" and args.seed_levels == "0,C0"
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["paint", "--config", "c.json"])


# --- hashing and formats ---------------------------------------------------

def test_cache_key():
    base = cli.load_config({"sqrt_phi": "z + 2i/z"})
    same = cli.load_config({"sqrt_phi": "z + 2i/z"})
    assert cli.cache_key(base.inputs()) == cli.cache_key(same.inputs())
    moved = cli.load_config({"sqrt_phi": "z + 2i/z", "out": "elsewhere"})
    assert cli.cache_key(base.inputs()) == cli.cache_key(moved.inputs())
    beta = float.fromhex((2.0).hex()) + 1e-12
    nudged = cli.load_config({"sqrt_phi": {"poly": [[1, 1, 0]], "laurent": [[1, 0, beta]]}})
    assert cli.cache_key(base.inputs()) != cli.cache_key(nudged.inputs())


def test_dump_json_is_deterministic():
    obj = {"b": [1.0, float("nan")], "a": np.float64(0.1), "c": True}
    s = cli.dump_json(obj)
    assert s == cli.dump_json(dict(reversed(list(obj.items()))))
    assert json.loads(s) == {"a": 0.1, "b": [1.0, None], "c": True}


@pytest.fixture(scope="module")
def census():
    d = hopf.HopfData(2, (5, 0), (2j,))
    th = hopf.compute_thresholds(d)
    return d, th, levelset.level_structure(d, th, 0.0)


def test_export_svg(tmp_path, census):
    d, th, ls = census
    a = cli.export_svg(ls, tmp_path / "a.svg", d.m, th)
    b = cli.export_svg(ls, tmp_path / "b.svg", d.m, th)
    assert a == b
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert a.count("<polyline") == 6
    assert "H:6 L:0" in a
    with pytest.raises(EmptyInput):
        cli.export_svg([], tmp_path / "c.svg")
    with pytest.raises(EmptyInput):
        cli.export_svg(levelset.LevelStructure(0.0, []), tmp_path / "c.svg")


def test_export_field_svg(tmp_path):
    g = sg.make_grid((0, 1), (0, 1), 0.1)
    f = sg.solve(g, sg.BoundaryCondition(bottom=0.3))
    s = cli.export_svg(f, tmp_path / "f.svg")
    assert s.startswith("<svg") and s == cli.export_svg(f, tmp_path / "g.svg")


def test_curves_csv(tmp_path, census):
    d, _, ls = census
    p = tmp_path / "curves.csv"
    cli.write_curves_csv(p, ls, d)
    lines = p.read_text().splitlines()
    assert lines[0] == "# format_version=1"
    assert lines[1] == "# C=0"
    assert lines[2] == "curve,kind,index,i,x,y,theta,re_w,im_w"
    assert len(lines) == 3 + sum(c.points.size for c in ls.curves)


# --- pipeline --------------------------------------------------------------

def test_minimal_trace_config(tmp_path):
    cfg = write_config(tmp_path, sqrt_phi="1", stages=["trace"])
    man = cli.run(cfg)
    kinds = sorted(e["kind"] for e in man.as_dict()["files"])
    assert kinds == ["curve CSV"] * len(cli.DEFAULT_LEVELS)
    assert json.loads((tmp_path / "out" / "manifest.json").read_text())["format_version"] == 1


def test_cache_rerun(tmp_path):
    cfg = write_config(tmp_path, sqrt_phi="z + 2i/z", stages=["solve"], grid=SMALL_GRID)
    data = json.loads(cfg.read_text())
    first = cli.Pipeline(cli.load_config(data))
    m1 = first.run()
    second = cli.Pipeline(cli.load_config(data))
    m2 = second.run()
    assert not first.cache_hit and second.cache_hit
    assert m1.as_dict() == m2.as_dict()
    assert m2.verify(tmp_path / "out")


def test_full_pipeline_artifacts(tmp_path):
    cfg = write_config(tmp_path, sqrt_phi="z + 2i/z", levels=["0", "2C0"],
                       grid={"u": [-3.0, 3.0], "height": 3.0, "spacing": 0.04})
    man = cli.run(cfg).as_dict()
    names = sorted(e["path"] for e in man["files"])
    assert names == ["curves_C0.csv", "curves_C1.csv", "field.csv", "figure.svg",
                     "immersion_j0.csv", "immersion_j1.csv", "report.json", "thresholds.json"]
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["m"] == 1 and len(rep["theta"]) == 4
    assert "c1_convergence_j0" in rep["verdicts"]


def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["all", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write_config(tmp_path, sqrt_phi="1 + 0.5/z")
    assert cli.main(["all", "--config", str(bad)]) == 2
    drift = write_config(tmp_path, sqrt_phi="1", grid=SMALL_GRID, tolerances={"drift": 1e-12})
    assert cli.main(["develop", "--config", str(drift), "--no-cache"]) == 3
    assert "develop" in capsys.readouterr().err
    ok = write_config(tmp_path, sqrt_phi="z^2 + 5 + 2i/z")
    assert cli.main(["validate", "--config", str(ok)]) == 0
    assert json.loads(capsys.readouterr().out)["m"] == 2
