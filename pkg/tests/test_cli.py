import csv
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from bjlab import OmegaSet
from bjlab.cli import COMMANDS, RunConfig, main, parse_R


@pytest.fixture
def unit_box(tmp_path):
    path = tmp_path / "unit_box.json"
    path.write_text(OmegaSet.box([0] * 4, [1] * 4).to_json())
    return str(path)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_parse_R():
    assert parse_R("e,e2,e^3") == pytest.approx((math.e, math.e ** 2, math.e ** 3), rel=1e-15)
    assert parse_R("10, 30.5") == (10.0, 30.5)
    with pytest.raises(ValueError):
        parse_R("ten")


@settings(max_examples=50, deadline=None)
@given(command=st.sampled_from(COMMANDS), d=st.integers(1, 4),
       p=st.one_of(st.just(math.inf), st.floats(1.0, 50.0)), seed=st.integers(0, 2 ** 31),
       threads=st.integers(1, 8),
       R=st.one_of(st.none(), st.lists(st.floats(1.5, 1e4), min_size=1, max_size=4)))
def test_config_round_trip(command, d, p, seed, threads, R):
    cfg = RunConfig(command, "out.csv", d=d, p=p, seed=seed, threads=threads,
                    R=None if R is None else tuple(R))
    obj = json.loads(json.dumps(cfg.to_dict()))
    assert RunConfig.from_dict(obj) == cfg
    if math.isinf(p):
        assert obj["p"] == "inf"


@pytest.mark.parametrize("kw, match", [({"command": "nope"}, "subcommand"), ({"d": 0}, "--d"),
                                       ({"threads": 0}, "threads"), ({"p": 0.5}, "p")])
def test_config_validation(kw, match):
    base = {"command": "ratio", "out": "x"}
    with pytest.raises(ValueError, match=match):
        RunConfig(**{**base, **kw})


def test_scan_blowup_center_ratios(unit_box, tmp_path):
    out = str(tmp_path / "blowup.csv")
    assert main(["scan-blowup", "--d", "2", "--p", "inf", "--omega", unit_box,
                 "--R", "e,e2,e3", "--out", out]) == 0
    rows = read_csv(out)
    assert [float(r["center_ratio"]) for r in rows] == pytest.approx([1.0, 2.0, 3.0], abs=1e-9)
    man = json.loads(open(out + ".manifest.json", encoding="utf-8").read())
    assert man["config"]["p"] == "inf" and man["config"]["command"] == "scan-blowup"
    assert set(man["versions"]) == {"bjlab", "python", "numpy", "scipy"}
    assert man["wall_time_s"] >= 0


def test_outputs_are_byte_identical_across_threads(unit_box, tmp_path):
    outs = []
    for threads in ("1", "3"):
        out = str(tmp_path / f"ratio{threads}.csv")
        assert main(["ratio", "--omega", unit_box, "--p", "3", "--R", "5", "--grid", "3",
                     "--threads", threads, "--out", out]) == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]
    for threads in ("1", "2"):
        out = str(tmp_path / f"opt{threads}.json")
        assert main(["optimize", "--omega", unit_box, "--p", "2", "--dict-size", "2", "--grid", "3",
                     "--restarts", "2", "--seed", "3", "--threads", threads, "--out", out]) == 0
        outs.append(open(out, "rb").read())
    assert outs[2] == outs[3]


def test_empty_omega_names_invariant(tmp_path, capsys):
    bad = tmp_path / "empty.json"
    bad.write_text('{"dimension": 4, "boxes": []}')
    assert main(["ratio", "--omega", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    assert "at least one box" in capsys.readouterr().err


def test_unreadable_omega(tmp_path, capsys):
    assert main(["ratio", "--omega", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2
    assert "cannot read Omega file" in capsys.readouterr().err


def test_supercritical_optimize_rejected(unit_box, tmp_path, capsys):
    assert main(["optimize", "--omega", unit_box, "--p", "inf", "--out", str(tmp_path / "o")]) != 0
    assert "no maximizer" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--out", "x"])
    assert exc.value.code != 0


def test_verify_bounds_all_pass(tmp_path):
    out = str(tmp_path / "verify.csv")
    assert main(["verify-bounds", "--seed", "7", "--trials", "200", "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 600
    assert all(r["pass"] == "true" for r in rows)


def test_smoke_other_subcommands(unit_box, tmp_path):
    sym = tmp_path / "sym.json"
    sym.write_text(json.dumps({"omega": OmegaSet.cube(1, 2.0).to_dict(), "grid": 8,
                               "kind": "gaussian"}))
    runs = {
        "transform": ["--omega", unit_box, "--grid", "2", "--R", "5"],
        "scan-delta": ["--omega", unit_box, "--deltas", "0.1,0.01"],
        "translation-vanishing": ["--omega", unit_box, "--p", "2", "--grid", "3",
                                  "--shifts", "0,4"],
        "opbj-probe": ["--symbol", str(sym), "--trials", "5", "--q", "1.5"],
    }
    for cmd, args in runs.items():
        out = str(tmp_path / f"{cmd}.csv")
        assert main([cmd, *args, "--out", out]) == 0, cmd
        assert open(out, encoding="utf-8").read().strip()
        assert json.loads(open(out + ".manifest.json", encoding="utf-8").read())["output"] == out
    rows = read_csv(str(tmp_path / "opbj-probe.csv"))
    assert len(rows) == 5 and rows[0]["verdict"] == "bounded"
    assert [float(r["ratio"]) for r in read_csv(str(tmp_path / "scan-delta.csv"))][0] == \
        pytest.approx(math.log(8), rel=1e-10)
