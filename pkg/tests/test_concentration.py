import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bjlab import (OmegaSet, PhaseField, PhaseGrid, PhaseSpacePoint, WavepacketSum, blowup_scan,
                   concentration_ratio, delta_scan, density_point, lb_corollary,
                   lp_norm_on_omega, make_f_R, make_f_rR, time_frequency_shift,
                   translation_vanishing)
from bjlab.concentration import ScanTable, parse_p

UNIT4 = OmegaSet.cube(2, 1.0)


def test_omega_measure_and_diameter():
    om = OmegaSet(4, [[0, 0, 0, 0], [2, 0, 0, 0]], [[1, 1, 1, 1], [4, 2, 2, 2]])
    assert om.measure == pytest.approx(1 + 16)
    assert om.diameter == pytest.approx(math.sqrt(16 + 4 + 4 + 4))


@pytest.mark.parametrize("obj, match", [
    ({"dimension": 4, "boxes": []}, "at least one box"),
    ({"dimension": 3, "boxes": [{"lo": [0, 0, 0], "hi": [1, 1, 1]}]}, "even"),
    ({"dimension": 4, "boxes": [{"lo": [0, 0, 0, 0], "hi": [1, 0, 1, 1]}]}, "non-degenerate"),
    ({"dimension": 4, "boxes": [{"lo": [0, 0, 0, 0], "hi": [2, 2, 2, 2]},
                                {"lo": [1, 1, 1, 1], "hi": [3, 3, 3, 3]}]}, "overlap"),
    ({"dimension": 4, "boxes": [{"lo": [0, 0, 0, 0], "hi": [math.inf, 1, 1, 1]}]}, "finite"),
    ({"dimension": 4, "boxes": [{"lo": [0, 0], "hi": [1, 1]}]}, "length"),
])
def test_omega_validation(obj, match):
    with pytest.raises(ValueError, match=match):
        OmegaSet.from_dict(obj)


def test_touching_boxes_are_allowed():
    om = OmegaSet(4, [[0, 0, 0, 0], [1, 0, 0, 0]], [[1, 1, 1, 1], [2, 1, 1, 1]])
    assert om.measure == 2.0


boxes = st.lists(st.tuples(st.floats(-10, 10), st.floats(0.1, 3.0)), min_size=4, max_size=4)


@settings(max_examples=50, deadline=None)
@given(corners=st.lists(boxes, min_size=1, max_size=3))
def test_omega_json_round_trip(corners):
    lo, hi = [], []
    for i, c in enumerate(corners):
        # separate boxes along the first axis so they stay disjoint
        lo.append([c[0][0] + 30.0 * i] + [a for a, _ in c[1:]])
        hi.append([lo[-1][0] + c[0][1]] + [a + w for a, w in c[1:]])
    om = OmegaSet(4, lo, hi)
    back = OmegaSet.from_json(om.to_json())
    assert back == om
    assert json.loads(back.to_json()) == json.loads(om.to_json())


def test_density_point_examples():
    assert density_point(OmegaSet.box([0] * 4, [1] * 4)).as_array().tolist() == [0.5] * 4
    om = OmegaSet(4, [[0, 0, 0, 0], [5, 5, 5, 5]], [[1, 1, 1, 1], [5 + 2 ** 0.75] * 4])
    assert density_point(om).as_array() == pytest.approx([5 + 2 ** 0.75 / 2] * 4)
    tie = OmegaSet(4, [[3, 3, 3, 3], [0, 0, 0, 0]], [[4, 4, 4, 4], [1, 1, 1, 1]])
    assert density_point(tie).as_array().tolist() == [3.5] * 4


def test_contains_and_translate():
    om = UNIT4.translate(PhaseSpacePoint((1.0, 0.0), (0.0, 2.0)))
    assert om.contains([[1.5, 0.5, 0.0, 2.5]])[0]
    assert not om.contains([[-0.5, 0.0, 0.0, 0.0]])[0]


def test_lp_norm_of_constant_field():
    grid = PhaseGrid.covering(UNIT4, 4)
    fld = PhaseField(grid, np.ones(grid.points().shape[0]))
    assert lp_norm_on_omega(fld, UNIT4, 2) == pytest.approx(4.0, rel=1e-15)
    assert lp_norm_on_omega(fld, UNIT4, math.inf) == 1.0
    assert lp_norm_on_omega(fld, UNIT4, "inf") == 1.0


def test_lp_norm_matches_direct_summation():
    rng = np.random.default_rng(5)
    grid = PhaseGrid((-1.0, -2.0, 0.0, 0.0), (2.0, 2.0, 1.0, 3.0), (5, 6, 4, 7))
    vals = rng.standard_normal(grid.points().shape[0]) + 1j * rng.standard_normal(grid.points().shape[0])
    fld = PhaseField(grid, vals)
    om = OmegaSet(4, [[-1, -2, 0, 0], [1, -2, 0, 0]], [[0.5, 0, 1, 3], [2, 2, 1, 1]])
    pts = grid.points()
    cell = 3 / 5 * 4 / 6 * 1 / 4 * 3 / 7
    total = 0.0
    for z, v in zip(pts, vals):
        inside = any(all(a <= c <= b for a, b, c in zip(lo, hi, z)) for lo, hi in zip(om.lo, om.hi))
        if inside:
            total += abs(v) ** 3
    assert lp_norm_on_omega(fld, om, 3) == pytest.approx((cell * total) ** (1 / 3), rel=1e-13)


def test_lp_norm_rejects_disjoint_omega():
    grid = PhaseGrid.covering(UNIT4, 4)
    fld = PhaseField(grid, np.ones(grid.points().shape[0]))
    with pytest.raises(ValueError, match="does not meet"):
        lp_norm_on_omega(fld, OmegaSet.cube(2, 0.5, [10, 10, 10, 10]), 2)


@pytest.mark.parametrize("p", ["0.5", 0, -1, "nan"])
def test_parse_p_rejects(p):
    with pytest.raises(ValueError):
        parse_p(p)


def test_gaussian_ratio_respects_l2_bound():
    g = WavepacketSum.gaussian(2, scale=2 ** 0.5)
    rep = concentration_ratio(g, UNIT4, 2, n=8)
    assert 0.5 < rep.ratio <= 1.0 + 1e-6
    assert rep.ratio == pytest.approx(rep.value / g.norm_squared(), rel=1e-15)
    assert rep.value >= 0


def test_zero_signal_rejected():
    z = WavepacketSum(np.zeros((1, 4)), np.array([0.0]))
    with pytest.raises(ValueError, match="nonzero"):
        concentration_ratio(z, UNIT4, 2)


def test_ratio_is_covariant():
    f = make_f_rR(2, 0.5, 1.5)
    z0 = PhaseSpacePoint((0.7, -0.4), (0.25, 1.0))
    a = concentration_ratio(f, UNIT4, 3, n=4)
    b = concentration_ratio(time_frequency_shift(f, z0), UNIT4.translate(z0), 3, n=4)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-9)


def test_annulus_at_density_point_beats_corollary():
    R = 12.0
    om = OmegaSet.cube(2, 1.0, [0.5, 0.5, 0.5, 0.5])
    z0 = density_point(om)
    f = time_frequency_shift(make_f_R(2, R), z0)
    rep = concentration_ratio(f, om, math.inf, n=3)  # the centre cell is a grid point
    assert rep.ratio >= lb_corollary(2, R).value / (2 * math.pi * math.log(R))


def test_blowup_scan_center_ratios():
    table = blowup_scan(2, math.inf, UNIT4, [math.e, math.e ** 2], n=5)
    np.testing.assert_allclose(table.column("center_ratio"), [1.0, 2.0], atol=1e-9)
    assert table.fit["increasing"] is True
    assert table.columns == ("R", "value", "ratio", "center_ratio", "cells")


def test_blowup_scan_rejects_subcritical():
    with pytest.raises(ValueError, match="subcritical"):
        blowup_scan(2, 4.0, UNIT4, [10.0])
    with pytest.raises(ValueError, match="subcritical"):
        blowup_scan(3, 6.0, OmegaSet.cube(3), [10.0])
    with pytest.raises(ValueError, match="5 grid points"):
        blowup_scan(2, math.inf, UNIT4, [10.0], n=3)


def test_delta_scan_examples():
    t = delta_scan(UNIT4, [0.1, 1 / 3])
    assert t.column("ratio")[0] == pytest.approx(math.log(8), rel=1e-10)
    assert t.column("ratio")[1] == 0.0
    assert t.column("normalized")[0] == pytest.approx(math.log(8) / math.log(10), rel=1e-10)


@pytest.mark.parametrize("delta", [0.0, 0.34, 1.0])
def test_delta_scan_rejects(delta):
    with pytest.raises(ValueError, match="delta"):
        delta_scan(UNIT4, [delta])


def test_translation_vanishing_gaussian():
    g = WavepacketSum.gaussian(2, scale=2 ** 0.5)
    t = translation_vanishing(g, UNIT4, 2, [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0], n=6)
    vals = t.column("value")
    assert vals[0] > 0.5
    assert vals[-2] < 1e-6
    assert t.fit["tail_nonincreasing"] is True
    assert t.fit["last_value"] == vals[-1]


def test_translation_vanishing_rejects_supercritical():
    g = WavepacketSum.gaussian(3)
    with pytest.raises(ValueError, match="subcritical"):
        translation_vanishing(g, OmegaSet.cube(3), 6.0, [0.0])


def test_scan_table_csv(tmp_path):
    t = ScanTable(("a", "b"), ((1, 0.5), (2, math.inf)), {"ok": True, "slope": 0.25})
    path = tmp_path / "t.csv"
    t.to_csv(path)
    assert path.read_text().splitlines() == ["a,b,ok,slope", "1,0.5,true,0.25", "2,inf,true,0.25"]


def test_phase_field_csv(tmp_path):
    grid = PhaseGrid((0, 0), (1, 1), 2)
    fld = PhaseField(grid, np.array([1, 2j, 3, 4], dtype=complex), {"signal": "s"})
    path = tmp_path / "f.csv"
    fld.to_csv(path)
    lines = path.read_text().splitlines()
    assert json.loads(lines[0][2:])["signal"] == "s"
    assert lines[1] == "x1,xi1,re,im"
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    np.testing.assert_array_equal(data[:, 2] + 1j * data[:, 3], fld.values)
