"""Pipeline tests: layout, initial spline, full restoration and overlays."""

import io
import json

import numpy as np
import pytest
from helpers import band_image

from strokeforge.descent import DescentConfig
from strokeforge.energy import EnergyParams
from strokeforge.errors import InputError
from strokeforge.image_io import BinaryMask, GrayImage, histogram_stretch, mask_png_bytes
from strokeforge.pipeline import (
    RestorationResult,
    SamplePoint,
    SamplePointSet,
    build_constraints,
    initial_spline,
    layout_nodes,
    load_points,
    merge_masks,
    overlay_strokes,
    points_from_dict,
    probe_radius,
    resolve_radii,
    restore,
    trace_csv_text,
)
from strokeforge.spline import curve_to_dict, eval_curve
from strokeforge.synth import generate, score


def simple_points(*coords, rs=None, kinds=None):
    pts = []
    for i, (x, y) in enumerate(coords):
        r = rs[i] if rs else None
        kind = kinds[i] if kinds else None
        pts.append(SamplePoint(x=float(x), y=float(y), r=r, kind=kind))
    return SamplePointSet(pts)


class TestPointsIO:
    def test_round_trip(self):
        pts = simple_points((1, 2), (30, 40), rs=[None, 5.0], kinds=["endpoint", "gap"])
        doc = pts.to_dict()
        back = points_from_dict(doc)
        assert back == pts

    def test_load_from_stream(self):
        doc = {"points": [{"x": 1, "y": 2}, {"x": 3, "y": 4, "kind": "densify"}]}
        back = load_points(io.StringIO(json.dumps(doc)))
        assert len(back.points) == 2
        assert back.points[1].kind == "densify"

    def test_single_point_rejected(self):
        with pytest.raises(InputError, match="at least 2 points"):
            simple_points((1, 2)).validate()

    def test_unknown_kind_rejected(self):
        pts = simple_points((1, 2), (3, 4), kinds=[None, "zigzag"])
        with pytest.raises(InputError, match="kind"):
            pts.validate()

    def test_out_of_bounds_rejected(self):
        pts = simple_points((5, 5), (200, 5))
        with pytest.raises(InputError, match="outside"):
            pts.validate((100, 100))


class TestLayout:
    def test_three_points(self):
        layout = layout_nodes(simple_points((0, 0), (10, 0), (20, 0)))
        assert layout.node_count == 5
        assert layout.constrained == (0, 2, 4)

    def test_two_points(self):
        layout = layout_nodes(simple_points((0, 0), (10, 0)))
        assert layout.node_count == 3
        assert layout.constrained == (0, 2)

    def test_six_points(self):
        pts = simple_points(*[(10 * k, 0) for k in range(6)])
        layout = layout_nodes(pts)
        assert layout.node_count == 11
        assert layout.constrained == (0, 2, 4, 6, 8, 10)


class TestInitialSpline:
    def test_two_points_straight(self):
        pts = simple_points((10, 20), (110, 70))
        layout = layout_nodes(pts)
        curve = initial_spline(pts, layout, [5.0, 5.0])
        ts = np.linspace(0, curve.n, 100)
        vals = eval_curve(curve, ts)
        # Distance to the connecting segment stays tiny.
        a = np.array([10.0, 20.0])
        d = np.array([100.0, 50.0])
        rel = (vals[:, :2] - a) @ d / (d @ d)
        foot = a + np.outer(np.clip(rel, 0, 1), d)
        dist = np.hypot(*(vals[:, :2] - foot).T)
        assert dist.max() <= 0.1

    def test_three_collinear(self):
        pts = simple_points((0, 0), (50, 25), (100, 50))
        layout = layout_nodes(pts)
        curve = initial_spline(pts, layout, [4.0, 4.0, 4.0])
        ts = np.linspace(0, curve.n, 100)
        vals = eval_curve(curve, ts)
        assert np.max(np.abs(vals[:, 1] - vals[:, 0] / 2)) <= 0.1

    def test_l_shape_hits_all_node_targets(self):
        pts = simple_points((40, 80), (80, 80), (80, 40))
        layout = layout_nodes(pts)
        curve = initial_spline(pts, layout, [5.0, 5.0, 5.0])
        targets = {
            0: (40, 80),
            1: (60, 80),
            2: (80, 80),
            3: (80, 60),
            4: (80, 40),
        }
        for node, (x, y) in targets.items():
            got = eval_curve(curve, float(node))
            assert got[0] == pytest.approx(x, abs=1e-9)
            assert got[1] == pytest.approx(y, abs=1e-9)

    def test_constraints_carry_explicit_radius(self):
        pts = simple_points((0, 0), (10, 0), rs=[None, 7.0])
        layout = layout_nodes(pts)
        cs = build_constraints(pts, layout)
        assert cs.entries[0].values == {"x": 0.0, "y": 0.0}
        assert cs.entries[1].values == {"x": 10.0, "y": 0.0, "r": 7.0}


class TestProbe:
    def test_band_probe_tracks_half_width(self):
        # Mean gray of a disc on an 8-px band stays below the acceptance
        # threshold until roughly a band-and-a-half of radius.
        img = band_image(200, 200, 99.5, 8)
        r = probe_radius(img, 100.0, 99.5, EnergyParams())
        assert 8.0 <= r <= 16.0

    def test_white_probe_falls_back(self):
        img = GrayImage(np.ones((100, 100)))
        assert probe_radius(img, 50, 50, EnergyParams()) == 5.0

    def test_explicit_radius_wins(self):
        img = GrayImage(np.ones((100, 100)))
        pts = simple_points((10, 10), (90, 90), rs=[2.0, None])
        radii = resolve_radii(img, pts, EnergyParams())
        assert radii[0] == 3.0  # clipped into [r_min, r_max]
        assert radii[1] == 5.0


class TestRestore:
    def test_clean_band_recovery(self):
        stroke = generate("line", 8.0, (352, 352))
        pts = SamplePointSet(
            [
                SamplePoint(*stroke.point_at(0.0), kind="endpoint"),
                SamplePoint(*stroke.point_at(1.0), kind="endpoint"),
            ]
        )
        result = restore(histogram_stretch(stroke.image), pts)
        iou, _ = score(result.mask, stroke.mask)
        assert iou >= 0.90
        assert len(result.trace) == 15
        assert result.trace[-1].f_total <= result.trace[0].f_total

    def test_s_curve_gap_recovery(self):
        from strokeforge.synth import degrade

        stroke = generate("s_curve", 8.0, (352, 352))
        damaged = degrade(stroke, 0.2, 0.05, 0, seed=7, erase_start=0.25)
        pts = SamplePointSet(
            [
                SamplePoint(*stroke.point_at(0.0), kind="endpoint"),
                SamplePoint(*stroke.point_at(0.25), r=8.0, kind="gap"),
                SamplePoint(*stroke.point_at(0.45), r=8.0, kind="gap"),
                SamplePoint(*stroke.point_at(0.75), kind="curvature-extremum"),
                SamplePoint(*stroke.point_at(1.0), kind="endpoint"),
            ]
        )
        result = restore(histogram_stretch(damaged), pts)
        iou, _ = score(result.mask, stroke.mask)
        assert iou >= 0.85

    def test_end_to_end_interpolation(self):
        stroke = generate("arc", 7.0, (256, 256))
        fractions = (0.0, 0.5, 1.0)
        pts = SamplePointSet([SamplePoint(*stroke.point_at(f)) for f in fractions])
        result = restore(histogram_stretch(stroke.image), pts)
        for k, f in enumerate(fractions):
            got = eval_curve(result.curve, float(2 * k))
            assert got[0] == pytest.approx(pts.points[k].x, abs=1e-9)
            assert got[1] == pytest.approx(pts.points[k].y, abs=1e-9)

    def test_reproducible_bytes(self):
        stroke = generate("line", 8.0, (224, 224))
        pts = SamplePointSet(
            [SamplePoint(*stroke.point_at(0.0)), SamplePoint(*stroke.point_at(1.0))]
        )
        img = histogram_stretch(stroke.image)
        blobs = []
        for _ in range(2):
            result = restore(img, pts)
            spline_json = json.dumps(curve_to_dict(result.curve))
            blobs.append((spline_json, mask_png_bytes(result.mask), trace_csv_text(result.trace)))
        assert blobs[0] == blobs[1]

    def test_config_echo(self):
        stroke = generate("line", 8.0, (224, 224))
        pts = SamplePointSet(
            [SamplePoint(*stroke.point_at(0.0)), SamplePoint(*stroke.point_at(1.0))]
        )
        result = restore(histogram_stretch(stroke.image), pts, config=DescentConfig(max_iterations=1))
        assert result.config["energy"]["c2"] == 2000.0
        assert result.config["descent"]["max_iterations"] == 1
        assert len(result.config["points"]) == 2


class TestOverlay:
    def _result_with_mask(self, bits):
        stroke = generate("line", 8.0, (224, 224))
        pts = SamplePointSet(
            [SamplePoint(*stroke.point_at(0.0)), SamplePoint(*stroke.point_at(1.0))]
        )
        res = restore(histogram_stretch(stroke.image), pts, config=DescentConfig(max_iterations=0))
        return RestorationResult(res.curve, res.trace, BinaryMask(bits), res.config)

    def test_single_identity(self):
        rng = np.random.default_rng(3)
        bits = rng.uniform(size=(40, 40)) < 0.2
        out = overlay_strokes([self._result_with_mask(bits)])
        assert np.array_equal(out.bits, bits)

    def test_disjoint_counts_add(self):
        a = np.zeros((30, 30), dtype=bool)
        b = np.zeros((30, 30), dtype=bool)
        a[2:6, 2:6] = True
        b[20:25, 20:25] = True
        out = merge_masks([BinaryMask(a), BinaryMask(b)])
        assert out.bits.sum() == a.sum() + b.sum()

    def test_crossing_inclusion_exclusion(self):
        rng = np.random.default_rng(9)
        a = rng.uniform(size=(50, 50)) < 0.3
        b = rng.uniform(size=(50, 50)) < 0.3
        out = merge_masks([BinaryMask(a), BinaryMask(b)])
        brute = np.zeros((50, 50), dtype=bool)
        for q in range(50):
            for p in range(50):
                brute[q, p] = bool(a[q, p] or b[q, p])
        assert np.array_equal(out.bits, brute)
        assert out.bits.sum() == a.sum() + b.sum() - (a & b).sum()

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            merge_masks([BinaryMask(np.ones((4, 4), bool)), BinaryMask(np.ones((5, 4), bool))])


class TestTraceCsv:
    def test_header_and_rows(self):
        from strokeforge.energy import EnergyBreakdown

        trace = [EnergyBreakdown(3.0, 1.0, 1.5, 0.5), EnergyBreakdown(2.0, 0.5, 1.0, 0.5)]
        text = trace_csv_text(trace)
        lines = text.strip().split("\n")
        assert lines[0] == "iter,f_total,f_fid_s,f_fid_r,f_curv"
        assert lines[1].startswith("0,3.0,1.0,1.5,0.5")
        assert lines[2].startswith("1,2.0,0.5,1.0,0.5")
