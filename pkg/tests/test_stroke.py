"""Disc rasterization and gray-mass tests against brute-force oracles."""

import math

import numpy as np
import pytest
from helpers import band_image, capsule_mask

from strokeforge.image_io import GrayImage
from strokeforge.spline import SplineCurve, constant_curve
from strokeforge.stroke import (
    Disc,
    disc_mean_gray,
    disc_pixels,
    gray_mass,
    render_centers,
    render_stroke,
)


def brute_force_disc(disc, bounds):
    """Double-loop membership test over the bounding box."""
    out = []
    x, y, r = disc.x, disc.y, disc.r
    for p in range(math.floor(x - r) - 1, math.ceil(x + r) + 2):
        for q in range(math.floor(y - r) - 1, math.ceil(y + r) + 2):
            if (p - x) ** 2 + (q - y) ** 2 <= r * r:
                out.append((p, q, 0 <= p < bounds[0] and 0 <= q < bounds[1]))
    return out


class TestDiscPixels:
    def test_tiny_disc_single_pixel(self):
        got = list(disc_pixels(Disc(10.0, 12.0, 0.4), (32, 32)))
        assert got == [(10, 12, True)]

    def test_count_near_area_and_matches_brute_force(self):
        disc = Disc(50.0, 50.0, 10.0)
        got = sorted(list(disc_pixels(disc, (101, 101))))
        want = sorted(brute_force_disc(disc, (101, 101)))
        assert got == want
        assert abs(len(got) - math.pi * 100) <= 0.04 * math.pi * 100

    def test_fully_outside_all_tagged(self):
        got = list(disc_pixels(Disc(-20.0, -20.0, 5.0), (10, 10)))
        assert len(got) > 0
        assert all(not in_b for _, _, in_b in got)

    def test_off_center_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            disc = Disc(*rng.uniform(0, 30, size=2), float(rng.uniform(0.3, 9)))
            got = sorted(list(disc_pixels(disc, (30, 30))))
            want = sorted(brute_force_disc(disc, (30, 30)))
            assert got == want


class TestGrayMass:
    def test_all_black_zero(self):
        img = GrayImage(np.zeros((64, 64)))
        assert gray_mass(img, Disc(32, 32, 10)) == 0.0

    def test_all_white_equals_count(self):
        img = GrayImage(np.ones((64, 64)))
        disc = Disc(32, 32, 10)
        count = sum(1 for _ in disc_pixels(disc, (64, 64)))
        assert gray_mass(img, disc) == pytest.approx(count)

    def test_band_fixture_versus_circular_segment_area(self):
        # Disc r=12 centered on a black band of half-width 8: the white mass is
        # the two circular segments, (theta - sin theta) * r^2. The band axis
        # sits on a half-integer row so the pixel raster is exactly 16 rows.
        img = band_image(200, 200, 99.5, 8)
        got = gray_mass(img, Disc(100.0, 99.5, 12.0))
        theta = 2 * math.acos(8.0 / 12.0)
        want = (theta - math.sin(theta)) * 144.0
        assert abs(got - want) <= 0.10 * want

    def test_out_of_bounds_counts_as_background(self):
        img = GrayImage(np.zeros((20, 20)))
        inside = gray_mass(img, Disc(10, 10, 5))
        straddling = gray_mass(img, Disc(0, 10, 5))
        fully_out = gray_mass(img, Disc(-40, 10, 5))
        assert inside == 0.0
        assert straddling > 0.0
        assert fully_out == pytest.approx(sum(1 for _ in disc_pixels(Disc(-40, 10, 5), (20, 20))))

    def test_below_radius_floor_zero(self):
        img = GrayImage(np.ones((8, 8)))
        assert gray_mass(img, Disc(4, 4, 0.2)) == 0.0

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(12)
        img = GrayImage(rng.uniform(0, 1, size=(60, 60)))
        radii = np.sort(rng.uniform(0.3, 20, size=10))
        masses = [gray_mass(img, Disc(30.2, 29.7, r)) for r in radii]
        assert all(a <= b + 1e-12 for a, b in zip(masses, masses[1:]))

    def test_bounded_by_pixel_count(self):
        rng = np.random.default_rng(14)
        img = GrayImage(rng.uniform(0, 1, size=(40, 40)))
        for _ in range(10):
            disc = Disc(*rng.uniform(-5, 45, size=2), float(rng.uniform(0.3, 12)))
            count = sum(1 for _ in disc_pixels(disc, (40, 40)))
            assert gray_mass(img, disc) <= count + 1e-9

    def test_mean_gray(self):
        img = GrayImage(np.full((32, 32), 0.25))
        assert disc_mean_gray(img, Disc(16, 16, 6)) == pytest.approx(0.25)


class TestRenderStroke:
    def test_constant_curve_equals_single_disc(self):
        curve = constant_curve(4, 20.0, 22.0, 7.0)
        mask = render_stroke(curve, 16, (48, 48))
        single = render_centers([20.0], [22.0], [7.0], (48, 48))
        assert np.array_equal(mask.bits, single.bits)

    def test_straight_sweep_matches_capsule(self):
        # Horizontal sweep with constant radius: rectangle plus semicircular
        # caps. No false positives are possible; omissions hug the boundary.
        ax, ay, bx, by, r = 20.0, 40.0, 100.0, 40.0, 9.0
        j = np.arange(-1, 5, dtype=float)  # 4 nodes, linear precision
        xs = ax + (bx - ax) * j / 3.0
        cps = np.stack([xs, np.full_like(xs, ay), np.full_like(xs, r)], axis=1)
        curve = SplineCurve(cps, 4)
        mask = render_stroke(curve, 32, (128, 80)).bits
        truth = capsule_mask(128, 80, ax, ay, bx, by, r)
        assert not np.any(mask & ~truth)
        missing = truth & ~mask
        if np.any(missing):
            from helpers import segment_distance_grid

            dist = segment_distance_grid(128, 80, ax, ay, bx, by)
            assert dist[missing].min() > r - 1.0

    def test_union_equals_or(self):
        c1 = constant_curve(3, 15.0, 15.0, 5.0)
        c2 = constant_curve(3, 40.0, 30.0, 8.0)
        m1 = render_stroke(c1, 8, (64, 64)).bits
        m2 = render_stroke(c2, 8, (64, 64)).bits
        both = render_centers([15.0, 40.0], [15.0, 30.0], [5.0, 8.0], (64, 64)).bits
        assert np.array_equal(m1 | m2, both)

    def test_sampling_saturation(self):
        # Once center spacing drops below half a pixel, doubling the sampling
        # rate leaves the mask unchanged.
        rng = np.random.default_rng(31)
        for _ in range(10):
            node_count = int(rng.integers(3, 6))
            cps = rng.uniform(20, 80, size=(node_count + 2, 3))
            cps[:, 2] = rng.uniform(3, 8, size=node_count + 2)
            curve = SplineCurve(cps, node_count)
            # Estimate max speed to pick a spacing-saturating rate.
            ts = np.linspace(0, curve.n, 200)
            from strokeforge.spline import eval_derivatives

            xd, yd, _, _, _ = eval_derivatives(curve, ts)
            speed = float(np.max(np.hypot(xd, yd)))
            spi = max(2, int(math.ceil(speed / 0.5)) * 2)
            a = render_stroke(curve, spi, (100, 100)).bits
            b = render_stroke(curve, 2 * spi, (100, 100)).bits
            assert np.array_equal(a, b)
