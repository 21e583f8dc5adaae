"""Shared synthetic fixtures and geometric oracles for the test suite."""

import numpy as np

from strokeforge.image_io import GrayImage


def band_image(width, height, y0, half_width):
    """White image with a horizontal black band: ink where |q - y0| <= half_width."""
    qs = np.arange(height)[:, None]
    px = np.where(np.abs(qs - y0) <= half_width, 0.0, 1.0)
    return GrayImage(np.broadcast_to(px, (height, width)).copy())


def segment_distance_grid(width, height, ax, ay, bx, by):
    """Distance from every pixel center to the segment (a, b), shape (h, w)."""
    ps, qs = np.meshgrid(np.arange(width), np.arange(height))
    vx, vy = bx - ax, by - ay
    seg_len_sq = vx * vx + vy * vy
    if seg_len_sq == 0:
        return np.hypot(ps - ax, qs - ay)
    t = ((ps - ax) * vx + (qs - ay) * vy) / seg_len_sq
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(ps - (ax + t * vx), qs - (ay + t * vy))


def capsule_mask(width, height, ax, ay, bx, by, r):
    """Binary mask of all pixels within distance r of the segment (a, b)."""
    return segment_distance_grid(width, height, ax, ay, bx, by) <= r
