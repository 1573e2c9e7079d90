"""Seeded synthetic point clouds: a 4-class training suite plus labeled
chair / airplane / motorbike scenario shapes.

Shapes live roughly in [-1, 1]^3; the classifier applies no normalization
of its own, so generators keep scales comparable.
"""
from __future__ import annotations

import numpy as np

from .core import PointCloud, SegmentLabeling

CLASS_NAMES = ["sphere", "box", "plane", "line"]


def _unit_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sphere_cloud(n: int, rng: np.random.Generator) -> np.ndarray:
    radius = rng.uniform(0.5, 1.0)
    return radius * _unit_sphere(n, rng) + rng.uniform(-0.1, 0.1, 3)


def box_cloud(n: int, rng: np.random.Generator) -> np.ndarray:
    half = rng.uniform(0.4, 0.9, 3)
    face = rng.integers(0, 6, n)
    pts = rng.uniform(-1.0, 1.0, (n, 3)) * half
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    pts[np.arange(n), axis] = sign * half[axis]
    return pts + rng.uniform(-0.1, 0.1, 3)


def plane_cloud(n: int, rng: np.random.Generator) -> np.ndarray:
    pts = rng.uniform(-1.0, 1.0, (n, 3))
    pts[:, 2] = rng.uniform(-0.02, 0.02, n)
    # random tilt
    angle = rng.uniform(0, np.pi)
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    return pts @ rot.T


def line_cloud(n: int, rng: np.random.Generator) -> np.ndarray:
    direction = _unit_sphere(1, rng)[0]
    t = rng.uniform(-1.0, 1.0, n)
    jitter = rng.uniform(-0.02, 0.02, (n, 3))
    return t[:, None] * direction + jitter


_GENERATORS = [sphere_cloud, box_cloud, plane_cloud, line_cloud]


def make_suite(
    n_per_class: int = 50, n_points: int = 256, seed: int = 0
) -> list[tuple[PointCloud, int]]:
    """The 4-class shape suite: (cloud, class index) pairs, seeded."""
    rng = np.random.default_rng(seed)
    suite = []
    for cls, gen in enumerate(_GENERATORS):
        for _ in range(n_per_class):
            suite.append((PointCloud(gen(n_points, rng)), cls))
    return suite


def _slab(
    rng: np.random.Generator, n: int, center, half
) -> np.ndarray:
    return np.asarray(center) + rng.uniform(-1, 1, (n, 3)) * np.asarray(half)


def chair_cloud(n_points: int = 1024, seed: int = 0) -> tuple[PointCloud, SegmentLabeling]:
    """Seat + backrest + four legs, labeled {0: seat, 1: back, 2: legs}."""
    rng = np.random.default_rng(seed)
    n_seat = n_points // 3
    n_back = n_points // 3
    n_legs = n_points - n_seat - n_back
    seat = _slab(rng, n_seat, [0, 0, 0], [0.5, 0.5, 0.03])
    back = _slab(rng, n_back, [0, -0.5, 0.5], [0.5, 0.03, 0.5])
    legs = []
    per_leg = n_legs // 4
    for i, (x, y) in enumerate([(-0.45, -0.45), (0.45, -0.45), (-0.45, 0.45), (0.45, 0.45)]):
        m = n_legs - 3 * per_leg if i == 3 else per_leg
        legs.append(_slab(rng, m, [x, y, -0.4], [0.04, 0.04, 0.4]))
    pts = np.vstack([seat, back] + legs)
    labels = np.concatenate(
        [np.zeros(n_seat), np.ones(n_back), np.full(n_legs, 2)]
    ).astype(np.int64)
    names = {0: "seat", 1: "back", 2: "legs"}
    return PointCloud(pts), SegmentLabeling(labels, names)


def airplane_cloud(n_points: int = 1024, seed: int = 0) -> tuple[PointCloud, SegmentLabeling]:
    """Fuselage + two wings + tail, labeled {0: body, 1: wings, 2: tail}.

    The two wings share one label so the refinement step has something to
    split.
    """
    rng = np.random.default_rng(seed)
    n_body = n_points // 2
    n_wing = n_points // 4
    n_tail = n_points - n_body - n_wing
    body = _slab(rng, n_body, [0, 0, 0], [1.0, 0.08, 0.08])
    half = n_wing // 2
    wing_l = _slab(rng, half, [0.1, -0.6, 0], [0.15, 0.45, 0.02])
    wing_r = _slab(rng, n_wing - half, [0.1, 0.6, 0], [0.15, 0.45, 0.02])
    tail = _slab(rng, n_tail, [-0.9, 0, 0.2], [0.1, 0.2, 0.2])
    pts = np.vstack([body, wing_l, wing_r, tail])
    labels = np.concatenate(
        [np.zeros(n_body), np.ones(n_wing), np.full(n_tail, 2)]
    ).astype(np.int64)
    names = {0: "body", 1: "wings", 2: "tail"}
    return PointCloud(pts), SegmentLabeling(labels, names)


def motorbike_cloud(n_points: int = 1024, seed: int = 0) -> tuple[PointCloud, SegmentLabeling]:
    """Frame + two wheels, labeled {0: frame, 1: wheels}."""
    rng = np.random.default_rng(seed)
    n_frame = n_points // 2
    n_wheels = n_points - n_frame
    frame = _slab(rng, n_frame, [0, 0, 0.2], [0.7, 0.06, 0.15])
    half = n_wheels // 2

    def wheel(m: int, cx: float) -> np.ndarray:
        angle = rng.uniform(0, 2 * np.pi, m)
        r = 0.3 + rng.uniform(-0.03, 0.03, m)
        x = cx + r * np.cos(angle)
        z = -0.2 + r * np.sin(angle)
        y = rng.uniform(-0.03, 0.03, m)
        return np.stack([x, y, z], axis=1)

    pts = np.vstack([frame, wheel(half, -0.7), wheel(n_wheels - half, 0.7)])
    labels = np.concatenate([np.zeros(n_frame), np.ones(n_wheels)]).astype(np.int64)
    names = {0: "frame", 1: "wheels"}
    return PointCloud(pts), SegmentLabeling(labels, names)
