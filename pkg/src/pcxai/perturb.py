"""Point-shifting perturbations and noise injection.

Shifted points land on a point of the retained structure, so the perturbed
cloud keeps its point count and gains no new structure. Destinations are
drawn with a seeded generator; everything is deterministic per seed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Mechanism, PcxaiError, PointCloud, SegmentLabeling


class EmptySegmentError(PcxaiError):
    """The requested segment has no points; upstream segmentation is broken."""


class EmptyRetainedSetError(PcxaiError):
    """Nothing would be left in place, so there is no legal destination."""


class DestinationPolicy(enum.Enum):
    RANDOM_RETAINED = "random"
    CENTROID = "centroid"


@dataclass(frozen=True)
class PerturbationSpec:
    mechanism: Mechanism
    segment_id: int
    policy: DestinationPolicy = DestinationPolicy.RANDOM_RETAINED
    seed: int = 0


@dataclass(frozen=True)
class NoiseSpec:
    percent: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.percent <= 100:
            raise ValueError("noise percent must be in (0, 100]")


def segment_seed(base_seed: int, key: int) -> int:
    """Derive a per-segment (or per-trial) seed from a base seed."""
    ss = np.random.SeedSequence([int(base_seed) & (2**63 - 1), int(key)])
    return int(ss.generate_state(1, np.uint64)[0])


def select_destination(
    cloud: PointCloud,
    retained: np.ndarray,
    policy: DestinationPolicy,
    seed: int,
) -> np.ndarray:
    """Pick the shift destination.

    RANDOM_RETAINED: coordinates of one uniformly chosen retained point.
    CENTROID: arithmetic mean of the full cloud (prior-work behavior, kept
    for comparison).
    """
    if policy is DestinationPolicy.CENTROID:
        return cloud.centroid()
    retained = np.sort(np.asarray(retained, dtype=np.int64))
    if len(retained) == 0:
        raise EmptyRetainedSetError("no retained points to shift onto")
    rng = np.random.default_rng(seed)
    idx = retained[rng.integers(len(retained))]
    return cloud.points[idx].copy()


def shift_segment(
    cloud: PointCloud, labeling: SegmentLabeling, spec: PerturbationSpec
) -> PointCloud:
    """Build the perturbed cloud for one segment.

    ABSENCE moves the segment's points onto a destination chosen from the
    complement; PRESENCE keeps the segment and moves everything else onto a
    destination chosen from the segment itself. Point count and order are
    preserved.
    """
    labeling.validate_for(cloud)
    member = labeling.labels == spec.segment_id
    if not member.any():
        raise EmptySegmentError(f"segment {spec.segment_id} is empty")
    if spec.mechanism is Mechanism.ABSENCE:
        moved = member
        retained = np.flatnonzero(~member)
        if len(retained) == 0:
            raise EmptyRetainedSetError(
                f"segment {spec.segment_id} covers the whole cloud"
            )
    else:
        moved = ~member
        retained = np.flatnonzero(member)
        if not moved.any():
            return cloud
    destination = select_destination(cloud, retained, spec.policy, spec.seed)
    out = cloud.points.copy()
    out[moved] = destination
    return PointCloud(out)


def add_noise(cloud: PointCloud, spec: NoiseSpec) -> PointCloud:
    """Displace every coordinate by uniform noise scaled to the bbox diagonal.

    Each coordinate moves by an independent draw from [-p*d/2, +p*d/2] with
    p = percent/100 and d the input's bounding-box diagonal.
    """
    rng = np.random.default_rng(spec.seed)
    bound = (spec.percent / 100.0) * cloud.bounding_diagonal() / 2.0
    noise = rng.uniform(-bound, bound, size=cloud.points.shape)
    return PointCloud(cloud.points + noise)
