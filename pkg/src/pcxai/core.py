"""Point-cloud data model, label handling, and file IO.

File formats:
  points   -- UTF-8 text, one point per line, whitespace-separated decimals
              (at least x y z; extra columns ignored)
  labels   -- UTF-8 text, one non-negative integer per line, parallel to points
  PLY      -- ASCII point cloud with per-vertex uchar colors
  CSV      -- per-segment saliency attributions
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class PcxaiError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PcxaiError):
    """A data file could not be parsed."""


class Mechanism(enum.Enum):
    ABSENCE = "absence"
    PRESENCE = "presence"


# Number of significant digits used when printing coordinates; enough for a
# float64 to round-trip exactly.
_FLOAT_FMT = "{:.17g}"


@dataclass(frozen=True)
class PointCloud:
    """Ordered list of 3D points. Index i is stable across perturbations."""

    points: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"expected (n, 3) points, got shape {pts.shape}")
        if len(pts) < 1:
            raise ValueError("point cloud must contain at least one point")
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def bounding_diagonal(self) -> float:
        """Length of the axis-aligned bounding-box diagonal."""
        extent = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.linalg.norm(extent))

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


@dataclass(frozen=True)
class SegmentLabeling:
    """Per-point integer segment ids plus an optional id -> part-name table."""

    labels: np.ndarray  # (n,) int
    names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or len(lab) == 0:
            raise ValueError("labels must be a non-empty 1-d sequence")
        if (lab < 0).any():
            raise ValueError("segment ids must be non-negative")
        lab = lab.copy()
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return len(self.labels)

    def segment_ids(self) -> list[int]:
        return [int(s) for s in np.unique(self.labels)]

    def indices_of(self, segment_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == segment_id)

    def name_of(self, segment_id: int) -> str:
        return self.names.get(int(segment_id), f"segment_{int(segment_id)}")

    def validate_for(self, cloud: PointCloud) -> None:
        if len(self.labels) != len(cloud):
            raise ValueError(
                f"labeling has {len(self.labels)} entries for a "
                f"{len(cloud)}-point cloud"
            )


@dataclass(frozen=True)
class CategoryMetadata:
    """One shape category: name, class index, and its number of parts."""

    name: str
    class_index: int
    part_count: int

    def __post_init__(self):
        if not 2 <= self.part_count <= 6:
            raise ValueError(f"part count {self.part_count} outside [2, 6]")


@dataclass(frozen=True)
class SaliencyMap:
    """Per-segment attributions for one mechanism and target class.

    ``errors`` records segments whose perturbation was degenerate (for
    example, removing the only segment leaves nothing retained); such
    segments carry no attribution.
    """

    mechanism: Mechanism
    per_segment: dict[int, float]
    target_class: int
    labels: np.ndarray  # labeling the map was computed on
    errors: dict[int, str] = field(default_factory=dict)

    def per_point(self) -> np.ndarray:
        """Attribution of each point = attribution of its segment.

        Segments listed in ``errors`` contribute 0.
        """
        out = np.zeros(len(self.labels), dtype=np.float64)
        for sid, value in self.per_segment.items():
            out[self.labels == sid] = value
        return out

    def top_segment(self) -> int:
        """Segment with the highest attribution (most influential)."""
        if not self.per_segment:
            raise ValueError("saliency map has no attributions")
        return max(sorted(self.per_segment), key=lambda s: self.per_segment[s])


def read_points(path) -> PointCloud:
    """Read a points file: one ``x y z`` triple per non-empty line."""
    pts = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise ParseError(f"{path}:{lineno}: expected at least 3 columns")
            try:
                pts.append([float(parts[0]), float(parts[1]), float(parts[2])])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not pts:
        raise ParseError(f"{path}: no points found")
    return PointCloud(np.array(pts, dtype=np.float64))


def write_points(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in cloud.points:
            fh.write(
                f"{_FLOAT_FMT.format(x)} {_FLOAT_FMT.format(y)} "
                f"{_FLOAT_FMT.format(z)}\n"
            )


def read_labels(path, cloud: PointCloud) -> SegmentLabeling:
    """Read a labels file: one non-negative integer per non-empty line."""
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not an integer: {text!r}") from exc
            if value < 0:
                raise ParseError(f"{path}:{lineno}: negative label {value}")
            labels.append(value)
    if len(labels) != len(cloud):
        raise ParseError(
            f"{path}: {len(labels)} labels for a {len(cloud)}-point cloud"
        )
    return SegmentLabeling(np.array(labels, dtype=np.int64))


def write_labels(labeling: SegmentLabeling, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for value in labeling.labels:
            fh.write(f"{int(value)}\n")


def _colormap(values: np.ndarray) -> np.ndarray:
    """Linear blue -> red colormap over [min, max]; all-gray on zero range.

    Channels are truncated to integers so the midpoint lands on (127, 0, 127).
    """
    lo, hi = values.min(), values.max()
    n = len(values)
    if hi == lo:
        return np.full((n, 3), 128, dtype=np.int64)
    t = (values - lo) / (hi - lo)
    red = np.minimum(255, (255.0 * t).astype(np.int64))
    blue = np.minimum(255, (255.0 * (1.0 - t)).astype(np.int64))
    return np.stack([red, np.zeros(n, dtype=np.int64), blue], axis=1)


def write_colored_ply(cloud: PointCloud, saliency: SaliencyMap, path) -> None:
    """Write an ASCII PLY with per-vertex colors from the saliency map."""
    per_point = saliency.per_point()
    if len(per_point) != len(cloud):
        raise ValueError("saliency map is not aligned with the cloud")
    colors = _colormap(per_point)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\n")
        fh.write("format ascii 1.0\n")
        fh.write(f"element vertex {len(cloud)}\n")
        fh.write("property float x\n")
        fh.write("property float y\n")
        fh.write("property float z\n")
        fh.write("property uchar red\n")
        fh.write("property uchar green\n")
        fh.write("property uchar blue\n")
        fh.write("end_header\n")
        for (x, y, z), (r, g, b) in zip(cloud.points, colors):
            fh.write(
                f"{_FLOAT_FMT.format(x)} {_FLOAT_FMT.format(y)} "
                f"{_FLOAT_FMT.format(z)} {r} {g} {b}\n"
            )


def write_saliency_csv(saliency: SaliencyMap, labeling: SegmentLabeling, path) -> None:
    """Write ``segment_id,part_name,mechanism,attribution`` rows, id-ascending."""
    known = set(labeling.segment_ids())
    for sid in saliency.per_segment:
        if sid not in known:
            raise ValueError(f"segment id {sid} not present in labeling")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("segment_id,part_name,mechanism,attribution\n")
        for sid in sorted(saliency.per_segment):
            fh.write(
                f"{sid},{labeling.name_of(sid)},{saliency.mechanism.value},"
                f"{float(saliency.per_segment[sid])!r}\n"
            )
