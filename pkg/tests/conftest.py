import hashlib

import numpy as np
import pytest

from pcxai import PointCloud, ScoreVector, SegmentLabeling


def random_cloud(rng: np.random.Generator, n: int) -> PointCloud:
    return PointCloud(rng.uniform(-1.0, 1.0, (n, 3)))


def random_labeling(rng: np.random.Generator, n: int, n_segments: int) -> SegmentLabeling:
    # every segment non-empty
    labels = np.concatenate(
        [np.arange(n_segments), rng.integers(0, n_segments, n - n_segments)]
    )
    rng.shuffle(labels)
    return SegmentLabeling(labels.astype(np.int64))


class MockClassifier:
    """Deterministic pseudo-random scores derived from the cloud's bytes."""

    def __init__(self, num_classes: int = 4):
        self._classes = num_classes
        self.calls = 0

    @property
    def num_classes(self) -> int:
        return self._classes

    def predict(self, cloud: PointCloud) -> ScoreVector:
        self.calls += 1
        digest = hashlib.sha256(np.ascontiguousarray(cloud.points).tobytes()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        logits = rng.standard_normal(self._classes)
        e = np.exp(logits - logits.max())
        return ScoreVector(e / e.sum())


class ScriptedClassifier:
    """Returns a fixed score list per call, in order."""

    def __init__(self, score_rows: list[list[float]]):
        self._rows = [np.array(r, dtype=np.float64) for r in score_rows]
        self.calls = 0

    @property
    def num_classes(self) -> int:
        return len(self._rows[0])

    def predict(self, cloud: PointCloud) -> ScoreVector:
        row = self._rows[self.calls]
        self.calls += 1
        return ScoreVector(row)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
