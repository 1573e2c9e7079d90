"""Attribution formulas, the end-to-end explanation pipeline, and the
stability sweeps.

An explanation scores the original cloud once, then perturbs one segment at
a time and scores each perturbed cloud: exactly (segments + 1) classifier
calls. Per-segment degenerate cases (nothing retained) are recorded on the
map instead of aborting the run.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import clustering
from .classify import Classifier, target_score
from .core import Mechanism, PointCloud, SaliencyMap, SegmentLabeling
from .perturb import (
    DestinationPolicy,
    EmptyRetainedSetError,
    NoiseSpec,
    PerturbationSpec,
    add_noise,
    segment_seed,
    shift_segment,
)


def attribution_absence(p_original: float, p_perturbed: float) -> float:
    """Score drop when the segment is removed; always >= 0."""
    return abs(p_original - p_perturbed)


def attribution_presence(p_original: float, p_retained_only: float) -> float:
    """Negated score gap when only the segment remains; always <= 0.

    The most self-sufficient segment ends up closest to 0, i.e. with the
    highest attribution.
    """
    return -abs(p_original - p_retained_only)


# --- labeling sources ------------------------------------------------------

@dataclass(frozen=True)
class FromLabels:
    labeling: SegmentLabeling


@dataclass(frozen=True)
class Refined:
    labeling: SegmentLabeling
    eps_frac: float = 0.15
    min_pts: int = 4


@dataclass(frozen=True)
class BaselineKmeans:
    k: int


LabelingSource = Union[FromLabels, Refined, BaselineKmeans]


def resolve_labeling(
    cloud: PointCloud, source: LabelingSource, seed: int
) -> SegmentLabeling:
    if isinstance(source, FromLabels):
        source.labeling.validate_for(cloud)
        return source.labeling
    if isinstance(source, Refined):
        return clustering.refine_segments(
            cloud, source.labeling, source.eps_frac, source.min_pts, seed
        )
    return clustering.baseline_clusters(cloud, [source.k], seed)[0]


@dataclass(frozen=True)
class ExplainRequest:
    cloud: PointCloud
    source: LabelingSource
    mechanism: Mechanism
    classifier: Classifier
    policy: DestinationPolicy = DestinationPolicy.RANDOM_RETAINED
    target_class: int | None = None
    seed: int = 0


def explain(request: ExplainRequest) -> tuple[SaliencyMap, SegmentLabeling]:
    """Run the four-stage pipeline for one cloud.

    Returns the saliency map and the labeling it was computed on (useful
    when the source generated the labeling on the fly).
    """
    base = request.classifier.predict(request.cloud)
    target = request.target_class if request.target_class is not None else base.argmax()
    p_original = target_score(base, target)
    labeling = resolve_labeling(request.cloud, request.source, request.seed)

    formula = (
        attribution_absence
        if request.mechanism is Mechanism.ABSENCE
        else attribution_presence
    )
    per_segment: dict[int, float] = {}
    errors: dict[int, str] = {}
    for sid in labeling.segment_ids():
        spec = PerturbationSpec(
            mechanism=request.mechanism,
            segment_id=sid,
            policy=request.policy,
            seed=segment_seed(request.seed, sid),
        )
        try:
            perturbed = shift_segment(request.cloud, labeling, spec)
        except EmptyRetainedSetError as exc:
            errors[sid] = str(exc)
            continue
        p = target_score(request.classifier.predict(perturbed), target)
        per_segment[sid] = formula(p_original, p)
    saliency = SaliencyMap(
        mechanism=request.mechanism,
        per_segment=per_segment,
        target_class=int(target),
        labels=labeling.labels,
        errors=errors,
    )
    return saliency, labeling


# --- stability sweeps ------------------------------------------------------

@dataclass(frozen=True)
class SweepEntry:
    config: str
    saliency: SaliencyMap
    labeling: SegmentLabeling


@dataclass(frozen=True)
class PairStats:
    config_a: str
    config_b: str
    spearman: float | None  # None when the segment sets differ
    top1_agree: bool
    max_delta: float | None  # max |attribution difference|, matched sets only


@dataclass(frozen=True)
class SweepReport:
    entries: list[SweepEntry]
    pairs: list[PairStats] = field(default_factory=list)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_correlation(a: dict[int, float], b: dict[int, float]) -> float:
    """Spearman rank correlation over a shared segment-id set.

    Uses the rank-difference formula on averaged ranks, so identical maps
    give exactly 1.0 and reversed rankings exactly -1.0.
    """
    ids = sorted(a)
    if sorted(b) != ids:
        raise ValueError("segment sets differ")
    n = len(ids)
    if n < 2:
        return 1.0
    ra = _average_ranks(np.array([a[s] for s in ids]))
    rb = _average_ranks(np.array([b[s] for s in ids]))
    d2 = float(((ra - rb) ** 2).sum())
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def _top1_overlap(x: SweepEntry, y: SweepEntry) -> bool:
    """Do the two top segments cover mostly the same points?"""
    if not x.saliency.per_segment or not y.saliency.per_segment:
        return False
    a = set(np.flatnonzero(x.labeling.labels == x.saliency.top_segment()).tolist())
    b = set(np.flatnonzero(y.labeling.labels == y.saliency.top_segment()).tolist())
    return len(a & b) / max(len(a), len(b)) >= 0.5


def _pair_stats(x: SweepEntry, y: SweepEntry) -> PairStats:
    a, b = x.saliency.per_segment, y.saliency.per_segment
    if sorted(a) == sorted(b) and a:
        rho = rank_correlation(a, b)
        delta = max(abs(a[s] - b[s]) for s in a)
    else:
        rho = None
        delta = None
    return PairStats(x.config, y.config, rho, _top1_overlap(x, y), delta)


def sweep_baseline(
    cloud: PointCloud,
    k_list: list[int],
    mechanism: Mechanism,
    classifier: Classifier,
    seed: int = 0,
    policy: DestinationPolicy = DestinationPolicy.RANDOM_RETAINED,
) -> SweepReport:
    """Explain the same cloud under whole-cloud KMeans labelings, one per k."""
    entries = []
    for k in k_list:
        saliency, labeling = explain(
            ExplainRequest(
                cloud=cloud,
                source=BaselineKmeans(k),
                mechanism=mechanism,
                classifier=classifier,
                policy=policy,
                seed=seed,
            )
        )
        entries.append(SweepEntry(f"k={k}", saliency, labeling))
    pairs = [
        _pair_stats(entries[i], entries[j])
        for i in range(len(entries))
        for j in range(i + 1, len(entries))
    ]
    return SweepReport(entries, pairs)


def sweep_noise(
    cloud: PointCloud,
    labeling: SegmentLabeling,
    percents: list[float],
    mechanism: Mechanism,
    classifier: Classifier,
    seed: int = 0,
    policy: DestinationPolicy = DestinationPolicy.RANDOM_RETAINED,
) -> SweepReport:
    """Explain the clean cloud and noisy variants under one fixed labeling."""

    def run(c: PointCloud, name: str) -> SweepEntry:
        saliency, lab = explain(
            ExplainRequest(
                cloud=c,
                source=FromLabels(labeling),
                mechanism=mechanism,
                classifier=classifier,
                policy=policy,
                seed=seed,
            )
        )
        return SweepEntry(name, saliency, lab)

    entries = [run(cloud, "clean")]
    for i, percent in enumerate(percents):
        noisy = add_noise(cloud, NoiseSpec(percent, seed=segment_seed(seed, i + 1)))
        entries.append(run(noisy, f"noise_{percent:g}"))
    pairs = [_pair_stats(entries[0], e) for e in entries[1:]]
    return SweepReport(entries, pairs)


@dataclass(frozen=True)
class InvarianceResult:
    equal: bool
    max_deviation: float


def destination_invariance_check(
    cloud: PointCloud,
    labeling: SegmentLabeling,
    segment_id: int,
    classifier: Classifier,
    trials: int = 10,
    seed: int = 0,
) -> InvarianceResult:
    """Score the same absence perturbation under independent destinations.

    Returns whether all score vectors were exactly equal, plus the maximum
    absolute pairwise deviation.
    """
    vectors = []
    for t in range(trials):
        spec = PerturbationSpec(
            mechanism=Mechanism.ABSENCE,
            segment_id=segment_id,
            policy=DestinationPolicy.RANDOM_RETAINED,
            seed=segment_seed(seed, t),
        )
        perturbed = shift_segment(cloud, labeling, spec)
        vectors.append(classifier.predict(perturbed).scores)
    max_dev = 0.0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            max_dev = max(max_dev, float(np.abs(vectors[i] - vectors[j]).max()))
    equal = all(np.array_equal(vectors[0], v) for v in vectors[1:])
    return InvarianceResult(equal, max_dev)


# --- report serialization --------------------------------------------------

def write_report_csv(report: SweepReport, path) -> None:
    """Serialize a sweep as ``config,segment_id,attribution`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("config,segment_id,attribution\n")
        for entry in report.entries:
            for sid in sorted(entry.saliency.per_segment):
                fh.write(f"{entry.config},{sid},{float(entry.saliency.per_segment[sid])!r}\n")


def report_summary(report: SweepReport) -> str:
    lines = []
    for entry in report.entries:
        n = len(entry.saliency.per_segment)
        top = entry.saliency.top_segment() if n else "-"
        lines.append(f"{entry.config}: {n} segments, top segment {top}")
        for sid, msg in sorted(entry.saliency.errors.items()):
            lines.append(f"{entry.config}: segment {sid} skipped ({msg})")
    for pair in report.pairs:
        rho = "n/a" if pair.spearman is None else f"{pair.spearman:.4f}"
        delta = "n/a" if pair.max_delta is None else f"{pair.max_delta:.6g}"
        lines.append(
            f"{pair.config_a} vs {pair.config_b}: spearman={rho} "
            f"top1_agree={pair.top1_agree} max_delta={delta}"
        )
    return "\n".join(lines)
