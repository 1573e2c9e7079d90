"""Segment-perturbation saliency maps for point-cloud classifiers."""

from .classify import (
    BuiltinModel,
    Classifier,
    ExternalClassifier,
    ScoreVector,
    TrainConfig,
    external_open,
    load_model,
    save_model,
    target_score,
    train_builtin,
)
from .clustering import (
    ClusterAssignment,
    DbscanParams,
    KmeansParams,
    baseline_clusters,
    dbscan,
    estimate_cluster_count,
    kmeans,
    refine_segments,
)
from .core import (
    CategoryMetadata,
    Mechanism,
    PointCloud,
    SaliencyMap,
    SegmentLabeling,
    read_labels,
    read_points,
    write_colored_ply,
    write_labels,
    write_points,
    write_saliency_csv,
)
from .perturb import (
    DestinationPolicy,
    EmptyRetainedSetError,
    EmptySegmentError,
    NoiseSpec,
    PerturbationSpec,
    add_noise,
    segment_seed,
    select_destination,
    shift_segment,
)
from .saliency import (
    BaselineKmeans,
    ExplainRequest,
    FromLabels,
    Refined,
    SweepReport,
    attribution_absence,
    attribution_presence,
    destination_invariance_check,
    explain,
    rank_correlation,
    report_summary,
    sweep_baseline,
    sweep_noise,
    write_report_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
