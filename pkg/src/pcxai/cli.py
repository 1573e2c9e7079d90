"""Command-line surface: explain, refine, baseline, noise-sweep,
invariance, train, predict.

Exit codes: 0 success, 1 usage error, 2 runtime error. All randomness
derives from --seed (default 0), so identical invocations write identical
files.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import classify, clustering, core, perturb, saliency


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_io_flags(p: argparse.ArgumentParser, labels_required: bool = True):
    p.add_argument("--points", required=True, help="input points file (x y z per line)")
    p.add_argument(
        "--labels",
        required=labels_required,
        help="per-point segment label file (one integer per line)",
    )


def _add_classifier_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--classifier",
        required=True,
        help="builtin:<model-file> or extern:<command line>",
    )
    p.add_argument("--classes", type=int, default=None,
                   help="expected class count for extern classifiers")
    p.add_argument("--target", type=int, default=None,
                   help="target class (default: argmax on the input)")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--jobs", type=int, default=1, help="max worker count")


def build_parser() -> _Parser:
    parser = _Parser(prog="pcxai", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="per-segment saliency map for one cloud")
    _add_io_flags(p)
    p.add_argument("--mechanism", choices=["absence", "presence"], required=True)
    p.add_argument("--destination", choices=["random", "centroid"], default="random")
    _add_classifier_flags(p)
    p.add_argument("--refine", action="store_true",
                   help="split segments into spatial clumps before explaining")
    p.add_argument("--eps-frac", type=float, default=0.15)
    p.add_argument("--min-pts", type=int, default=4)
    p.add_argument("--out-csv", default=None, help="attribution CSV output path")
    p.add_argument("--out-ply", default=None, help="colored PLY output path")
    _add_common_flags(p)

    p = sub.add_parser("refine", help="split segments via DBSCAN-count + KMeans")
    _add_io_flags(p)
    p.add_argument("--eps-frac", type=float, default=0.15)
    p.add_argument("--min-pts", type=int, default=4)
    p.add_argument("--out-labels", required=True)
    _add_common_flags(p)

    p = sub.add_parser("baseline", help="saliency instability sweep over KMeans k")
    _add_io_flags(p, labels_required=False)
    p.add_argument("--clusters", required=True, help="comma-separated k list")
    p.add_argument("--mechanism", choices=["absence", "presence"], required=True)
    p.add_argument("--destination", choices=["random", "centroid"], default="random")
    _add_classifier_flags(p)
    p.add_argument("--out-csv", default=None)
    _add_common_flags(p)

    p = sub.add_parser("noise-sweep", help="attribution stability under input noise")
    _add_io_flags(p)
    p.add_argument("--percents", required=True, help="comma-separated noise percents")
    p.add_argument("--mechanism", choices=["absence", "presence"], required=True)
    p.add_argument("--destination", choices=["random", "centroid"], default="random")
    _add_classifier_flags(p)
    p.add_argument("--out-csv", default=None)
    _add_common_flags(p)

    p = sub.add_parser("invariance", help="check destination-choice invariance")
    _add_io_flags(p)
    p.add_argument("--segment", type=int, required=True, help="segment id to perturb")
    p.add_argument("--trials", type=int, default=10)
    _add_classifier_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("train", help="train the builtin classifier head")
    p.add_argument("--manifest", required=True,
                   help="text file: '<points-path> <class-index>' per line")
    p.add_argument("--out-model", required=True)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--feat-dim", type=int, default=256)
    _add_common_flags(p)

    p = sub.add_parser("predict", help="print class scores for one cloud")
    p.add_argument("--points", required=True)
    _add_classifier_flags(p)
    _add_common_flags(p)

    return parser


def _open_classifier(spec: str, classes: int | None) -> classify.Classifier:
    if spec.startswith("builtin:"):
        return classify.load_model(spec[len("builtin:"):])
    if spec.startswith("extern:"):
        return classify.external_open(spec[len("extern:"):], classes)
    raise UsageError(f"--classifier must start with builtin: or extern:, got {spec!r}")


def _mechanism(name: str) -> core.Mechanism:
    return core.Mechanism(name)


def _policy(name: str) -> perturb.DestinationPolicy:
    return perturb.DestinationPolicy(name)


def _load_inputs(args) -> tuple[core.PointCloud, core.SegmentLabeling | None]:
    cloud = core.read_points(args.points)
    labeling = None
    if getattr(args, "labels", None):
        labeling = core.read_labels(args.labels, cloud)
    return cloud, labeling


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _cmd_explain(args) -> int:
    cloud, labeling = _load_inputs(args)
    if args.refine:
        source = saliency.Refined(labeling, args.eps_frac, args.min_pts)
    else:
        source = saliency.FromLabels(labeling)
    clf = _open_classifier(args.classifier, args.classes)
    request = saliency.ExplainRequest(
        cloud=cloud,
        source=source,
        mechanism=_mechanism(args.mechanism),
        classifier=clf,
        policy=_policy(args.destination),
        target_class=args.target,
        seed=args.seed,
    )
    result, used_labeling = saliency.explain(request)
    for sid in sorted(result.per_segment):
        print(f"{used_labeling.name_of(sid)}: {result.per_segment[sid]:.6g}")
    for sid, msg in sorted(result.errors.items()):
        print(f"{used_labeling.name_of(sid)}: skipped ({msg})", file=sys.stderr)
    if args.out_csv:
        core.write_saliency_csv(result, used_labeling, args.out_csv)
    if args.out_ply:
        core.write_colored_ply(cloud, result, args.out_ply)
    return 0


def _cmd_refine(args) -> int:
    cloud, labeling = _load_inputs(args)
    refined = clustering.refine_segments(
        cloud, labeling, args.eps_frac, args.min_pts, args.seed
    )
    core.write_labels(refined, args.out_labels)
    print(f"{len(labeling.segment_ids())} segments -> {len(refined.segment_ids())}")
    return 0


def _cmd_baseline(args) -> int:
    cloud, _ = _load_inputs(args)
    clf = _open_classifier(args.classifier, args.classes)
    report = saliency.sweep_baseline(
        cloud,
        _int_list(args.clusters),
        _mechanism(args.mechanism),
        clf,
        seed=args.seed,
        policy=_policy(args.destination),
    )
    print(saliency.report_summary(report))
    if args.out_csv:
        saliency.write_report_csv(report, args.out_csv)
    return 0


def _cmd_noise_sweep(args) -> int:
    cloud, labeling = _load_inputs(args)
    clf = _open_classifier(args.classifier, args.classes)
    report = saliency.sweep_noise(
        cloud,
        labeling,
        _float_list(args.percents),
        _mechanism(args.mechanism),
        clf,
        seed=args.seed,
        policy=_policy(args.destination),
    )
    print(saliency.report_summary(report))
    if args.out_csv:
        saliency.write_report_csv(report, args.out_csv)
    return 0


def _cmd_invariance(args) -> int:
    cloud, labeling = _load_inputs(args)
    clf = _open_classifier(args.classifier, args.classes)
    result = saliency.destination_invariance_check(
        cloud, labeling, args.segment, clf, trials=args.trials, seed=args.seed
    )
    print(f"equal={result.equal} max_deviation={result.max_deviation!r}")
    return 0


def _cmd_train(args) -> int:
    import os

    base = os.path.dirname(os.path.abspath(args.manifest))
    datasets = []
    with open(args.manifest, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise core.ParseError(
                    f"{args.manifest}:{lineno}: expected '<path> <class>'"
                )
            path = parts[0]
            if not os.path.isabs(path):
                path = os.path.join(base, path)
            datasets.append((core.read_points(path), int(parts[1])))
    if not datasets:
        raise core.ParseError(f"{args.manifest}: empty manifest")
    config = classify.TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        feature_dim=args.feat_dim,
    )
    model, accuracy = classify.train_builtin(datasets, config)
    classify.save_model(model, args.out_model)
    print(f"training accuracy {accuracy:.4f} on {len(datasets)} samples")
    return 0


def _cmd_predict(args) -> int:
    cloud = core.read_points(args.points)
    clf = _open_classifier(args.classifier, args.classes)
    scores = clf.predict(cloud)
    target = args.target if args.target is not None else scores.argmax()
    print(" ".join(f"{s:.6g}" for s in scores.scores))
    print(f"predicted class {scores.argmax()}, "
          f"target {target} score {classify.target_score(scores, target):.6g}")
    return 0


_DISPATCH = {
    "explain": _cmd_explain,
    "refine": _cmd_refine,
    "baseline": _cmd_baseline,
    "noise-sweep": _cmd_noise_sweep,
    "invariance": _cmd_invariance,
    "train": _cmd_train,
    "predict": _cmd_predict,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"pcxai: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"pcxai: {exc}", file=sys.stderr)
        return 1
    except (core.PcxaiError, OSError, ValueError, IndexError) as exc:
        print(f"pcxai: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
