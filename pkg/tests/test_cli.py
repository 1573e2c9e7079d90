import numpy as np
import pytest

from pcxai import (
    TrainConfig,
    save_model,
    train_builtin,
    write_labels,
    write_points,
)
from pcxai.cli import build_parser, run
from pcxai.synthetic import chair_cloud, make_suite


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    suite = make_suite(n_per_class=10, n_points=128, seed=0)
    model, _ = train_builtin(suite, TrainConfig(epochs=100, seed=0))
    path = tmp_path_factory.mktemp("model") / "model.txt"
    save_model(model, path)
    return str(path)


@pytest.fixture
def chair_files(tmp_path):
    cloud, labeling = chair_cloud(300, seed=1)
    pts = tmp_path / "chair.pts"
    seg = tmp_path / "chair.seg"
    write_points(cloud, pts)
    write_labels(labeling, seg)
    return str(pts), str(seg)


def test_explain_writes_outputs(tmp_path, chair_files, model_file, capsys):
    pts, seg = chair_files
    csv = tmp_path / "s.csv"
    ply = tmp_path / "s.ply"
    code = run(
        [
            "explain", "--points", pts, "--labels", seg,
            "--mechanism", "absence", "--classifier", f"builtin:{model_file}",
            "--out-csv", str(csv), "--out-ply", str(ply), "--seed", "7",
        ]
    )
    assert code == 0
    assert csv.read_text().startswith("segment_id,part_name,mechanism,attribution")
    assert ply.read_text().startswith("ply\n")


def test_explain_deterministic_outputs(tmp_path, chair_files, model_file):
    pts, seg = chair_files
    outputs = []
    for i in range(2):
        csv = tmp_path / f"s{i}.csv"
        ply = tmp_path / f"s{i}.ply"
        assert run(
            [
                "explain", "--points", pts, "--labels", seg,
                "--mechanism", "presence", "--classifier", f"builtin:{model_file}",
                "--out-csv", str(csv), "--out-ply", str(ply), "--seed", "3",
            ]
        ) == 0
        outputs.append((csv.read_bytes(), ply.read_bytes()))
    assert outputs[0] == outputs[1]


def test_bad_mechanism_is_usage_error(chair_files, model_file, capsys):
    pts, seg = chair_files
    code = run(
        [
            "explain", "--points", pts, "--labels", seg,
            "--mechanism", "sideways", "--classifier", f"builtin:{model_file}",
        ]
    )
    assert code == 1
    assert "mechanism" in capsys.readouterr().err


def test_missing_file_is_runtime_error(model_file, capsys):
    code = run(
        [
            "explain", "--points", "/nope.pts", "--labels", "/nope.seg",
            "--mechanism", "absence", "--classifier", f"builtin:{model_file}",
        ]
    )
    assert code == 2


def test_refine_roundtrip(tmp_path, model_file):
    from pcxai.synthetic import motorbike_cloud

    cloud, labeling = motorbike_cloud(400, seed=2)
    pts = tmp_path / "m.pts"
    seg = tmp_path / "m.seg"
    out = tmp_path / "refined.seg"
    write_points(cloud, pts)
    write_labels(labeling, seg)
    code = run(
        ["refine", "--points", str(pts), "--labels", str(seg),
         "--out-labels", str(out), "--seed", "0"]
    )
    assert code == 0
    refined = [int(x) for x in out.read_text().split()]
    assert len(refined) == 400
    assert len(set(refined)) == 3  # frame + split wheels


def test_baseline_sweep(tmp_path, chair_files, model_file, capsys):
    pts, _ = chair_files
    csv = tmp_path / "r.csv"
    code = run(
        ["baseline", "--points", pts, "--clusters", "3,5",
         "--mechanism", "absence", "--classifier", f"builtin:{model_file}",
         "--out-csv", str(csv), "--seed", "1"]
    )
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "config,segment_id,attribution"
    configs = {ln.split(",")[0] for ln in lines[1:]}
    assert configs == {"k=3", "k=5"}


def test_noise_sweep(tmp_path, chair_files, model_file, capsys):
    pts, seg = chair_files
    code = run(
        ["noise-sweep", "--points", pts, "--labels", seg, "--percents", "5,10",
         "--mechanism", "absence", "--classifier", f"builtin:{model_file}",
         "--seed", "2"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "clean" in out and "noise_5" in out and "noise_10" in out


def test_invariance_command(chair_files, model_file, capsys):
    pts, seg = chair_files
    code = run(
        ["invariance", "--points", pts, "--labels", seg, "--segment", "0",
         "--trials", "5", "--classifier", f"builtin:{model_file}"]
    )
    assert code == 0
    assert "equal=True max_deviation=0.0" in capsys.readouterr().out


def test_train_and_predict(tmp_path, capsys):
    suite = make_suite(n_per_class=5, n_points=64, seed=3)
    manifest_lines = []
    for i, (cloud, cls) in enumerate(suite):
        name = f"c{i}.pts"
        write_points(cloud, tmp_path / name)
        manifest_lines.append(f"{name} {cls}")
    manifest = tmp_path / "manifest.txt"
    manifest.write_text("\n".join(manifest_lines) + "\n")
    model_path = tmp_path / "model.txt"
    code = run(
        ["train", "--manifest", str(manifest), "--out-model", str(model_path),
         "--epochs", "100", "--seed", "0"]
    )
    assert code == 0
    assert "training accuracy" in capsys.readouterr().out

    # identical seed -> identical model file
    model_path2 = tmp_path / "model2.txt"
    run(["train", "--manifest", str(manifest), "--out-model", str(model_path2),
         "--epochs", "100", "--seed", "0"])
    assert model_path.read_bytes() == model_path2.read_bytes()

    code = run(
        ["predict", "--points", str(tmp_path / "c0.pts"),
         "--classifier", f"builtin:{model_path}"]
    )
    assert code == 0
    assert "predicted class" in capsys.readouterr().out


def test_empty_manifest_is_runtime_error(tmp_path, capsys):
    manifest = tmp_path / "manifest.txt"
    manifest.write_text("\n")
    code = run(
        ["train", "--manifest", str(manifest), "--out-model", str(tmp_path / "m.txt")]
    )
    assert code == 2


def test_help_lists_documented_flags(capsys):
    documented = [
        "--points", "--labels", "--mechanism", "--destination", "--classifier",
        "--target", "--refine", "--eps-frac", "--min-pts", "--clusters",
        "--percents", "--trials", "--seed", "--jobs", "--out-csv", "--out-ply",
    ]
    parser = build_parser()
    helps = []
    for action in parser._subparsers._group_actions[0].choices.values():
        helps.append(action.format_help())
    combined = "\n".join(helps)
    for flag in documented:
        assert flag in combined, flag


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert run(["explain", "--help"]) == 0
