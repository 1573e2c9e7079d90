#!/usr/bin/env python3
"""Reference classifier adapter for the pcxai wire protocol.

Speaks line-delimited JSON on stdin/stdout:
  handshake:  {"protocol":"pcxai-classify","version":1,"classes":C}
  request:    {"id":N,"points":[[x,y,z],...]}
  response:   {"id":N,"scores":[...]}  (same order as requests)
  bad input:  {"id":N,"error":"..."}   then the loop continues

Two modes, chosen by a key-value config file (sole CLI argument):

  mode echo            fixed score table keyed by point count
  classes C
  row <npoints> s0 s1 ... s_{C-1}     (one row per point count)

  mode linearmax       forward pass of a pcxc-format linear-head model
  model <path>

Use this file as the template for wrapping a real trained model: replace
``scores_for`` with your model's inference call.
"""
from __future__ import annotations

import json
import sys

import numpy as np

SCORE_SUM_TOL = 1e-6


class ConfigError(Exception):
    pass


def _parse_kv(path: str) -> list[tuple[str, list[str]]]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            entries.append((parts[0], parts[1:]))
    return entries


class EchoModel:
    """Score table lookup keyed by the request's point count."""

    def __init__(self, classes: int, table: dict[int, list[float]]):
        if classes < 2:
            raise ConfigError("classes must be >= 2")
        for count, scores in table.items():
            if len(scores) != classes:
                raise ConfigError(f"row {count}: expected {classes} scores")
            if abs(sum(scores) - 1.0) > SCORE_SUM_TOL:
                raise ConfigError(f"row {count}: scores sum to {sum(scores)}")
        self.classes = classes
        self.table = table

    def scores_for(self, points: list[list[float]]) -> list[float]:
        count = len(points)
        if count not in self.table:
            raise ValueError(f"no score row for point count {count}")
        return self.table[count]


class LinearMaxModel:
    """tanh-feature / max-pool / softmax forward pass from a pcxc model file.

    The feature parameters are regenerated from the seed stored in the file:
    standard-normal weights, uniform[-1,1] biases.
    """

    def __init__(self, path: str):
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
        if not lines or lines[0].split() != ["pcxc", "1"]:
            raise ConfigError(f"{path}: not a pcxc version-1 model file")
        fields = lines[1].split()
        if (
            len(fields) != 6
            or fields[0] != "classes"
            or fields[2] != "feat"
            or fields[4] != "seed"
        ):
            raise ConfigError(f"{path}: malformed model header")
        self.classes, feat_dim, seed = int(fields[1]), int(fields[3]), int(fields[5])
        rows = [
            np.array([float(v) for v in ln.split()])
            for ln in lines[2 : 2 + self.classes]
            if ln
        ]
        if len(rows) != self.classes or any(len(r) != feat_dim + 1 for r in rows):
            raise ConfigError(f"{path}: expected {self.classes} rows of {feat_dim + 1} values")
        mat = np.stack(rows)
        self.head_w = mat[:, :feat_dim]
        self.head_b = mat[:, feat_dim]
        rng = np.random.default_rng(seed)
        self.feat_w = rng.standard_normal((feat_dim, 3))
        self.feat_b = rng.uniform(-1.0, 1.0, size=feat_dim)

    def scores_for(self, points: list[list[float]]) -> list[float]:
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
            raise ValueError("points must be a non-empty [[x,y,z],...] list")
        pooled = np.tanh(pts @ self.feat_w.T + self.feat_b).max(axis=0)
        logits = self.head_w @ pooled + self.head_b
        z = logits - logits.max()
        e = np.exp(z)
        return (e / e.sum()).tolist()


def load_config(path: str):
    entries = dict()
    table: dict[int, list[float]] = {}
    for key, values in _parse_kv(path):
        if key == "row":
            if len(values) < 2:
                raise ConfigError("row needs a point count and scores")
            table[int(values[0])] = [float(v) for v in values[1:]]
        else:
            entries[key] = values
    mode = entries.get("mode", [None])[0]
    if mode == "echo":
        if "classes" not in entries:
            raise ConfigError("echo mode needs a classes line")
        return EchoModel(int(entries["classes"][0]), table)
    if mode == "linearmax":
        if "model" not in entries:
            raise ConfigError("linearmax mode needs a model line")
        return LinearMaxModel(entries["model"][0])
    raise ConfigError(f"unknown mode {mode!r}")


def serve(model, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    print(
        json.dumps(
            {"protocol": "pcxai-classify", "version": 1, "classes": model.classes}
        ),
        file=stdout,
        flush=True,
    )
    for line in stdin:
        if not line.strip():
            continue
        req_id = -1
        try:
            request = json.loads(line)
            req_id = request.get("id", -1)
            if not isinstance(req_id, int):
                raise ValueError("id must be an integer")
            scores = model.scores_for(request["points"])
            reply = {"id": req_id, "scores": scores}
        except Exception as exc:  # malformed request: report, keep serving
            reply = {"id": req_id, "error": str(exc)}
        print(json.dumps(reply), file=stdout, flush=True)
    return 0


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: pcxai_adapter.py <config-file>", file=sys.stderr)
        return 1
    try:
        model = load_config(sys.argv[1])
    except (ConfigError, OSError, ValueError) as exc:
        print(f"pcxai_adapter: {exc}", file=sys.stderr)
        return 1
    return serve(model)


if __name__ == "__main__":
    sys.exit(main())
