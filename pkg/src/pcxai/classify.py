"""Classifier contract, the builtin max-pool reference model, and the
external-process client.

The builtin model computes per-point random tanh features, pools them with
an elementwise max (order- and duplicate-insensitive), and applies a
trained linear head + softmax. The max-pool is what makes the shifting
perturbation's destination choice irrelevant to the scores.
"""
from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .core import PcxaiError, PointCloud

SCORE_SUM_TOL = 1e-6

PROTOCOL_NAME = "pcxai-classify"
PROTOCOL_VERSION = 1


class ProtocolError(PcxaiError):
    """The external classifier violated the wire protocol."""


@dataclass(frozen=True)
class ScoreVector:
    """One probability per class; sums to 1 within 1e-6."""

    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("need at least 2 class scores")
        if (s < 0).any() or (s > 1).any():
            raise ValueError("scores must lie in [0, 1]")
        if abs(s.sum() - 1.0) > SCORE_SUM_TOL:
            raise ValueError(f"scores sum to {s.sum()!r}, not 1")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    @property
    def num_classes(self) -> int:
        return len(self.scores)

    def argmax(self) -> int:
        return int(self.scores.argmax())


def target_score(scores: ScoreVector, target: int) -> float:
    if not 0 <= target < scores.num_classes:
        raise IndexError(
            f"target class {target} out of range for {scores.num_classes} classes"
        )
    return float(scores.scores[target])


@runtime_checkable
class Classifier(Protocol):
    """Anything that scores a point cloud."""

    @property
    def num_classes(self) -> int: ...

    def predict(self, cloud: PointCloud) -> ScoreVector: ...


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def _feature_params(feature_dim: int, feature_seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(feature_seed)
    w = rng.standard_normal((feature_dim, 3))
    b = rng.uniform(-1.0, 1.0, size=feature_dim)
    return w, b


@dataclass(frozen=True)
class BuiltinModel:
    """Frozen random tanh features + max-pool + trained linear head."""

    feature_dim: int
    feature_seed: int
    head_weights: np.ndarray  # (C, D)
    head_bias: np.ndarray  # (C,)
    class_names: list[str] | None = None
    _feat_w: np.ndarray = field(init=False, repr=False, compare=False)
    _feat_b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        W = np.asarray(self.head_weights, dtype=np.float64)
        b = np.asarray(self.head_bias, dtype=np.float64)
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if W.ndim != 2 or W.shape != (len(b), self.feature_dim) or len(b) < 2:
            raise ValueError("head shape must be (C, D) with C >= 2")
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValueError("head parameters must be finite")
        object.__setattr__(self, "head_weights", W)
        object.__setattr__(self, "head_bias", b)
        fw, fb = _feature_params(self.feature_dim, self.feature_seed)
        object.__setattr__(self, "_feat_w", fw)
        object.__setattr__(self, "_feat_b", fb)

    @property
    def num_classes(self) -> int:
        return len(self.head_bias)

    def pooled_features(self, cloud: PointCloud) -> np.ndarray:
        """Elementwise max over per-point tanh features; symmetric pooling."""
        h = np.tanh(cloud.points @ self._feat_w.T + self._feat_b)
        return h.max(axis=0)

    def predict(self, cloud: PointCloud) -> ScoreVector:
        pooled = self.pooled_features(cloud)
        logits = self.head_weights @ pooled + self.head_bias
        return ScoreVector(_softmax(logits))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.0
    epochs: int = 300
    seed: int = 0
    feature_dim: int = 256


def ce_loss_and_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy of softmax(X W^T + b) and its head gradients."""
    n = len(X)
    logits = X @ W.T + b
    logits = logits - logits.max(axis=1, keepdims=True)
    log_probs = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    loss = -float(log_probs[np.arange(n), y].mean())
    probs = np.exp(log_probs)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    grad_W = delta.T @ X / n
    grad_b = delta.mean(axis=0)
    return loss, grad_W, grad_b


def train_builtin(
    datasets: list[tuple[PointCloud, int]],
    config: TrainConfig = TrainConfig(),
    class_names: list[str] | None = None,
) -> tuple[BuiltinModel, float]:
    """Train the linear head by full-batch gradient descent.

    Returns the model and the final training accuracy.
    """
    if not datasets:
        raise ValueError("empty training set")
    y = np.array([c for _, c in datasets], dtype=np.int64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("training set must contain at least 2 classes")
    n_classes = int(y.max()) + 1
    if class_names is not None and len(class_names) != n_classes:
        raise ValueError("class_names length disagrees with class indices")

    D = config.feature_dim
    feat_w, feat_b = _feature_params(D, config.seed)
    X = np.stack(
        [np.tanh(cloud.points @ feat_w.T + feat_b).max(axis=0) for cloud, _ in datasets]
    )
    # the max-pooled tanh features saturate, so standardize for the descent
    # and fold the affine transform back into the head afterwards
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Xs = (X - mu) / sd
    W = np.zeros((n_classes, D))
    b = np.zeros(n_classes)
    for _ in range(config.epochs):
        _, gW, gb = ce_loss_and_grad(W, b, Xs, y)
        W -= config.learning_rate * gW
        b -= config.learning_rate * gb
    W = W / sd
    b = b - W @ mu
    pred = (X @ W.T + b).argmax(axis=1)
    accuracy = float((pred == y).mean())
    model = BuiltinModel(
        feature_dim=D,
        feature_seed=config.seed,
        head_weights=W,
        head_bias=b,
        class_names=class_names,
    )
    return model, accuracy


# --- builtin model text format -------------------------------------------
# line 1: "pcxc 1"
# line 2: "classes C feat D seed S"
# then C lines of D+1 decimals: D head weights, then the bias.

def save_model(model: BuiltinModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("pcxc 1\n")
        fh.write(
            f"classes {model.num_classes} feat {model.feature_dim} "
            f"seed {model.feature_seed}\n"
        )
        for c in range(model.num_classes):
            row = list(model.head_weights[c]) + [model.head_bias[c]]
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_model(path) -> BuiltinModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].split() != ["pcxc", "1"]:
        raise PcxaiError(f"{path}: not a pcxc version-1 model file")
    fields = lines[1].split()
    if len(fields) != 6 or fields[0] != "classes" or fields[2] != "feat" or fields[4] != "seed":
        raise PcxaiError(f"{path}: malformed model header")
    C, D, S = int(fields[1]), int(fields[3]), int(fields[5])
    rows = [np.array([float(v) for v in ln.split()]) for ln in lines[2 : 2 + C] if ln]
    if len(rows) != C or any(len(r) != D + 1 for r in rows):
        raise PcxaiError(f"{path}: expected {C} rows of {D + 1} values")
    mat = np.stack(rows)
    return BuiltinModel(
        feature_dim=D, feature_seed=S, head_weights=mat[:, :D], head_bias=mat[:, D]
    )


class ExternalClassifier:
    """Client for a line-delimited JSON classifier subprocess.

    Handshake (first line from the child):
        {"protocol":"pcxai-classify","version":1,"classes":C}
    Request:   {"id":N,"points":[[x,y,z],...]}
    Response:  {"id":N,"scores":[s_0,...,s_{C-1}]}
    One request in flight at a time.
    """

    def __init__(self, command: str, expected_classes: int | None = None):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot spawn classifier: {exc}") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise ProtocolError("classifier exited before the handshake")
        try:
            hello = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed handshake: {line!r}") from exc
        if hello.get("protocol") != PROTOCOL_NAME or hello.get("version") != PROTOCOL_VERSION:
            raise ProtocolError(f"unexpected handshake: {hello!r}")
        classes = hello.get("classes")
        if not isinstance(classes, int) or classes < 2:
            raise ProtocolError(f"invalid class count in handshake: {classes!r}")
        if expected_classes is not None and classes != expected_classes:
            raise ProtocolError(
                f"classifier declares {classes} classes, expected {expected_classes}"
            )
        self._classes = classes
        self._next_id = 0

    @property
    def num_classes(self) -> int:
        return self._classes

    def predict(self, cloud: PointCloud) -> ScoreVector:
        req_id = self._next_id
        self._next_id += 1
        request = {"id": req_id, "points": cloud.points.tolist()}
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"classifier pipe failed: {exc}") from exc
        if not line:
            raise ProtocolError("classifier closed the stream mid-session")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response: {line!r}") from exc
        if "error" in response:
            raise ProtocolError(f"classifier error: {response['error']}")
        if response.get("id") != req_id:
            raise ProtocolError(
                f"response id {response.get('id')!r} does not match request {req_id}"
            )
        scores = response.get("scores")
        if not isinstance(scores, list) or len(scores) != self._classes:
            raise ProtocolError(f"expected {self._classes} scores, got {scores!r}")
        try:
            return ScoreVector(np.array(scores, dtype=np.float64))
        except ValueError as exc:
            raise ProtocolError(f"invalid score vector: {exc}") from exc

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_open(command: str, expected_classes: int | None = None) -> ExternalClassifier:
    """Spawn an adapter process and validate its handshake."""
    return ExternalClassifier(command, expected_classes)
