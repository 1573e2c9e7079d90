"""From-scratch DBSCAN and KMeans, and the segment-refinement step.

DBSCAN estimates how many spatial clumps a semantic segment contains;
KMeans then re-partitions the whole segment (outliers included) into that
many clusters. Everything is deterministic given point order and a seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PointCloud, SegmentLabeling

NOISE = -1


@dataclass(frozen=True)
class DbscanParams:
    eps: float
    min_pts: int

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


@dataclass(frozen=True)
class KmeansParams:
    k: int
    max_iters: int = 100
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster id per point; DBSCAN marks noise with id -1."""

    ids: np.ndarray  # (n,) int
    n_clusters: int

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        non_noise = ids[ids != NOISE]
        distinct = np.unique(non_noise)
        if len(distinct) != self.n_clusters:
            raise ValueError("n_clusters disagrees with the distinct ids")
        if len(distinct) and (distinct.min() < 0 or distinct.max() >= self.n_clusters):
            raise ValueError("cluster ids must lie in [0, n_clusters)")
        ids = ids.copy()
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)


@dataclass(frozen=True)
class KmeansResult:
    assignment: ClusterAssignment
    centroids: np.ndarray  # (k, 3)
    inertia_history: list[float]  # inertia after each assignment step
    n_iters: int


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def dbscan(points: PointCloud, params: DbscanParams) -> ClusterAssignment:
    """Density-reachability clustering, O(n^2) neighborhoods.

    Neighborhoods include the point itself. Expansion visits seed points in
    index order, so the result is deterministic for a fixed point order.
    """
    pts = points.points
    n = len(pts)
    sq = _pairwise_sq_dists(pts, pts)
    neighbors = [np.flatnonzero(sq[i] <= params.eps**2) for i in range(n)]
    core = np.array([len(nb) >= params.min_pts for nb in neighbors])

    ids = np.full(n, NOISE, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    next_id = 0
    for i in range(n):
        if visited[i] or not core[i]:
            continue
        # grow a new cluster from this core point (BFS in index order)
        queue = [i]
        visited[i] = True
        ids[i] = next_id
        while queue:
            j = queue.pop(0)
            if not core[j]:
                continue
            for m in neighbors[j]:
                if ids[m] == NOISE:
                    ids[m] = next_id
                if not visited[m]:
                    visited[m] = True
                    queue.append(m)
        next_id += 1
    return ClusterAssignment(ids, next_id)


def estimate_cluster_count(assignment: ClusterAssignment) -> int:
    """Cluster count ignoring noise; at least 1 so KMeans always has a k."""
    return max(assignment.n_clusters, 1)


def _kmeans_pp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    centroids = np.empty((k, 3), dtype=np.float64)
    centroids[0] = pts[rng.integers(n)]
    if k == 1:
        return centroids
    best = np.einsum("ij,ij->i", pts - centroids[0], pts - centroids[0])
    for j in range(1, k):
        total = best.sum()
        if total == 0:
            # all remaining points coincide with chosen centroids
            centroids[j] = pts[rng.integers(n)]
            continue
        idx = rng.choice(n, p=best / total)
        centroids[j] = pts[idx]
        d = np.einsum("ij,ij->i", pts - centroids[j], pts - centroids[j])
        best = np.minimum(best, d)
    return centroids


def _assign(pts: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    sq = _pairwise_sq_dists(pts, centroids)
    labels = sq.argmin(axis=1)
    inertia = float(sq[np.arange(len(pts)), labels].sum())
    return labels, inertia


def kmeans(points: PointCloud, params: KmeansParams) -> KmeansResult:
    """Lloyd iterations with kmeans++ seeding.

    Empty clusters are repaired by re-seeding the centroid to the point
    farthest from it, so exactly k non-empty clusters come out.
    """
    pts = points.points
    n_distinct = len(np.unique(pts, axis=0))
    if params.k > n_distinct:
        raise ValueError(
            f"k={params.k} exceeds the {n_distinct} distinct points"
        )
    rng = np.random.default_rng(params.seed)
    centroids = _kmeans_pp_init(pts, params.k, rng)

    def assign_with_repair(cents: np.ndarray) -> tuple[np.ndarray, float]:
        lab, inertia = _assign(pts, cents)
        for _ in range(params.k):
            empty = [j for j in range(params.k) if not (lab == j).any()]
            if not empty:
                break
            for j in empty:
                far = np.linalg.norm(pts - cents[j], axis=1).argmax()
                cents[j] = pts[far]
            lab, inertia = _assign(pts, cents)
        return lab, inertia

    history: list[float] = []
    labels = None
    n_iters = 0
    for _ in range(params.max_iters):
        n_iters += 1
        new_labels, inertia = assign_with_repair(centroids)
        history.append(inertia)
        if labels is not None and np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        new_centroids = np.stack(
            [pts[labels == j].mean(axis=0) for j in range(params.k)]
        )
        shift = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        centroids = new_centroids
        if shift <= params.tol:
            labels, inertia = assign_with_repair(centroids)
            history.append(inertia)
            break
    return KmeansResult(
        ClusterAssignment(labels, params.k), centroids, history, n_iters
    )


def _sub_seed(seed: int, key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & (2**63 - 1), int(key)])


def refine_segments(
    points: PointCloud,
    labeling: SegmentLabeling,
    eps_frac: float = 0.15,
    min_pts: int = 4,
    seed: int = 0,
) -> SegmentLabeling:
    """Split each segment into its spatial clumps.

    Per segment: DBSCAN (eps = eps_frac * segment bbox diagonal) estimates
    the clump count c, then KMeans with k = c re-partitions the segment.
    Output ids are new and globally unique, ordered by original id then
    sub-cluster id; names become "<part>_<j>".
    """
    labeling.validate_for(points)
    new_labels = np.empty(len(points), dtype=np.int64)
    names: dict[int, str] = {}
    next_id = 0
    for sid in labeling.segment_ids():
        idx = labeling.indices_of(sid)
        seg = PointCloud(points.points[idx])
        diag = seg.bounding_diagonal()
        if diag == 0 or len(seg) == 1:
            c = 1
        else:
            assign = dbscan(seg, DbscanParams(eps=eps_frac * diag, min_pts=min_pts))
            c = estimate_cluster_count(assign)
        c = min(c, len(np.unique(seg.points, axis=0)))
        kseed = int(_sub_seed(seed, sid).generate_state(1, np.uint64)[0])
        if c == 1:
            sub = np.zeros(len(seg), dtype=np.int64)
        else:
            sub = kmeans(seg, KmeansParams(k=c, seed=kseed)).assignment.ids
        for j in range(c):
            names[next_id + j] = f"{labeling.name_of(sid)}_{j}"
        new_labels[idx] = next_id + sub
        next_id += c
    return SegmentLabeling(new_labels, names)


def baseline_clusters(
    points: PointCloud, k_list: list[int], seed: int = 0
) -> list[SegmentLabeling]:
    """Whole-cloud KMeans labelings, one per k (no semantic segmentation)."""
    out = []
    for k in k_list:
        kseed = int(_sub_seed(seed, k).generate_state(1, np.uint64)[0])
        result = kmeans(points, KmeansParams(k=k, seed=kseed))
        names = {j: f"cluster_{j}" for j in range(k)}
        out.append(SegmentLabeling(result.assignment.ids, names))
    return out
