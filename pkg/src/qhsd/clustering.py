"""k-means over feature vectors with a pluggable distance backend.

The backends compare points either directly (euclidean), through the exact
Hilbert-Schmidt distance of their encoded density matrices, or through the
simulated interferometric measurement of that distance.  Squared distances
are used for all comparisons; the constant factor between euclidean and
Hilbert-Schmidt distance cannot change an argmin, so the exact backends are
interchangeable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qhsd.encoding import encode
from qhsd.interferometry import NoiseModel, measure_hsd
from qhsd.states import StateError, hsd_exact

BACKEND_KINDS = ("euclidean", "hsd_exact", "hsd_simulated")


class EuclideanBackend:
    kind = "euclidean"

    def distance_sq(self, u: np.ndarray, v: np.ndarray, key: Sequence[int] = ()) -> float:
        d = u - v
        return float(d @ d)


class ExactHsdBackend:
    """Encodes both vectors and computes the exact Hilbert-Schmidt distance."""

    kind = "hsd_exact"

    def distance_sq(self, u: np.ndarray, v: np.ndarray, key: Sequence[int] = ()) -> float:
        return hsd_exact(encode(u, validate=False), encode(v, validate=False)) ** 2


class SimulatedHsdBackend:
    """Noisy interferometric distance; substreams are derived from the
    (iteration, point, centroid) key so results are order-independent."""

    kind = "hsd_simulated"

    def __init__(self, noise: NoiseModel):
        if noise.mode == "exact":
            raise StateError("simulated backend needs a stochastic noise mode")
        self.noise = noise

    def distance_sq(self, u: np.ndarray, v: np.ndarray, key: Sequence[int] = ()) -> float:
        m = measure_hsd(encode(u, validate=False), encode(v, validate=False), self.noise, key)
        return m.d2


def make_backend(kind: str, noise: Optional[NoiseModel] = None):
    if kind == "euclidean":
        return EuclideanBackend()
    if kind == "hsd_exact":
        return ExactHsdBackend()
    if kind == "hsd_simulated":
        if noise is None:
            raise StateError("hsd_simulated backend requires a noise model")
        return SimulatedHsdBackend(noise)
    raise StateError(f"unknown backend {kind!r}")


@dataclass(frozen=True)
class ClusterModel:
    centroids: np.ndarray  # (k, n_features)
    iteration: int = 0

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class KMeansResult:
    model: ClusterModel
    labels: np.ndarray
    iterations: int
    cost: float
    centroid_trace: Tuple[np.ndarray, ...]


def assign(points: np.ndarray, model: ClusterModel, backend=None, iteration: int = 0):
    """Nearest-centroid labels; ties go to the lowest centroid index."""
    if backend is None:
        backend = EuclideanBackend()
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    dists = np.empty((n, model.k))
    for i in range(n):
        for j in range(model.k):
            dists[i, j] = backend.distance_sq(points[i], model.centroids[j], (iteration, i, j))
    labels = np.argmin(dists, axis=1)  # argmin takes the first (lowest) index on ties
    return labels, dists


def update_centroids(
    points: np.ndarray, labels: np.ndarray, model: ClusterModel
) -> ClusterModel:
    """Means of the assigned points.  An empty cluster is re-seeded to the
    point farthest (euclidean) from that cluster's current centroid."""
    points = np.asarray(points, dtype=float)
    centroids = model.centroids.copy()
    for j in range(model.k):
        mask = labels == j
        if mask.any():
            centroids[j] = points[mask].mean(axis=0)
        else:
            far = np.argmax(((points - centroids[j]) ** 2).sum(axis=1))
            centroids[j] = points[far]
    return ClusterModel(centroids, model.iteration + 1)


def _init_centroids(points: np.ndarray, k: int, rng: np.random.Generator, method: str) -> np.ndarray:
    distinct = np.unique(points, axis=0)
    if k > distinct.shape[0]:
        raise StateError(f"k={k} exceeds the {distinct.shape[0]} distinct points")
    if method == "random":
        idx = rng.choice(distinct.shape[0], size=k, replace=False)
        return distinct[np.sort(idx)].copy()
    if method == "kmeans++":
        centroids = [points[rng.integers(points.shape[0])]]
        while len(centroids) < k:
            d2 = np.min(
                [((points - c) ** 2).sum(axis=1) for c in centroids], axis=0
            )
            probs = d2 / d2.sum() if d2.sum() > 0 else np.full(points.shape[0], 1 / points.shape[0])
            centroids.append(points[rng.choice(points.shape[0], p=probs)])
        return np.array(centroids)
    raise StateError(f"unknown init method {method!r}")


def kmeans(
    points: np.ndarray,
    k: int,
    init_seed: int = 0,
    max_iter: int = 100,
    backend=None,
    init: str = "random",
    patience: Optional[int] = None,
) -> KMeansResult:
    """Lloyd iteration: assign, then move centroids to cluster means, until
    labels stop changing (for `patience` consecutive passes under a noisy
    backend) or max_iter is reached."""
    points = np.asarray(points, dtype=float)
    if max_iter < 1:
        raise StateError("max_iter must be >= 1")
    if backend is None:
        backend = EuclideanBackend()
    if patience is None:
        patience = 3 if backend.kind == "hsd_simulated" else 1
    rng = np.random.default_rng(init_seed)
    model = ClusterModel(_init_centroids(points, k, rng, init))
    trace: List[np.ndarray] = [model.centroids.copy()]
    labels = None
    cost = np.inf
    stable = 0
    iterations = 0
    for it in range(max_iter):
        iterations = it + 1
        new_labels, dists = assign(points, model, backend, it)
        cost = float(dists[np.arange(points.shape[0]), new_labels].sum())
        if labels is not None and np.array_equal(labels, new_labels):
            stable += 1
            if stable >= patience:
                labels = new_labels
                break
        else:
            stable = 0
        labels = new_labels
        model = update_centroids(points, labels, model)
        trace.append(model.centroids.copy())
    return KMeansResult(model, labels, iterations, cost, tuple(trace))


def two_gaussian_demo(
    n_points: int = 1000,
    seed: int = 0,
    centers: Optional[np.ndarray] = None,
    std: float = 0.08,
    radius: float = 0.5,
) -> np.ndarray:
    """Two Gaussian blobs of 3D points, resampled to stay inside the ball of
    the given radius.  Deterministic for a fixed seed."""
    if centers is None:
        centers = np.array([[-0.22, -0.15, 0.10], [0.20, 0.18, -0.08]])
    rng = np.random.default_rng(seed)
    half = n_points // 2
    sizes = (half, n_points - half)
    out = []
    for c, size in zip(centers, sizes):
        pts = np.empty((size, 3))
        filled = 0
        while filled < size:
            cand = c + std * rng.standard_normal((size - filled, 3))
            keep = cand[np.linalg.norm(cand, axis=1) <= radius]
            pts[filled : filled + keep.shape[0]] = keep
            filled += keep.shape[0]
        out.append(pts)
    return np.vstack(out)
