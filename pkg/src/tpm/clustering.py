"""K-means++ clustering of trajectory points into urban dense areas."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geodesy import EARTH, GeoConstants, GeoCoord, haversine_np, pairwise_haversine

logger = logging.getLogger(__name__)


@dataclass
class ClusterConfig:
    k: int = 20
    seed: int = 0
    max_iters: int = 100
    tol: float = 1.0  # meters of centroid shift below which iteration stops

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class ClusterModel:
    """Fitted centroids plus the training assignment and inertia.

    ``assignment[i]`` is the label of training point i; labels index
    ``centroids``. ``inertia`` is the sum of squared point-to-assigned-
    centroid haversine distances in meters^2, recorded per iteration in
    ``inertia_history``.
    """

    k: int
    centroids: list[GeoCoord]
    assignment: np.ndarray
    inertia: float
    seed: int
    iterations: int
    inertia_history: list[float] = field(default_factory=list)


def _as_arrays(points: list[GeoCoord]):
    lats = np.array([p.lat for p in points], dtype=float)
    lngs = np.array([p.lng for p in points], dtype=float)
    return lats, lngs


def kmeanspp_init(points: list[GeoCoord], k: int, seed: int,
                  c: GeoConstants = EARTH) -> list[GeoCoord]:
    """Choose k seed centroids by the D^2-weighted scheme.

    The first centroid is uniform over the points; each later one is drawn
    with probability proportional to the squared haversine distance to the
    nearest centroid chosen so far, which keeps the seeds spread apart.
    Fully determined by (points, k, seed). If every remaining point
    coincides with a chosen centroid the next unchosen index is taken.
    """
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= len(points), got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    lats, lngs = _as_arrays(points)

    chosen = [int(rng.integers(n))]
    d2 = pairwise_haversine(lats, lngs, lats[chosen[:1]], lngs[chosen[:1]], c)[:, 0] ** 2
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = next(i for i in range(n) if i not in set(chosen))
        chosen.append(idx)
        d_new = pairwise_haversine(lats, lngs, lats[idx:idx + 1], lngs[idx:idx + 1], c)[:, 0] ** 2
        d2 = np.minimum(d2, d_new)
    return [points[i] for i in chosen]


def kmeans_fit(points: list[GeoCoord], cfg: ClusterConfig,
               c: GeoConstants = EARTH) -> ClusterModel:
    """Lloyd iterations from a k-means++ start, haversine assignment.

    Each point is assigned to its nearest centroid by haversine distance
    (ties to the lowest label); centroids are then recomputed as the
    arithmetic mean of their members' degrees, which is accurate at city
    scale where curvature across one cluster is negligible. Iteration
    stops when the largest centroid shift falls below cfg.tol meters or
    after cfg.max_iters rounds. A centroid left with no members is
    reseeded to the point currently farthest from its assigned centroid.
    """
    n = len(points)
    if n < cfg.k:
        raise ValueError(f"need at least k={cfg.k} points, got {n}")
    lats, lngs = _as_arrays(points)
    seeds = kmeanspp_init(points, cfg.k, cfg.seed, c)
    cen_lat = np.array([s.lat for s in seeds])
    cen_lng = np.array([s.lng for s in seeds])

    history = []
    labels = np.zeros(n, dtype=int)
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        dists = pairwise_haversine(lats, lngs, cen_lat, cen_lng, c)
        labels = np.argmin(dists, axis=1)
        nearest = dists[np.arange(n), labels]
        history.append(float(np.sum(nearest ** 2)))

        new_lat = cen_lat.copy()
        new_lng = cen_lng.copy()
        taken: set[int] = set()
        for j in range(cfg.k):
            members = labels == j
            if members.any():
                new_lat[j] = lats[members].mean()
                new_lng[j] = lngs[members].mean()
            else:
                order = np.argsort(-nearest)
                pick = next(int(i) for i in order if int(i) not in taken)
                taken.add(pick)
                new_lat[j], new_lng[j] = lats[pick], lngs[pick]
                logger.warning("cluster %d emptied; reseeded to farthest point", j)

        shift = haversine_np(cen_lat, cen_lng, new_lat, new_lng, c)
        cen_lat, cen_lng = new_lat, new_lng
        if float(np.max(shift)) < cfg.tol:
            break

    # final assignment against the converged centroids
    dists = pairwise_haversine(lats, lngs, cen_lat, cen_lng, c)
    labels = np.argmin(dists, axis=1)
    inertia = float(np.sum(dists[np.arange(n), labels] ** 2))
    history.append(inertia)
    centroids = [GeoCoord(float(a), float(b)) for a, b in zip(cen_lat, cen_lng)]
    return ClusterModel(cfg.k, centroids, labels, inertia, cfg.seed, iterations, history)


def predict_labels(lats, lngs, model: ClusterModel, c: GeoConstants = EARTH) -> np.ndarray:
    """Vectorized nearest-centroid labels for degree arrays."""
    cen_lat = np.array([p.lat for p in model.centroids])
    cen_lng = np.array([p.lng for p in model.centroids])
    dists = pairwise_haversine(np.atleast_1d(lats), np.atleast_1d(lngs), cen_lat, cen_lng, c)
    return np.argmin(dists, axis=1)


def predict_label(coord: GeoCoord, model: ClusterModel, c: GeoConstants = EARTH) -> int:
    """Label of the nearest centroid; ties resolve to the lowest index."""
    return int(predict_labels([coord.lat], [coord.lng], model, c)[0])


def save_model(model: ClusterModel, path: str | Path) -> None:
    """Write the model as a plain-text artifact: k, seed, inertia, centroid table."""
    lines = [f"k {model.k}",
             f"seed {model.seed}",
             f"iterations {model.iterations}",
             f"inertia {model.inertia!r}"]
    for j, cen in enumerate(model.centroids):
        lines.append(f"centroid {j} {cen.lat!r} {cen.lng!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ClusterModel:
    """Reload a model artifact written by save_model.

    The training assignment is not persisted; the loaded model carries an
    empty assignment array and is suitable for predict_label/predict_labels.
    """
    k = seed = iterations = None
    inertia = 0.0
    centroids: dict[int, GeoCoord] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "k":
            k = int(parts[1])
        elif tag == "seed":
            seed = int(parts[1])
        elif tag == "iterations":
            iterations = int(parts[1])
        elif tag == "inertia":
            inertia = float(parts[1])
        elif tag == "centroid":
            centroids[int(parts[1])] = GeoCoord(float(parts[2]), float(parts[3]))
        else:
            raise ValueError(f"unrecognized model line: {line!r}")
    if k is None or len(centroids) != k:
        raise ValueError(f"model file {path} is missing k or centroids")
    ordered = [centroids[j] for j in range(k)]
    return ClusterModel(k, ordered, np.zeros(0, dtype=int), inertia,
                        seed or 0, iterations or 0, [])
