"""Storyboard selection: top scores with capture-order spacing, plus an
unsupervised clustering baseline.

The interest-driven board greedily takes images in descending score order
(ties broken toward the earlier capture index) and accepts one only if its
capture index is at least ``min_separation`` away from everything already
accepted. The baseline ignores scores entirely: agglomerative average-linkage
clustering on cosine distance down to the requested number of clusters, one
medoid per cluster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .features import FeatureStore, cosine_distance_matrix

__all__ = ["StoryboardSpec", "StoryboardResult", "select_top_spaced", "cluster_baseline"]


@dataclass(frozen=True)
class StoryboardSpec:
    """Board size N and minimum capture-index separation d."""

    n_images: int
    min_separation: int = 0

    def __post_init__(self) -> None:
        if self.n_images < 1:
            raise ValueError(f"n_images must be >= 1, got {self.n_images}")
        if self.min_separation < 0:
            raise ValueError(f"min_separation must be >= 0, got {self.min_separation}")


@dataclass(frozen=True)
class StoryboardResult:
    """Selected ids in capture order. ``complete`` is False when spacing
    exhausted the candidates before n_images were accepted."""

    ids: list[str]
    requested: int

    @property
    def complete(self) -> bool:
        return len(self.ids) == self.requested


def select_top_spaced(
    scores: Mapping[str, float],
    capture_order: Sequence[str],
    spec: StoryboardSpec,
) -> StoryboardResult:
    """Greedy top-N selection subject to pairwise index separation >= d.

    Candidates are visited in descending score, earlier capture index first
    on ties; a candidate is accepted iff its capture index differs by at
    least ``spec.min_separation`` from every accepted index. Scores must
    cover the whole capture order. Output is sorted by capture order.
    """
    missing = [image_id for image_id in capture_order if image_id not in scores]
    if missing:
        raise ValueError(f"scores missing for {len(missing)} ids, first: {missing[0]!r}")
    by_rank = sorted(
        range(len(capture_order)),
        key=lambda idx: (-float(scores[capture_order[idx]]), idx),
    )
    accepted: list[int] = []
    d = spec.min_separation
    for idx in by_rank:
        if len(accepted) == spec.n_images:
            break
        if all(abs(idx - kept) >= d for kept in accepted):
            accepted.append(idx)
    accepted.sort()
    return StoryboardResult([capture_order[i] for i in accepted], spec.n_images)


def cluster_baseline(features: FeatureStore, n_images: int) -> list[str]:
    """Average-linkage agglomerative clustering on cosine distance down to
    ``n_images`` clusters; returns each cluster's medoid (minimum summed
    within-cluster distance, ties to the smallest capture index), in capture
    order."""
    n = len(features)
    if n_images < 1:
        raise ValueError(f"n_images must be >= 1, got {n_images}")
    if n_images > n:
        raise ValueError(f"n_images ({n_images}) exceeds store size ({n})")
    if n_images == n:
        return features.ids

    dist = cosine_distance_matrix(features.matrix, features.matrix)
    np.fill_diagonal(dist, 0.0)
    dist = 0.5 * (dist + dist.T)
    labels = fcluster(
        linkage(squareform(dist, checks=False), method="average"),
        t=n_images,
        criterion="maxclust",
    )

    ids = features.ids
    medoids: list[int] = []
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        summed = dist[np.ix_(members, members)].sum(axis=1)
        medoids.append(int(members[int(np.argmin(summed))]))  # argmin keeps first on ties
    medoids.sort()
    return [ids[i] for i in medoids]
