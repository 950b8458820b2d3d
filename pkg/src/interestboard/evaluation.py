"""Synthetic benchmark harness: train/test splits, outcome-prediction
accuracy, and accuracy-versus-budget traces.

The real operator data this methodology was designed around is not shippable,
so the harness manufactures a stand-in with known ground truth: clustered
unit-sphere feature vectors, a true interest value that is a fixed random
linear functional of the (normalized) features, and judgments sampled as
sign(interest difference + Gaussian noise) over uniformly random pairs. That
keeps the generative model identical to the one the ranker assumes, while the
clustered geometry gives the feature-space smoother something to generalize
across.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from . import gp
from .features import FeatureStore, KernelConfig
from .ranking import Comparison, PriorConfig, infer_ep

__all__ = [
    "SplitConfig",
    "AccuracyTrace",
    "SyntheticDataset",
    "split_comparisons",
    "prediction_accuracy",
    "accuracy_trace",
    "synthesize_dataset",
    "METHOD_RANKER",
    "METHOD_SMOOTHED",
]

METHOD_RANKER = "TS"
METHOD_SMOOTHED = "GP-CNN"

_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SplitConfig:
    """Deterministic shuffled split; same seed, same partition."""

    train_fraction: float = 2.0 / 3.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.train_fraction <= 1.0):
            raise ValueError(
                f"train_fraction must be in (0, 1], got {self.train_fraction}"
            )


@dataclass(frozen=True)
class AccuracyTrace:
    """Held-out prediction accuracy per training budget, per method."""

    budgets: list[int]
    accuracies: dict[str, list[float]]

    def __post_init__(self) -> None:
        if any(b1 >= b2 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ValueError("budgets must be strictly increasing")
        for method, values in self.accuracies.items():
            if len(values) != len(self.budgets):
                raise ValueError(f"method {method!r}: one accuracy per budget required")


@dataclass(frozen=True)
class SyntheticDataset:
    features: FeatureStore
    true_interest: np.ndarray
    comparisons: list[Comparison]
    seed: int

    def interest_map(self) -> dict[str, float]:
        return {
            image_id: float(w)
            for image_id, w in zip(self.features.ids, self.true_interest)
        }


def split_comparisons(
    all_comparisons: Sequence[Comparison], cfg: SplitConfig
) -> tuple[list[Comparison], list[Comparison]]:
    """Shuffled disjoint (train, test) partition; |train| = round(fraction*N)."""
    if not all_comparisons:
        raise ValueError("cannot split an empty comparison list")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(all_comparisons))
    n_train = int(round(cfg.train_fraction * len(all_comparisons)))
    train = [all_comparisons[i] for i in order[:n_train]]
    test = [all_comparisons[i] for i in order[n_train:]]
    return train, test


def prediction_accuracy(
    scores: Mapping[str, float], test: Sequence[Comparison]
) -> float:
    """Fraction of judgments where score(winner) > score(loser).

    Exact score ties count as incorrect: a scorer that cannot separate a pair
    has not predicted its outcome.
    """
    if not test:
        raise ValueError("empty test set")
    correct = 0
    for comp in test:
        try:
            sw = scores[comp.winner_id]
            sl = scores[comp.loser_id]
        except KeyError as exc:
            raise ValueError(f"missing score for id {exc.args[0]!r}") from None
        if sw > sl:
            correct += 1
    return correct / len(test)


def synthesize_dataset(
    n_images: int,
    dim: int,
    n_comparisons: int,
    noise_std: float = 0.5,
    seed: int = 0,
    n_clusters: int = 8,
) -> SyntheticDataset:
    """Manufacture a ground-truth dataset matching the ranker's own
    generative model.

    Features sit near a few unit-sphere cluster centers so cosine similarity
    is informative; true interest is a fixed random linear functional of the
    normalized features; judgments pick uniform random ordered pairs and
    record sign(w_i - w_j + N(0, noise_std**2)).
    """
    if n_images < 2:
        raise ValueError(f"n_images must be >= 2, got {n_images}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if n_comparisons < 0:
        raise ValueError(f"n_comparisons must be >= 0, got {n_comparisons}")
    if noise_std < 0.0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")

    rng = np.random.default_rng(seed)
    k = max(1, min(n_clusters, n_images))
    centers = rng.standard_normal((k, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    assignment = rng.integers(0, k, size=n_images)
    points = centers[assignment] + 0.15 * rng.standard_normal((n_images, dim))
    points /= np.linalg.norm(points, axis=1, keepdims=True)

    functional = rng.standard_normal(dim)
    true_interest = points @ functional

    width = len(str(max(n_images - 1, 0)))
    ids = [f"img{idx:0{width}d}" for idx in range(n_images)]
    store = FeatureStore.from_arrays(ids, points, [f"{i}.png" for i in ids])

    comparisons: list[Comparison] = []
    for _ in range(n_comparisons):
        i = int(rng.integers(0, n_images))
        j = int(rng.integers(0, n_images - 1))
        if j >= i:
            j += 1
        margin = true_interest[i] - true_interest[j] + (
            noise_std * rng.standard_normal() if noise_std > 0.0 else 0.0
        )
        winner, loser = (ids[i], ids[j]) if margin > 0.0 else (ids[j], ids[i])
        comparisons.append(Comparison(winner, loser, _EPOCH, f"synthetic-{seed}"))

    return SyntheticDataset(store, true_interest, comparisons, seed)


def accuracy_trace(
    dataset: SyntheticDataset,
    cfg: SplitConfig,
    budgets: Sequence[int],
    methods: Sequence[str] = (METHOD_RANKER, METHOD_SMOOTHED),
    prior: PriorConfig = PriorConfig(),
    kernel: KernelConfig = KernelConfig(),
) -> AccuracyTrace:
    """Held-out accuracy after fitting each method on the first b training
    judgments, for each budget b.

    The training order is fixed by the split's shuffle, so budgets are
    nested: every budget's training set contains the previous one's.
    """
    train, test = split_comparisons(dataset.comparisons, cfg)
    budgets = [int(b) for b in budgets]
    for b in budgets:
        if b > len(train):
            raise ValueError(f"budget {b} exceeds training-set size {len(train)}")
    unknown = set(methods) - {METHOD_RANKER, METHOD_SMOOTHED}
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")

    image_ids = dataset.features.ids
    accuracies: dict[str, list[float]] = {m: [] for m in methods}
    for b in budgets:
        posterior = infer_ep(train[:b], image_ids, prior)
        if METHOD_RANKER in accuracies:
            accuracies[METHOD_RANKER].append(
                prediction_accuracy(posterior.score_map(), test)
            )
        if METHOD_SMOOTHED in accuracies:
            smoothed = gp.smooth_all(gp.fit(dataset.features, posterior, kernel))
            accuracies[METHOD_SMOOTHED].append(
                prediction_accuracy(smoothed.score_map(), test)
            )
    return AccuracyTrace(budgets, accuracies)


def mean_traces(traces: Sequence[AccuracyTrace]) -> AccuracyTrace:
    """Pointwise mean of traces sharing budgets and methods (seed averaging)."""
    if not traces:
        raise ValueError("no traces to average")
    budgets = traces[0].budgets
    methods = sorted(traces[0].accuracies)
    for trace in traces[1:]:
        if trace.budgets != budgets or sorted(trace.accuracies) != methods:
            raise ValueError("traces must share budgets and methods")
    return AccuracyTrace(
        budgets,
        {
            m: [
                float(np.mean([t.accuracies[m][k] for t in traces]))
                for k in range(len(budgets))
            ]
            for m in methods
        },
    )
