"""Bayesian pairwise-comparison ranking by expectation propagation.

Each image carries a latent Gaussian interest value. An operator judgment
"image i is more interesting than image j" is a noisy game outcome: the
performance difference is the interest difference plus Gaussian noise of
variance 2 * beta**2, and only its sign is observed. Chaining judgments over
a shared image set yields an intractable posterior that is approximated by
a joint Gaussian, refined one judgment factor at a time: divide the factor's
current contribution (its "site") out of the projected difference marginal,
moment-match the sign factor against that cavity, and fold the refreshed
site back in as a rank-one update. Sweeps repeat in insertion order until no
marginal mean or variance moves by more than the tolerance.

The joint covariance is tracked internally because judgments induce
correlations between compared images; ignoring them (tracking per-image
marginals only) visibly biases the result on graphs where pairs repeat.
Externally only the per-image means and variances are exposed: that is all
downstream consumers use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.linalg.blas import dger
from scipy.special import ndtr

from .errors import NumericalError
from .gaussians import FLAT, Gaussian1D, truncation_moments

__all__ = [
    "Comparison",
    "PriorConfig",
    "InterestPosterior",
    "infer_ep",
    "predict_outcome",
]


@dataclass(frozen=True)
class Comparison:
    """One operator judgment: winner_id beat loser_id."""

    winner_id: str
    loser_id: str
    timestamp: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )
    session_id: str = ""

    def __post_init__(self) -> None:
        if self.winner_id == self.loser_id:
            raise ValueError(f"winner and loser must differ, both {self.winner_id!r}")


@dataclass(frozen=True)
class PriorConfig:
    """Gaussian prior over image interest plus the per-game performance noise.

    A judgment's performance difference carries noise variance 2 * beta**2
    (each side contributes beta**2).
    """

    prior_mean: float = 0.0
    prior_sigma: float = 2.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (self.prior_sigma > 0.0 and math.isfinite(self.prior_sigma)):
            raise ValueError(f"prior_sigma must be > 0, got {self.prior_sigma}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class InterestPosterior:
    """Per-image marginal interest estimates, aligned by index."""

    ids: list[str]
    means: np.ndarray
    variances: np.ndarray
    converged: bool
    iterations: int

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.means) == len(self.variances)):
            raise ValueError("ids, means and variances must have equal length")

    def index_of(self, image_id: str) -> int:
        index = self.__dict__.get("_index")
        if index is None:
            index = {image_id: i for i, image_id in enumerate(self.ids)}
            self.__dict__["_index"] = index
        try:
            return index[image_id]
        except KeyError:
            raise KeyError(f"unknown image id: {image_id!r}") from None

    def mean_of(self, image_id: str) -> float:
        return float(self.means[self.index_of(image_id)])

    def variance_of(self, image_id: str) -> float:
        return float(self.variances[self.index_of(image_id)])

    def score_map(self) -> dict[str, float]:
        return {image_id: float(m) for image_id, m in zip(self.ids, self.means)}


def infer_ep(
    comparisons: list[Comparison],
    image_ids: list[str],
    prior: PriorConfig = PriorConfig(),
    tol: float = 1e-4,
    max_iters: int = 100,
    damping: float = 1.0,
) -> InterestPosterior:
    """Estimate per-image interest marginals from pairwise judgments.

    Images that appear in no comparison keep exactly the prior (their rows
    of the joint are never touched). Repeated identical judgments are
    distinct factors and all contribute evidence. If ``max_iters`` sweeps do
    not converge, the best-effort result is returned with
    ``converged=False`` rather than raising.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not (0.0 < damping <= 1.0):
        raise ValueError(f"damping must be in (0, 1], got {damping}")

    index = {image_id: i for i, image_id in enumerate(image_ids)}
    if len(index) != len(image_ids):
        raise ValueError("image_ids contains duplicates")
    for comp in comparisons:
        if comp.winner_id not in index:
            raise ValueError(f"comparison references unknown id {comp.winner_id!r}")
        if comp.loser_id not in index:
            raise ValueError(f"comparison references unknown id {comp.loser_id!r}")

    n = len(image_ids)
    pairs = [(index[c.winner_id], index[c.loser_id]) for c in comparisons]
    two_beta_sq = 2.0 * prior.beta**2

    mean = np.full(n, float(prior.prior_mean))
    # Fortran order lets the BLAS rank-1 update run in place.
    cov = np.zeros((n, n), order="F")
    np.fill_diagonal(cov, prior.prior_sigma**2)
    sites = [FLAT] * len(pairs)

    converged = False
    iterations = 0
    for sweep in range(max_iters):
        iterations = sweep + 1
        mean_before = mean.copy()
        var_before = np.diagonal(cov).copy()
        for k, (i, j) in enumerate(pairs):
            # Marginal of the interest difference s = w_i - w_j.
            cov_a = cov[:, i] - cov[:, j]
            v_s = cov_a[i] - cov_a[j]
            m_s = mean[i] - mean[j]
            if v_s <= 0.0:
                continue
            site = sites[k]
            try:
                cavity = Gaussian1D.from_moments(m_s, v_s) / site
                m_cav, v_cav = cavity.to_moments()
            except (NumericalError, ValueError):
                # Site outweighs the current marginal (can happen
                # transiently); leave this factor for the next sweep.
                continue

            c_sq = v_cav + two_beta_sq
            c = math.sqrt(c_sq)
            v, w = truncation_moments(m_cav / c)
            tilted = Gaussian1D.from_moments(
                m_cav + v_cav / c * v, v_cav * (1.0 - w * v_cav / c_sq)
            )
            new_site = tilted / cavity
            if damping < 1.0:
                new_site = _blend(new_site, site, damping)
            d_tau = new_site.precision - site.precision
            d_nu = new_site.precision_mean - site.precision_mean
            sites[k] = new_site

            # Fold the site change back into the joint (Sherman-Morrison).
            denom = 1.0 + d_tau * v_s
            mean += ((d_nu - d_tau * m_s) / denom) * cov_a
            cov = dger(-d_tau / denom, cov_a, cov_a, a=cov, overwrite_a=1)
        if n:
            delta = max(
                float(np.max(np.abs(mean - mean_before))),
                float(np.max(np.abs(np.diagonal(cov) - var_before))),
            )
        else:
            delta = 0.0
        if delta < tol:
            converged = True
            break

    return InterestPosterior(
        list(image_ids),
        mean,
        np.diagonal(cov).copy(),
        converged,
        iterations,
    )


def _blend(new: Gaussian1D, old: Gaussian1D, damping: float) -> Gaussian1D:
    precision = damping * new.precision + (1.0 - damping) * old.precision
    precision_mean = damping * new.precision_mean + (1.0 - damping) * old.precision_mean
    if precision <= 0.0:
        return FLAT
    return Gaussian1D(precision, precision_mean)


def predict_outcome(
    posterior: InterestPosterior, i: str, j: str, beta: float = 1.0
) -> float:
    """Probability that image i would beat image j in a fresh judgment.

    Phi((mu_i - mu_j) / sqrt(var_i + var_j + 2 * beta**2)). The two
    orientations sum to exactly 1.0.
    """
    mu_i = posterior.mean_of(i)
    mu_j = posterior.mean_of(j)
    c = math.sqrt(
        posterior.variance_of(i) + posterior.variance_of(j) + 2.0 * beta**2
    )
    x = (mu_i - mu_j) / c
    # Evaluating the positive branch once and complementing keeps
    # predict_outcome(i, j) + predict_outcome(j, i) == 1.0 exact in IEEE
    # round-to-nearest (1 - p is exact for p >= 0.5 by Sterbenz).
    if x >= 0.0:
        return float(ndtr(x))
    return 1.0 - float(ndtr(-x))
