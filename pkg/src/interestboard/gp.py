"""Gaussian-process smoothing of ranked interest over feature space.

The ranker's per-image marginals are treated as heteroscedastic observations
of a zero-mean latent interest function over feature vectors: observation i
has value w_m[i] and noise variance equal to its marginal variance. With the
RBF-on-cosine kernel K this gives the usual GP posterior

    mean(x*) = k(x*, X) @ [K + S]^-1 @ w_m
    var(x*)  = k(x*, x*) - k(x*, X) @ [K + S]^-1 @ k(X, x*)

where S is the diagonal noise matrix. The system is solved once through a
Cholesky factorization (never an explicit inverse); each predictive mean is
then a single dot product. Because the cosine-RBF kernel is not guaranteed
positive semi-definite, the factorization escalates a diagonal jitter from
the configured starting point by factors of 10 up to 1e-2 before giving up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import NumericalError
from .features import FeatureStore, KernelConfig, kernel_matrix
from .ranking import InterestPosterior

__all__ = ["GPModel", "fit", "predict", "smooth_all"]

_MAX_JITTER = 1e-2

# Raw predictive variances below this are numerically suspect and recorded
# in the model's diagnostics; anything in (-1e-8, 0) is silently clamped.
_VARIANCE_ALARM = -1e-8


@dataclass
class GPModel:
    """Fitted smoother state; immutable after fit apart from diagnostics."""

    training_ids: list[str]
    train_features: np.ndarray
    w_m: np.ndarray
    noise_diag: np.ndarray
    kernel_cfg: KernelConfig
    converged: bool
    iterations: int
    jitter_used: float = 0.0
    # Internal solver state: Cholesky factor of K + S + jitter*I and the
    # precomputed weight vector [K + S]^-1 w_m.
    _cho: tuple[np.ndarray, bool] | None = None
    _alpha: np.ndarray | None = None
    _train_k: np.ndarray | None = None
    variance_clamp_events: list[float] = field(default_factory=list)

    @property
    def n_training(self) -> int:
        return len(self.training_ids)

    @property
    def dim(self) -> int | None:
        return None if self.train_features.size == 0 else self.train_features.shape[1]


def fit(
    features: FeatureStore,
    posterior: InterestPosterior,
    cfg: KernelConfig = KernelConfig(),
) -> GPModel:
    """Fit the smoother to ranked marginals. Every posterior id must have a
    feature vector. O(n^3) once; predictive means are O(n) afterwards."""
    if np.any(np.asarray(posterior.variances) <= 0.0):
        raise ValueError("posterior variances must be strictly positive")
    x_train = features.matrix_for(posterior.ids)
    w_m = np.asarray(posterior.means, dtype=np.float64)
    noise = np.asarray(posterior.variances, dtype=np.float64)
    n = len(posterior.ids)

    model = GPModel(
        training_ids=list(posterior.ids),
        train_features=x_train,
        w_m=w_m,
        noise_diag=noise,
        kernel_cfg=cfg,
        converged=posterior.converged,
        iterations=posterior.iterations,
    )
    if n == 0:
        return model

    kernel = kernel_matrix(x_train, x_train, cfg)
    np.fill_diagonal(kernel, 1.0)
    kernel = 0.5 * (kernel + kernel.T)  # exact symmetry for the factorization

    effective = kernel + np.diag(noise)
    jitter = cfg.jitter
    while True:
        try:
            model._cho = cho_factor(
                effective + jitter * np.eye(n), lower=True, check_finite=False
            )
            break
        except LinAlgError:
            next_jitter = 1e-8 if jitter == 0.0 else jitter * 10.0
            if next_jitter > _MAX_JITTER:
                raise NumericalError(
                    f"kernel-plus-noise factorization failed at jitter {jitter:g} "
                    f"(escalation limit {_MAX_JITTER:g})"
                ) from None
            jitter = next_jitter
    model.jitter_used = jitter
    model._alpha = cho_solve(model._cho, w_m, check_finite=False)
    model._train_k = kernel
    return model


def _query_vector(model: GPModel, x_star: np.ndarray) -> np.ndarray:
    x_star = np.asarray(x_star, dtype=np.float64)
    if x_star.ndim != 1:
        raise ValueError("query vector must be one-dimensional")
    if model.dim is not None and x_star.shape[0] != model.dim:
        raise ValueError(
            f"query dimension {x_star.shape[0]} != training dimension {model.dim}"
        )
    return kernel_matrix(x_star[None, :], model.train_features, model.kernel_cfg)[0]


def predict(model: GPModel, x_star: np.ndarray) -> tuple[float, float]:
    """Predictive (mean, variance) at a feature vector.

    With no training data this is the prior (0, 1): the kernel has unit
    self-similarity. Variance is clamped at zero; a raw value below -1e-8 is
    appended to ``model.variance_clamp_events``.
    """
    if model.n_training == 0:
        np.asarray(x_star, dtype=np.float64)  # still validate finiteness/shape
        return 0.0, 1.0
    k_star = _query_vector(model, x_star)
    mean = float(k_star @ model._alpha)
    raw_var = 1.0 - float(k_star @ cho_solve(model._cho, k_star, check_finite=False))
    if raw_var < _VARIANCE_ALARM:
        model.variance_clamp_events.append(raw_var)
    return mean, max(raw_var, 0.0)


def smooth_all(model: GPModel) -> InterestPosterior:
    """Smoothed (mean, variance) for every training image, in training order."""
    if model.n_training == 0:
        return InterestPosterior([], np.zeros(0), np.zeros(0), model.converged,
                                 model.iterations)
    kernel = model._train_k
    means = kernel @ model._alpha
    solved = cho_solve(model._cho, kernel, check_finite=False)
    raw_vars = 1.0 - np.einsum("ij,ij->j", kernel, solved)
    for raw in raw_vars[raw_vars < _VARIANCE_ALARM]:
        model.variance_clamp_events.append(float(raw))
    return InterestPosterior(
        list(model.training_ids),
        means,
        np.maximum(raw_vars, 0.0),
        model.converged,
        model.iterations,
    )
