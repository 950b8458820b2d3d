"""One-dimensional Gaussian algebra in natural parameters.

Densities are carried as ``exp(-precision * x**2 / 2 + precision_mean * x)``
(up to normalisation), so multiplying and dividing densities is component-wise
addition and subtraction, and the flat zero-information message is the
first-class value ``FLAT = Gaussian1D(0, 0)``. This is the currency of the
message-passing ranker: cavity computations routinely produce near-flat
messages, which a (mean, variance) representation cannot express.

`truncation_moments` supplies the mean/variance corrections for conditioning
a unit-variance Gaussian on a positive sign outcome, the only non-Gaussian
factor the ranker needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .errors import NumericalError

__all__ = ["Gaussian1D", "FLAT", "truncation_moments"]

# Relative slack for treating a slightly negative quotient precision as flat.
_DIVIDE_SLACK = 4e-12

# Below this the normal cdf is too small for direct pdf/cdf evaluation to be
# trusted, so truncation_moments switches to an asymptotic series.
_SERIES_CUTOFF = -30.0

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _npdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


@dataclass(frozen=True)
class Gaussian1D:
    """Unnormalised 1-D Gaussian in natural parameters.

    ``precision`` is 1/variance and must be >= 0; ``precision_mean`` is
    mean * precision. ``precision == 0`` encodes the flat (improper uniform)
    message and forces ``precision_mean == 0``.
    """

    precision: float = 0.0
    precision_mean: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.precision) and math.isfinite(self.precision_mean)):
            raise ValueError("Gaussian1D parameters must be finite")
        if self.precision < 0.0:
            raise ValueError(f"precision must be >= 0, got {self.precision}")
        if self.precision == 0.0 and self.precision_mean != 0.0:
            raise ValueError("flat message (precision 0) requires precision_mean 0")

    @classmethod
    def from_moments(cls, mean: float, variance: float) -> "Gaussian1D":
        """Build from (mean, variance); variance must be positive and finite."""
        if not (math.isfinite(mean) and math.isfinite(variance)):
            raise ValueError("mean and variance must be finite")
        if variance <= 0.0:
            raise ValueError(f"variance must be > 0, got {variance}")
        return cls(precision=1.0 / variance, precision_mean=mean / variance)

    def to_moments(self) -> tuple[float, float]:
        """Return (mean, variance). Undefined for the flat message."""
        if self.precision <= 0.0:
            raise ValueError("moments are undefined for a flat message")
        return self.precision_mean / self.precision, 1.0 / self.precision

    @property
    def is_flat(self) -> bool:
        return self.precision == 0.0

    @property
    def mean(self) -> float:
        return self.to_moments()[0]

    @property
    def variance(self) -> float:
        return self.to_moments()[1]

    def __mul__(self, other: "Gaussian1D") -> "Gaussian1D":
        return Gaussian1D(
            self.precision + other.precision,
            self.precision_mean + other.precision_mean,
        )

    def __truediv__(self, other: "Gaussian1D") -> "Gaussian1D":
        """Density quotient. The result's precision must not be negative
        (beyond float rounding slack); near-flat residue collapses to FLAT."""
        precision = self.precision - other.precision
        precision_mean = self.precision_mean - other.precision_mean
        slack = _DIVIDE_SLACK * max(1.0, self.precision)
        if precision < -slack:
            raise NumericalError(
                f"quotient precision is negative ({precision}); "
                "the divisor carries more information than the dividend"
            )
        if precision <= slack:
            # Quotient carries no usable information; any linear residue at
            # this scale is rounding noise.
            return FLAT
        return Gaussian1D(precision, precision_mean)


FLAT = Gaussian1D(0.0, 0.0)


def truncation_moments(t: float) -> tuple[float, float]:
    """Moment corrections for conditioning on a positive sign outcome.

    For a standard normal x conditioned on x > -t:

        v(t) = pdf(t) / cdf(t)       (the conditional mean)
        w(t) = v(t) * (v(t) + t)     (1 - the conditional variance)

    Both are strictly positive with w < 1 for all finite t, decreasing in t.
    For t < -30 the cdf is too small for the direct quotient, so an asymptotic
    expansion in 1/|t| is used; the functions never return NaN. In IEEE double
    arithmetic v saturates to 0 for t > ~38 and w to 1 for t < ~-1e8.
    """
    if math.isnan(t):
        raise ValueError("t must not be NaN")
    if t < _SERIES_CUTOFF:
        u = -t
        inv = 1.0 / u
        inv2 = inv * inv
        # v = u + 1/u - 2/u^3 + 10/u^5 + O(u^-7); the residual v + t is kept
        # in expanded form to avoid catastrophic cancellation in w.
        residual = inv * (1.0 - inv2 * (2.0 - 10.0 * inv2))
        v = u + residual
        w = v * residual
    else:
        denom = float(ndtr(t))
        v = _npdf(t) / denom
        w = v * (v + t)
    return v, min(max(w, 0.0), 1.0)
