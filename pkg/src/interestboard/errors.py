"""Exception types shared across the package."""


class NumericalError(ArithmeticError):
    """A computation left its numerical domain (negative precision,
    zero-norm vector, failed factorization, ...)."""


class FeatureLoadError(ValueError):
    """A feature file failed validation; the message names the offending record."""


class ExtractorError(RuntimeError):
    """A feature-extraction call failed. Usually transient: safe to retry."""
