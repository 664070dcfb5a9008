"""Privacy-preserving aggregation of time-stamped sensor readings.

Readings are perturbed locally with budget-aware Laplace noise, anonymized by
a permutation shuffler (Mallows model over refined groups, or a uniform
cyclic shuffle), and averaged by one of three mean estimators.
"""

from .errors import ConfigError, DataError, DegenerateInputError, InvariantViolation, RaseError

__version__ = "0.1.0"

__all__ = ["ConfigError", "DataError", "DegenerateInputError", "InvariantViolation", "RaseError", "__version__"]
