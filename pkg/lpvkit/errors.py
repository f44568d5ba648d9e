"""Contains shared error types that can be raised from lpvkit functions"""

from typing import Optional


class LpvKitError(Exception):
    """Base class for every error raised deliberately by lpvkit"""


class TimeMapError(LpvKitError):
    """Raised when a timemap cannot be built from the given orders or channel names"""


class DomainMismatchError(LpvKitError):
    """Raised when continuous-time and discrete-time objects are combined or misused"""

    def __init__(self, expected: str, got: str, operation: str = "operation"):
        self.expected = expected
        self.got = got
        self.operation = operation
        super().__init__(f"{operation} requires a {expected} object, got {got}")


class DimensionError(LpvKitError):
    """Raised when matrix or signal dimensions are inconsistent"""


class BasisError(LpvKitError):
    """Raised when a basis function is invalid or cannot be evaluated or transformed"""


class ModelError(LpvKitError):
    """Raised when an LPV model cannot be constructed from the given blocks"""


class IllPosedError(LpvKitError):
    """Raised when the algebraic loop of an LFR cannot be resolved"""

    def __init__(self, time_index: Optional[int], determinant: float):
        self.time_index = time_index
        self.determinant = determinant
        where = "at the frozen point" if time_index is None else f"at time index {time_index}"
        super().__init__(f"LFR is ill-posed {where}: |det(I - Delta*Dzw)| = {abs(determinant):.3e}")


class ConversionError(LpvKitError):
    """Raised when a representation cannot be converted into another one"""


class SimulationError(LpvKitError):
    """Raised when a simulation cannot be performed or diverges"""


class DataError(LpvKitError):
    """Raised when a dataset or trajectory violates its invariants"""


class StructureError(LpvKitError):
    """Raised when a model template does not match the structure an estimator needs"""


class RankDeficientError(LpvKitError):
    """Raised when a regression problem is rank deficient and no regularization is used"""

    def __init__(self, rank: int, n_params: int):
        self.rank = rank
        self.n_params = n_params
        super().__init__(
            f"Regression matrix has numerical rank {rank} < {n_params} free parameters; "
            f"add regularization or fix parameters"
        )


class IdentificationError(LpvKitError):
    """Raised when an estimator cannot produce a model"""


class SerializationError(LpvKitError):
    """Raised when an object cannot be written to or read from a file"""


class ConfigError(LpvKitError):
    """Raised when a configuration file or option set is invalid"""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"Invalid configuration value for '{key}': {reason}")


__all__ = [
    "LpvKitError",
    "TimeMapError",
    "DomainMismatchError",
    "DimensionError",
    "BasisError",
    "ModelError",
    "IllPosedError",
    "ConversionError",
    "SimulationError",
    "DataError",
    "StructureError",
    "RankDeficientError",
    "IdentificationError",
    "SerializationError",
    "ConfigError",
]
