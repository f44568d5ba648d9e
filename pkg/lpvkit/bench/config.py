"""Parameters of the unbalanced-disc benchmark and their `key = value` configuration files."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Mapping, Union

from attrs import define, evolve, field, fields

from ..errors import ConfigError
from ..ident.options import read_key_values


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(attribute.name, f"must be positive, got {value}")


def _snr_list(value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    return tuple(float(v) for v in value)


def _finite_all(instance, attribute, value):
    if not value:
        raise ConfigError(attribute.name, "needs at least one value")
    if not all(math.isfinite(v) for v in value):
        raise ConfigError(attribute.name, f"values must be finite, got {value}")


def _band(instance, attribute, value):
    if not 0 < value <= 1:
        raise ConfigError(attribute.name, f"must lie in (0, 1], got {value}")


def _at_least_one(instance, attribute, value):
    if value < 1:
        raise ConfigError(attribute.name, f"must be at least 1, got {value}")


@define(frozen=True)
class UnbalancedDiscParams:
    """
    Physical constants of the unbalanced disc.

    Attributes:
        sample_time: T_s in seconds
        motor_constant: K_m
        inertia: J in kg m^2
        mass: m in kg
        length: l in m
        gravity: g in m/s^2
        time_constant: tau in seconds
    """

    sample_time: float = field(default=0.075, converter=float, validator=_positive)
    motor_constant: float = field(default=15.3145, converter=float, validator=_positive)
    inertia: float = field(default=2.2e-4, converter=float, validator=_positive)
    mass: float = field(default=0.07, converter=float, validator=_positive)
    length: float = field(default=0.42e-3, converter=float, validator=_positive)
    gravity: float = field(default=9.8, converter=float, validator=_positive)
    time_constant: float = field(default=0.5971, converter=float, validator=_positive)

    @property
    def stiffness(self) -> float:
        """m g l / J."""
        return self.mass * self.gravity * self.length / self.inertia

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(UnbalancedDiscParams)}


@define(frozen=True)
class ExperimentConfig:
    """
    Settings of one benchmark run.

    Attributes:
        disc: Physical constants
        n_samples: Length of every dataset
        snr_list_db: Output SNR of the estimation datasets, one dataset per value
        n_freq: Number of multisine frequencies
        band: Multisine pass band as a fraction of the Nyquist frequency
        amplitude: Peak input amplitude in volts
        seed: Root seed; every dataset draws its own stream from it
        gradient_iterations: Iteration cap of the gradient search
        substeps: Runge-Kutta steps per sample of the nonlinear simulation
        workers: Process count for the per-SNR pipelines (1 runs them in this process)
        out_dir: Output directory
    """

    disc: UnbalancedDiscParams = field(factory=UnbalancedDiscParams)
    n_samples: int = field(default=400, converter=int)
    snr_list_db: tuple[float, ...] = field(default=(0.0, 10.0, 20.0, 40.0), converter=_snr_list, validator=_finite_all)
    n_freq: int = field(default=10, converter=int, validator=_at_least_one)
    band: float = field(default=0.75, converter=float, validator=_band)
    amplitude: float = field(default=0.25, converter=float, validator=_positive)
    seed: int = field(default=0, converter=int)
    gradient_iterations: int = field(default=400, converter=int, validator=_at_least_one)
    substeps: int = field(default=20, converter=int, validator=_at_least_one)
    workers: int = field(default=1, converter=int, validator=_at_least_one)
    out_dir: Path = field(default=Path("bench-out"), converter=Path)

    def __attrs_post_init__(self):
        # The identification template reaches two samples back.
        if self.n_samples <= 2:
            raise ConfigError("n_samples", f"must exceed the model lag of 2, got {self.n_samples}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "ExperimentConfig":
        """
        Build a configuration from text values; disc constants use their attribute names.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        disc_keys = {f.name for f in fields(UnbalancedDiscParams)}
        own_keys = {f.name for f in fields(ExperimentConfig)} - {"disc"}
        unknown = set(values) - disc_keys - own_keys
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown option")
        try:
            disc = UnbalancedDiscParams(**{k: v for k, v in values.items() if k in disc_keys})
            return cls(disc=disc, **{k: v for k, v in values.items() if k in own_keys})
        except ValueError as e:
            raise ConfigError("config", str(e)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides: Any) -> "ExperimentConfig":
        values: dict[str, Any] = dict(read_key_values(path))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(values)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with the given (non-None) settings replaced."""
        return evolve(self, **{k: v for k, v in overrides.items() if v is not None})
