"""Estimator options and their `key = value` configuration files."""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from attrs import define, field, validators

from ..errors import ConfigError

GRADIENT_KINDS = ("sensitivity", "finite_difference")
REGULARIZATION_KINDS = ("none", "tikhonov", "gcv")

# Gradient search runs longer by default than the regression-type estimators.
DEFAULT_MAX_ITER = 100
DEFAULT_MAX_ITER_GRADIENT = 400


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(attribute.name, f"must be positive, got {value}")


def _non_negative(instance, attribute, value):
    if not value >= 0:
        raise ConfigError(attribute.name, f"must be non-negative, got {value}")


def _one_of(choices):
    def check(instance, attribute, value):
        if value not in choices:
            raise ConfigError(attribute.name, f"must be one of {choices}, got '{value}'")
    return check


def _optional_weight(value) -> Optional[np.ndarray]:
    return None if value is None else np.asarray(value, dtype=float)


@define(frozen=True)
class Regularization:
    """
    Tikhonov regularization of the linear-regression estimators.

    Attributes:
        kind: 'none', 'tikhonov' (fixed lambda) or 'gcv' (lambda chosen by generalized
            cross-validation over a logarithmic grid)
        lam: Weight lambda for 'tikhonov'
        weight: Matrix W (or the diagonal of W) of the penalty lambda * ||W theta||^2; identity if None
        grid_size, grid_min, grid_max: Logarithmic lambda grid searched by 'gcv'
    """

    kind: str = field(default="none", validator=_one_of(REGULARIZATION_KINDS))
    lam: float = field(default=0.0, converter=float, validator=_non_negative)
    weight: Optional[np.ndarray] = field(default=None, converter=_optional_weight, eq=False)
    grid_size: int = field(default=50, converter=int, validator=_positive)
    grid_min: float = field(default=1e-8, converter=float, validator=_positive)
    grid_max: float = field(default=1e2, converter=float, validator=_positive)

    @property
    def active(self) -> bool:
        return self.kind == "gcv" or (self.kind == "tikhonov" and self.lam > 0)

    def grid(self) -> np.ndarray:
        return np.logspace(np.log10(self.grid_min), np.log10(self.grid_max), self.grid_size)

    def weight_matrix(self, n: int) -> np.ndarray:
        if self.weight is None:
            return np.eye(n)
        w = np.atleast_1d(self.weight)
        w = np.diag(w) if w.ndim == 1 else w
        if w.shape != (n, n):
            raise ConfigError("weight", f"expected {n} x {n}, got {w.shape}")
        return w


@define(frozen=True)
class EstimOptions:
    """
    Options shared by the estimators.

    Attributes:
        max_iter: Iteration cap; None picks 100 for pseudo-linear regression and 400 for the
            gradient search
        rel_tol: Relative parameter change below which an iteration stops
        regularization: Tikhonov settings for the regression-based estimators
        gradient: 'sensitivity' (predictor sensitivity recursions) or 'finite_difference'
        seed: Seed for estimator randomness
        damping: Initial Levenberg-Marquardt damping, relative to the diagonal of J^T J
    """

    max_iter: Optional[int] = field(default=None)
    rel_tol: float = field(default=1e-6, converter=float, validator=_positive)
    regularization: Regularization = field(factory=Regularization)
    gradient: str = field(default="sensitivity", validator=_one_of(GRADIENT_KINDS))
    seed: int = field(default=0, converter=int)
    damping: float = field(default=1e-3, converter=float, validator=_positive)

    def __attrs_post_init__(self):
        if self.max_iter is not None and int(self.max_iter) < 1:
            raise ConfigError("max_iter", f"must be at least 1, got {self.max_iter}")

    def iterations(self, gradient_search: bool) -> int:
        if self.max_iter is not None:
            return int(self.max_iter)
        return DEFAULT_MAX_ITER_GRADIENT if gradient_search else DEFAULT_MAX_ITER

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "EstimOptions":
        """
        Build options from text values.

        Keys: max_iter, rel_tol, gradient, seed, damping, regularization (none|tikhonov|gcv),
        lambda, gcv_grid_size, gcv_min, gcv_max.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        known = {
            "max_iter", "rel_tol", "gradient", "seed", "damping",
            "regularization", "lambda", "gcv_grid_size", "gcv_min", "gcv_max",
        }
        unknown = set(values) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown option")
        try:
            reg = Regularization(
                kind=values.get("regularization", "none").strip().lower(),
                lam=values.get("lambda", 0.0),
                grid_size=values.get("gcv_grid_size", 50),
                grid_min=values.get("gcv_min", 1e-8),
                grid_max=values.get("gcv_max", 1e2),
            )
            kwargs: dict[str, Any] = {"regularization": reg}
            if "max_iter" in values:
                kwargs["max_iter"] = int(values["max_iter"])
            for key in ("rel_tol", "seed", "damping"):
                if key in values:
                    kwargs[key] = values[key]
            if "gradient" in values:
                kwargs["gradient"] = values["gradient"].strip().lower()
            return cls(**kwargs)
        except ValueError as e:
            raise ConfigError("options", str(e)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "EstimOptions":
        """Read a line-based `key = value` options file (no section header needed)."""
        return cls.from_mapping(read_key_values(path))


def read_key_values(path: Union[str, Path]) -> dict[str, str]:
    """
    Parse a `key = value` text file; '#' starts a comment.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[config]\n" + text)
    except (OSError, configparser.Error) as e:
        raise ConfigError(str(path), f"cannot parse: {e}") from e
    return dict(parser["config"])
