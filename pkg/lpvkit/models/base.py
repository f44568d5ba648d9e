"""Shared pieces of the LPV representations: simulation records and signal handling."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Union

import numpy as np
from attrs import define

from ..errors import DataError, DomainMismatchError, ModelError
from ..pmatrix import PVMatrix, as_pmatrix
from ..scheduling import (
    ExtendedTrajectory,
    SchedulingTrajectory,
    TimeMap,
    extend_trajectory,
    make_timemap,
    merge_all,
)
from ..types import TimeDomain

SchedulingLike = Union[SchedulingTrajectory, np.ndarray, Sequence[float], None]


@define(frozen=True, eq=False)
class Simulation:
    """
    Result of simulating a model.

    Attributes:
        y: Outputs at instants valid_range[0] .. valid_range[1] - 1, shape (M, n_y)
        x: States at instants valid_range[0] .. valid_range[1], shape (M + 1, n_x); None for IO models
        valid_range: Source instants covered by `y`
    """

    y: np.ndarray
    x: Optional[np.ndarray]
    valid_range: tuple[int, int]

    @property
    def length(self) -> int:
        return self.y.shape[0]


def promote(value, domain: TimeDomain) -> PVMatrix:
    """Turn a number or array into a constant PVMatrix on a default map of `domain`."""
    if isinstance(value, PVMatrix):
        return value
    return as_pmatrix(value, tm=make_timemap([0], domain))


def model_domain(mats: Iterable[PVMatrix], default: TimeDomain = TimeDomain.DT) -> TimeDomain:
    """Common time domain of the non-constant matrices (constants adapt to any domain)."""
    mats = list(mats)
    domains = {m.domain for m in mats if not m.is_constant} or {m.domain for m in mats}
    if len(domains) > 1:
        raise DomainMismatchError("single-domain", "mixed CT/DT", "Model construction")
    return domains.pop() if domains else default


def model_timemap(mats: Iterable[PVMatrix], domain: TimeDomain) -> TimeMap:
    """Merged timemap of the non-constant matrices; static 'p' dependence for constant models."""
    varying = [m.tm for m in mats if not m.is_constant]
    return merge_all(varying) if varying else make_timemap([0], domain)


def on_domain(m: PVMatrix, domain: TimeDomain) -> PVMatrix:
    """Move a constant matrix onto `domain`; non-constant matrices must already live there."""
    if m.domain == domain:
        return m
    if not m.is_constant:
        raise DomainMismatchError(str(domain), str(m.domain), "Model construction")
    return as_pmatrix(m.constant, tm=make_timemap([0], domain))


def check_shape(name: str, m: PVMatrix, rows: Optional[int], cols: Optional[int]) -> None:
    if (rows is not None and m.rows != rows) or (cols is not None and m.cols != cols):
        raise ModelError(f"{name} has shape {m.shape}, expected ({rows}, {cols})")


def require_dt(domain: TimeDomain, operation: str) -> None:
    if domain is not TimeDomain.DT:
        raise DomainMismatchError("DT", str(domain), operation)


def as_signal(values, n: int, width: int, name: str) -> np.ndarray:
    """Validate a signal as an (n, width) float array; None means all zeros."""
    if values is None:
        return np.zeros((n, width))
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (n, width):
        raise DataError(f"Signal '{name}' has shape {arr.shape}, expected ({n}, {width})")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"Signal '{name}' contains non-finite samples")
    return arr


def as_scheduling(p: SchedulingLike, tm: TimeMap, n: Optional[int]) -> SchedulingTrajectory:
    """
    Accept a trajectory, a plain array with columns in the map's channel order, or None.

    None is only allowed together with an explicit length and yields an all-zero trajectory,
    which is sufficient for models without scheduling dependence.
    """
    if isinstance(p, SchedulingTrajectory):
        return p
    if p is None:
        if n is None:
            raise DataError("A scheduling trajectory or a signal length is required")
        return SchedulingTrajectory(np.zeros((n, len(tm.names))), tm.names)
    return SchedulingTrajectory(np.asarray(p, dtype=float), tm.names)


def extend(tm: TimeMap, p: SchedulingTrajectory, n: int) -> ExtendedTrajectory:
    """Extended scheduling signal over the valid window, checking the signal length."""
    if p.length != n:
        raise DataError(f"Scheduling trajectory has {p.length} samples, signals have {n}")
    return extend_trajectory(tm, p)


def signal_length(u, p) -> int:
    """Record length N taken from the input, or from the scheduling trajectory without input."""
    if u is not None:
        return np.asarray(u).shape[0]
    if isinstance(p, SchedulingTrajectory):
        return p.length
    if p is not None:
        return np.asarray(p).shape[0]
    raise DataError("Either an input signal or a scheduling trajectory is required")
