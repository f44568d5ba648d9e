"""Measured input, output and scheduling records used for identification."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from attrs import define, field

from ..errors import DataError
from ..scheduling import SchedulingTrajectory, infer_sample_time


def _as_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def signal_names(prefix: str, width: int) -> list[str]:
    """Column names of a signal: 'u' for a single channel, 'u1', 'u2', ... otherwise."""
    return [prefix] if width == 1 else [f"{prefix}{i}" for i in range(1, width + 1)]


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read a CSV signal file.

    Raises:
        DataError: If the file is empty or not valid CSV
    """
    try:
        return pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"Cannot read {path}: {e}") from e


def numeric_columns(frame: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    """
    Columns of `frame` as a float array of shape (rows, len(columns)).

    Raises:
        DataError: If a cell is not a number
    """
    try:
        return frame[list(columns)].to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise DataError(f"Non-numeric value in columns {list(columns)}: {e}") from e


def sample_time_of(frame: pd.DataFrame) -> float:
    """Sample time from the 't' column, 1.0 when there is none."""
    return infer_sample_time(numeric_columns(frame, ["t"])[:, 0]) if "t" in frame.columns else 1.0


@define(frozen=True, eq=False)
class Dataset:
    """
    Identification dataset {u_t, p_t, y_t}, t = 0 .. N-1.

    Attributes:
        u: Inputs, shape (N, n_u)
        y: Outputs, shape (N, n_y)
        p: Scheduling trajectory of length N
    """

    u: np.ndarray = field(converter=_as_matrix)
    y: np.ndarray = field(converter=_as_matrix)
    p: SchedulingTrajectory

    def __attrs_post_init__(self):
        n = self.y.shape[0]
        if self.u.shape[0] != n or self.p.length != n:
            raise DataError(
                f"Dataset lengths differ: u {self.u.shape[0]}, y {n}, p {self.p.length}"
            )
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.y))):
            raise DataError("Dataset contains non-finite samples")

    @property
    def length(self) -> int:
        return self.y.shape[0]

    @property
    def nu(self) -> int:
        return self.u.shape[1]

    @property
    def ny(self) -> int:
        return self.y.shape[1]

    @property
    def sample_time(self) -> float:
        return self.p.sample_time

    def with_output(self, y: np.ndarray) -> "Dataset":
        return Dataset(u=self.u, y=y, p=self.p)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": np.arange(self.length) * self.sample_time})
        for name, col in zip(signal_names("u", self.nu), self.u.T):
            frame[name] = col
        for name, col in zip(self.p.channel_names, self.p.samples.T):
            frame[name] = col
        for name, col in zip(signal_names("y", self.ny), self.y.T):
            frame[name] = col
        return frame

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write with header `t,u*,<scheduling names>,y*`."""
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, scheduling: Optional[Sequence[str]] = None) -> "Dataset":
        u_cols = [c for c in frame.columns if re.fullmatch(r"u\d*", str(c))]
        y_cols = [c for c in frame.columns if re.fullmatch(r"y\d*", str(c))]
        if scheduling is None:
            scheduling = [c for c in frame.columns if c not in ("t", *u_cols, *y_cols)]
        if not y_cols or not scheduling:
            raise DataError("Dataset needs output columns y/y1.. and at least one scheduling column")
        missing = [c for c in scheduling if c not in frame.columns]
        if missing:
            raise DataError(f"Scheduling channels {missing} not present in the data")
        p = SchedulingTrajectory(numeric_columns(frame, scheduling), tuple(scheduling), sample_time_of(frame))
        u = numeric_columns(frame, u_cols) if u_cols else np.zeros((len(frame), 0))
        return cls(u=u, y=numeric_columns(frame, y_cols), p=p)

    @classmethod
    def from_csv(cls, path: Union[str, Path], scheduling: Optional[Sequence[str]] = None) -> "Dataset":
        """
        Read a dataset CSV.

        Columns named u/u1.. are inputs, y/y1.. outputs, t the time stamps; every other column is a
        scheduling channel unless `scheduling` names them explicitly.

        Raises:
            DataError: If the file is unreadable, lacks outputs or scheduling columns or holds
                non-numeric values
        """
        try:
            frame = read_table(path)
        except OSError as e:
            raise DataError(f"Cannot read dataset {path}: {e}") from e
        return cls.from_frame(frame, scheduling)
