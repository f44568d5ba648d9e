"""
Scheduling signals and dynamic scheduling dependence.

A :class:`TimeMap` lists which time shifts (DT) or derivative orders (CT) of which scheduling
channels a parameter-varying matrix function may see. Extending a sampled
:class:`SchedulingTrajectory` with a timemap yields the extended scheduling signal rho as an
:class:`ExtendedTrajectory`.

Extended columns are always laid out canonically: orders ascending (outer), channel names
ascending (inner).

Example:
    >>> from lpvkit.scheduling import make_timemap
    >>> rho = make_timemap([0, -1], "dt")
    >>> rho.orders
    (-1, 0)
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from attrs import define, field

from .errors import DataError, DomainMismatchError, TimeMapError
from .types import TimeDomain

logger = logging.getLogger(__name__)

Column = tuple[str, int]


@define(frozen=True)
class TimeMap:
    """
    Dynamic scheduling dependence: the shifts/derivatives of each channel in rho.

    Attributes:
        orders: Unique, ascending time shifts (DT) or derivative orders (CT)
        domain: Time domain of the map
        names: Unique, ascending scheduling channel names
        declared: Columns in the order the user declared them; only used to interpret
            user-facing basis parametrization indices. Not part of equality.
    """

    orders: tuple[int, ...]
    domain: TimeDomain
    names: tuple[str, ...]
    declared: tuple[Column, ...] = field(eq=False, repr=False, default=())

    @property
    def dim(self) -> int:
        """Dimension of the extended scheduling signal."""
        return len(self.orders) * len(self.names)

    @property
    def columns(self) -> tuple[Column, ...]:
        """(channel, order) pair of every extended column, canonical order."""
        return tuple((name, order) for order in self.orders for name in self.names)

    @property
    def declared_columns(self) -> tuple[Column, ...]:
        """Columns in declaration order (falls back to canonical order)."""
        return self.declared or self.columns

    def column(self, name: str, order: int) -> int:
        """
        Index of the extended column holding channel `name` at shift/derivative `order`.

        Raises:
            TimeMapError: If the channel or order is not part of the map
        """
        try:
            return self.orders.index(order) * len(self.names) + self.names.index(name)
        except ValueError:
            raise TimeMapError(f"Column ({name!r}, {order}) is not part of {self}") from None

    def has_column(self, name: str, order: int) -> bool:
        return name in self.names and order in self.orders

    def indices_in(self, other: "TimeMap") -> np.ndarray:
        """
        Positions of this map's columns inside a superset map `other`.

        Raises:
            DomainMismatchError: If the domains differ
            TimeMapError: If `other` lacks one of this map's columns
        """
        if other.domain != self.domain:
            raise DomainMismatchError(str(self.domain), str(other.domain), "Column lookup")
        return np.array([other.column(n, o) for n, o in self.columns], dtype=int)

    def shifted(self, k: int) -> "TimeMap":
        """The same map with every order moved by `k` (column layout is unchanged)."""
        return TimeMap(
            orders=tuple(o + k for o in self.orders),
            domain=self.domain,
            names=self.names,
            declared=tuple((n, o + k) for n, o in self.declared),
        )

    def to_dict(self) -> dict:
        return {"domain": self.domain.value, "orders": list(self.orders), "names": list(self.names)}

    @classmethod
    def from_dict(cls, src_dict: dict) -> "TimeMap":
        return make_timemap(src_dict["orders"], src_dict["domain"], src_dict["names"])

    def __str__(self) -> str:
        return f"timemap({list(self.orders)}, '{self.domain.value}', names={list(self.names)})"


def make_timemap(
    orders: Iterable[int],
    domain: Union[TimeDomain, str] = TimeDomain.DT,
    names: Optional[Sequence[str]] = None,
) -> TimeMap:
    """
    Build a canonical timemap.

    Args:
        orders: Time shifts (DT, any sign) or derivative orders (CT, non-negative)
        domain: 'dt' or 'ct'
        names: Scheduling channel names (default: a single channel "p")

    Returns:
        TimeMap with sorted, deduplicated orders and sorted names

    Raises:
        TimeMapError: On empty orders, negative CT orders, empty or duplicate names

    Example:
        >>> make_timemap([-1, 0], "dt", ["p", "q"]).columns
        (('p', -1), ('q', -1), ('p', 0), ('q', 0))
    """
    domain = TimeDomain.parse(domain)
    raw_orders = [int(o) for o in orders]
    if not raw_orders:
        raise TimeMapError("A timemap needs at least one order")
    if domain is TimeDomain.CT and min(raw_orders) < 0:
        raise TimeMapError(f"Continuous-time derivative orders must be >= 0, got {raw_orders}")

    raw_names = ["p"] if names is None else [str(n) for n in names]
    if not raw_names or any(not n for n in raw_names):
        raise TimeMapError("Scheduling channel names must be non-empty")
    if len(set(raw_names)) != len(raw_names):
        raise TimeMapError(f"Duplicate scheduling channel names: {raw_names}")

    unique_orders = list(dict.fromkeys(raw_orders))
    declared = tuple((n, o) for o in unique_orders for n in raw_names)
    return TimeMap(
        orders=tuple(sorted(unique_orders)),
        domain=domain,
        names=tuple(sorted(raw_names)),
        declared=declared,
    )


def merge_timemaps(a: TimeMap, b: TimeMap) -> tuple[TimeMap, np.ndarray, np.ndarray]:
    """
    Union of two timemaps.

    Args:
        a: First timemap
        b: Second timemap

    Returns:
        (merged map, column remapping of `a`, column remapping of `b`); remapping[i] is the
        merged column index of input column i

    Raises:
        DomainMismatchError: If one map is CT and the other DT
    """
    if a.domain != b.domain:
        raise DomainMismatchError(str(a.domain), str(b.domain), "Merging timemaps")
    if a == b:
        identity = np.arange(a.dim)
        return a, identity, identity.copy()
    merged = TimeMap(
        orders=tuple(sorted(set(a.orders) | set(b.orders))),
        domain=a.domain,
        names=tuple(sorted(set(a.names) | set(b.names))),
    )
    return merged, a.indices_in(merged), b.indices_in(merged)


def merge_all(maps: Iterable[TimeMap]) -> TimeMap:
    """Fold :func:`merge_timemaps` over several maps."""
    maps = list(maps)
    if not maps:
        raise TimeMapError("No timemaps to merge")
    merged = maps[0]
    for tm in maps[1:]:
        merged = merge_timemaps(merged, tm)[0]
    return merged


@define(frozen=True, eq=False)
class SchedulingTrajectory:
    """
    Sampled scheduling signal p.

    Attributes:
        samples: N x n_p array, one row per time instant
        channel_names: Name of every column
        sample_time: Sampling time in seconds
    """

    samples: np.ndarray = field(converter=lambda s: np.atleast_2d(np.asarray(s, dtype=float).T).T)
    channel_names: tuple[str, ...] = field(converter=tuple, default=("p",))
    sample_time: float = 1.0

    def __attrs_post_init__(self):
        n, n_p = self.samples.shape
        if n < 1:
            raise DataError("A scheduling trajectory needs at least one sample")
        if n_p != len(self.channel_names):
            raise DataError(
                f"Scheduling trajectory has {n_p} columns but {len(self.channel_names)} channel names"
            )
        if len(set(self.channel_names)) != n_p:
            raise DataError(f"Duplicate scheduling channel names: {self.channel_names}")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("Scheduling trajectory contains non-finite samples")
        if not self.sample_time > 0:
            raise DataError(f"Sample time must be positive, got {self.sample_time}")

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    def channel(self, name: str) -> np.ndarray:
        """Samples of one scheduling channel."""
        try:
            return self.samples[:, self.channel_names.index(name)]
        except ValueError:
            raise DataError(f"Scheduling channel '{name}' not present (have {self.channel_names})") from None

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write as CSV with header `t,<name1>,<name2>,...`."""
        frame = pd.DataFrame(self.samples, columns=list(self.channel_names))
        frame.insert(0, "t", np.arange(self.length) * self.sample_time)
        frame.to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "SchedulingTrajectory":
        """Read a CSV with header `t,<name1>,...`; the sample time is taken from the `t` column."""
        frame = pd.read_csv(path)
        if "t" not in frame.columns or frame.shape[1] < 2:
            raise DataError(f"{path}: expected header 't,<name1>,...'")
        return cls(
            samples=frame.drop(columns="t").to_numpy(dtype=float),
            channel_names=tuple(c for c in frame.columns if c != "t"),
            sample_time=infer_sample_time(frame["t"].to_numpy(dtype=float)),
        )


def infer_sample_time(t: np.ndarray) -> float:
    """Sample time of a uniformly sampled time vector (1.0 for a single sample)."""
    if t.size < 2:
        return 1.0
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12) or steps[0] <= 0:
        raise DataError("Time column is not uniformly increasing; irregular sampling is not supported")
    return float(steps[0])


@define(frozen=True, eq=False)
class ExtendedTrajectory:
    """
    Extended scheduling signal rho.

    Attributes:
        samples: M x tm.dim array (canonical column order)
        source_map: (channel, order) of every column
        valid_range: (start, stop) instants of the source trajectory covered by the rows
        tm: The timemap the trajectory was extended with
    """

    samples: np.ndarray
    source_map: tuple[Column, ...]
    valid_range: tuple[int, int]
    tm: TimeMap

    @property
    def length(self) -> int:
        return self.samples.shape[0]


def valid_window(tm: TimeMap, n: int) -> tuple[int, int]:
    """Range of source instants for which every column of `tm` is available."""
    if tm.domain is TimeDomain.CT:
        return 0, n
    return max(0, -min(tm.orders)), n - max(0, max(tm.orders))


def extend_trajectory(tm: TimeMap, p: SchedulingTrajectory) -> ExtendedTrajectory:
    """
    Build the extended scheduling signal of `p` for the dependence described by `tm`.

    DT: row t stacks p at t + order for every order; only instants where every shift lies inside
    the record are emitted. CT: order-k columns are k-fold numerical derivatives (second-order
    central differences, one-sided at the end points); this is an approximation.

    Args:
        tm: Timemap describing the needed shifts/derivatives
        p: Sampled scheduling trajectory; it may contain channels not used by `tm`

    Returns:
        ExtendedTrajectory over the valid range

    Raises:
        DataError: If the trajectory is too short or lacks a channel
    """
    n = p.length
    start, stop = valid_window(tm, n)
    if stop - start < 1:
        raise DataError(
            f"Trajectory of {n} samples is too short for orders {list(tm.orders)}"
        )
    base = np.column_stack([p.channel(name) for name in tm.names])

    blocks = []
    for order in tm.orders:
        if tm.domain is TimeDomain.DT:
            blocks.append(base[start + order:stop + order])
        else:
            blocks.append(_derivative(base, order, p.sample_time))
    samples = np.hstack(blocks)
    logger.debug(f"Extended {n} scheduling samples to {samples.shape} over [{start}, {stop})")
    return ExtendedTrajectory(samples=samples, source_map=tm.columns, valid_range=(start, stop), tm=tm)


def _derivative(values: np.ndarray, order: int, step: float) -> np.ndarray:
    out = values
    for _ in range(order):
        if out.shape[0] < 2:
            raise DataError("At least two samples are needed to differentiate a trajectory")
        out = np.gradient(out, step, axis=0, edge_order=1)
    return out
