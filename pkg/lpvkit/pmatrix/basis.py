"""
Scheduling-dependent basis functions alpha_i of a parameter-varying matrix function.

Affine and monomial bases address extended-signal columns by index, so they are only meaningful
together with the timemap of the PVMatrix that owns them. Custom bases address columns by
(channel, order) and are therefore independent of the owner's column layout.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from attrs import define, field

from ..errors import BasisError, SerializationError
from ..scheduling import TimeMap
from ..types import TimeDomain


class BasisFunction:
    """Common interface of the non-constant basis kinds."""

    def key(self) -> tuple:
        """Structural identity; two bases with equal keys are the same function."""
        raise NotImplementedError

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        """Values along an M x tm.dim extended trajectory, shape (M,)."""
        raise NotImplementedError

    def remap(self, index_map: np.ndarray, dim: int) -> "BasisFunction":
        """Re-express the basis on a merged timemap (column i moves to index_map[i])."""
        raise NotImplementedError

    def describe(self, tm: TimeMap) -> str:
        raise NotImplementedError


@define(frozen=True)
class Constant(BasisFunction):
    """The function identically 1 (parametrization index 0)."""

    def key(self) -> tuple:
        return ("const",)

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        return np.ones(rho.shape[0])

    def remap(self, index_map: np.ndarray, dim: int) -> "Constant":
        return self

    def describe(self, tm: TimeMap) -> str:
        return "1"


@define(frozen=True)
class Affine(BasisFunction):
    """A single extended-signal column, rho_col."""

    col: int

    def key(self) -> tuple:
        return ("affine", self.col)

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        return rho[:, self.col]

    def remap(self, index_map: np.ndarray, dim: int) -> "Affine":
        return Affine(int(index_map[self.col]))

    def degrees(self, dim: int) -> tuple[int, ...]:
        out = [0] * dim
        out[self.col] = 1
        return tuple(out)

    def describe(self, tm: TimeMap) -> str:
        return column_label(tm, self.col)


@define(frozen=True)
class Monomial(BasisFunction):
    """Product of extended-signal columns raised to non-negative integer degrees."""

    degrees: tuple[int, ...] = field(converter=lambda d: tuple(int(x) for x in d))

    def __attrs_post_init__(self):
        if any(d < 0 for d in self.degrees):
            raise BasisError(f"Monomial degrees must be non-negative, got {self.degrees}")

    def key(self) -> tuple:
        return ("poly", self.degrees)

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        out = np.ones(rho.shape[0])
        for col, deg in enumerate(self.degrees):
            if deg:
                out = out * rho[:, col] ** deg
        return out

    def remap(self, index_map: np.ndarray, dim: int) -> "Monomial":
        out = [0] * dim
        for col, deg in enumerate(self.degrees):
            out[int(index_map[col])] += deg
        return Monomial(out)

    def describe(self, tm: TimeMap) -> str:
        factors = []
        for col, deg in enumerate(self.degrees):
            if deg == 1:
                factors.append(column_label(tm, col))
            elif deg > 1:
                factors.append(f"{column_label(tm, col)}^{deg}")
        return "*".join(factors)


@define(frozen=True, eq=False)
class Custom(BasisFunction):
    """
    User-supplied function of the extended scheduling sample.

    `fn` receives one row laid out like `source` (the timemap it was written against). `shift`
    accumulates pshift applications. Structural equality is by (label, shift) only, so identical
    functions must be labelled identically.
    """

    label: str
    fn: Callable[[np.ndarray], float]
    source: TimeMap
    shift: int = 0

    def key(self) -> tuple:
        return ("custom", self.label, self.shift)

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        idx = [tm.column(name, order + self.shift) for name, order in self.source.columns]
        sub = rho[:, idx]
        values = np.array([float(self.fn(row)) for row in sub])
        if not np.all(np.isfinite(values)):
            raise BasisError(f"Custom basis '{self.label}' returned a non-finite value")
        return values

    def remap(self, index_map: np.ndarray, dim: int) -> "Custom":
        return self

    def shifted(self, k: int) -> "Custom":
        return Custom(self.label, self.fn, self.source, self.shift + k)

    def describe(self, tm: TimeMap) -> str:
        return self.label if self.shift == 0 else f"pshift({self.label}, {self.shift})"


def column_label(tm: TimeMap, col: int) -> str:
    """Readable name of an extended column, e.g. p(t-1) or d2 q."""
    name, order = tm.columns[col]
    if tm.domain is TimeDomain.CT:
        return name if order == 0 else f"d{order} {name}" if order > 1 else f"d {name}"
    if order == 0:
        return f"{name}(t)"
    return f"{name}(t{order:+d})"


def monomial(degrees: tuple[int, ...]) -> Optional[BasisFunction]:
    """
    Canonical basis for a degree vector.

    Returns:
        None for the constant (all degrees zero), Affine for a single first-order factor,
        Monomial otherwise
    """
    nonzero = [(c, d) for c, d in enumerate(degrees) if d]
    if not nonzero:
        return None
    if len(nonzero) == 1 and nonzero[0][1] == 1:
        return Affine(nonzero[0][0])
    return Monomial(degrees)


def product(a: Optional[BasisFunction], b: Optional[BasisFunction], tm: TimeMap) -> Optional[BasisFunction]:
    """
    Product of two bases living on the same timemap; None stands for the constant 1.

    Affine/monomial products stay monomials; anything times a custom basis becomes a custom
    composition.
    """
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(a, Custom) or isinstance(b, Custom):
        factors = (a, b)
        label = "*".join(sorted(f"({f.describe(tm)})" for f in factors))

        def fn(row: np.ndarray, _factors=factors, _tm=tm) -> float:
            out = 1.0
            for f in _factors:
                out *= float(f.evaluate(row[None, :], _tm)[0])
            return out

        return Custom(label=label, fn=fn, source=tm)
    degrees = np.add(_degrees(a, tm.dim), _degrees(b, tm.dim))
    return monomial(tuple(int(d) for d in degrees))


def _degrees(b: BasisFunction, dim: int) -> tuple[int, ...]:
    if isinstance(b, Affine):
        return b.degrees(dim)
    return b.degrees


def to_dict(b: BasisFunction, tm: TimeMap) -> dict:
    """Timemap-independent description of a basis, addressed by (channel, order)."""
    if isinstance(b, Affine):
        name, order = tm.columns[b.col]
        return {"type": "affine", "column": [name, order]}
    if isinstance(b, Monomial):
        terms = [[*tm.columns[c], d] for c, d in enumerate(b.degrees) if d]
        return {"type": "poly", "degrees": terms}
    raise SerializationError(f"Basis '{b.describe(tm)}' cannot be serialized")


def from_dict(src_dict: dict, tm: TimeMap) -> Optional[BasisFunction]:
    kind = src_dict.get("type")
    if kind == "affine":
        name, order = src_dict["column"]
        return Affine(tm.column(name, int(order)))
    if kind == "poly":
        degrees = [0] * tm.dim
        for name, order, deg in src_dict["degrees"]:
            degrees[tm.column(name, int(order))] += int(deg)
        return monomial(tuple(degrees))
    raise SerializationError(f"Unknown basis type '{kind}'")
