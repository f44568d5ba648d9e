"""
Parametrized LPV-IO model sets for prediction-error identification.

    A(q) y = F(q)^-1 B(q) q^-delay u + D(q)^-1 C(q) e

A, C, D and F are monic; every coefficient is a parameter-varying matrix whose scalar entries
are either free (part of theta) or fixed.
"""

from __future__ import annotations

from typing import Any, Mapping, Optional, Sequence

import numpy as np
from attrs import define, field

from ..errors import DimensionError, StructureError
from ..models import LpvIoModel
from ..models.serialize import register_kind
from ..pmatrix import BasisFunction, PVMatrix, as_pmatrix
from ..pmatrix import basis as _basis
from ..scheduling import ExtendedTrajectory, TimeMap, make_timemap, merge_all
from ..types import Structure, TimeDomain

POLYS = ("A", "B", "C", "D", "F")
MONIC = ("A", "C", "D", "F")


@define(frozen=True, eq=False)
class IdCoefficient:
    """
    One coefficient matrix of an identification template, with its free/fixed mask.

    The coefficient array is stored as given (zero terms are not pruned) so that the parameter
    layout stays fixed while estimates change.

    Attributes:
        values: Array (n_terms + 1, rows, cols); index 0 pairs with the constant 1
        free: Boolean array of the same shape, True for estimated entries
        basis: Non-constant basis functions, expressed on `tm`
        tm: The template's common timemap
    """

    values: np.ndarray
    free: np.ndarray
    basis: tuple[BasisFunction, ...]
    tm: TimeMap

    @property
    def rows(self) -> int:
        return self.values.shape[1]

    @property
    def cols(self) -> int:
        return self.values.shape[2]

    @property
    def n_free(self) -> int:
        return int(self.free.sum())

    def labels(self) -> list[str]:
        return ["1"] + [b.describe(self.tm) for b in self.basis]

    def pmatrix(self) -> PVMatrix:
        return PVMatrix(coeffs=self.values.copy(), basis=self.basis, tm=self.tm)

    def basis_values(self, ext: ExtendedTrajectory) -> np.ndarray:
        return self.pmatrix().basis_values(ext)

    def with_values(self, values: np.ndarray) -> "IdCoefficient":
        return IdCoefficient(values=values, free=self.free, basis=self.basis, tm=self.tm)

    def copied_from(self, source: Optional["IdCoefficient"]) -> "IdCoefficient":
        """Free entries taken from the term with the same label in `source`, else zero."""
        values = self.values.copy()
        values[self.free] = 0.0
        if source is not None:
            if (source.rows, source.cols) != (self.rows, self.cols):
                raise StructureError(
                    f"Cannot initialize a {self.rows}x{self.cols} coefficient from a {source.rows}x{source.cols} one"
                )
            index = {label: i for i, label in enumerate(source.labels())}
            for i, label in enumerate(self.labels()):
                if label in index:
                    mask = self.free[i]
                    values[i][mask] = source.values[index[label]][mask]
        return self.with_values(values)

    def to_dict(self) -> dict[str, Any]:
        return {
            "basis": [_basis.to_dict(b, self.tm) for b in self.basis],
            "values": self.values.tolist(),
            "free": self.free.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any], tm: TimeMap) -> "IdCoefficient":
        values = np.asarray(src_dict["values"], dtype=float)
        free = np.asarray(src_dict["free"], dtype=bool).reshape(values.shape)
        basis = tuple(_basis.from_dict(b, tm) for b in src_dict["basis"])
        return cls(values=values, free=free, basis=basis, tm=tm)

    @classmethod
    def from_pmatrix(
        cls,
        m: PVMatrix,
        tm: TimeMap,
        fixed: bool = False,
        free_zeros: bool = False,
        mask: Optional[np.ndarray] = None,
    ) -> "IdCoefficient":
        """
        Template coefficient from a PVMatrix.

        Args:
            m: Coefficient value
            tm: Common timemap of the template
            fixed: Make every entry fixed (monic leading coefficients)
            free_zeros: Also estimate entries that are exactly zero
            mask: Explicit free mask, broadcast to (n_terms + 1, rows, cols)
        """
        m = PVMatrix(m.coeffs, (), tm) if m.is_constant else m.on(tm)
        values = np.array(m.coeffs, dtype=float)
        if fixed:
            free = np.zeros(values.shape, dtype=bool)
        elif mask is not None:
            try:
                free = np.broadcast_to(np.asarray(mask, dtype=bool), values.shape).copy()
            except ValueError:
                raise DimensionError(f"Mask of shape {np.shape(mask)} does not fit {values.shape}") from None
        else:
            free = np.ones(values.shape, dtype=bool) if free_zeros else values != 0
        return cls(values=values, free=free, basis=m.basis, tm=tm)


@define(frozen=True)
class ParamIndex:
    """Position of one scalar parameter: coefficient `lag` of polynomial `poly`, basis `term`, entry (row, col)."""

    poly: str
    lag: int
    term: int
    row: int
    col: int

    def label(self, template: "LpvIdPoly") -> str:
        term = template.poly(self.poly)[self.lag].labels()[self.term]
        return f"{self.poly}{self.lag}[{self.row},{self.col}]*{term}"


@define(frozen=True, eq=False)
class ThetaVector:
    """Values of all free parameters together with their layout."""

    values: np.ndarray
    layout: tuple[ParamIndex, ...]

    def __len__(self) -> int:
        return len(self.layout)


@define(frozen=True, eq=False)
class LpvIdPoly:
    """
    LPV-IO identification template / estimate.

    Attributes:
        A, B, C, D, F: Coefficients per lag; A, C, D and F include the fixed identity at lag 0
        tm: Common timemap of every coefficient
        delay: Input delay in samples
        sample_time: Sampling time in seconds
    """

    A: tuple[IdCoefficient, ...] = field(converter=tuple)
    B: tuple[IdCoefficient, ...] = field(converter=tuple)
    C: tuple[IdCoefficient, ...] = field(converter=tuple)
    D: tuple[IdCoefficient, ...] = field(converter=tuple)
    F: tuple[IdCoefficient, ...] = field(converter=tuple)
    tm: TimeMap
    delay: int = 0
    sample_time: float = 1.0

    def __attrs_post_init__(self):
        if not self.B:
            raise StructureError("An identification template needs an input polynomial B")
        ny = self.ny
        for name in MONIC:
            coeffs = self.poly(name)
            if not coeffs:
                raise StructureError(f"Polynomial {name} needs its leading coefficient")
            lead = coeffs[0]
            if lead.values.shape != (1, ny, ny) or not np.array_equal(lead.values[0], np.eye(ny)):
                raise StructureError(f"Polynomial {name} must be monic (leading coefficient I)")
            if lead.free.any():
                raise StructureError(f"The leading coefficient of {name} cannot be free")
            for lag, c in enumerate(coeffs[1:], start=1):
                if (c.rows, c.cols) != (ny, ny):
                    raise DimensionError(f"{name}{lag} has shape {c.rows}x{c.cols}, expected {ny}x{ny}")
        for lag, c in enumerate(self.B):
            if (c.rows, c.cols) != (ny, self.nu):
                raise DimensionError(f"B{lag} has shape {c.rows}x{c.cols}, expected {ny}x{self.nu}")
        if self.delay < 0:
            raise StructureError(f"Input delay must be non-negative, got {self.delay}")

    # -------------------------------------------------------------- structure

    def poly(self, name: str) -> tuple[IdCoefficient, ...]:
        return getattr(self, name)

    @property
    def ny(self) -> int:
        return self.B[0].rows

    @property
    def nu(self) -> int:
        return self.B[0].cols

    def order(self, name: str) -> int:
        """Highest lag of a polynomial (B counts from lag 0)."""
        return len(self.poly(name)) - 1

    def is_trivial(self, name: str) -> bool:
        return name in MONIC and len(self.poly(name)) == 1

    @property
    def structure(self) -> Structure:
        trivial = {name: self.is_trivial(name) for name in MONIC}
        if trivial["C"] and trivial["D"] and trivial["F"]:
            return Structure.ARX
        if trivial["D"] and trivial["F"]:
            return Structure.ARMAX
        if trivial["A"] and trivial["C"] and trivial["D"]:
            return Structure.OE
        if trivial["A"]:
            return Structure.BJ
        return Structure.GENERAL

    @property
    def max_lag(self) -> int:
        """Longest reach into the past of the predictor."""
        lags = [self.order(name) for name in MONIC] + [self.order("B") + self.delay]
        return max(lags)

    @property
    def domain(self) -> TimeDomain:
        return self.tm.domain

    # -------------------------------------------------------------- parameters

    def layout(self) -> tuple[ParamIndex, ...]:
        """Free parameters in polynomial, lag, term, row, column order."""
        out = []
        for name in POLYS:
            for lag, c in enumerate(self.poly(name)):
                for term, row, col in zip(*np.nonzero(c.free)):
                    out.append(ParamIndex(name, lag, int(term), int(row), int(col)))
        return tuple(out)

    @property
    def n_params(self) -> int:
        return sum(c.n_free for name in POLYS for c in self.poly(name))

    def theta(self) -> ThetaVector:
        values = [c.values[c.free] for name in POLYS for c in self.poly(name)]
        flat = np.concatenate(values) if values else np.zeros(0)
        return ThetaVector(values=flat, layout=self.layout())

    def with_theta(self, theta: np.ndarray | ThetaVector) -> "LpvIdPoly":
        """
        The same template with the free entries set from theta; fixed entries are untouched.

        Raises:
            DimensionError: If theta has the wrong length
        """
        values = np.asarray(theta.values if isinstance(theta, ThetaVector) else theta, dtype=float).ravel()
        if values.size != self.n_params:
            raise DimensionError(f"theta has {values.size} entries, template has {self.n_params} free parameters")
        polys = {}
        offset = 0
        for name in POLYS:
            new = []
            for c in self.poly(name):
                v = c.values.copy()
                v[c.free] = values[offset:offset + c.n_free]
                offset += c.n_free
                new.append(c.with_values(v))
            polys[name] = new
        return self._replace(polys)

    def _replace(self, polys: Mapping[str, Sequence[IdCoefficient]]) -> "LpvIdPoly":
        merged = {name: polys.get(name, self.poly(name)) for name in POLYS}
        return LpvIdPoly(tm=self.tm, delay=self.delay, sample_time=self.sample_time, **merged)

    def initialized_from(self, other: "LpvIdPoly") -> "LpvIdPoly":
        """
        Start values for this template taken from another estimate.

        Free entries are copied term by term from the polynomial of the same name. An F template
        starts from the other model's A when that model has no F (ARX -> OE). Polynomials the
        other model lacks start at the identity (free entries zero).
        """
        polys = {}
        for name in POLYS:
            source = other.poly(name)
            if name == "F" and other.is_trivial("F") and not other.is_trivial("A") and self.is_trivial("A"):
                source = other.A
            new = []
            for lag, c in enumerate(self.poly(name)):
                if name in MONIC and lag == 0:
                    new.append(c)
                else:
                    new.append(c.copied_from(source[lag] if lag < len(source) else None))
            polys[name] = new
        return self._replace(polys)

    def arx_part(self) -> "LpvIdPoly":
        """ARX template with this template's B and its A (or F when A is trivial)."""
        a = self.A if not self.is_trivial("A") or self.is_trivial("F") else self.F
        lead = (self.A[0],)
        return LpvIdPoly(A=a, B=self.B, C=lead, D=lead, F=lead, tm=self.tm, delay=self.delay, sample_time=self.sample_time)

    def pmatrices(self, name: str) -> list[PVMatrix]:
        return [c.pmatrix() for c in self.poly(name)]

    def to_io_model(self) -> LpvIoModel:
        """
        Deterministic part as an IO model, for ARX/ARMAX structures (F trivial) or OE/FIR
        structures (A trivial).

        Raises:
            StructureError: If both A and F are non-trivial
        """
        if not self.is_trivial("A") and not self.is_trivial("F"):
            raise StructureError("The process part A^-1 F^-1 B has no single IO polynomial pair")
        a = self.A if self.is_trivial("F") else self.F
        return LpvIoModel(
            A=[c.pmatrix() for c in a[1:]],
            B=self.pmatrices("B"),
            delay=self.delay,
            sample_time=self.sample_time,
        )

    # -------------------------------------------------------------- persistence

    def to_dict(self) -> dict[str, Any]:
        return {
            "tm": self.tm.to_dict(),
            "delay": self.delay,
            "sample_time": self.sample_time,
            **{name: [c.to_dict() for c in self.poly(name)] for name in POLYS},
        }

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any]) -> "LpvIdPoly":
        tm = TimeMap.from_dict(src_dict["tm"])
        polys = {name: [IdCoefficient.from_dict(c, tm) for c in src_dict[name]] for name in POLYS}
        return cls(
            tm=tm,
            delay=int(src_dict.get("delay", 0)),
            sample_time=float(src_dict.get("sample_time", 1.0)),
            **polys,
        )

    def describe(self) -> str:
        lines = [f"{self.structure} model, {self.ny} output(s), {self.nu} input(s), delay {self.delay}, {self.tm}"]
        for name in POLYS:
            if self.is_trivial(name):
                continue
            for lag, c in enumerate(self.poly(name)):
                if name in MONIC and lag == 0:
                    continue
                terms = " + ".join(
                    f"{np.array2string(v, precision=6, suppress_small=True)}*{label}"
                    for v, label in zip(c.values, c.labels())
                )
                lines.append(f"  {name}{lag} = {terms}")
        return "\n".join(lines)

    def __str__(self) -> str:
        return f"LpvIdPoly({self.structure}, ny={self.ny}, nu={self.nu}, n_params={self.n_params})"


def lpvidpoly(
    A: Optional[Sequence[Any]] = None,
    B: Optional[Sequence[Any]] = None,
    C: Optional[Sequence[Any]] = None,
    D: Optional[Sequence[Any]] = None,
    F: Optional[Sequence[Any]] = None,
    delay: int = 0,
    sample_time: float = 1.0,
    free_zeros: bool = False,
    masks: Optional[Mapping[str, Sequence[Any]]] = None,
) -> LpvIdPoly:
    """
    Create an identification template.

    Monic polynomials are given including their leading identity, e.g.
    ``lpvidpoly(A=[np.eye(1), A1, A2], B=[B0])``. Entries that are exactly zero in the template
    are fixed unless `free_zeros` is set or an explicit mask says otherwise.

    Args:
        A, C, D, F: Monic polynomial coefficients (None for the identity)
        B: Input polynomial coefficients from lag 0
        delay: Input delay in samples
        sample_time: Sampling time in seconds
        free_zeros: Also estimate coefficients that are zero in the template
        masks: Explicit free masks per polynomial name, one per coefficient (leading identity
            included, its entry is ignored)

    Raises:
        StructureError: If B is missing or a monic polynomial does not start with I
        DimensionError: On inconsistent coefficient shapes
    """
    if not B:
        raise StructureError("An identification template needs an input polynomial B")
    given = {"A": A, "B": B, "C": C, "D": D, "F": F}
    raw = {name: list(coeffs) for name, coeffs in given.items() if coeffs is not None}
    varying = [m for coeffs in raw.values() for m in coeffs if isinstance(m, PVMatrix)]
    anchor = next((m for m in varying if not m.is_constant), varying[0] if varying else None)
    promoted = {name: [as_pmatrix(m, like=anchor) for m in coeffs] for name, coeffs in raw.items()}
    non_constant = [m.tm for coeffs in promoted.values() for m in coeffs if not m.is_constant]
    tm = merge_all(non_constant) if non_constant else (anchor.tm if anchor is not None else make_timemap([0]))

    ny = promoted["B"][0].rows
    identity = as_pmatrix(np.eye(ny), tm=tm)
    masks = masks or {}
    polys = {}
    for name in POLYS:
        coeffs = promoted.get(name) or ([identity] if name in MONIC else [])
        mask = masks.get(name)
        out = []
        for lag, m in enumerate(coeffs):
            lead = name in MONIC and lag == 0
            if lead and (not m.is_constant or not np.array_equal(m.constant, np.eye(m.rows))):
                raise StructureError(f"Polynomial {name} must be monic (leading coefficient I)")
            out.append(
                IdCoefficient.from_pmatrix(
                    m, tm, fixed=lead, free_zeros=free_zeros,
                    mask=None if mask is None or lead else mask[lag],
                )
            )
        polys[name] = out
    return LpvIdPoly(tm=tm, delay=int(delay), sample_time=float(sample_time), **polys)


register_kind("lpvidpoly", LpvIdPoly)
