"""
Parameter-varying matrix functions.

A :class:`PVMatrix` represents

    (A <> p) = A_0 + sum_i A_i (alpha_i <> p)

with constant k x l coefficients A_i and basis functions alpha_i of the extended scheduling
signal described by a :class:`~lpvkit.scheduling.TimeMap`. Values are immutable; every operator
returns a new canonical PVMatrix whose timemap is the merge of the operands' timemaps.

Python operators follow numpy: ``*`` and ``**`` are element-wise, ``@`` is the matrix product.

Example:
    >>> from lpvkit.pmatrix import preal, pshift
    >>> p = preal("p", "dt")
    >>> A = 1 + 2 * p + 3 * pshift(p, -1)
"""

from __future__ import annotations

import numbers
from typing import Any, Callable, Iterable, Optional, Sequence, Union

import numpy as np
from attrs import define

from ..errors import BasisError, DimensionError, DomainMismatchError
from ..scheduling import ExtendedTrajectory, TimeMap, make_timemap, merge_all, merge_timemaps
from ..types import TimeDomain
from . import basis as _basis
from .basis import Affine, BasisFunction, Constant, Custom, Monomial

# Coefficient matrices whose max-abs falls below this after merging are dropped.
PRUNE_TOL = 1e-14

Operand = Union["PVMatrix", numbers.Number, np.ndarray, Sequence]


@define(frozen=True, eq=False)
class PVMatrix:
    """
    Parameter-varying matrix function.

    Attributes:
        coeffs: Array of shape (n_alpha + 1, k, l); coeffs[0] pairs with the constant 1
        basis: The n_alpha non-constant basis functions, in canonical order
        tm: Timemap the basis functions are defined on
    """

    coeffs: np.ndarray
    basis: tuple[BasisFunction, ...]
    tm: TimeMap

    # ndarray (op) PVMatrix must dispatch to the reflected operators below
    __array_ufunc__ = None

    # ------------------------------------------------------------------ properties

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[2]

    @property
    def domain(self) -> TimeDomain:
        return self.tm.domain

    @property
    def n_terms(self) -> int:
        """Number of non-constant terms."""
        return len(self.basis)

    @property
    def is_constant(self) -> bool:
        return not self.basis

    @property
    def constant(self) -> np.ndarray:
        """A_0."""
        return self.coeffs[0]

    @property
    def T(self) -> "PVMatrix":
        return self.transpose()

    # ------------------------------------------------------------------ evaluation

    def basis_values(self, rho: Union[np.ndarray, ExtendedTrajectory], tm: Optional[TimeMap] = None) -> np.ndarray:
        """
        Values of [1, alpha_1, ..., alpha_n] along an extended trajectory.

        Args:
            rho: M x dim samples, or an ExtendedTrajectory (its timemap is used)
            tm: Timemap of `rho` when it is a plain array (default: this matrix's timemap);
                may be any superset of this matrix's timemap

        Returns:
            Array of shape (M, n_terms + 1)
        """
        rho, tm = _unpack(rho, tm)
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        tm = self.tm if tm is None else tm
        if rho.shape[1] != tm.dim:
            raise DimensionError(f"Extended sample has {rho.shape[1]} columns, timemap expects {tm.dim}")
        if self.is_constant:
            return np.ones((rho.shape[0], 1))
        if tm != self.tm:
            rho = rho[:, self.tm.indices_in(tm)]
        out = np.empty((rho.shape[0], self.n_terms + 1))
        out[:, 0] = 1.0
        for i, b in enumerate(self.basis, start=1):
            out[:, i] = b.evaluate(rho, self.tm)
        return out

    def evaluate(self, rho: Union[np.ndarray, ExtendedTrajectory], tm: Optional[TimeMap] = None) -> np.ndarray:
        """
        Evaluate along an extended trajectory.

        Returns:
            Array of shape (M, k, l)
        """
        psi = self.basis_values(rho, tm)
        return np.einsum("tn,nkl->tkl", psi, self.coeffs)

    def eval(self, rho_row: Sequence[float], tm: Optional[TimeMap] = None) -> np.ndarray:
        """
        Evaluate at one extended scheduling sample.

        Args:
            rho_row: Extended sample (length tm.dim, canonical column order)

        Returns:
            k x l matrix A_0 + sum A_i alpha_i(rho)

        Raises:
            DimensionError: If the sample length does not match the timemap
        """
        row = np.asarray(rho_row, dtype=float).reshape(1, -1)
        return self.evaluate(row, tm)[0]

    # ------------------------------------------------------------------ structure

    def terms(self) -> list[tuple[Optional[BasisFunction], np.ndarray]]:
        """(basis, coefficient) pairs; the constant term has basis None."""
        return [(None, self.coeffs[0])] + list(zip(self.basis, self.coeffs[1:]))

    def remapped(self, tm: TimeMap, index_map: np.ndarray) -> "PVMatrix":
        """Same function expressed on a merged timemap."""
        if tm == self.tm:
            return self
        return PVMatrix(
            coeffs=self.coeffs,
            basis=tuple(b.remap(index_map, tm.dim) for b in self.basis),
            tm=tm,
        )

    def on(self, tm: TimeMap) -> "PVMatrix":
        """Same function expressed on a superset timemap."""
        return self.remapped(tm, self.tm.indices_in(tm))

    def structurally_equal(self, other: "PVMatrix") -> bool:
        """Equal timemap, basis keys and coefficients."""
        return (
            isinstance(other, PVMatrix)
            and self.tm == other.tm
            and [b.key() for b in self.basis] == [b.key() for b in other.basis]
            and self.coeffs.shape == other.coeffs.shape
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def describe(self) -> str:
        parts = []
        for b, c in self.terms():
            label = "1" if b is None else b.describe(self.tm)
            parts.append(f"{np.array2string(c, precision=6)}*{label}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PVMatrix({self.rows}x{self.cols}, {self.n_terms} terms, {self.tm})"

    # ------------------------------------------------------------------ algebra

    def __add__(self, other: Operand) -> "PVMatrix":
        a, b = align(self, other)
        return _combine(a, b, np.add)

    def __radd__(self, other: Operand) -> "PVMatrix":
        return as_pmatrix(other, like=self) + self

    def __sub__(self, other: Operand) -> "PVMatrix":
        a, b = align(self, other)
        return _combine(a, b, np.subtract)

    def __rsub__(self, other: Operand) -> "PVMatrix":
        return as_pmatrix(other, like=self) - self

    def __neg__(self) -> "PVMatrix":
        return PVMatrix(coeffs=-self.coeffs, basis=self.basis, tm=self.tm)

    def __mul__(self, other: Operand) -> "PVMatrix":
        a, b = align(self, other)
        _broadcast_shape(a, b, "Element-wise multiplication")
        return _product(a, b, np.multiply)

    def __rmul__(self, other: Operand) -> "PVMatrix":
        return as_pmatrix(other, like=self) * self

    def __matmul__(self, other: Operand) -> "PVMatrix":
        a, b = align(self, other)
        if a.cols != b.rows:
            raise DimensionError(f"Matrix multiplication of {a.shape} and {b.shape}")
        return _product(a, b, np.matmul)

    def __rmatmul__(self, other: Operand) -> "PVMatrix":
        return as_pmatrix(other, like=self) @ self

    def __pow__(self, n: int) -> "PVMatrix":
        """Element-wise power."""
        n = _non_negative_int(n, "Element-wise power")
        out = as_pmatrix(np.ones(self.shape), like=self)
        for _ in range(n):
            out = out * self
        return out

    def matrix_power(self, n: int) -> "PVMatrix":
        """
        Matrix power P^n by repeated multiplication.

        Raises:
            DimensionError: If P is not square
            BasisError: If n is negative (the inverse is not a finite basis expansion)
        """
        if self.rows != self.cols:
            raise DimensionError(f"Matrix power needs a square matrix, got {self.shape}")
        n = _non_negative_int(n, "Matrix power")
        out = as_pmatrix(np.eye(self.rows), like=self)
        for _ in range(n):
            out = out @ self
        return out

    def transpose(self) -> "PVMatrix":
        return PVMatrix(coeffs=self.coeffs.transpose(0, 2, 1), basis=self.basis, tm=self.tm)

    def ctranspose(self) -> "PVMatrix":
        """Conjugate transpose (basis functions are real-valued)."""
        return PVMatrix(coeffs=np.conj(self.coeffs).transpose(0, 2, 1), basis=self.basis, tm=self.tm)

    def vec(self) -> "PVMatrix":
        """Column-major vectorization P(:)."""
        n = self.coeffs.shape[0]
        flat = self.coeffs.transpose(0, 2, 1).reshape(n, -1, 1)
        return PVMatrix(coeffs=flat, basis=self.basis, tm=self.tm)

    def sum(self) -> "PVMatrix":
        """Sum along columns (result is 1 x l)."""
        return _build(self.coeffs.sum(axis=1, keepdims=True), self.basis, self.tm)

    def diag(self) -> "PVMatrix":
        """Diagonal matrix from a vector, or the diagonal (as a column) of a matrix."""
        if self.rows == 1 or self.cols == 1:
            coeffs = np.stack([np.diag(c.ravel()) for c in self.coeffs])
        else:
            coeffs = np.stack([np.diag(c)[:, None] for c in self.coeffs])
        return _build(coeffs, self.basis, self.tm)

    def __getitem__(self, key: Any) -> "PVMatrix":
        rows, cols = _index_pair(key, self.shape)
        return _build(self.coeffs[:, rows][:, :, cols], self.basis, self.tm)

    def assign(self, key: Any, value: Operand) -> "PVMatrix":
        """
        Subscripted assignment P(i, j) = value, returning a new matrix.

        Raises:
            DimensionError: If the value does not fit the indexed block
        """
        a, b = align(self, value)
        rows, cols = _index_pair(key, a.shape)
        block = (len(rows), len(cols))
        try:
            np.broadcast_shapes(b.shape, block)
        except ValueError:
            raise DimensionError(f"Cannot assign a {b.shape} value to a {block} block") from None
        terms = _union(a, b)
        coeffs, bases = [], []
        for b_key, (basis, ca, cb) in terms.items():
            c = np.array(ca if ca is not None else np.zeros(a.shape), dtype=float)
            c[np.ix_(rows, cols)] = cb if cb is not None else 0.0
            coeffs.append(c)
            bases.append(basis)
        return _build_terms(coeffs, bases, a.tm)

    def kron(self, other: Operand) -> "PVMatrix":
        a, b = align(self, other)
        return _product(a, b, np.kron)

    def pshift(self, k: int) -> "PVMatrix":
        """
        Shift the scheduling dependence by k time steps (DT only).

        Raises:
            DomainMismatchError: On a continuous-time matrix
        """
        if self.domain is not TimeDomain.DT:
            raise DomainMismatchError("DT", str(self.domain), "pshift")
        k = int(k)
        if self.is_constant or k == 0:
            return self
        shifted = tuple(b.shifted(k) if isinstance(b, Custom) else b for b in self.basis)
        return PVMatrix(coeffs=self.coeffs, basis=shifted, tm=self.tm.shifted(k))

    def pdiff(self, k: int = 1) -> "PVMatrix":
        """
        Differentiate k times with respect to time (CT only), applying the product rule.

        Raises:
            DomainMismatchError: On a discrete-time matrix
            BasisError: If k < 1 or a custom basis is involved
        """
        if self.domain is not TimeDomain.CT:
            raise DomainMismatchError("CT", str(self.domain), "pdiff")
        if int(k) < 1:
            raise BasisError(f"pdiff needs a positive order, got {k}")
        out = self
        for _ in range(int(k)):
            out = _differentiate(out)
        return out

    # ------------------------------------------------------------------ persistence

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": list(self.shape),
            "tm": self.tm.to_dict(),
            "basis": [_basis.to_dict(b, self.tm) for b in self.basis],
            "coeffs": [c.tolist() for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any]) -> "PVMatrix":
        tm = TimeMap.from_dict(src_dict["tm"])
        rows, cols = src_dict["shape"]
        coeffs = np.asarray(src_dict["coeffs"], dtype=float).reshape(-1, rows, cols)
        bases = [None] + [_basis.from_dict(b, tm) for b in src_dict["basis"]]
        return _build_terms(list(coeffs), bases, tm, prune=False)


# ---------------------------------------------------------------------- construction


def pmatrix(
    coeffs: Sequence[Any],
    basis_type: str = "affine",
    basis_params: Optional[Sequence[Any]] = None,
    tm: Optional[TimeMap] = None,
) -> PVMatrix:
    """
    Create a parameter-varying matrix function.

    Args:
        coeffs: One coefficient matrix (or scalar) per basis function
        basis_type: 'affine' (default), 'poly' or 'custom'
        basis_params: Affine: indices into the declared extended signal, 0 meaning the constant 1
            (default 0, 1, 2, ...). Poly: one degree vector per coefficient, in declared column
            order. Custom: (label, fn) pairs, fn taking one extended sample.
        tm: Timemap of the extended scheduling signal (default: static dependence on "p", DT)

    Returns:
        Canonical PVMatrix

    Raises:
        DimensionError: If coefficient shapes differ or params and coefficients disagree in count
        BasisError: On an invalid index or degree vector

    Example:
        >>> rho = make_timemap([0, -1], "dt")
        >>> A = pmatrix([A0, A1, A2], "affine", [0, 1, 2], rho)   # A0 + A1 p_t + A2 p_{t-1}
    """
    tm = tm or make_timemap([0], TimeDomain.DT)
    mats = [np.atleast_2d(np.asarray(c, dtype=float)) for c in coeffs]
    if not mats:
        raise DimensionError("pmatrix needs at least one coefficient")
    if any(m.ndim != 2 or m.shape != mats[0].shape for m in mats):
        raise DimensionError(f"Coefficient shapes differ: {[m.shape for m in mats]}")
    if basis_params is None:
        basis_params = list(range(len(mats)))
    if len(basis_params) != len(mats):
        raise DimensionError(f"{len(mats)} coefficients but {len(basis_params)} basis parameters")

    declared = tm.declared_columns
    bases: list[Optional[BasisFunction]] = []
    kind = basis_type.lower()
    for param in basis_params:
        if kind == "affine":
            idx = int(param)
            if not 0 <= idx <= tm.dim:
                raise BasisError(f"Affine index {idx} outside 0..{tm.dim}")
            bases.append(None if idx == 0 else Affine(tm.column(*declared[idx - 1])))
        elif kind in ("poly", "polynomial"):
            degrees = [int(d) for d in np.ravel(param)]
            if len(degrees) != tm.dim:
                raise BasisError(f"Degree vector {degrees} has length {len(degrees)}, expected {tm.dim}")
            if any(d < 0 for d in degrees):
                raise BasisError(f"Degrees must be non-negative, got {degrees}")
            canonical = [0] * tm.dim
            for (name, order), d in zip(declared, degrees):
                canonical[tm.column(name, order)] += d
            bases.append(_basis.monomial(tuple(canonical)))
        elif kind == "custom":
            if isinstance(param, Custom):
                bases.append(param)
            elif isinstance(param, Constant) or param == 0:
                bases.append(None)
            else:
                label, fn = param
                bases.append(Custom(label=str(label), fn=fn, source=tm))
        else:
            raise BasisError(f"Unknown basis type '{basis_type}'")
    return _build_terms(mats, bases, tm)


def preal(name: str = "p", domain: Union[TimeDomain, str] = TimeDomain.DT) -> PVMatrix:
    """
    Scalar scheduling variable as a 1 x 1 PVMatrix (A_0 = 0, one affine term with coefficient 1).

    Raises:
        TimeMapError: If the name is empty
    """
    tm = make_timemap([0], domain, [name])
    return PVMatrix(coeffs=np.array([[[0.0]], [[1.0]]]), basis=(Affine(0),), tm=tm)


def as_pmatrix(value: Operand, like: Optional[PVMatrix] = None, tm: Optional[TimeMap] = None) -> PVMatrix:
    """Promote a number or array to a constant PVMatrix on the timemap of `like` (or `tm`)."""
    if isinstance(value, PVMatrix):
        return value
    mat = np.atleast_2d(np.asarray(value, dtype=float))
    if mat.ndim != 2:
        raise DimensionError(f"Cannot use an array of shape {mat.shape} as a matrix")
    tm = like.tm if like is not None else (tm or make_timemap([0], TimeDomain.DT))
    return PVMatrix(coeffs=mat[None].copy(), basis=(), tm=tm)


def align(a: Operand, b: Operand) -> tuple[PVMatrix, PVMatrix]:
    """Promote both operands and express them on their merged timemap."""
    if not isinstance(a, PVMatrix):
        a = as_pmatrix(a, like=b if isinstance(b, PVMatrix) else None)
    if not isinstance(b, PVMatrix):
        b = as_pmatrix(b, like=a)
    if a.is_constant and a.tm != b.tm and a.domain == b.domain:
        return PVMatrix(a.coeffs, (), b.tm), b
    if b.is_constant and a.tm != b.tm and a.domain == b.domain:
        return a, PVMatrix(b.coeffs, (), a.tm)
    tm, map_a, map_b = merge_timemaps(a.tm, b.tm)
    return a.remapped(tm, map_a), b.remapped(tm, map_b)


def hconcat(*mats: Operand) -> PVMatrix:
    """Horizontal concatenation [P1, P2, ...]."""
    return _concat(mats, axis=1)


def vconcat(*mats: Operand) -> PVMatrix:
    """Vertical concatenation [P1; P2; ...]."""
    return _concat(mats, axis=0)


def blkdiag(*mats: Operand) -> PVMatrix:
    """Block-diagonal arrangement of the operands."""
    mats = [m for m in mats]
    pv = [as_pmatrix(m) if not isinstance(m, PVMatrix) else m for m in mats]
    total_cols = sum(m.cols for m in pv)
    rows_out = []
    offset = 0
    for m in pv:
        left = np.zeros((m.rows, offset))
        right = np.zeros((m.rows, total_cols - offset - m.cols))
        rows_out.append(hconcat(as_pmatrix(left, like=m), m, as_pmatrix(right, like=m)))
        offset += m.cols
    return vconcat(*rows_out)


def diag(value: Union[PVMatrix, Sequence[Operand]]) -> PVMatrix:
    """diag([p1, p2, ...]) or diag(P)."""
    if isinstance(value, PVMatrix):
        return value.diag()
    return hconcat(*value).diag()


def kron(a: Operand, b: Operand) -> PVMatrix:
    """Kronecker product."""
    a, b = align(a, b)
    return a.kron(b)


def pshift(value: PVMatrix, k: int) -> PVMatrix:
    """Shift k time steps (DT only)."""
    return value.pshift(k)


def pdiff(value: PVMatrix, k: int = 1) -> PVMatrix:
    """Differentiate k times (CT only)."""
    return value.pdiff(k)


def common_timemap(mats: Iterable[PVMatrix]) -> TimeMap:
    """Merged timemap of several matrices."""
    return merge_all(m.tm for m in mats)


# ---------------------------------------------------------------------- internals


def _unpack(rho, tm):
    if isinstance(rho, ExtendedTrajectory):
        return rho.samples, rho.tm
    return rho, tm


def _non_negative_int(n: Any, what: str) -> int:
    if isinstance(n, bool) or not float(n).is_integer():
        raise BasisError(f"{what} needs an integer exponent, got {n}")
    if int(n) < 0:
        raise BasisError(f"{what} with negative exponent {n}: inverse dependence is not representable")
    return int(n)


def _broadcast_shape(a: PVMatrix, b: PVMatrix, what: str) -> tuple[int, int]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{what} of {a.shape} and {b.shape}") from None


def _key(b: Optional[BasisFunction]) -> tuple:
    return ("const",) if b is None or isinstance(b, Constant) else b.key()


def _union(a: PVMatrix, b: PVMatrix) -> dict:
    """Basis key -> (basis, coefficient in a or None, coefficient in b or None)."""
    out: dict = {}
    for basis, c in a.terms():
        out[_key(basis)] = [basis, c, None]
    for basis, c in b.terms():
        entry = out.setdefault(_key(basis), [basis, None, None])
        entry[2] = c
    return out


def _combine(a: PVMatrix, b: PVMatrix, op: Callable) -> PVMatrix:
    shape = _broadcast_shape(a, b, "Addition")
    coeffs, bases = [], []
    for basis, ca, cb in _union(a, b).values():
        ca = np.zeros(shape) if ca is None else np.broadcast_to(ca, shape)
        cb = np.zeros(shape) if cb is None else np.broadcast_to(cb, shape)
        coeffs.append(op(ca, cb))
        bases.append(basis)
    return _build_terms(coeffs, bases, a.tm)


def _product(a: PVMatrix, b: PVMatrix, op: Callable) -> PVMatrix:
    coeffs, bases = [], []
    for ba, ca in a.terms():
        for bb, cb in b.terms():
            coeffs.append(op(ca, cb))
            bases.append(_basis.product(ba, bb, a.tm))
    return _build_terms(coeffs, bases, a.tm)


def _concat(mats: Sequence[Operand], axis: int) -> PVMatrix:
    if not mats:
        raise DimensionError("Nothing to concatenate")
    anchor = next((m for m in mats if isinstance(m, PVMatrix)), None)
    pv = [as_pmatrix(m, like=anchor) for m in mats]
    varying = [m.tm for m in pv if not m.is_constant]
    tm = merge_all(varying) if varying else pv[0].tm
    pv = [m.on(tm) if not m.is_constant else PVMatrix(m.coeffs, (), tm) for m in pv]
    other = 1 - axis
    if len({m.shape[other] for m in pv}) > 1:
        raise DimensionError(f"Concatenation of shapes {[m.shape for m in pv]} along axis {axis}")
    keys: dict = {}
    for m in pv:
        for basis, _ in m.terms():
            keys.setdefault(_key(basis), basis)
    coeffs, bases = [], []
    for k, basis in keys.items():
        blocks = []
        for m in pv:
            found = next((c for bm, c in m.terms() if _key(bm) == k), None)
            blocks.append(np.zeros(m.shape) if found is None else found)
        coeffs.append(np.concatenate(blocks, axis=axis))
        bases.append(basis)
    return _build_terms(coeffs, bases, tm)


def _index_pair(key: Any, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(key, tuple):
        key = (key, slice(None))
    if len(key) != 2:
        raise DimensionError(f"Expected a (row, column) index, got {key!r}")
    try:
        rows = np.atleast_1d(np.arange(shape[0])[key[0]])
        cols = np.atleast_1d(np.arange(shape[1])[key[1]])
    except IndexError as e:
        raise DimensionError(f"Index {key!r} out of range for shape {shape}") from e
    return rows, cols


def _differentiate(m: PVMatrix) -> PVMatrix:
    tm = m.tm
    wider = TimeMap(
        orders=tuple(sorted(set(tm.orders) | {o + 1 for o in tm.orders})),
        domain=tm.domain,
        names=tm.names,
    )
    m = m.on(wider)
    coeffs, bases = [np.zeros(m.shape)], [None]
    for basis, c in m.terms()[1:]:
        if isinstance(basis, Custom):
            raise BasisError(f"Cannot differentiate custom basis '{basis.label}'")
        degrees = basis.degrees(wider.dim) if isinstance(basis, Affine) else basis.degrees
        for col, deg in enumerate(degrees):
            if not deg:
                continue
            name, order = wider.columns[col]
            new = list(degrees)
            new[col] -= 1
            new[wider.column(name, order + 1)] += 1
            coeffs.append(deg * c)
            bases.append(_basis.monomial(tuple(new)))
    return _build_terms(coeffs, bases, wider)


def _build(coeffs: np.ndarray, basis: Sequence[BasisFunction], tm: TimeMap) -> PVMatrix:
    return _build_terms(list(coeffs), [None, *basis], tm)


def _build_terms(
    coeffs: Sequence[np.ndarray],
    bases: Sequence[Optional[BasisFunction]],
    tm: TimeMap,
    prune: bool = True,
) -> PVMatrix:
    """Merge duplicate bases, drop negligible terms and sort into canonical order."""
    shape = np.asarray(coeffs[0]).shape
    constant = np.zeros(shape)
    merged: dict = {}
    for basis, c in zip(bases, coeffs):
        c = np.asarray(c, dtype=float)
        if basis is None or isinstance(basis, Constant):
            constant = constant + c
            continue
        k = basis.key()
        if k in merged:
            merged[k] = (merged[k][0], merged[k][1] + c)
        else:
            merged[k] = (basis, c)
    kept = sorted(
        (item for item in merged.items() if not prune or np.max(np.abs(item[1][1]), initial=0.0) >= PRUNE_TOL),
        key=lambda item: item[0],
    )
    stacked = np.stack([constant] + [c for _, (_, c) in kept]) if kept else constant[None]
    return PVMatrix(coeffs=stacked, basis=tuple(b for _, (b, _) in kept), tm=tm)
