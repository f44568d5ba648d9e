"""Parameter-varying matrix functions and their algebra"""

from .basis import Affine, BasisFunction, Constant, Custom, Monomial
from .pmatrix import (
    PVMatrix,
    align,
    as_pmatrix,
    blkdiag,
    common_timemap,
    diag,
    hconcat,
    kron,
    pdiff,
    pmatrix,
    preal,
    pshift,
    vconcat,
)

__all__ = (
    "Affine",
    "BasisFunction",
    "Constant",
    "Custom",
    "Monomial",
    "PVMatrix",
    "align",
    "as_pmatrix",
    "blkdiag",
    "common_timemap",
    "diag",
    "hconcat",
    "kron",
    "pdiff",
    "pmatrix",
    "preal",
    "pshift",
    "vconcat",
)
