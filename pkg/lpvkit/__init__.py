"""
lpvkit

Modelling, simulation and identification of linear parameter-varying (LPV) systems.

Example:
    >>> import numpy as np
    >>> from lpvkit import lpvidpoly, lpvarx, preal, pshift
    >>> p = preal("p")
    >>> A1 = 0.5 + 0.2 * pshift(p, -1)
    >>> template = lpvidpoly(A=[np.eye(1), A1], B=[1.0])
    >>> report = lpvarx(template, dataset)
"""

import logging

from .errors import (
    BasisError,
    ConfigError,
    ConversionError,
    DataError,
    DimensionError,
    DomainMismatchError,
    IdentificationError,
    IllPosedError,
    LpvKitError,
    ModelError,
    RankDeficientError,
    SerializationError,
    SimulationError,
    StructureError,
    TimeMapError,
)
from .ident import (
    Dataset,
    EstimOptions,
    FitReport,
    LpvIdPoly,
    Regularization,
    bfr,
    lpvarmax,
    lpvarx,
    lpvbj,
    lpvidpoly,
    lpviv,
    lpvoe,
    lpvpolyest,
    lpvssest,
    plr_estimate,
    predict,
    simulate_idpoly,
)
from .models import (
    LpvIoModel,
    LpvLfrModel,
    LpvSsModel,
    Simulation,
    companion_realization,
    euler_discretize_ss,
    frozen,
    frozen_poles,
    interconnect,
    load_model,
    lpvio,
    lpvlfr,
    lpvss,
    save_model,
    simulate_io,
    simulate_lfr,
    simulate_ss,
    ss_to_lfr,
)
from .pmatrix import PVMatrix, blkdiag, diag, hconcat, kron, pdiff, pmatrix, preal, pshift, vconcat
from .scheduling import SchedulingTrajectory, TimeMap, extend_trajectory, make_timemap, merge_timemaps
from .types import InterconnectKind, Structure, TimeDomain

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = (
    "BasisError",
    "ConfigError",
    "ConversionError",
    "DataError",
    "Dataset",
    "DimensionError",
    "DomainMismatchError",
    "EstimOptions",
    "FitReport",
    "IdentificationError",
    "IllPosedError",
    "InterconnectKind",
    "LpvIdPoly",
    "LpvIoModel",
    "LpvKitError",
    "LpvLfrModel",
    "LpvSsModel",
    "ModelError",
    "PVMatrix",
    "RankDeficientError",
    "Regularization",
    "SchedulingTrajectory",
    "SerializationError",
    "Simulation",
    "SimulationError",
    "Structure",
    "StructureError",
    "TimeDomain",
    "TimeMap",
    "TimeMapError",
    "bfr",
    "blkdiag",
    "companion_realization",
    "diag",
    "euler_discretize_ss",
    "extend_trajectory",
    "frozen",
    "frozen_poles",
    "hconcat",
    "interconnect",
    "kron",
    "load_model",
    "lpvarmax",
    "lpvarx",
    "lpvbj",
    "lpvidpoly",
    "lpvio",
    "lpviv",
    "lpvlfr",
    "lpvoe",
    "lpvpolyest",
    "lpvss",
    "lpvssest",
    "make_timemap",
    "merge_timemaps",
    "pdiff",
    "plr_estimate",
    "pmatrix",
    "predict",
    "preal",
    "pshift",
    "save_model",
    "simulate_idpoly",
    "simulate_io",
    "simulate_lfr",
    "simulate_ss",
    "ss_to_lfr",
    "vconcat",
)
