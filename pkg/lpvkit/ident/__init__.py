"""Prediction-error identification of LPV-IO and LPV-SS models"""

from .arx import lpvarx
from .dataset import Dataset
from .idpoly import IdCoefficient, LpvIdPoly, ParamIndex, ThetaVector, lpvidpoly
from .iv import lpviv
from .metrics import bfr
from .options import EstimOptions, Regularization, read_key_values
from .plr import lpvarmax, lpvbj, lpvoe, plr_estimate
from .polyest import lpvpolyest
from .predictor import Prediction, predict, simulate_idpoly
from .report import FitReport
from .ssest import lpvssest

__all__ = (
    "Dataset",
    "EstimOptions",
    "FitReport",
    "IdCoefficient",
    "LpvIdPoly",
    "ParamIndex",
    "Prediction",
    "Regularization",
    "ThetaVector",
    "bfr",
    "lpvarmax",
    "lpvarx",
    "lpvbj",
    "lpvidpoly",
    "lpviv",
    "lpvoe",
    "lpvpolyest",
    "lpvssest",
    "plr_estimate",
    "predict",
    "read_key_values",
    "simulate_idpoly",
)
