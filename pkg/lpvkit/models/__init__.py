"""LPV-IO, LPV-SS and LPV-LFR representations, simulation and analysis"""

from .analysis import (
    companion_realization,
    constant_sample,
    euler_discretize_ss,
    frozen,
    frozen_poles,
    interconnect,
    ss_to_lfr,
)
from .base import Simulation
from .io import LpvIoModel, lpvio, simulate_io
from .lfr import LpvLfrModel, lpvlfr, simulate_lfr
from .serialize import load_model, save_model
from .ss import LpvSsModel, lpvss, simulate_ss

__all__ = (
    "LpvIoModel",
    "LpvLfrModel",
    "LpvSsModel",
    "Simulation",
    "companion_realization",
    "constant_sample",
    "euler_discretize_ss",
    "frozen",
    "frozen_poles",
    "interconnect",
    "load_model",
    "lpvio",
    "lpvlfr",
    "lpvss",
    "save_model",
    "simulate_io",
    "simulate_lfr",
    "simulate_ss",
    "ss_to_lfr",
)
