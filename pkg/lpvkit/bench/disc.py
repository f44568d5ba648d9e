"""
Unbalanced disc: nonlinear simulation and its LPV embeddings.

    theta'' = -(1/tau) theta' + (K_m/tau) u - (m g l / J) sin(theta)

With p = sinc(theta) = sin(theta)/theta the nonlinearity becomes (m g l / J) p theta, which is
linear in theta for a given p.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from ..errors import SimulationError
from ..models import LpvIoModel, LpvSsModel, lpvio, lpvss
from ..pmatrix import preal, pshift
from ..scheduling import SchedulingTrajectory
from ..types import TimeDomain
from .config import UnbalancedDiscParams

logger = logging.getLogger(__name__)

SCHEDULING_NAME = "p"


def disc_rhs(params: UnbalancedDiscParams, state: np.ndarray, u: float) -> np.ndarray:
    """Time derivative of (theta, theta')."""
    angle, rate = state
    accel = -rate / params.time_constant + params.motor_constant * u / params.time_constant \
        - params.stiffness * np.sin(angle)
    return np.array([rate, accel])


def simulate_disc(
    params: UnbalancedDiscParams,
    u: np.ndarray,
    substeps: int = 20,
    x0: Sequence[float] = (0.0, 0.0),
    logger: Optional[logging.Logger] = None,
) -> np.ndarray:
    """
    Angle of the disc at the sample instants under a zero-order-hold input.

    Classical fourth-order Runge-Kutta with `substeps` fixed steps per sample.

    Args:
        params: Physical constants
        u: Input samples; u[k] is held on [k T_s, (k+1) T_s)
        substeps: Integration steps per sample
        x0: Initial (theta, theta')

    Returns:
        theta at t = k T_s, k = 0 .. N-1 (theta[0] is the initial angle)

    Raises:
        SimulationError: On a non-finite input or a diverging state
    """
    logger = logger or logging.getLogger(__name__)
    u = np.asarray(u, dtype=float).ravel()
    if substeps < 1:
        raise SimulationError(f"substeps must be at least 1, got {substeps}")
    if not np.all(np.isfinite(u)):
        raise SimulationError("Disc input contains non-finite samples")
    h = params.sample_time / substeps
    state = np.asarray(x0, dtype=float).copy()
    angle = np.empty(u.size)
    for k, uk in enumerate(u):
        angle[k] = state[0]
        for _ in range(substeps):
            k1 = disc_rhs(params, state, uk)
            k2 = disc_rhs(params, state + 0.5 * h * k1, uk)
            k3 = disc_rhs(params, state + 0.5 * h * k2, uk)
            k4 = disc_rhs(params, state + h * k3, uk)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise SimulationError(f"Disc simulation diverged at sample {k}")
    logger.debug(f"Simulated {u.size} disc samples with {substeps} RK4 steps each")
    return angle


def scheduling_from_angle(angle: np.ndarray, sample_time: float) -> SchedulingTrajectory:
    """p = sin(theta)/theta with p(0) = 1."""
    p = np.sinc(np.asarray(angle, dtype=float) / np.pi)
    return SchedulingTrajectory(samples=p[:, None], channel_names=(SCHEDULING_NAME,), sample_time=sample_time)


def embed_lpv(params: UnbalancedDiscParams) -> LpvIoModel:
    """
    DT LPV-IO embedding obtained with backward differences.

        theta_k + A_1 theta_{k-1} + (A_2 <> p)_k theta_{k-2} = b u_{k-2}
        A_1 = T_s/tau - 2
        A_2 = 1 - T_s/tau + (m g l T_s^2 / J) p_{k-2}
        b   = K_m T_s^2 / tau
    """
    ts, tau = params.sample_time, params.time_constant
    a1 = ts / tau - 2.0
    a2 = (1.0 - ts / tau) + params.stiffness * ts**2 * pshift(preal(SCHEDULING_NAME), -2)
    b = params.motor_constant * ts**2 / tau
    return lpvio(A=[a1, a2], B=[b], delay=2, sample_time=ts)


def disc_ct_model(params: UnbalancedDiscParams) -> LpvSsModel:
    """CT LPV-SS form with state (theta, theta') and output theta."""
    p = preal(SCHEDULING_NAME, TimeDomain.CT)
    A = np.array([[0.0, 1.0], [0.0, -1.0 / params.time_constant]]) + np.array([[0.0, 0.0], [-params.stiffness, 0.0]]) * p
    B = np.array([[0.0], [params.motor_constant / params.time_constant]])
    return lpvss(A, B, np.array([[1.0, 0.0]]), 0.0, sample_time=params.sample_time, domain=TimeDomain.CT)
