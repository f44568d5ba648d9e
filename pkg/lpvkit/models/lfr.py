"""
LPV linear fractional representation: an LTI system G closed over a scheduling block Delta.

    x_{t+1} = A x_t + Bw w_t + Bu u_t
    z_t     = Cz x_t + Dzw w_t + Dzu u_t
    y_t     = Cy x_t + Dyw w_t + Dyu u_t
    w_t     = (Delta <> p)_t z_t
"""

from __future__ import annotations

import logging
from typing import Any, Optional

import numpy as np
from attrs import define, field

from ..errors import IllPosedError, ModelError, SimulationError
from ..pmatrix import PVMatrix
from ..scheduling import TimeMap
from ..types import TimeDomain
from ..utils import handle_numerical_errors
from .base import (
    SchedulingLike,
    Simulation,
    as_scheduling,
    as_signal,
    extend,
    model_timemap,
    promote,
    require_dt,
    signal_length,
)

logger = logging.getLogger(__name__)

# Loop determinants below this magnitude count as ill-posed.
WELL_POSED_TOL = 1e-10

BLOCKS = ("A", "Bw", "Bu", "Cz", "Cy", "Dzw", "Dzu", "Dyw", "Dyu")


def _matrix(value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    return arr.reshape(0, 0) if arr.size == 0 and arr.ndim < 2 else np.atleast_2d(arr)


@define(frozen=True, eq=False)
class LpvLfrModel:
    """
    LPV-LFR model.

    Attributes:
        Delta: Scheduling block (n_w x n_z)
        A .. Dyu: Constant blocks of the LTI part G
        sample_time: Sampling time in seconds
    """

    Delta: PVMatrix
    A: np.ndarray = field(converter=_matrix)
    Bw: np.ndarray = field(converter=_matrix)
    Bu: np.ndarray = field(converter=_matrix)
    Cz: np.ndarray = field(converter=_matrix)
    Cy: np.ndarray = field(converter=_matrix)
    Dzw: np.ndarray = field(converter=_matrix)
    Dzu: np.ndarray = field(converter=_matrix)
    Dyw: np.ndarray = field(converter=_matrix)
    Dyu: np.ndarray = field(converter=_matrix)
    sample_time: float = 1.0

    def __attrs_post_init__(self):
        nx, nw, nz, nu, ny = self.nx, self.nw, self.nz, self.nu, self.ny
        expected = {
            "A": (nx, nx), "Bw": (nx, nw), "Bu": (nx, nu),
            "Cz": (nz, nx), "Dzw": (nz, nw), "Dzu": (nz, nu),
            "Cy": (ny, nx), "Dyw": (ny, nw), "Dyu": (ny, nu),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ModelError(f"LFR block {name} has shape {got}, expected {shape}")

    @property
    def nx(self) -> int:
        return self.A.shape[0]

    @property
    def nw(self) -> int:
        return self.Delta.rows

    @property
    def nz(self) -> int:
        return self.Delta.cols

    @property
    def nu(self) -> int:
        return self.Dyu.shape[1]

    @property
    def ny(self) -> int:
        return self.Dyu.shape[0]

    @property
    def domain(self) -> TimeDomain:
        return self.Delta.domain

    @property
    def tm(self) -> TimeMap:
        return model_timemap([self.Delta], self.domain)

    def blocks(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in BLOCKS}

    def loop_matrix(self, delta: np.ndarray) -> np.ndarray:
        """I - Delta * Dzw for one evaluated Delta."""
        return np.eye(self.nw) - delta @ self.Dzw

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"Delta": self.Delta.to_dict()}
        for name, block in self.blocks().items():
            out[name] = {"shape": list(block.shape), "values": block.tolist()}
        out["sample_time"] = self.sample_time
        return out

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any]) -> "LpvLfrModel":
        blocks = {
            name: np.asarray(src_dict[name]["values"], dtype=float).reshape(src_dict[name]["shape"])
            for name in BLOCKS
        }
        return cls(
            Delta=PVMatrix.from_dict(src_dict["Delta"]),
            sample_time=float(src_dict.get("sample_time", 1.0)),
            **blocks,
        )

    def __str__(self) -> str:
        return (
            f"LPV-LFR model ({self.domain}): {self.nx} state(s), Delta {self.nw}x{self.nz}, "
            f"{self.nu} input(s), {self.ny} output(s), {self.tm}"
        )


def lpvlfr(
    Delta: Any,
    A: Any,
    Bw: Any,
    Bu: Any,
    Cz: Any,
    Cy: Any,
    Dzw: Any,
    Dzu: Any,
    Dyw: Any,
    Dyu: Any,
    sample_time: float = 1.0,
) -> LpvLfrModel:
    """
    Create an LPV-LFR model from a scheduling block and the constant blocks of G.

    An empty (0 x 0) Delta gives a plain LTI state-space system.

    Raises:
        ModelError: On inconsistent block dimensions
    """
    if not isinstance(Delta, PVMatrix):
        Delta = promote(_matrix(Delta), TimeDomain.DT)
    return LpvLfrModel(
        Delta=Delta, A=A, Bw=Bw, Bu=Bu, Cz=Cz, Cy=Cy, Dzw=Dzw, Dzu=Dzu, Dyw=Dyw, Dyu=Dyu,
        sample_time=float(sample_time),
    )


@handle_numerical_errors("LFR simulation")
def simulate_lfr(
    m: LpvLfrModel,
    u: Optional[np.ndarray],
    p: SchedulingLike = None,
    x0: Optional[np.ndarray] = None,
    tol: float = WELL_POSED_TOL,
    logger: Optional[logging.Logger] = None,
) -> Simulation:
    """
    Simulate an LPV-LFR model, resolving the algebraic loop at every step.

    Args:
        m: Discrete-time LFR model
        u: Input signal (N, n_u)
        p: Scheduling trajectory of length N
        x0: State at the window start (default zero)
        tol: Smallest admissible |det(I - Delta_t Dzw)|

    Returns:
        Simulation with outputs (M, n_y) and states (M + 1, n_x)

    Raises:
        IllPosedError: With the offending time index when the loop cannot be resolved
        DomainMismatchError: For a CT model
    """
    logger = logger or logging.getLogger(__name__)
    require_dt(m.domain, "simulate_lfr")
    tm = m.tm
    n = signal_length(u, p)
    u = as_signal(u, n, m.nu, "u")
    ext = extend(tm, as_scheduling(p, tm, n), n)
    start, stop = ext.valid_range
    delta = m.Delta.evaluate(ext)
    has_loop = m.nw > 0 and np.any(m.Dzw)

    x = np.zeros((stop - start + 1, m.nx))
    if x0 is not None:
        x[0] = np.asarray(x0, dtype=float).reshape(m.nx)
    y = np.zeros((stop - start, m.ny))
    for k in range(stop - start):
        t = start + k
        v = m.Cz @ x[k] + m.Dzu @ u[t]
        if has_loop:
            loop = m.loop_matrix(delta[k])
            det = np.linalg.det(loop)
            if abs(det) < tol:
                raise IllPosedError(t, det)
            w = np.linalg.solve(loop, delta[k] @ v)
        else:
            w = delta[k] @ v
        x[k + 1] = m.A @ x[k] + m.Bw @ w + m.Bu @ u[t]
        y[k] = m.Cy @ x[k] + m.Dyw @ w + m.Dyu @ u[t]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise SimulationError("LFR simulation diverged")
    logger.debug(f"Simulated {y.shape[0]} samples of {m}")
    return Simulation(y=y, x=x, valid_range=(start, stop))
