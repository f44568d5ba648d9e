"""
LPV state-space representation, optionally in innovation form.

    x_{t+1} = A x_t + B u_t + K e_t
    y_t     = C x_t + D u_t + e_t,      e_t ~ N(0, Xi)

with every matrix a function of the extended scheduling signal at time t.
"""

from __future__ import annotations

import logging
from typing import Any, Optional

import numpy as np
from attrs import define, field

from ..errors import ModelError, SimulationError
from ..pmatrix import PVMatrix
from ..scheduling import TimeMap
from ..types import TimeDomain
from ..utils import handle_numerical_errors
from .base import (
    SchedulingLike,
    Simulation,
    as_scheduling,
    as_signal,
    check_shape,
    extend,
    model_domain,
    model_timemap,
    on_domain,
    promote,
    require_dt,
    signal_length,
)

logger = logging.getLogger(__name__)


def _optional_array(value) -> Optional[np.ndarray]:
    return None if value is None else np.atleast_2d(np.asarray(value, dtype=float))


@define(frozen=True, eq=False)
class LpvSsModel:
    """
    LPV-SS model.

    Attributes:
        A, B, C, D: System matrices (n_x x n_x, n_x x n_u, n_y x n_x, n_y x n_u)
        K: Innovation gain (n_x x n_y), None for a deterministic model
        noise_variance: Innovation covariance Xi (n_y x n_y, symmetric positive definite)
        sample_time: Sampling time in seconds (ignored in CT)
    """

    A: PVMatrix
    B: PVMatrix
    C: PVMatrix
    D: PVMatrix
    K: Optional[PVMatrix] = None
    noise_variance: Optional[np.ndarray] = field(default=None, converter=_optional_array)
    sample_time: float = 1.0

    def __attrs_post_init__(self):
        nx, nu, ny = self.nx, self.nu, self.ny
        check_shape("A", self.A, nx, nx)
        check_shape("B", self.B, nx, nu)
        check_shape("C", self.C, ny, nx)
        check_shape("D", self.D, ny, nu)
        if self.K is not None:
            check_shape("K", self.K, nx, ny)
        if self.noise_variance is not None:
            xi = self.noise_variance
            if xi.shape != (ny, ny):
                raise ModelError(f"Noise variance has shape {xi.shape}, expected ({ny}, {ny})")
            if not np.allclose(xi, xi.T):
                raise ModelError("Noise variance must be symmetric")
            try:
                np.linalg.cholesky(xi)
            except np.linalg.LinAlgError:
                raise ModelError("Noise variance must be positive definite") from None
        model_domain(self.matrices)

    @property
    def nx(self) -> int:
        return self.A.rows

    @property
    def nu(self) -> int:
        return self.B.cols

    @property
    def ny(self) -> int:
        return self.C.rows

    @property
    def matrices(self) -> tuple[PVMatrix, ...]:
        mats = (self.A, self.B, self.C, self.D)
        return mats if self.K is None else mats + (self.K,)

    @property
    def domain(self) -> TimeDomain:
        return model_domain(self.matrices)

    @property
    def tm(self) -> TimeMap:
        return model_timemap(self.matrices, self.domain)

    @property
    def is_innovation_form(self) -> bool:
        return self.K is not None

    def deterministic(self) -> "LpvSsModel":
        """The same model without noise model."""
        return LpvSsModel(self.A, self.B, self.C, self.D, sample_time=self.sample_time)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {name: getattr(self, name).to_dict() for name in ("A", "B", "C", "D")}
        if self.K is not None:
            out["K"] = self.K.to_dict()
        if self.noise_variance is not None:
            out["noise_variance"] = self.noise_variance.tolist()
        out["sample_time"] = self.sample_time
        return out

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any]) -> "LpvSsModel":
        k = src_dict.get("K")
        return cls(
            A=PVMatrix.from_dict(src_dict["A"]),
            B=PVMatrix.from_dict(src_dict["B"]),
            C=PVMatrix.from_dict(src_dict["C"]),
            D=PVMatrix.from_dict(src_dict["D"]),
            K=None if k is None else PVMatrix.from_dict(k),
            noise_variance=src_dict.get("noise_variance"),
            sample_time=float(src_dict.get("sample_time", 1.0)),
        )

    def __str__(self) -> str:
        form = "innovation " if self.is_innovation_form else ""
        return (
            f"LPV-SS {form}model ({self.domain}): {self.nx} state(s), {self.nu} input(s), "
            f"{self.ny} output(s), {self.tm}"
        )


def lpvss(
    A: Any,
    B: Any,
    C: Any,
    D: Any,
    K: Any = None,
    noise_variance: Any = None,
    sample_time: float = 1.0,
    domain: Optional[TimeDomain] = None,
) -> LpvSsModel:
    """
    Create an LPV-SS model from PVMatrix, array or scalar blocks.

    Raises:
        ModelError: On inconsistent dimensions or a non-PD noise variance
        DomainMismatchError: If CT and DT matrices are mixed
    """
    raw = [promote(m, TimeDomain.DT) for m in (A, B, C, D)]
    if K is not None:
        raw.append(promote(K, TimeDomain.DT))
    target = TimeDomain.parse(domain) if domain is not None else model_domain(raw)
    mats = [on_domain(m, target) for m in raw]
    return LpvSsModel(
        *mats[:4],
        K=mats[4] if K is not None else None,
        noise_variance=noise_variance,
        sample_time=float(sample_time),
    )


@handle_numerical_errors("SS simulation")
def simulate_ss(
    m: LpvSsModel,
    u: Optional[np.ndarray],
    p: SchedulingLike = None,
    x0: Optional[np.ndarray] = None,
    e: Optional[np.ndarray] = None,
    logger: Optional[logging.Logger] = None,
) -> Simulation:
    """
    Simulate an LPV-SS model over the valid window of its timemap.

    Args:
        m: Discrete-time SS model
        u: Input signal (N, n_u)
        p: Scheduling trajectory of length N
        x0: State at the window start (default zero)
        e: Innovation sequence (N, n_y); only used in innovation form (default zero)

    Returns:
        Simulation with outputs (M, n_y) and states (M + 1, n_x)

    Raises:
        DomainMismatchError: For a CT model
        DataError: On signal length or shape mismatches
        SimulationError: If the state becomes non-finite
    """
    logger = logger or logging.getLogger(__name__)
    require_dt(m.domain, "simulate_ss")
    tm = m.tm
    n = signal_length(u, p)
    u = as_signal(u, n, m.nu, "u")
    ext = extend(tm, as_scheduling(p, tm, n), n)
    start, stop = ext.valid_range
    A, B, C, D = (mat.evaluate(ext) for mat in (m.A, m.B, m.C, m.D))
    noisy = m.K is not None and e is not None
    if noisy:
        e = as_signal(e, n, m.ny, "e")
        K = m.K.evaluate(ext)

    x = np.zeros((stop - start + 1, m.nx))
    x[0] = np.zeros(m.nx) if x0 is None else np.asarray(x0, dtype=float).reshape(m.nx)
    y = np.zeros((stop - start, m.ny))
    for k in range(stop - start):
        t = start + k
        y[k] = C[k] @ x[k] + D[k] @ u[t]
        x[k + 1] = A[k] @ x[k] + B[k] @ u[t]
        if noisy:
            y[k] += e[t]
            x[k + 1] += K[k] @ e[t]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise SimulationError("SS simulation diverged")
    logger.debug(f"Simulated {y.shape[0]} samples of {m}")
    return Simulation(y=y, x=x, valid_range=(start, stop))
