"""
LPV input-output representation.

    y_t + sum_{i=1..na} (A_i <> p)_t y_{t-i} = sum_{j=0..nb} (B_j <> p)_t u_{t-j-delay}

The leading coefficient of the output polynomial is the identity and is not stored.
"""

from __future__ import annotations

import logging
from typing import Any, Optional, Sequence

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


@define(frozen=True, eq=False)
class LpvIoModel:
    """
    LPV-IO model.

    Attributes:
        A: Output coefficients A_1 .. A_na (n_y x n_y)
        B: Input coefficients B_0 .. B_nb (n_y x n_u)
        delay: Input delay in samples
        sample_time: Sampling time in seconds
    """

    A: tuple[PVMatrix, ...] = field(converter=tuple)
    B: tuple[PVMatrix, ...] = field(converter=tuple)
    delay: int = 0
    sample_time: float = 1.0
    n_inputs: Optional[int] = None

    def __attrs_post_init__(self):
        if not self.A and not self.B:
            raise ModelError("An IO model needs at least one A or B coefficient")
        if self.delay < 0:
            raise ModelError(f"Input delay must be non-negative, got {self.delay}")
        ny = self.ny
        for i, a in enumerate(self.A, start=1):
            check_shape(f"A_{i}", a, ny, ny)
        for j, b in enumerate(self.B):
            check_shape(f"B_{j}", b, ny, self.nu)
        model_domain(self.A + self.B)

    @property
    def ny(self) -> int:
        return self.A[0].rows if self.A else self.B[0].rows

    @property
    def nu(self) -> int:
        if self.B:
            return self.B[0].cols
        return self.n_inputs or 0

    @property
    def na(self) -> int:
        return len(self.A)

    @property
    def nb(self) -> int:
        """Highest input lag (-1 without input polynomial)."""
        return len(self.B) - 1

    @property
    def domain(self) -> TimeDomain:
        return model_domain(self.A + self.B)

    @property
    def tm(self) -> TimeMap:
        return model_timemap(self.A + self.B, self.domain)

    @property
    def matrices(self) -> tuple[PVMatrix, ...]:
        return self.A + self.B

    def to_dict(self) -> dict[str, Any]:
        return {
            "A": [a.to_dict() for a in self.A],
            "B": [b.to_dict() for b in self.B],
            "delay": self.delay,
            "sample_time": self.sample_time,
            "n_inputs": self.nu,
        }

    @classmethod
    def from_dict(cls, src_dict: dict[str, Any]) -> "LpvIoModel":
        return cls(
            A=[PVMatrix.from_dict(a) for a in src_dict["A"]],
            B=[PVMatrix.from_dict(b) for b in src_dict["B"]],
            delay=int(src_dict.get("delay", 0)),
            sample_time=float(src_dict.get("sample_time", 1.0)),
            n_inputs=src_dict.get("n_inputs"),
        )

    def __str__(self) -> str:
        return (
            f"LPV-IO model ({self.domain}): {self.ny} output(s), {self.nu} input(s), "
            f"na={self.na}, nb={self.nb}, delay={self.delay}, {self.tm}"
        )


def lpvio(
    A: Sequence[Any],
    B: Sequence[Any],
    delay: int = 0,
    sample_time: float = 1.0,
    domain: Optional[TimeDomain] = None,
    n_inputs: Optional[int] = None,
) -> LpvIoModel:
    """
    Create an LPV-IO model.

    Args:
        A: Coefficients A_1 .. A_na (PVMatrix, arrays or numbers)
        B: Coefficients B_0 .. B_nb
        delay: Input delay in samples
        sample_time: Sampling time in seconds
        domain: Domain for the constant coefficients (default: that of the varying ones, else DT)
        n_inputs: Input count when B is empty

    Raises:
        ModelError: On inconsistent dimensions or a negative delay
        DomainMismatchError: If CT and DT coefficients are mixed
    """
    raw = [promote(m, TimeDomain.DT) for m in list(A) + list(B)]
    target = TimeDomain.parse(domain) if domain is not None else model_domain(raw)
    mats = [on_domain(m, target) for m in raw]
    return LpvIoModel(
        A=mats[: len(A)],
        B=mats[len(A):],
        delay=int(delay),
        sample_time=float(sample_time),
        n_inputs=n_inputs,
    )


@handle_numerical_errors("IO simulation")
def simulate_io(
    m: LpvIoModel,
    u: Optional[np.ndarray],
    p: SchedulingLike = None,
    init: Optional[np.ndarray] = None,
    logger: Optional[logging.Logger] = None,
) -> Simulation:
    """
    Simulate an LPV-IO model.

    Outputs are produced over the valid window of the model's timemap. Input samples before
    t = 0 are zero; past outputs before the window come from `init`.

    Args:
        m: Discrete-time IO model
        u: Input signal, shape (N, n_u) (None for models without input)
        p: Scheduling trajectory of length N
        init: Past outputs y_{s-1}, y_{s-2}, ... (most recent first, s = window start),
            shape (na, n_y); default zeros

    Returns:
        Simulation with y over the valid window

    Raises:
        DomainMismatchError: For a CT model
        DataError: On signal length or shape mismatches
        SimulationError: If the response becomes non-finite
    """
    logger = logger or logging.getLogger(__name__)
    require_dt(m.domain, "simulate_io")
    tm = m.tm
    n = signal_length(u, p)
    u = as_signal(u, n, m.nu, "u")
    ext = extend(tm, as_scheduling(p, tm, n), n)
    start, stop = ext.valid_range
    A = [a.evaluate(ext) for a in m.A]
    B = [b.evaluate(ext) for b in m.B]

    past = np.zeros((m.na, m.ny)) if init is None else as_signal(init, m.na, m.ny, "init")
    y = np.zeros((m.na + stop - start, m.ny))
    y[: m.na] = past[::-1]
    for k in range(stop - start):
        t = start + k
        acc = np.zeros(m.ny)
        for j, bj in enumerate(B):
            lag = t - j - m.delay
            if lag >= 0:
                acc += bj[k] @ u[lag]
        for i, ai in enumerate(A, start=1):
            acc -= ai[k] @ y[m.na + k - i]
        y[m.na + k] = acc
    out = y[m.na:]
    if not np.all(np.isfinite(out)):
        raise SimulationError("IO simulation diverged")
    logger.debug(f"Simulated {out.shape[0]} samples of {m}")
    return Simulation(y=out, x=None, valid_range=(start, stop))

