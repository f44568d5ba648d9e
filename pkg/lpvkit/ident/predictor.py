"""
One-step-ahead predictor of LPV-IO model sets and its parameter sensitivities.

The prediction error is computed through the auxiliary signals

    y_proc = F^-1 B q^-delay u        (process output)
    v      = A y - y_proc             (noise-model output)
    w      = D v
    eps    = C^-1 w

with every coefficient evaluated at the current instant. All auxiliary signals and
sensitivities are zero before the first instant of the scheduling window; measured signals are
used wherever they exist. The first `max_lag` window samples are excluded from the loss.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np
from attrs import define

from ..errors import DataError, StructureError
from ..models import Simulation
from ..scheduling import SchedulingTrajectory, extend_trajectory
from ..types import TimeDomain
from .dataset import Dataset
from .idpoly import POLYS, LpvIdPoly, ParamIndex

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class PredictorData:
    """Quantities of one dataset that do not depend on the parameter values."""

    y: np.ndarray
    u: np.ndarray
    start: int
    stop: int
    psi: dict
    skip: int

    @property
    def length(self) -> int:
        """Number of window samples."""
        return self.stop - self.start

    @property
    def y_window(self) -> np.ndarray:
        return self.y[self.start:self.stop]

    def lagged(self, signal: np.ndarray, lag: int) -> np.ndarray:
        """Measured signal delayed by `lag` over the window, zero before t = 0."""
        out = np.zeros((self.length, signal.shape[1]))
        first = max(0, lag - self.start)
        if first < self.length:
            out[first:] = signal[self.start + first - lag:self.stop - lag]
        return out


@define(frozen=True, eq=False)
class Residuals:
    """Prediction error and auxiliary signals over the window."""

    eps: np.ndarray
    y_proc: np.ndarray
    v: np.ndarray


@define(frozen=True, eq=False)
class Prediction:
    """
    One-step-ahead prediction.

    Attributes:
        y_hat: Predicted outputs over the window, shape (M, n_y)
        eps: Prediction errors y - y_hat over the window
        valid_range: Source instants covered
        skip: Leading window samples excluded from the loss
    """

    y_hat: np.ndarray
    eps: np.ndarray
    valid_range: tuple[int, int]
    skip: int

    @property
    def loss(self) -> float:
        return loss_value(self.eps, self.skip)


def prepare(m: LpvIdPoly, d: Dataset) -> PredictorData:
    """
    Evaluate the template's basis functions along the dataset.

    Raises:
        DataError: If the dataset is too short, lacks a scheduling channel or does not fit the
            template's input/output sizes
    """
    if m.domain is not TimeDomain.DT:
        raise StructureError("Prediction-error identification needs a discrete-time template")
    if d.ny != m.ny or d.nu != m.nu:
        raise DataError(f"Dataset has {d.nu} input(s)/{d.ny} output(s), template expects {m.nu}/{m.ny}")
    ext = extend_trajectory(m.tm, d.p)
    start, stop = ext.valid_range
    skip = m.max_lag
    if stop - start <= skip:
        raise DataError(
            f"Dataset of {d.length} samples is too short for a predictor reaching {skip} samples back"
        )
    psi = {
        (name, lag): c.basis_values(ext)
        for name in POLYS
        for lag, c in enumerate(m.poly(name))
    }
    return PredictorData(y=d.y, u=d.u, start=start, stop=stop, psi=psi, skip=skip)


def loss_value(eps: np.ndarray, skip: int) -> float:
    """Mean squared prediction error norm over the samples after `skip`."""
    kept = eps[skip:]
    return float(np.sum(kept * kept) / kept.shape[0])


def coefficient_values(m: LpvIdPoly, data: PredictorData) -> dict[str, list[np.ndarray]]:
    """Every coefficient evaluated along the window, (M, rows, cols) per lag."""
    return {
        name: [np.einsum("tn,nkl->tkl", data.psi[(name, lag)], c.values) for lag, c in enumerate(m.poly(name))]
        for name in POLYS
    }


def _apply(X: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-instant product X_t x_t for x of shape (M, l) or (M, l, P)."""
    return np.einsum("tkl,tl...->tk...", X, x)


def _shift(x: np.ndarray, lag: int) -> np.ndarray:
    """Auxiliary signal delayed by `lag` window samples, zero before the window."""
    out = np.zeros_like(x)
    if lag < x.shape[0]:
        out[lag:] = x[: x.shape[0] - lag]
    return out


def inverse_filter(x: np.ndarray, coeffs: Sequence[np.ndarray]) -> np.ndarray:
    """Solve out_t + sum_i X_i(t) out_{t-i} = x_t for a monic polynomial with tail `coeffs`."""
    out = np.array(x, dtype=float, copy=True)
    for k in range(out.shape[0]):
        for i, X in enumerate(coeffs, start=1):
            if k >= i:
                out[k] -= X[k] @ out[k - i]
    return out


def forward_filter(x: np.ndarray, coeffs: Sequence[np.ndarray]) -> np.ndarray:
    """out_t = x_t + sum_i X_i(t) x_{t-i}."""
    out = np.array(x, dtype=float, copy=True)
    for i, X in enumerate(coeffs, start=1):
        out += _apply(X, _shift(x, i))
    return out


def process_input(m: LpvIdPoly, data: PredictorData, values: dict) -> np.ndarray:
    """sum_j B_j(t) u_{t-j-delay}."""
    out = np.zeros((data.length, m.ny))
    for j, B in enumerate(values["B"]):
        out += _apply(B, data.lagged(data.u, j + m.delay))
    return out


def residuals(m: LpvIdPoly, data: PredictorData, values: Optional[dict] = None) -> Residuals:
    """Prediction errors and auxiliary signals for the template's current coefficient values."""
    values = values or coefficient_values(m, data)
    y_proc = inverse_filter(process_input(m, data, values), values["F"][1:])
    ay = data.y_window.copy()
    for i, A in enumerate(values["A"][1:], start=1):
        ay += _apply(A, data.lagged(data.y, i))
    v = ay - y_proc
    w = forward_filter(v, values["D"][1:])
    eps = inverse_filter(w, values["C"][1:])
    return Residuals(eps=eps, y_proc=y_proc, v=v)


def direct_regressors(
    m: LpvIdPoly,
    data: PredictorData,
    res: Residuals,
    layout: Sequence[ParamIndex],
) -> dict[str, np.ndarray]:
    """
    Partial derivatives of the auxiliary recursions with respect to each parameter, holding
    every lagged auxiliary signal fixed.

    Returns:
        Arrays of shape (M, n_y, P): 'proc' (into y_proc), 'A' (into v), 'D' (into w),
        'C' (into eps)
    """
    shape = (data.length, m.ny, len(layout))
    out = {key: np.zeros(shape) for key in ("proc", "A", "D", "C")}
    for idx, p in enumerate(layout):
        psi = data.psi[(p.poly, p.lag)][:, p.term]
        if p.poly == "A":
            out["A"][:, p.row, idx] = psi * data.lagged(data.y, p.lag)[:, p.col]
        elif p.poly == "B":
            out["proc"][:, p.row, idx] = psi * data.lagged(data.u, p.lag + m.delay)[:, p.col]
        elif p.poly == "F":
            out["proc"][:, p.row, idx] = -psi * _shift(res.y_proc, p.lag)[:, p.col]
        elif p.poly == "D":
            out["D"][:, p.row, idx] = psi * _shift(res.v, p.lag)[:, p.col]
        else:
            out["C"][:, p.row, idx] = -psi * _shift(res.eps, p.lag)[:, p.col]
    return out


def pseudo_linear_regressor(m: LpvIdPoly, data: PredictorData, res: Residuals, layout) -> np.ndarray:
    """d eps / d theta with all lagged auxiliary signals frozen at their current estimates."""
    g = direct_regressors(m, data, res, layout)
    return g["A"] - g["proc"] + g["D"] + g["C"]


def sensitivity(m: LpvIdPoly, data: PredictorData, values: Optional[dict] = None) -> tuple[Residuals, np.ndarray]:
    """
    Prediction errors and their exact Jacobian d eps / d theta, shape (M, n_y, P).

    The sensitivities follow the same recursions as the auxiliary signals.
    """
    values = values or coefficient_values(m, data)
    res = residuals(m, data, values)
    g = direct_regressors(m, data, res, m.layout())
    d_proc = inverse_filter(g["proc"], values["F"][1:])
    d_v = g["A"] - d_proc
    d_w = forward_filter(d_v, values["D"][1:]) + g["D"]
    d_eps = inverse_filter(d_w + g["C"], values["C"][1:])
    return res, d_eps


def predict(m: LpvIdPoly, d: Dataset, theta: Optional[np.ndarray] = None) -> Prediction:
    """
    One-step-ahead prediction y_hat = y - eps.

    Args:
        m: Identification template or estimate
        d: Dataset
        theta: Free parameter values (default: those stored in `m`)

    Returns:
        Prediction over the scheduling window of the template's timemap
    """
    if theta is not None:
        m = m.with_theta(theta)
    data = prepare(m, d)
    res = residuals(m, data)
    return Prediction(
        y_hat=data.y_window - res.eps,
        eps=res.eps,
        valid_range=(data.start, data.stop),
        skip=data.skip,
    )


def simulate_idpoly(m: LpvIdPoly, u: np.ndarray, p: SchedulingTrajectory) -> Simulation:
    """
    Noise-free simulation of the process part, A y = F^-1 B q^-delay u.

    Returns:
        Simulation over the scheduling window (outputs before the window are zero)
    """
    u = np.asarray(u, dtype=float)
    u = u[:, None] if u.ndim == 1 else u
    d = Dataset(u=u, y=np.zeros((u.shape[0], m.ny)), p=p)
    data = prepare(m, d)
    values = coefficient_values(m, data)
    y_proc = inverse_filter(process_input(m, data, values), values["F"][1:])
    y = inverse_filter(y_proc, values["A"][1:])
    return Simulation(y=y, x=None, valid_range=(data.start, data.stop))
