"""Estimation results and their text/CSV export."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from attrs import define, field

from ..errors import DataError
from ..models import LpvSsModel, save_model
from .idpoly import LpvIdPoly, ThetaVector
from .metrics import bfr

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class FitReport:
    """
    Outcome of one estimator run.

    Attributes:
        model: Estimated template (IO) or innovation-form SS model
        theta: Estimated free parameters with their layout labels
        loss_trace: Loss after initialization and after every accepted iteration
        loss: Final mean squared prediction error
        bfr_est: One-step-ahead BFR on the estimation data, percent
        method: Estimator name
        n_iter: Iterations performed
        converged: Whether the stopping tolerance was met (False when the cap was hit)
        regularization: Lambda used by a regularized regression, else None
        noise_variance: Residual covariance of an SS estimate
    """

    model: Union[LpvIdPoly, LpvSsModel]
    theta: ThetaVector
    labels: tuple[str, ...]
    loss_trace: tuple[float, ...] = field(converter=tuple)
    loss: float
    bfr_est: float
    method: str
    n_iter: int = 0
    converged: bool = True
    regularization: Optional[float] = None
    noise_variance: Optional[np.ndarray] = None

    @property
    def structure(self) -> str:
        return str(self.model.structure) if isinstance(self.model, LpvIdPoly) else "SS"

    def to_text(self) -> str:
        lines = [
            f"method: {self.method}",
            f"structure: {self.structure}",
            f"parameters: {len(self.theta.values)}",
            f"iterations: {self.n_iter}",
            f"converged: {self.converged}",
            f"loss: {self.loss!r}",
            f"bfr_est: {self.bfr_est:.4f}",
        ]
        if self.regularization is not None:
            lines.append(f"lambda: {self.regularization!r}")
        lines.append("theta:")
        lines.extend(f"  {label} = {value!r}" for label, value in zip(self.labels, self.theta.values))
        if isinstance(self.model, LpvIdPoly):
            lines.append("model:")
            lines.append(self.model.describe())
        else:
            lines.append(f"model: {self.model}")
        return "\n".join(lines) + "\n"

    def loss_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iteration": np.arange(len(self.loss_trace)), "loss": self.loss_trace})

    def save(self, out_dir: Union[str, Path]) -> None:
        """Write report.txt, loss_trace.csv and model.json into `out_dir`."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(self.to_text(), encoding="utf-8")
        self.loss_frame().to_csv(out / "loss_trace.csv", index=False, float_format="%.17g")
        save_model(self.model, out / "model.json")
        logger.info(f"Wrote {self.method} results to {out}")


def io_report(
    model: LpvIdPoly,
    eps: np.ndarray,
    y_window: np.ndarray,
    skip: int,
    method: str,
    loss_trace,
    n_iter: int = 0,
    converged: bool = True,
    regularization: Optional[float] = None,
) -> FitReport:
    """Report for an IO estimate whose prediction errors over the window are `eps`."""
    theta = model.theta()
    kept = eps[skip:]
    return FitReport(
        model=model,
        theta=theta,
        labels=tuple(p.label(model) for p in theta.layout),
        loss_trace=loss_trace,
        loss=float(np.sum(kept * kept) / kept.shape[0]),
        bfr_est=safe_bfr(y_window[skip:], y_window[skip:] - kept),
        method=method,
        n_iter=n_iter,
        converged=converged,
        regularization=regularization,
    )


def safe_bfr(y: np.ndarray, y_hat: np.ndarray) -> float:
    """BFR, or NaN for a constant reference signal."""
    try:
        return bfr(y, y_hat)
    except DataError:
        return float("nan")
