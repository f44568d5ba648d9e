"""
Instrumental-variable estimation of SISO LPV-ARX model sets.

The instruments are the ARX regressors with every lagged output replaced by the noise-free
simulated output of an auxiliary model. The auxiliary model is first the least-squares estimate
and then, in one refinement pass, the first IV estimate.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..errors import IdentificationError, StructureError
from ..types import Structure
from ..utils import handle_numerical_errors
from .arx import regression_problem, solve_least_squares
from .dataset import Dataset
from .idpoly import LpvIdPoly
from .options import EstimOptions
from .predictor import loss_value, prepare, residuals, simulate_idpoly
from .report import FitReport, io_report

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
REFINEMENTS = 1


def instruments(m: LpvIdPoly, d: Dataset) -> np.ndarray:
    """ARX regressors of `m` built on its own simulated output instead of the measured one."""
    sim = simulate_idpoly(m, d.u, d.p)
    y_sim = np.zeros_like(d.y)
    start, stop = sim.valid_range
    y_sim[start:stop] = sim.y
    phi, _ = regression_problem(m, prepare(m, d.with_output(y_sim)))
    return phi


def solve_iv(z: np.ndarray, phi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    theta = (Z^T Phi)^-1 Z^T Y.

    Raises:
        IdentificationError: If Z^T Phi is (numerically) singular
    """
    zp = z.T @ phi
    cond = np.linalg.cond(zp)
    if not cond < MAX_CONDITION:
        raise IdentificationError(f"Instrument correlation matrix is singular (condition number {cond:.3e})")
    return np.linalg.solve(zp, z.T @ target)


@handle_numerical_errors("lpviv")
def lpviv(
    template: LpvIdPoly,
    d: Dataset,
    opts: Optional[EstimOptions] = None,
    logger: Optional[logging.Logger] = None,
) -> FitReport:
    """
    Two-stage instrumental-variable estimate of a SISO LPV-ARX model.

    Raises:
        StructureError: If the template is not SISO or not ARX-structured
        IdentificationError: If the instruments are not correlated with the regressors
    """
    logger = logger or logging.getLogger(__name__)
    if template.nu != 1 or template.ny != 1:
        raise StructureError(
            f"lpviv handles single-input single-output templates, got {template.nu} input(s) and {template.ny} output(s)"
        )
    if template.structure is not Structure.ARX:
        raise StructureError(f"lpviv needs an ARX template, got {template.structure}")
    data = prepare(template, d)
    phi, target = regression_problem(template, data)
    theta = solve_least_squares(phi, target)
    trace = [loss_value(residuals(template.with_theta(theta), data).eps, data.skip)]
    for stage in range(1 + REFINEMENTS):
        aux = template.with_theta(theta)
        theta = solve_iv(instruments(aux, d), phi, target)
        trace.append(loss_value(residuals(template.with_theta(theta), data).eps, data.skip))
        logger.debug(f"lpviv stage {stage + 1}: V = {trace[-1]:.6e}")

    model = template.with_theta(theta)
    report = io_report(
        model, residuals(model, data).eps, data.y_window, data.skip, "lpviv",
        loss_trace=trace, n_iter=1 + REFINEMENTS,
    )
    logger.info(f"lpviv: V = {report.loss:.6e}, BFR = {report.bfr_est:.2f}%")
    return report
