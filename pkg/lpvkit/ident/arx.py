"""
Linear-regression estimation of LPV-ARX model sets, optionally Tikhonov-regularized.

For an ARX template the prediction error is affine in the free parameters,
eps(theta) = Phi theta - Y, so the estimate is a single least-squares solve.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import IdentificationError, RankDeficientError, StructureError
from ..types import Structure
from ..utils import handle_numerical_errors
from .dataset import Dataset
from .idpoly import LpvIdPoly
from .options import EstimOptions, Regularization
from .predictor import PredictorData, coefficient_values, loss_value, prepare, residuals, sensitivity
from .report import FitReport, io_report

logger = logging.getLogger(__name__)


def regression_problem(m: LpvIdPoly, data: PredictorData) -> tuple[np.ndarray, np.ndarray]:
    """
    Regression matrix and target of an ARX template over the samples kept in the loss.

    Returns:
        (Phi, Y) with one row per kept sample and output channel
    """
    res, jac = sensitivity(m, data)
    skip = data.skip
    eps = res.eps[skip:].reshape(-1)
    phi = jac[skip:].reshape(-1, jac.shape[2])
    return phi, phi @ m.theta().values - eps


def solve_least_squares(phi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    Least-squares solution through a column-pivoted QR factorization.

    Raises:
        RankDeficientError: If Phi does not have full column rank
    """
    n_params = phi.shape[1]
    if n_params == 0:
        return np.zeros(0)
    q, r, piv = linalg.qr(phi, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(phi.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < n_params:
        raise RankDeficientError(rank, n_params)
    theta = np.empty(n_params)
    theta[piv] = linalg.solve_triangular(r, q.T @ target)
    return theta


def solve_tikhonov(phi: np.ndarray, target: np.ndarray, lam: float, weight: np.ndarray) -> np.ndarray:
    """argmin ||Y - Phi theta||^2 + lam ||W theta||^2 via the stacked least-squares problem."""
    stacked = np.vstack([phi, np.sqrt(lam) * weight])
    rhs = np.concatenate([target, np.zeros(weight.shape[0])])
    theta, *_ = linalg.lstsq(stacked, rhs)
    return theta


def gcv_scores(phi: np.ndarray, target: np.ndarray, weight: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """
    Generalized cross-validation score N ||(I - H) Y||^2 / tr(I - H)^2 for every lambda in `grid`.

    Raises:
        IdentificationError: If W is singular
    """
    try:
        phi_w = linalg.solve(weight.T, phi.T).T
    except linalg.LinAlgError as e:
        raise IdentificationError("GCV needs an invertible regularization weight") from e
    n = phi.shape[0]
    u, s, _ = linalg.svd(phi_w, full_matrices=False)
    beta = u.T @ target
    outside = float(target @ target - beta @ beta)
    scores = np.empty(grid.size)
    for i, lam in enumerate(grid):
        f = s**2 / (s**2 + lam)
        resid = outside + float(np.sum(((1.0 - f) * beta) ** 2))
        scores[i] = n * resid / (n - np.sum(f)) ** 2
    return scores


def solve_regularized(
    phi: np.ndarray,
    target: np.ndarray,
    reg: Regularization,
    logger: Optional[logging.Logger] = None,
) -> tuple[np.ndarray, Optional[float]]:
    """
    Solve the regression with the configured regularization.

    Returns:
        (theta, lambda used or None)
    """
    logger = logger or logging.getLogger(__name__)
    if not reg.active:
        return solve_least_squares(phi, target), None
    weight = reg.weight_matrix(phi.shape[1])
    lam = reg.lam
    if reg.kind == "gcv":
        grid = reg.grid()
        scores = gcv_scores(phi, target, weight, grid)
        lam = float(grid[int(np.argmin(scores))])
        logger.debug(f"GCV picked lambda = {lam:.3e} (score {scores.min():.6e})")
    return solve_tikhonov(phi, target, lam, weight), lam


@handle_numerical_errors("lpvarx")
def lpvarx(
    template: LpvIdPoly,
    d: Dataset,
    opts: Optional[EstimOptions] = None,
    logger: Optional[logging.Logger] = None,
) -> FitReport:
    """
    Estimate an LPV-ARX model by (regularized) linear least squares.

    Args:
        template: ARX-structured template; fixed entries keep their values
        d: Estimation dataset
        opts: Estimator options (only `regularization` is used)

    Returns:
        FitReport with the estimated model

    Raises:
        StructureError: If the template is not ARX-structured
        RankDeficientError: If the regression is rank deficient and no regularization is used
    """
    logger = logger or logging.getLogger(__name__)
    opts = opts or EstimOptions()
    if template.structure is not Structure.ARX:
        raise StructureError(f"lpvarx needs an ARX template, got {template.structure}")
    data = prepare(template, d)
    phi, target = regression_problem(template, data)
    theta, lam = solve_regularized(phi, target, opts.regularization, logger)
    model = template.with_theta(theta)
    res = residuals(model, data, coefficient_values(model, data))
    report = io_report(
        model, res.eps, data.y_window, data.skip, "lpvarx",
        loss_trace=[loss_value(res.eps, data.skip)], n_iter=1, regularization=lam,
    )
    logger.info(f"lpvarx: {template.n_params} parameters, V = {report.loss:.6e}, BFR = {report.bfr_est:.2f}%")
    return report
