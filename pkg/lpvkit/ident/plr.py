"""
Pseudo-linear regression for LPV-ARMAX, LPV-OE and LPV-BJ model sets.

Each iteration freezes the unmeasured lagged signals of the predictor (past prediction errors
for C, past noise-model outputs for D, past simulated process outputs for F) at their current
estimates. The prediction error is then affine in theta and the next estimate is a least-squares
solve. ARMAX regresses on lagged residuals, OE on lagged simulated outputs, BJ on both with the
D polynomial acting on the noise-model output.
"""

from __future__ import annotations

import logging
from typing import Optional, Union

import numpy as np

from ..errors import StructureError
from ..types import Structure
from ..utils import handle_numerical_errors
from .arx import lpvarx, solve_regularized
from .dataset import Dataset
from .idpoly import LpvIdPoly
from .options import EstimOptions
from .predictor import loss_value, prepare, pseudo_linear_regressor, residuals
from .report import FitReport, io_report

logger = logging.getLogger(__name__)

# Template structures each estimator accepts; nested sets degenerate to their parent.
PLR_STRUCTURES = {
    Structure.ARMAX: (Structure.ARMAX, Structure.ARX),
    Structure.OE: (Structure.OE,),
    Structure.BJ: (Structure.BJ, Structure.OE),
}

# Loss growth over the best loss seen that stops the iteration.
DIVERGENCE_FACTOR = 10.0
# Losses below this fraction of the output power are never treated as divergence.
LOSS_FLOOR = 1e-12


def arx_initialization(
    template: LpvIdPoly,
    d: Dataset,
    opts: EstimOptions,
    logger: Optional[logging.Logger] = None,
) -> LpvIdPoly:
    """Template with start values from a least-squares fit of its ARX part."""
    arx = lpvarx(template.arx_part(), d, opts, logger=logger)
    return template.initialized_from(arx.model)


def _loss(m: LpvIdPoly, data) -> float:
    with np.errstate(all="ignore"):
        value = loss_value(residuals(m, data).eps, data.skip)
    return value if np.isfinite(value) else float("inf")


@handle_numerical_errors("pseudo-linear regression")
def plr_estimate(
    kind: Union[Structure, str],
    template: LpvIdPoly,
    d: Dataset,
    opts: Optional[EstimOptions] = None,
    init: Optional[LpvIdPoly] = None,
    logger: Optional[logging.Logger] = None,
) -> FitReport:
    """
    Pseudo-linear regression estimate.

    Args:
        kind: 'armax', 'oe' or 'bj'; the template must have that structure or a nested one
            (ARX for ARMAX, OE for BJ)
        template: Model set; fixed entries keep their values
        d: Estimation dataset
        opts: max_iter (default 100), rel_tol, regularization
        init: Estimate to start from (default: least-squares fit of the template's ARX part)

    Returns:
        FitReport of the iterate with the lowest loss

    Raises:
        StructureError: If `kind` is not a pseudo-linear structure or does not match the template
    """
    logger = logger or logging.getLogger(__name__)
    opts = opts or EstimOptions()
    kind = Structure(kind.lower()) if isinstance(kind, str) else kind
    if kind not in PLR_STRUCTURES:
        raise StructureError(f"Pseudo-linear regression handles ARMAX, OE and BJ, not {kind}")
    if template.structure not in PLR_STRUCTURES[kind]:
        raise StructureError(f"Template has {template.structure} structure, expected {kind}")

    m = template.initialized_from(init) if init is not None else arx_initialization(template, d, opts, logger)
    data = prepare(m, d)
    layout = m.layout()
    loss = _loss(m, data)
    floor = LOSS_FLOOR * float(np.mean(data.y_window**2))
    trace = [loss]
    best_model, best_loss = m, loss
    converged = False
    n_iter = 0
    for n_iter in range(1, opts.iterations(gradient_search=False) + 1):
        theta = m.theta().values
        res = residuals(m, data)
        g = pseudo_linear_regressor(m, data, res, layout)[data.skip:]
        phi = g.reshape(-1, len(layout))
        target = phi @ theta - res.eps[data.skip:].reshape(-1)
        new_theta, _ = solve_regularized(phi, target, opts.regularization, logger)
        m = m.with_theta(new_theta)
        loss = _loss(m, data)
        trace.append(loss)
        logger.debug(f"PLR {kind} iteration {n_iter}: V = {loss:.6e}")
        if loss < best_loss:
            best_model, best_loss = m, loss
        if loss > DIVERGENCE_FACTOR * best_loss + floor:
            logger.warning(f"PLR {kind} diverging at iteration {n_iter}; returning the best iterate")
            break
        if np.linalg.norm(new_theta - theta) <= opts.rel_tol * (np.linalg.norm(theta) + opts.rel_tol):
            converged = True
            break

    eps = residuals(best_model, data).eps
    report = io_report(
        best_model, eps, data.y_window, data.skip, f"lpv{kind.value}",
        loss_trace=trace, n_iter=n_iter, converged=converged,
    )
    logger.info(f"lpv{kind.value}: V = {report.loss:.6e} after {n_iter} iteration(s), BFR = {report.bfr_est:.2f}%")
    return report


def lpvarmax(template: LpvIdPoly, d: Dataset, opts: Optional[EstimOptions] = None, **kwargs) -> FitReport:
    """LPV-ARMAX estimate by pseudo-linear regression."""
    return plr_estimate(Structure.ARMAX, template, d, opts, **kwargs)


def lpvoe(template: LpvIdPoly, d: Dataset, opts: Optional[EstimOptions] = None, **kwargs) -> FitReport:
    """LPV-OE estimate by pseudo-linear regression."""
    return plr_estimate(Structure.OE, template, d, opts, **kwargs)


def lpvbj(template: LpvIdPoly, d: Dataset, opts: Optional[EstimOptions] = None, **kwargs) -> FitReport:
    """LPV-BJ estimate by pseudo-linear regression."""
    return plr_estimate(Structure.BJ, template, d, opts, **kwargs)
