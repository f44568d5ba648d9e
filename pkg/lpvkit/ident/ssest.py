"""
Prediction-error estimation of LPV-SS models in innovation form.

    x_{t+1} = A x_t + B u_t + K (y_t - y_hat_t)
    y_hat_t = C x_t + D u_t

The one-step predictor starts from x = 0 at the first instant of the scheduling window. Every
block is parametrized entry-wise with the same free/fixed rule as the IO templates, so entries
that are zero in the initial model stay zero unless their block is freed (a zero K that is not
freed gives output-error fitting).
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from attrs import define

from ..errors import DataError, DimensionError, StructureError
from ..models import LpvSsModel
from ..models.base import require_dt
from ..scheduling import TimeMap, extend_trajectory
from ..utils import handle_numerical_errors
from .dataset import Dataset
from .idpoly import IdCoefficient, ParamIndex, ThetaVector
from .optim import finite_difference_jacobian, levenberg_marquardt
from .options import EstimOptions
from .predictor import PredictorData
from .report import FitReport, safe_bfr

logger = logging.getLogger(__name__)

SS_BLOCKS = ("A", "B", "C", "D", "K")

# State norm beyond which the predictor counts as unstable.
MAX_STATE_NORM = 1e9


FreeZeros = Union[bool, Iterable[str]]


def _freed_blocks(free_zeros: FreeZeros) -> frozenset[str]:
    """Blocks whose zero entries are estimated."""
    if isinstance(free_zeros, bool):
        return frozenset(SS_BLOCKS) if free_zeros else frozenset()
    names = frozenset(free_zeros)
    unknown = sorted(names - set(SS_BLOCKS))
    if unknown:
        raise StructureError(f"Unknown state-space blocks {unknown}, expected names from {SS_BLOCKS}")
    return names


@define(frozen=True, eq=False)
class SsTemplate:
    """Entry-wise parametrization of an innovation-form LPV-SS model."""

    blocks: dict[str, IdCoefficient]
    tm: TimeMap
    sample_time: float

    @classmethod
    def from_model(cls, m: LpvSsModel, free_zeros: FreeZeros = False) -> "SsTemplate":
        """
        Parametrize `m` entry-wise.

        Args:
            free_zeros: True to estimate zero entries of every block, or the names of the blocks
                whose zero entries are estimated (e.g. ("K",) to fit an innovation gain from K = 0
                while A, B, C and D keep their zero pattern)

        Raises:
            DomainMismatchError: For a CT model
            StructureError: For unknown block names
        """
        require_dt(m.domain, "lpvssest")
        freed = _freed_blocks(free_zeros)
        tm = m.tm
        blocks = {
            name: IdCoefficient.from_pmatrix(getattr(m, name), tm, free_zeros=name in freed)
            for name in SS_BLOCKS
            if getattr(m, name) is not None
        }
        return cls(blocks=blocks, tm=tm, sample_time=m.sample_time)

    @property
    def nx(self) -> int:
        return self.blocks["A"].rows

    @property
    def nu(self) -> int:
        return self.blocks["B"].cols

    @property
    def ny(self) -> int:
        return self.blocks["C"].rows

    def layout(self) -> tuple[ParamIndex, ...]:
        out = []
        for name, c in self.blocks.items():
            for term, row, col in zip(*np.nonzero(c.free)):
                out.append(ParamIndex(name, 0, int(term), int(row), int(col)))
        return tuple(out)

    def labels(self) -> tuple[str, ...]:
        return tuple(
            f"{p.poly}[{p.row},{p.col}]*{self.blocks[p.poly].labels()[p.term]}" for p in self.layout()
        )

    def theta(self) -> ThetaVector:
        values = [c.values[c.free] for c in self.blocks.values()]
        return ThetaVector(values=np.concatenate(values) if values else np.zeros(0), layout=self.layout())

    def with_theta(self, theta: np.ndarray) -> "SsTemplate":
        theta = np.asarray(theta, dtype=float).ravel()
        n_free = sum(c.n_free for c in self.blocks.values())
        if theta.size != n_free:
            raise DimensionError(f"theta has {theta.size} entries, model has {n_free} free parameters")
        blocks = {}
        offset = 0
        for name, c in self.blocks.items():
            v = c.values.copy()
            v[c.free] = theta[offset:offset + c.n_free]
            offset += c.n_free
            blocks[name] = c.with_values(v)
        return SsTemplate(blocks=blocks, tm=self.tm, sample_time=self.sample_time)

    def to_model(self, noise_variance: Optional[np.ndarray] = None) -> LpvSsModel:
        k = self.blocks.get("K")
        return LpvSsModel(
            A=self.blocks["A"].pmatrix(),
            B=self.blocks["B"].pmatrix(),
            C=self.blocks["C"].pmatrix(),
            D=self.blocks["D"].pmatrix(),
            K=None if k is None else k.pmatrix(),
            noise_variance=noise_variance,
            sample_time=self.sample_time,
        )


def prepare_ss(tpl: SsTemplate, d: Dataset) -> PredictorData:
    """
    Basis values of every block along the dataset.

    Raises:
        DataError: On size mismatches or an empty scheduling window
    """
    if d.nu != tpl.nu or d.ny != tpl.ny:
        raise DataError(f"Dataset has {d.nu} input(s)/{d.ny} output(s), model expects {tpl.nu}/{tpl.ny}")
    ext = extend_trajectory(tpl.tm, d.p)
    start, stop = ext.valid_range
    if stop <= start:
        raise DataError(f"Dataset of {d.length} samples leaves no scheduling window")
    psi = {name: c.basis_values(ext) for name, c in tpl.blocks.items()}
    return PredictorData(y=d.y, u=d.u, start=start, stop=stop, psi=psi, skip=0)


def _groups(layout: Sequence[ParamIndex]) -> dict[str, tuple[np.ndarray, ...]]:
    """Parameter positions per block: (theta index, term, row, col) arrays."""
    out = {}
    for name in SS_BLOCKS:
        idx = [i for i, p in enumerate(layout) if p.poly == name]
        if idx:
            out[name] = (
                np.array(idx),
                np.array([layout[i].term for i in idx]),
                np.array([layout[i].row for i in idx]),
                np.array([layout[i].col for i in idx]),
            )
    return out


def ss_prediction(
    tpl: SsTemplate,
    data: PredictorData,
    with_jacobian: bool = False,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    One-step prediction errors over the window and, optionally, their sensitivities.

    Returns:
        (eps of shape (M, n_y), d eps / d theta of shape (M, n_y, P) or None). If the predictor
        state exceeds the divergence threshold, eps is all inf.
    """
    mats = {name: np.einsum("tn,nkl->tkl", data.psi[name], c.values) for name, c in tpl.blocks.items()}
    A, B, C, D = (mats[name] for name in ("A", "B", "C", "D"))
    K = mats.get("K")
    u = data.u[data.start:data.stop]
    y = data.y_window
    n = data.length
    x = np.zeros(tpl.nx)
    eps = np.zeros((n, tpl.ny))

    layout = tpl.layout()
    jac = np.zeros((n, tpl.ny, len(layout))) if with_jacobian else None
    dx = np.zeros((tpl.nx, len(layout)))
    groups = _groups(layout) if with_jacobian else {}

    def direct(name: str, k: int, signal: np.ndarray, target: np.ndarray) -> None:
        if name in groups:
            idx, term, row, col = groups[name]
            target[row, idx] += data.psi[name][k, term] * signal[col]

    for k in range(n):
        eps[k] = y[k] - C[k] @ x - D[k] @ u[k]
        if with_jacobian:
            dy = C[k] @ dx
            direct("C", k, x, dy)
            direct("D", k, u[k], dy)
            jac[k] = -dy
            dx_next = A[k] @ dx
            if K is not None:
                dx_next -= K[k] @ dy
            direct("A", k, x, dx_next)
            direct("B", k, u[k], dx_next)
            direct("K", k, eps[k], dx_next)
            dx = dx_next
        x = A[k] @ x + B[k] @ u[k]
        if K is not None:
            x = x + K[k] @ eps[k]
        if not np.linalg.norm(x) <= MAX_STATE_NORM:
            return np.full((n, tpl.ny), np.inf), jac
    return eps, jac


def residual_covariance(eps: np.ndarray) -> Optional[np.ndarray]:
    """Sample covariance of the residuals, or None if it is not positive definite."""
    xi = eps.T @ eps / eps.shape[0]
    xi = 0.5 * (xi + xi.T)
    try:
        np.linalg.cholesky(xi)
    except np.linalg.LinAlgError:
        return None
    return xi


@handle_numerical_errors("lpvssest")
def lpvssest(
    init: LpvSsModel,
    d: Dataset,
    opts: Optional[EstimOptions] = None,
    free_zeros: FreeZeros = False,
    logger: Optional[logging.Logger] = None,
) -> FitReport:
    """
    Estimate an innovation-form LPV-SS model by Levenberg-Marquardt on the one-step prediction error.

    Args:
        init: Initial model (K may be None for output-error fitting)
        d: Estimation dataset
        opts: max_iter (default 400), rel_tol, gradient, damping
        free_zeros: Also estimate entries that are zero in `init`: True for every block, or the
            names of the blocks to free (("K",) fits an innovation gain starting from K = 0)

    Returns:
        FitReport whose model carries the residual covariance as noise variance when it is
        positive definite

    Raises:
        DomainMismatchError: For a CT initial model
        StructureError: If `free_zeros` names an unknown block
        IdentificationError: If the predictor is unstable at `init`
    """
    logger = logger or logging.getLogger(__name__)
    opts = opts or EstimOptions()
    tpl = SsTemplate.from_model(init, free_zeros=free_zeros)
    data = prepare_ss(tpl, d)

    def errors(theta: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return ss_prediction(tpl.with_theta(theta), data)[0]

    def jacobian(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if opts.gradient == "finite_difference":
            return errors(theta), finite_difference_jacobian(errors, theta)
        with np.errstate(all="ignore"):
            return ss_prediction(tpl.with_theta(theta), data, with_jacobian=True)

    result = levenberg_marquardt(
        residual_fn=errors,
        jacobian_fn=jacobian,
        theta0=tpl.theta().values,
        max_iter=opts.iterations(gradient_search=True),
        rel_tol=opts.rel_tol,
        damping=opts.damping,
        logger=logger,
    )
    fitted = tpl.with_theta(result.theta)
    eps = errors(result.theta)
    xi = residual_covariance(eps)
    if xi is None:
        logger.info("Residual covariance is not positive definite; the estimate carries no noise variance")
    y = data.y_window
    report = FitReport(
        model=fitted.to_model(xi),
        theta=fitted.theta(),
        labels=fitted.labels(),
        loss_trace=result.loss_trace,
        loss=result.loss,
        bfr_est=safe_bfr(y, y - eps),
        method="lpvssest",
        n_iter=result.n_iter,
        converged=result.converged,
        noise_variance=eps.T @ eps / eps.shape[0],
    )
    logger.info(
        f"lpvssest: V {result.loss_trace[0]:.6e} -> {report.loss:.6e} in {result.n_iter} iteration(s), "
        f"BFR = {report.bfr_est:.2f}%"
    )
    return report
