"""
Levenberg-Marquardt minimization of a mean squared prediction error.

The problem is given as a residual function returning the prediction errors kept in the loss,
shape (n_samples, n_outputs), and a Jacobian function returning those errors together with
their derivative, shape (n_samples, n_outputs, n_params). The loss is
V = sum ||eps_t||^2 / n_samples.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np
from attrs import define, field
from scipy import linalg

from ..errors import IdentificationError

logger = logging.getLogger(__name__)

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

MAX_DAMPING = 1e20
SCALE_FLOOR = 1e-12
FD_STEP = 1e-5


@define(frozen=True, eq=False)
class LmResult:
    """
    Outcome of a Levenberg-Marquardt run.

    Attributes:
        theta: Best parameters found
        loss: Loss at `theta`
        loss_trace: Initial loss followed by the loss after every accepted step
        n_iter: Iterations performed
        converged: Whether the step-size criterion was met
    """

    theta: np.ndarray
    loss: float
    loss_trace: tuple[float, ...] = field(converter=tuple)
    n_iter: int
    converged: bool


def mean_squared(eps: np.ndarray) -> float:
    """sum ||eps_t||^2 / n_samples; inf for non-finite errors."""
    with np.errstate(all="ignore"):
        value = float(np.sum(eps * eps) / eps.shape[0])
    return value if np.isfinite(value) else float("inf")


def finite_difference_jacobian(fn: ResidualFn, theta: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central-difference derivative of `fn`, step h_i = step * max(1, |theta_i|)."""
    theta = np.asarray(theta, dtype=float)
    base = fn(theta)
    jac = np.empty(base.shape + (theta.size,))
    for i in range(theta.size):
        h = step * max(1.0, abs(theta[i]))
        plus, minus = theta.copy(), theta.copy()
        plus[i] += h
        minus[i] -= h
        jac[..., i] = (fn(plus) - fn(minus)) / (2.0 * h)
    return jac


def _column_scale(J: np.ndarray) -> np.ndarray:
    """Diagonal of J^T J, floored so that parameters without influence are still damped."""
    d = np.sum(J * J, axis=0)
    top = float(np.max(d)) if d.size else 0.0
    return np.maximum(d, SCALE_FLOOR * top) if top > 0 else np.ones_like(d)


def _damped_step(J: np.ndarray, r: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Solution of min ||J d + r||^2 + sum weights_i d_i^2."""
    stacked = np.vstack([J, np.diag(np.sqrt(weights))])
    rhs = np.concatenate([-r, np.zeros(weights.size)])
    step, *_ = linalg.lstsq(stacked, rhs)
    return step


def _is_small(step: np.ndarray, theta: np.ndarray, rel_tol: float) -> bool:
    return bool(np.linalg.norm(step) <= rel_tol * (np.linalg.norm(theta) + rel_tol))


def levenberg_marquardt(
    residual_fn: ResidualFn,
    jacobian_fn: JacobianFn,
    theta0: np.ndarray,
    max_iter: int,
    rel_tol: float = 1e-6,
    damping: float = 1e-3,
    logger: Optional[logging.Logger] = None,
) -> LmResult:
    """
    Damped Gauss-Newton search with Marquardt's diagonal scaling.

    Each iteration solves min ||J d + eps||^2 + mu d^T diag(J^T J) d, which makes the step
    independent of the parameter scaling. A step is accepted only if the loss decreases; mu is
    divided by 10 on acceptance and multiplied by 10 on rejection. The search stops when a step
    is smaller than rel_tol * (||theta|| + rel_tol), when no damping up to 1e20 gives a
    decrease or after `max_iter` iterations.

    A search that finds no decreasing step counts as converged only when the undamped
    Gauss-Newton step is small as well; otherwise it has stalled and is reported as not
    converged.

    Args:
        residual_fn: theta -> prediction errors kept in the loss
        jacobian_fn: theta -> (prediction errors, Jacobian)
        theta0: Initial parameters
        max_iter: Iteration cap
        rel_tol: Relative step-size tolerance
        damping: Initial mu

    Raises:
        IdentificationError: If the loss at theta0 is not finite
    """
    logger = logger or logging.getLogger(__name__)
    theta = np.array(theta0, dtype=float)
    eps, jac = jacobian_fn(theta)
    loss = mean_squared(eps)
    if not np.isfinite(loss):
        raise IdentificationError("Prediction error is not finite at the initial parameters")
    trace = [loss]
    n_params = theta.size
    if n_params == 0:
        return LmResult(theta=theta, loss=loss, loss_trace=trace, n_iter=0, converged=True)

    r = eps.reshape(-1)
    J = jac.reshape(r.size, n_params)
    mu = damping
    converged = False
    n_iter = 0
    while n_iter < max_iter:
        n_iter += 1
        scale = _column_scale(J)
        accepted = False
        while mu <= MAX_DAMPING:
            step = _damped_step(J, r, mu * scale)
            small = _is_small(step, theta, rel_tol)
            candidate = theta + step
            new_loss = mean_squared(residual_fn(candidate))
            if new_loss < loss:
                theta, loss = candidate, new_loss
                mu /= 10.0
                accepted = True
                break
            if small:
                break
            mu *= 10.0
        if not accepted:
            converged = _is_small(_damped_step(J, r, np.zeros(n_params)), theta, rel_tol)
            if converged:
                logger.debug(f"LM iteration {n_iter}: at a stationary point, stopping")
            else:
                logger.info(f"LM stalled at iteration {n_iter}: no decreasing step up to mu = {mu:.1e}")
            break
        trace.append(loss)
        logger.debug(f"LM iteration {n_iter}: V = {loss:.6e}, mu = {mu:.1e}")
        if small:
            converged = True
            break
        eps, jac = jacobian_fn(theta)
        r = eps.reshape(-1)
        J = jac.reshape(r.size, n_params)
    if not converged and n_iter >= max_iter:
        logger.info(f"LM reached the iteration cap ({max_iter}) at V = {loss:.6e}")
    return LmResult(theta=theta, loss=loss, loss_trace=trace, n_iter=n_iter, converged=converged)
