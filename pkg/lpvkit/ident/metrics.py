"""Fit metrics."""

import numpy as np

from ..errors import DataError


def bfr(y, y_hat) -> float:
    """
    Best fit rate in percent, 100 * max(0, 1 - ||y - y_hat|| / ||y - mean(y)||).

    Multi-output signals use the Frobenius norm with per-channel means.

    Raises:
        DataError: If the lengths differ or y is constant
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape:
        raise DataError(f"BFR needs equal shapes, got {y.shape} and {y_hat.shape}")
    spread = np.linalg.norm(y - y.mean(axis=0))
    if spread == 0:
        raise DataError("BFR is undefined for a constant signal")
    return float(100.0 * max(0.0, 1.0 - np.linalg.norm(y - y_hat) / spread))
