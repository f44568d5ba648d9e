"""Excitation and noise signals."""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np

from ..errors import DataError

SeedLike = Union[int, np.random.SeedSequence, None]


def gen_multisine(
    n: int,
    sample_time: float,
    n_freq: int = 10,
    band: float = 0.75,
    amplitude: float = 0.25,
    seed: SeedLike = 0,
) -> np.ndarray:
    """
    Random-phase multisine with `n_freq` equally spaced lines in (0, band * f_Nyquist].

    Line k sits at k * band * f_Nyquist / n_freq; the phases are uniform on [0, 2 pi). The signal
    is scaled so that its largest absolute sample equals `amplitude`.

    Raises:
        DataError: If n_freq < 1 or band is outside (0, 1]
    """
    if n_freq < 1:
        raise DataError(f"A multisine needs at least one frequency, got {n_freq}")
    if not 0 < band <= 1:
        raise DataError(f"Multisine band must lie in (0, 1], got {band}")
    rng = np.random.default_rng(seed)
    nyquist = 0.5 / sample_time
    freqs = np.arange(1, n_freq + 1) * band * nyquist / n_freq
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_freq)
    t = np.arange(n) * sample_time
    u = np.sin(2.0 * np.pi * np.outer(t, freqs) + phases).sum(axis=1)
    peak = np.max(np.abs(u))
    return u * (amplitude / peak) if peak > 0 else u


def add_noise_snr(y: np.ndarray, snr_db: Optional[float], seed: SeedLike = 0) -> np.ndarray:
    """
    y plus white Gaussian noise of variance var(y) / 10^(snr_db / 10).

    `snr_db` of None or +inf returns an unchanged copy.

    Raises:
        DataError: If y is constant
    """
    y = np.asarray(y, dtype=float)
    if snr_db is None or math.isinf(snr_db):
        return y.copy()
    power = float(np.var(y))
    if power == 0:
        raise DataError("Cannot set an SNR on a constant signal")
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return y + sigma * np.random.default_rng(seed).standard_normal(y.shape)
