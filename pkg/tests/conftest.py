"""Shared fixtures: scheduling trajectories, known LPV-IO models and dataset generation."""

from typing import Optional

import numpy as np
import pytest

from lpvkit.ident import Dataset, LpvIdPoly, lpvidpoly
from lpvkit.ident.predictor import coefficient_values, forward_filter, inverse_filter, prepare, process_input
from lpvkit.pmatrix import preal, pshift
from lpvkit.scheduling import SchedulingTrajectory

N_SAMPLES = 400


def shifted_p(k: int):
    return pshift(preal("p"), k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def schedule(rng) -> SchedulingTrajectory:
    return SchedulingTrajectory(rng.uniform(-0.5, 0.5, N_SAMPLES), ("p",))


@pytest.fixture
def white_input(rng) -> np.ndarray:
    return rng.standard_normal(N_SAMPLES)


@pytest.fixture
def truth_models() -> dict[str, LpvIdPoly]:
    """One model per structure, all sharing the lag structure of the benchmark templates."""
    eye = np.eye(1)
    a = [eye, -1.5 + 0.1 * shifted_p(-1), 0.7 + 0.05 * shifted_p(-2)]
    b = [0.5, 0.3 + 0.1 * shifted_p(-1), 0.2 - 0.05 * shifted_p(-2)]
    c = [eye, 0.5]
    d = [eye, -0.3]
    return {
        "ARX": lpvidpoly(A=a, B=b),
        "ARMAX": lpvidpoly(A=a, B=b, C=c),
        "OE": lpvidpoly(B=b, F=a),
        "BJ": lpvidpoly(B=b, C=c, D=d, F=a),
    }


@pytest.fixture
def templates() -> dict[str, LpvIdPoly]:
    """Model sets with every coefficient shaped 1 + p_{k-i}."""
    eye = np.eye(1)
    a = [eye, 1 + shifted_p(-1), 1 + shifted_p(-2)]
    b = [1.0, 1 + shifted_p(-1), 1 + shifted_p(-2)]
    c = [eye, 1.0]
    return {
        "ARX": lpvidpoly(A=a, B=b),
        "ARMAX": lpvidpoly(A=a, B=b, C=c),
        "OE": lpvidpoly(B=b, F=a),
        "BJ": lpvidpoly(B=b, C=c, D=c, F=a),
    }


def generate(model: LpvIdPoly, u, p: SchedulingTrajectory, e: Optional[np.ndarray] = None) -> Dataset:
    """
    Data of A y = F^-1 B q^-delay u + D^-1 C e; outputs before the scheduling window are zero.
    """
    u = np.asarray(u, dtype=float).reshape(p.length, -1)
    blank = Dataset(u=u, y=np.zeros((p.length, model.ny)), p=p)
    data = prepare(model, blank)
    values = coefficient_values(model, data)
    y_window = inverse_filter(process_input(model, data, values), values["F"][1:])
    if e is not None:
        e = np.asarray(e, dtype=float).reshape(p.length, -1)[data.start:data.stop]
        y_window = y_window + inverse_filter(forward_filter(e, values["C"][1:]), values["D"][1:])
    y_window = inverse_filter(y_window, values["A"][1:])
    y = np.zeros((p.length, model.ny))
    y[data.start:data.stop] = y_window
    return Dataset(u=u, y=y, p=p)


@pytest.fixture
def make_dataset():
    return generate
