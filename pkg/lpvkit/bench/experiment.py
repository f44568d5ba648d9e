"""
Unbalanced-disc identification study.

Four estimation datasets (one per SNR) and one noise-free validation dataset are generated from
the nonlinear disc. For every SNR an LPV-ARX model is fitted by linear regression, LPV-ARMAX and
LPV-OE models by gradient search started from the ARX fit, and an LPV-BJ model by gradient search
started from the OE fit. The OE search is also run from a pseudo-linear OE estimate seeded by an
instrumental-variable fit, and the start with the lower estimation loss is kept. Each model is
simulated on the validation input and scored by its BFR against the nonlinear system's output.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from attrs import define

from ..errors import LpvKitError
from ..ident import (
    Dataset,
    EstimOptions,
    FitReport,
    LpvIdPoly,
    bfr,
    lpvarx,
    lpvidpoly,
    lpviv,
    lpvoe,
    lpvpolyest,
    simulate_idpoly,
)
from ..models import simulate_io
from ..pmatrix import PVMatrix, preal, pshift
from .config import ExperimentConfig
from .disc import SCHEDULING_NAME, embed_lpv, scheduling_from_angle, simulate_disc
from .figures import STRUCTURES, plot_bfr, plot_datasets, plot_validation
from .signals import add_noise_snr, gen_multisine

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class DiscRecord:
    """
    One generated dataset.

    Attributes:
        u: Multisine input
        angle: Noise-free output of the nonlinear disc
        dataset: Measured data; output and scheduling are computed from the noisy angle
        snr_db: Output SNR, None for noise-free data
    """

    u: np.ndarray
    angle: np.ndarray
    dataset: Dataset
    snr_db: Optional[float]

    def to_frame(self) -> pd.DataFrame:
        frame = self.dataset.to_frame()
        frame["theta_true"] = self.angle
        return frame


@define(frozen=True, eq=False)
class CellResult:
    """Validation outcome of one (SNR, structure) pair."""

    snr_db: float
    structure: str
    bfr: float
    loss: float
    n_iter: int
    error: str
    validation_output: Optional[np.ndarray]


def _one_plus_p(shift: int) -> PVMatrix:
    return 1.0 + pshift(preal(SCHEDULING_NAME), shift)


def disc_templates(sample_time: float) -> dict[str, LpvIdPoly]:
    """
    Model sets of the study.

    A = 1 + (1 + p_{k-1}) q^-1 + (1 + p_{k-2}) q^-2, B and F shaped like A (B with a free constant
    at lag 0), C = D = 1 + q^-1.
    """
    lead = np.eye(1)
    a = [lead, _one_plus_p(-1), _one_plus_p(-2)]
    b = [1.0, _one_plus_p(-1), _one_plus_p(-2)]
    c = [lead, 1.0]
    return {
        "ARX": lpvidpoly(A=a, B=b, sample_time=sample_time),
        "ARMAX": lpvidpoly(A=a, B=b, C=c, sample_time=sample_time),
        "OE": lpvidpoly(B=b, F=a, sample_time=sample_time),
        "BJ": lpvidpoly(B=b, C=c, D=c, F=a, sample_time=sample_time),
    }


def generate_record(
    cfg: ExperimentConfig,
    seed: np.random.SeedSequence,
    snr_db: Optional[float] = None,
) -> DiscRecord:
    """Multisine input, nonlinear response and (optionally noisy) measurement."""
    input_seed, noise_seed = seed.spawn(2)
    ts = cfg.disc.sample_time
    u = gen_multisine(cfg.n_samples, ts, cfg.n_freq, cfg.band, cfg.amplitude, seed=input_seed)
    angle = simulate_disc(cfg.disc, u, cfg.substeps)
    measured = add_noise_snr(angle, snr_db, seed=noise_seed)
    return DiscRecord(
        u=u,
        angle=angle,
        dataset=Dataset(u=u, y=measured, p=scheduling_from_angle(measured, ts)),
        snr_db=snr_db,
    )


def validation_fit(model: LpvIdPoly, validation: DiscRecord) -> tuple[float, np.ndarray]:
    """BFR of the model's simulated output against the noise-free validation angle."""
    with np.errstate(all="ignore"):
        sim = simulate_idpoly(model, validation.u, validation.dataset.p)
    start, stop = sim.valid_range
    out = np.full(validation.angle.shape, np.nan)
    out[start:stop] = sim.y[:, 0]
    with np.errstate(all="ignore"):
        score = bfr(validation.angle[start:stop], sim.y[:, 0])
    return score, out


def _plr_start(template: LpvIdPoly, arx: LpvIdPoly, d: Dataset, logger: logging.Logger) -> LpvIdPoly:
    """Pseudo-linear OE estimate started from the IV estimate, or from `arx` when IV fails."""
    try:
        init = lpviv(arx, d, logger=logger).model
    except LpvKitError as e:
        logger.info(f"IV start unavailable, using the ARX estimate: {e}")
        init = arx
    return lpvoe(template, d, init=init, logger=logger).model


def fit_output_error(
    template: LpvIdPoly,
    arx: LpvIdPoly,
    d: Dataset,
    opts: EstimOptions,
    logger: Optional[logging.Logger] = None,
) -> FitReport:
    """
    Gradient-search OE fit from the better of two starts.

    One search starts from the ARX estimate. The other starts from a pseudo-linear OE estimate,
    which is itself started from an instrumental-variable fit of the ARX template and so does not
    inherit the noise bias of the least-squares ARX estimate. The fit with the lower estimation
    loss is returned.

    Raises:
        LpvKitError: The error of the last start if both searches failed
    """
    logger = logger or logging.getLogger(__name__)
    starts = {
        "ARX": lambda: template.initialized_from(arx),
        "PLR": lambda: _plr_start(template, arx, d, logger),
    }
    fits: dict[str, FitReport] = {}
    error: Optional[LpvKitError] = None
    for name, start in starts.items():
        try:
            fits[name] = lpvpolyest(start(), d, opts, logger=logger)
        except LpvKitError as e:
            logger.info(f"OE search from the {name} start failed: {e}")
            error = e
    if not fits:
        raise error
    name = min(fits, key=lambda key: fits[key].loss)
    logger.debug(f"OE: keeping the search from the {name} start (V = {fits[name].loss:.6e})")
    return fits[name]


def identify_at_snr(
    cfg: ExperimentConfig,
    estimation: DiscRecord,
    validation: DiscRecord,
    logger: Optional[logging.Logger] = None,
) -> list[CellResult]:
    """
    Fit the four structures on one estimation dataset.

    Estimator failures are recorded in the result instead of raised; a structure whose
    initialization failed is recorded as failed too.
    """
    logger = logger or logging.getLogger(__name__)
    templates = disc_templates(cfg.disc.sample_time)
    opts = EstimOptions(max_iter=cfg.gradient_iterations)
    d = estimation.dataset
    chain = {
        "ARX": (None, lambda init: lpvarx(templates["ARX"], d)),
        "ARMAX": ("ARX", lambda init: lpvpolyest(templates["ARMAX"].initialized_from(init), d, opts)),
        "OE": ("ARX", lambda init: fit_output_error(templates["OE"], init, d, opts, logger)),
        "BJ": ("OE", lambda init: lpvpolyest(templates["BJ"].initialized_from(init), d, opts)),
    }
    models: dict[str, LpvIdPoly] = {}
    results = []
    for structure in STRUCTURES:
        parent, fit = chain[structure]
        snr = float(estimation.snr_db)
        if parent is not None and parent not in models:
            results.append(CellResult(snr, structure, np.nan, np.nan, 0, f"{parent} initialization failed", None))
            continue
        try:
            report = fit(models.get(parent))
            score, output = validation_fit(report.model, validation)
        except LpvKitError as e:
            logger.warning(f"{structure} at {snr:g} dB failed: {e}")
            results.append(CellResult(snr, structure, np.nan, np.nan, 0, str(e), None))
            continue
        models[structure] = report.model
        logger.info(f"{snr:g} dB {structure}: validation BFR = {score:.2f}%")
        results.append(CellResult(snr, structure, score, report.loss, report.n_iter, "", output))
    return results


def _identify_job(args) -> list[CellResult]:
    return identify_at_snr(*args)


@define(frozen=True, eq=False)
class ExperimentReport:
    """
    Outcome of a benchmark run.

    Attributes:
        config: Settings used
        cells: One result per (SNR, structure), in SNR then structure order
        estimation: Estimation datasets in SNR order
        validation: Noise-free validation dataset
        embedding_validation: Output of the DT embedding on the validation data
        embedding_estimation: Output of the DT embedding on the first estimation input
    """

    config: ExperimentConfig
    cells: tuple[CellResult, ...]
    estimation: tuple[DiscRecord, ...]
    validation: DiscRecord
    embedding_validation: np.ndarray
    embedding_estimation: np.ndarray

    @property
    def embedding_bfr(self) -> float:
        """BFR of the DT embedding against the nonlinear system on the validation data."""
        return _bfr_where_defined(self.validation.angle, self.embedding_validation)

    @property
    def embedding_bfr_estimation(self) -> float:
        return _bfr_where_defined(self.estimation[0].angle, self.embedding_estimation)

    def table(self) -> pd.DataFrame:
        """Validation BFR per SNR and structure."""
        return pd.DataFrame(
            {
                "snr_db": [c.snr_db for c in self.cells],
                "structure": [c.structure for c in self.cells],
                "bfr": [c.bfr for c in self.cells],
                "loss": [c.loss for c in self.cells],
                "n_iter": [c.n_iter for c in self.cells],
                "error": [c.error for c in self.cells],
            }
        )

    def validation_frame(self) -> pd.DataFrame:
        ts = self.config.disc.sample_time
        frame = pd.DataFrame(
            {
                "t": np.arange(self.validation.angle.size) * ts,
                "u": self.validation.u,
                "theta": self.validation.angle,
                "embedding": self.embedding_validation,
            }
        )
        for c in self.cells:
            if c.validation_output is not None:
                frame[f"{c.structure}_{c.snr_db:g}dB"] = c.validation_output
        return frame

    def summary(self) -> str:
        lines = [
            f"embedding BFR (validation): {self.embedding_bfr:.4f}",
            f"embedding BFR (estimation): {self.embedding_bfr_estimation:.4f}",
            "validation BFR [%]:",
        ]
        table = self.table().pivot(index="snr_db", columns="structure", values="bfr")
        for snr, row in table.iterrows():
            cells = "  ".join(f"{s}={row.get(s, np.nan):7.3f}" for s in STRUCTURES)
            lines.append(f"  {snr:6g} dB  {cells}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: Union[str, Path]) -> None:
        """Write CSV tables, the generated datasets and the SVG figures into `out_dir`."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fmt = "%.17g"
        self.table().to_csv(out / "bfr_table.csv", index=False, float_format=fmt)
        self.validation_frame().to_csv(out / "validation_outputs.csv", index=False, float_format=fmt)
        self.validation.to_frame().to_csv(out / "validation_data.csv", index=False, float_format=fmt)
        for record in self.estimation:
            record.to_frame().to_csv(out / f"estimation_data_{record.snr_db:g}dB.csv", index=False, float_format=fmt)
        (out / "summary.txt").write_text(self.summary(), encoding="utf-8")

        ts = self.config.disc.sample_time
        first = self.estimation[0]
        t = np.arange(first.angle.size) * ts
        plot_datasets(
            t,
            first.u,
            {
                f"measured ({first.snr_db:g} dB)": first.dataset.y[:, 0],
                "nonlinear system": first.angle,
                "DT embedding": self.embedding_estimation,
            },
            out / "datasets.svg",
        )
        plot_bfr(self.table(), out / "bfr.svg")
        lowest = min(self.config.snr_list_db)
        outputs = {
            f"{c.structure} ({c.snr_db:g} dB)": c.validation_output
            for c in self.cells
            if c.snr_db == lowest and c.validation_output is not None
        }
        plot_validation(t, self.validation.angle, outputs, out / "validation.svg")
        logger.info(f"Wrote benchmark results to {out}")


def _bfr_where_defined(reference: np.ndarray, output: np.ndarray) -> float:
    ok = np.isfinite(output)
    return bfr(reference[ok], output[ok])


def _embedding_output(cfg: ExperimentConfig, record: DiscRecord) -> np.ndarray:
    """DT embedding driven by the true scheduling signal of `record`."""
    p_true = scheduling_from_angle(record.angle, cfg.disc.sample_time)
    sim = simulate_io(embed_lpv(cfg.disc), record.u, p_true)
    start, stop = sim.valid_range
    out = np.full(record.angle.shape, np.nan)
    out[start:stop] = sim.y[:, 0]
    return out


def run_experiment(cfg: ExperimentConfig, logger: Optional[logging.Logger] = None) -> ExperimentReport:
    """
    Run the study.

    Every dataset draws its random stream from `cfg.seed`, so the results do not depend on
    `cfg.workers`.
    """
    logger = logger or logging.getLogger(__name__)
    root = np.random.SeedSequence(cfg.seed)
    validation_seed, *estimation_seeds = root.spawn(1 + len(cfg.snr_list_db))
    logger.info(f"Generating {len(cfg.snr_list_db)} estimation datasets and one validation dataset")
    validation = generate_record(cfg, validation_seed)
    estimation = tuple(
        generate_record(cfg, seed, snr) for seed, snr in zip(estimation_seeds, cfg.snr_list_db)
    )

    jobs = [(cfg, record, validation) for record in estimation]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            per_snr = list(pool.map(_identify_job, jobs))
    else:
        per_snr = [identify_at_snr(*job, logger=logger) for job in jobs]

    report = ExperimentReport(
        config=cfg,
        cells=tuple(cell for cells in per_snr for cell in cells),
        estimation=estimation,
        validation=validation,
        embedding_validation=_embedding_output(cfg, validation),
        embedding_estimation=_embedding_output(cfg, estimation[0]),
    )
    logger.info(f"Embedding BFR on validation data: {report.embedding_bfr:.2f}%")
    return report
