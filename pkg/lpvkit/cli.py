"""
lpvkit command-line tool.

    lpvkit simulate --model model.json --data data.csv --out sim.csv
    lpvkit identify --structure oe --template template.json --data data.csv --opts opts.cfg --out results/
    lpvkit bench unbalanced-disc --config disc.cfg --out bench-out/ --seed 1
"""

from __future__ import annotations

import argparse
import logging
import re
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .bench import ExperimentConfig, run_experiment
from .errors import DataError, LpvKitError, StructureError
from .ident import (
    Dataset,
    EstimOptions,
    LpvIdPoly,
    lpvarx,
    lpviv,
    lpvpolyest,
    lpvssest,
    plr_estimate,
    simulate_idpoly,
)
from .ident.dataset import numeric_columns, read_table, sample_time_of
from .ident.plr import arx_initialization
from .models import LpvIoModel, LpvLfrModel, LpvSsModel, load_model, simulate_io, simulate_lfr, simulate_ss
from .scheduling import SchedulingTrajectory
from .types import Structure

logger = logging.getLogger("lpvkit")

STRUCTURES = ("arx", "armax", "oe", "bj", "ss")
METHODS = ("auto", "plr", "gradient", "iv")


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns:
        Parsed arguments namespace
    """
    parser = argparse.ArgumentParser(
        prog="lpvkit",
        description="Modelling, simulation and identification of linear parameter-varying systems",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose output")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="Simulate a model file on input and scheduling data",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sim.add_argument("--model", type=Path, required=True, help="Model JSON file")
    sim.add_argument("--data", type=Path, required=True, help="CSV with columns t, u/u1.., scheduling channels")
    sim.add_argument("--out", type=Path, required=True, help="Output CSV")

    ident = sub.add_parser(
        "identify",
        help="Estimate a model from data",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ident.add_argument("--structure", choices=STRUCTURES, required=True, help="Model structure")
    ident.add_argument("--template", type=Path, required=True, help="Template (IO) or initial model (SS) JSON file")
    ident.add_argument("--data", type=Path, required=True, help="Dataset CSV with columns t, u*, scheduling, y*")
    ident.add_argument("--opts", type=Path, default=None, help="Estimator options file (key = value)")
    ident.add_argument(
        "--method",
        choices=METHODS,
        default="auto",
        help="Estimator: auto picks linear regression for ARX and gradient search otherwise",
    )
    ident.add_argument("--out", type=Path, required=True, help="Output directory")

    bench = sub.add_parser(
        "bench",
        help="Run a benchmark study",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    bench.add_argument("name", choices=("unbalanced-disc",), help="Benchmark")
    bench.add_argument("--config", type=Path, default=None, help="Experiment configuration file (key = value)")
    bench.add_argument("--out", type=Path, default=None, help="Output directory (overrides the config)")
    bench.add_argument("--seed", type=int, default=None, help="Root seed (overrides the config)")
    bench.add_argument("--workers", type=int, default=None, help="Worker processes (overrides the config)")

    return parser.parse_args(argv)


def read_signals(path: Path) -> tuple[np.ndarray, SchedulingTrajectory]:
    """Inputs and scheduling trajectory of a simulation data file."""
    frame = read_table(path)
    u_cols = [c for c in frame.columns if re.fullmatch(r"u\d*", str(c))]
    skip = {"t", *u_cols, *(c for c in frame.columns if re.fullmatch(r"y\d*", str(c)))}
    names = [c for c in frame.columns if c not in skip]
    if not names:
        raise DataError(f"{path}: no scheduling columns")
    p = SchedulingTrajectory(numeric_columns(frame, names), tuple(names), sample_time_of(frame))
    u = numeric_columns(frame, u_cols) if u_cols else np.zeros((len(frame), 0))
    return u, p


def run_simulate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    u, p = read_signals(args.data)
    if isinstance(model, LpvIoModel):
        sim = simulate_io(model, u, p, logger=logger)
    elif isinstance(model, LpvSsModel):
        sim = simulate_ss(model, u, p, logger=logger)
    elif isinstance(model, LpvLfrModel):
        sim = simulate_lfr(model, u, p, logger=logger)
    elif isinstance(model, LpvIdPoly):
        sim = simulate_idpoly(model, u, p)
    else:
        raise LpvKitError(f"Cannot simulate a {type(model).__name__}")
    start, stop = sim.valid_range
    frame = pd.DataFrame({"k": np.arange(start, stop), "t": np.arange(start, stop) * p.sample_time})
    for i in range(sim.y.shape[1]):
        frame[f"y{i + 1}" if sim.y.shape[1] > 1 else "y"] = sim.y[:, i]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(args.out, index=False, float_format="%.17g")
    logger.info(f"Simulated samples {start}..{stop - 1}, wrote {args.out}")
    return 0


def run_identify(args: argparse.Namespace) -> int:
    template = load_model(args.template)
    d = Dataset.from_csv(args.data)
    opts = EstimOptions.from_file(args.opts) if args.opts else EstimOptions()
    logger.info(f"Dataset: {d.length} samples, {d.nu} input(s), {d.ny} output(s)")

    if args.structure == "ss":
        if not isinstance(template, LpvSsModel):
            raise StructureError("SS identification needs an LPV-SS initial model")
        report = lpvssest(template, d, opts, logger=logger)
    else:
        if not isinstance(template, LpvIdPoly):
            raise StructureError("IO identification needs an lpvidpoly template")
        structure = Structure(args.structure)
        if template.structure is not structure:
            raise StructureError(f"Template has {template.structure} structure, --structure is {structure}")
        method = args.method
        if method == "auto":
            method = "ls" if structure is Structure.ARX else "gradient"
        if method == "iv":
            report = lpviv(template, d, opts, logger=logger)
        elif method == "ls" or (method == "plr" and structure is Structure.ARX):
            report = lpvarx(template, d, opts, logger=logger)
        elif method == "plr":
            report = plr_estimate(structure, template, d, opts, logger=logger)
        else:
            init = template if structure is Structure.ARX else arx_initialization(template, d, opts, logger)
            report = lpvpolyest(init, d, opts, logger=logger)

    report.save(args.out)
    logger.info(report.to_text())
    return 0


def run_bench(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed, "workers": args.workers, "out_dir": args.out}
    if args.config is not None:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig().with_overrides(**overrides)
    report = run_experiment(cfg, logger=logger)
    report.write(cfg.out_dir)
    logger.info(report.summary())
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point.

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    args = parse_arguments(argv)

    # Root logger stays at WARNING so library and third-party debug output is suppressed
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    logger.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    commands = {"simulate": run_simulate, "identify": run_identify, "bench": run_bench}
    try:
        return commands[args.command](args)
    except LpvKitError as e:
        logger.error(f"error: {type(e).__name__}: {e}")
        return 1
    except OSError as e:
        logger.error(f"error: {type(e).__name__}: {e}")
        return 2
