import numpy as np
import pandas as pd
import pytest

from lpvkit.bench import UnbalancedDiscParams, embed_lpv, gen_multisine
from lpvkit.cli import main
from lpvkit.models import load_model, lpvss, save_model, simulate_io, simulate_ss
from lpvkit.pmatrix import preal
from lpvkit.scheduling import SchedulingTrajectory

from .conftest import N_SAMPLES

PARAMS = UnbalancedDiscParams()


@pytest.fixture
def signals(tmp_path, rng):
    n = 200
    frame = pd.DataFrame(
        {
            "t": np.arange(n) * PARAMS.sample_time,
            "u": gen_multisine(n, PARAMS.sample_time),
            "p": rng.uniform(0.5, 1.0, n),
        }
    )
    path = tmp_path / "signals.csv"
    frame.to_csv(path, index=False, float_format="%.17g")
    return path, frame


@pytest.fixture
def arx_files(tmp_path, templates, truth_models, make_dataset, schedule, white_input):
    data = tmp_path / "data.csv"
    make_dataset(truth_models["ARX"], white_input, schedule).to_csv(data)
    template = tmp_path / "template.json"
    save_model(templates["ARX"], template)
    return template, data


def test_simulate_io_model(tmp_path, signals):
    path, frame = signals
    save_model(embed_lpv(PARAMS), tmp_path / "disc.json")
    out = tmp_path / "sim" / "out.csv"
    assert main(["simulate", "--model", str(tmp_path / "disc.json"), "--data", str(path), "--out", str(out)]) == 0

    result = pd.read_csv(out)
    assert list(result.columns) == ["k", "t", "y"]
    p = SchedulingTrajectory(frame["p"].to_numpy(), ("p",), PARAMS.sample_time)
    expected = simulate_io(embed_lpv(PARAMS), frame["u"].to_numpy(), p)
    assert result["k"].iloc[0] == expected.valid_range[0]
    np.testing.assert_allclose(result["y"].to_numpy(), expected.y[:, 0], rtol=0, atol=1e-12)


def test_simulate_ss_model(tmp_path, signals):
    path, frame = signals
    model = lpvss(0.5 + 0.2 * preal("p"), 1.0, 1.0, 0.0, sample_time=PARAMS.sample_time)
    save_model(model, tmp_path / "ss.json")
    out = tmp_path / "out.csv"
    assert main(["simulate", "--model", str(tmp_path / "ss.json"), "--data", str(path), "--out", str(out)]) == 0
    p = SchedulingTrajectory(frame["p"].to_numpy(), ("p",), PARAMS.sample_time)
    expected = simulate_ss(model, frame["u"].to_numpy(), p)
    np.testing.assert_allclose(pd.read_csv(out)["y"].to_numpy(), expected.y[:, 0], atol=1e-12)


def test_identify_arx(tmp_path, arx_files, truth_models):
    template, data = arx_files
    out = tmp_path / "results"
    assert main(["identify", "--structure", "arx", "--template", str(template), "--data", str(data), "--out", str(out)]) == 0
    assert "method: lpvarx" in (out / "report.txt").read_text()
    estimate = load_model(out / "model.json")
    assert np.max(np.abs(estimate.theta().values - truth_models["ARX"].theta().values)) < 1e-6
    assert len(pd.read_csv(out / "loss_trace.csv")) == 1


def test_identify_with_options(tmp_path, templates, truth_models, make_dataset, schedule, white_input, rng):
    data = tmp_path / "data.csv"
    make_dataset(truth_models["OE"], white_input, schedule, 0.05 * rng.standard_normal(N_SAMPLES)).to_csv(data)
    save_model(templates["OE"], tmp_path / "oe.json")
    (tmp_path / "opts.cfg").write_text("max_iter = 5\n")
    out = tmp_path / "results"
    argv = [
        "identify", "--structure", "oe", "--template", str(tmp_path / "oe.json"), "--data", str(data),
        "--opts", str(tmp_path / "opts.cfg"), "--method", "plr", "--out", str(out),
    ]
    assert main(argv) == 0
    text = (out / "report.txt").read_text()
    assert "method: lpvoe" in text
    assert "structure: OE" in text


def test_identify_structure_mismatch(tmp_path, arx_files, caplog):
    template, data = arx_files
    argv = ["identify", "--structure", "oe", "--template", str(template), "--data", str(data), "--out", str(tmp_path)]
    assert main(argv) == 1
    assert "error: StructureError" in caplog.text


def test_missing_model_file(tmp_path, signals, caplog):
    path, _ = signals
    argv = ["simulate", "--model", str(tmp_path / "missing.json"), "--data", str(path), "--out", str(tmp_path / "o.csv")]
    assert main(argv) == 1
    assert "error: SerializationError" in caplog.text


def test_empty_signal_file(tmp_path, caplog):
    save_model(embed_lpv(PARAMS), tmp_path / "disc.json")
    (tmp_path / "empty.csv").write_text("")
    argv = ["simulate", "--model", str(tmp_path / "disc.json"), "--data", str(tmp_path / "empty.csv"), "--out", str(tmp_path / "o.csv")]
    assert main(argv) == 1
    assert "error: DataError" in caplog.text


def test_non_numeric_signal(tmp_path, signals, caplog):
    _, frame = signals
    bad = frame.astype({"u": object})
    bad.loc[3, "u"] = "abc"
    bad.to_csv(tmp_path / "bad.csv", index=False)
    save_model(embed_lpv(PARAMS), tmp_path / "disc.json")
    argv = ["simulate", "--model", str(tmp_path / "disc.json"), "--data", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o.csv")]
    assert main(argv) == 1
    assert "error: DataError" in caplog.text


@pytest.mark.parametrize("content", ["", "t,u,p,y\n0,1,0.5,abc\n0.1,2,0.5,1\n"])
def test_malformed_identification_data(tmp_path, arx_files, caplog, content):
    template, _ = arx_files
    (tmp_path / "bad.csv").write_text(content)
    argv = ["identify", "--structure", "arx", "--template", str(template), "--data", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "r")]
    assert main(argv) == 1
    assert "error: DataError" in caplog.text


def test_bench_with_config(tmp_path):
    cfg = tmp_path / "disc.cfg"
    cfg.write_text("n_samples = 80\nsnr_list_db = 40\ngradient_iterations = 3\nsubsteps = 5\n")
    out = tmp_path / "bench"
    assert main(["bench", "unbalanced-disc", "--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    table = pd.read_csv(out / "bfr_table.csv")
    assert list(table["structure"]) == ["ARX", "ARMAX", "OE", "BJ"]
    assert (out / "bfr.svg").is_file()


def test_bad_bench_config(tmp_path, caplog):
    cfg = tmp_path / "disc.cfg"
    cfg.write_text("band = 2\n")
    assert main(["bench", "unbalanced-disc", "--config", str(cfg)]) == 1
    assert "error: ConfigError" in caplog.text
