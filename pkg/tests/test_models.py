import logging

import numpy as np
import pytest
from scipy import signal

from lpvkit.bench import UnbalancedDiscParams, disc_ct_model, embed_lpv
from lpvkit.errors import (
    ConversionError,
    DataError,
    DimensionError,
    DomainMismatchError,
    IllPosedError,
    ModelError,
    SerializationError,
)
from lpvkit.models import (
    companion_realization,
    euler_discretize_ss,
    frozen,
    frozen_poles,
    interconnect,
    load_model,
    lpvio,
    lpvlfr,
    lpvss,
    save_model,
    simulate_io,
    simulate_lfr,
    simulate_ss,
    ss_to_lfr,
)
from lpvkit.pmatrix import pdiff, pmatrix, preal, pshift
from lpvkit.scheduling import SchedulingTrajectory, extend_trajectory, make_timemap


def random_ss(rng, nx=2, nu=1, ny=1, orders=(0,), gain=1.0, feedthrough=True):
    tm = make_timemap(list(orders))

    def affine(shape, scale):
        coeffs = [scale * rng.standard_normal(shape) for _ in range(tm.dim + 1)]
        return pmatrix(coeffs, "affine", list(range(tm.dim + 1)), tm)

    D = affine((ny, nu), 0.5) if feedthrough else np.zeros((ny, nu))
    return lpvss(affine((nx, nx), 0.15 / nx), affine((nx, nu), gain), affine((ny, nx), gain), D)


def trajectory(rng, n, low=-1.0, high=1.0):
    return SchedulingTrajectory(rng.uniform(low, high, n))


# ---------------------------------------------------------------------- simulation


def test_static_gain():
    u = np.arange(10.0)
    np.testing.assert_array_equal(simulate_io(lpvio(A=[], B=[np.eye(1)]), u, None).y[:, 0], u)
    sim = simulate_ss(lpvss(0.0, 0.0, 0.0, 1.0), u)
    np.testing.assert_array_equal(sim.y[:, 0], u)
    assert sim.valid_range == (0, 10)


def test_free_response_decays_geometrically():
    m = lpvio(A=[0.5], B=[], n_inputs=1)
    sim = simulate_io(m, np.zeros((10, 1)), init=[[1.0]])
    np.testing.assert_allclose(sim.y[:, 0], (-0.5) ** np.arange(1, 11))


def test_embedding_at_constant_scheduling_is_lti():
    params = UnbalancedDiscParams()
    m = embed_lpv(params)
    n = 100
    u = np.ones(n)
    sim = simulate_io(m, u, SchedulingTrajectory(np.ones(n)))
    ts, tau = params.sample_time, params.time_constant
    a2 = 1 - ts / tau + params.stiffness * ts**2
    expected = signal.lfilter([0.0, 0.0, params.motor_constant * ts**2 / tau], [1.0, ts / tau - 2, a2], u)
    assert sim.valid_range == (2, n)
    np.testing.assert_allclose(sim.y[:, 0], expected[2:], atol=1e-12)


def test_frozen_model_matches_constant_scheduling(rng):
    m = random_ss(rng, nx=3, nu=2, ny=2)
    u = rng.standard_normal((60, 2))
    varying = simulate_ss(m, u, SchedulingTrajectory(np.full(60, 0.4)))
    lti = simulate_ss(frozen(m, 0.4), u, None)
    np.testing.assert_allclose(varying.y, lti.y, atol=1e-12)
    assert frozen(m, 0.4).A.is_constant


def test_zero_innovation_leaves_response_unchanged(rng):
    m = random_ss(rng)
    noisy = lpvss(m.A, m.B, m.C, m.D, K=np.ones((2, 1)))
    u = rng.standard_normal(40)
    p = trajectory(rng, 40)
    np.testing.assert_array_equal(
        simulate_ss(noisy, u, p, e=np.zeros(40)).y, simulate_ss(m, u, p).y
    )


def test_ct_models_cannot_be_simulated():
    with pytest.raises(DomainMismatchError):
        simulate_ss(disc_ct_model(UnbalancedDiscParams()), np.zeros(5), SchedulingTrajectory(np.ones(5)))


def test_signal_validation(rng):
    m = random_ss(rng)
    with pytest.raises(DataError):
        simulate_ss(m, np.zeros(10), trajectory(rng, 9))
    with pytest.raises(DataError):
        simulate_ss(m, np.full(10, np.nan), trajectory(rng, 10))


# ---------------------------------------------------------------------- construction


def test_model_validation():
    with pytest.raises(ModelError):
        lpvss(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), 0.0)
    with pytest.raises(ModelError):
        lpvss(0.5, 1.0, 1.0, 0.0, K=1.0, noise_variance=[[-1.0]])
    with pytest.raises(ModelError):
        lpvio(A=[], B=[])
    with pytest.raises(DomainMismatchError):
        lpvio(A=[preal("p", "ct")], B=[preal("p", "dt")])


# ---------------------------------------------------------------------- LFR


def test_lfr_with_empty_delta_is_state_space(rng):
    A = np.array([[0.5, 0.1], [0.0, 0.3]])
    B = np.array([[1.0], [0.5]])
    C = np.array([[1.0, -1.0]])
    lfr = lpvlfr(
        np.zeros((0, 0)), A, np.zeros((2, 0)), B, np.zeros((0, 2)), C,
        np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.zeros((1, 1)),
    )
    u = rng.standard_normal(30)
    np.testing.assert_allclose(simulate_lfr(lfr, u).y, simulate_ss(lpvss(A, B, C, 0.0), u).y, atol=1e-14)


def _scalar_loop(d):
    # nx = 0, z = d w + u, w = p z, y = w
    return lpvlfr(
        preal(), np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((1, 0)), np.zeros((1, 0)),
        [[d]], [[1.0]], [[1.0]], [[0.0]],
    )


def test_lfr_algebraic_loop(rng):
    p = rng.uniform(-0.5, 0.5, 50)
    u = rng.standard_normal(50)
    y = simulate_lfr(_scalar_loop(0.7), u, SchedulingTrajectory(p)).y[:, 0]
    np.testing.assert_allclose(y, p * u / (1 - 0.7 * p), atol=1e-12)


def test_lfr_ill_posed_loop():
    p = np.full(20, 0.5)
    p[5] = 1.0
    with pytest.raises(IllPosedError) as excinfo:
        simulate_lfr(_scalar_loop(1.0), np.ones(20), SchedulingTrajectory(p))
    assert excinfo.value.time_index == 5


def test_ss_lfr_round_trip(rng):
    for _ in range(50):
        nx, nu, ny = (int(v) for v in rng.integers(1, 4, size=3))
        orders = (0,) if rng.integers(2) else (0, -1)
        m = random_ss(rng, nx, nu, ny, orders)
        lfr = ss_to_lfr(m)
        assert np.all(lfr.Dzw == 0)
        u = rng.standard_normal((200, nu))
        p = trajectory(rng, 200)
        ss, via_lfr = simulate_ss(m, u, p), simulate_lfr(lfr, u, p)
        assert ss.valid_range == via_lfr.valid_range
        np.testing.assert_allclose(via_lfr.y, ss.y, atol=1e-10)


def test_constant_ss_has_no_delta():
    lfr = ss_to_lfr(lpvss(0.5, 1.0, 1.0, 0.0))
    assert lfr.nw == 0


def test_lfr_conversion_drops_innovation_gain(rng, caplog):
    m = random_ss(rng)
    caplog.set_level(logging.INFO, logger="lpvkit.models.analysis")
    ss_to_lfr(lpvss(m.A, m.B, m.C, m.D, K=np.ones((2, 1))))
    assert "dropped" in caplog.text


def test_custom_basis_cannot_become_lfr():
    a = pmatrix([0.5, 0.1], "custom", [0, ("cos", lambda row: np.cos(row[0]))])
    with pytest.raises(ConversionError):
        ss_to_lfr(lpvss(a, 1.0, 1.0, 0.0))


def test_frozen_poles_agree_between_representations(rng):
    m = random_ss(rng, nx=3)
    for value in (-0.5, 0.0, 0.8):
        np.testing.assert_allclose(
            np.sort_complex(frozen_poles(ss_to_lfr(m), value)),
            np.sort_complex(frozen_poles(m, value)),
            atol=1e-10,
        )


# ---------------------------------------------------------------------- interconnection


def test_series_and_parallel(rng):
    m1, m2 = random_ss(rng), random_ss(rng)
    u = rng.standard_normal(80)
    p = trajectory(rng, 80)
    y1, y2 = simulate_ss(m1, u, p).y, simulate_ss(m2, u, p).y

    series = simulate_lfr(interconnect("series", m1, m2), u, p).y
    np.testing.assert_allclose(series, simulate_ss(m2, y1, p).y, atol=1e-10)
    np.testing.assert_allclose(simulate_lfr(interconnect("parallel", m1, m2), u, p).y, y1 + y2, atol=1e-10)


def test_parallel_with_negation_cancels(rng):
    m = random_ss(rng)
    negated = lpvss(m.A, m.B, -m.C, -m.D)
    u = rng.standard_normal(60)
    y = simulate_lfr(interconnect("parallel", m, negated), u, trajectory(rng, 60)).y
    np.testing.assert_allclose(y, 0.0, atol=1e-10)


def test_concatenations(rng):
    m1, m2 = random_ss(rng), random_ss(rng)
    u1, u2 = rng.standard_normal(50), rng.standard_normal(50)
    p = trajectory(rng, 50)
    both = simulate_lfr(interconnect("hconcat", m1, m2), np.column_stack([u1, u2]), p).y
    np.testing.assert_allclose(both, simulate_ss(m1, u1, p).y + simulate_ss(m2, u2, p).y, atol=1e-10)
    stacked = simulate_lfr(interconnect("vconcat", m1, m2), u1, p).y
    np.testing.assert_allclose(stacked, np.hstack([simulate_ss(m1, u1, p).y, simulate_ss(m2, u1, p).y]), atol=1e-10)


def test_negative_feedback(rng):
    m1 = random_ss(rng, gain=0.5)
    m2 = random_ss(rng, gain=0.5, feedthrough=False)
    n = 50
    u = rng.standard_normal(n)
    p = trajectory(rng, n)
    ext = extend_trajectory(m1.tm, p)
    A1, B1, C1, D1 = (x.evaluate(ext) for x in (m1.A, m1.B, m1.C, m1.D))
    A2, B2, C2 = (x.evaluate(ext) for x in (m2.A, m2.B, m2.C))
    x1, x2 = np.zeros(2), np.zeros(2)
    expected = np.empty(n)
    for t in range(n):
        u1 = u[t] - C2[t] @ x2
        y1 = C1[t] @ x1 + D1[t] @ u1
        x1 = A1[t] @ x1 + B1[t] @ u1
        x2 = A2[t] @ x2 + B2[t] @ y1
        expected[t] = y1[0]
    closed = simulate_lfr(interconnect("feedback", m1, m2), u, p).y[:, 0]
    np.testing.assert_allclose(closed, expected, rtol=1e-9, atol=1e-10)


def test_interconnect_port_mismatch(rng):
    with pytest.raises(DimensionError):
        interconnect("series", random_ss(rng), random_ss(rng, nu=2))


# ---------------------------------------------------------------------- analysis


def test_embedding_frozen_poles():
    params = UnbalancedDiscParams()
    m = embed_lpv(params)
    ratio = params.sample_time / params.time_constant
    np.testing.assert_allclose(np.abs(frozen_poles(m, 0.0)), [1.0, 1.0 - ratio], atol=1e-9)
    a2 = 1 - ratio + params.stiffness * params.sample_time**2
    magnitudes = np.abs(frozen_poles(m, 1.0))
    np.testing.assert_allclose(magnitudes, np.sqrt(a2), atol=1e-9)
    assert magnitudes[0] == pytest.approx(0.93902, abs=1e-5)


def test_euler_scalar():
    m = lpvss(-1.0, 1.0, 1.0, 0.0, domain="ct")
    d = euler_discretize_ss(m, 0.1)
    assert d.A.constant[0, 0] == pytest.approx(0.9)
    assert d.B.constant[0, 0] == pytest.approx(0.1)
    assert d.sample_time == 0.1


def test_euler_of_disc_matches_embedding():
    params = UnbalancedDiscParams()
    dt = euler_discretize_ss(disc_ct_model(params), params.sample_time)
    for value in (0.0, 0.5, 1.0):
        np.testing.assert_allclose(
            np.sort_complex(frozen_poles(dt, value)),
            np.sort_complex(frozen_poles(embed_lpv(params), value)),
            atol=1e-9,
        )


def test_euler_restrictions():
    with pytest.raises(DomainMismatchError):
        euler_discretize_ss(lpvss(0.5, 1.0, 1.0, 0.0), 0.1)
    with pytest.raises(ConversionError):
        euler_discretize_ss(lpvss(pdiff(preal("p", "ct")), 1.0, 1.0, 0.0), 0.1)


def test_companion_realization_reproduces_io(rng):
    p = preal()
    m = lpvio(A=[-0.5 + 0.2 * p, 0.1 * pshift(p, -1)], B=[1.0, 0.5 * p], delay=1)
    ss = companion_realization(m)
    assert ss.nx == 4
    u = rng.standard_normal(60)
    u[0] = 0.0
    traj = trajectory(rng, 60)
    io_sim, ss_sim = simulate_io(m, u, traj), simulate_ss(ss, u, traj)
    assert io_sim.valid_range == ss_sim.valid_range == (1, 60)
    np.testing.assert_allclose(ss_sim.y, io_sim.y, atol=1e-12)


# ---------------------------------------------------------------------- persistence


def test_model_files(rng, tmp_path):
    m = random_ss(rng, orders=(0, -1))
    models = [
        embed_lpv(UnbalancedDiscParams()),
        lpvss(m.A, m.B, m.C, m.D, K=np.ones((2, 1)), noise_variance=[[0.1]]),
        ss_to_lfr(m),
    ]
    u = rng.standard_normal(30)
    p = trajectory(rng, 30)
    simulators = (simulate_io, simulate_ss, simulate_lfr)
    for i, (model, simulate) in enumerate(zip(models, simulators)):
        path = tmp_path / f"model{i}.json"
        save_model(model, path)
        restored = load_model(path)
        assert type(restored) is type(model)
        np.testing.assert_array_equal(simulate(restored, u, p).y, simulate(model, u, p).y)
    assert load_model(tmp_path / "model1.json").noise_variance[0, 0] == 0.1


def test_model_file_errors(tmp_path):
    custom = pmatrix([0.5, 0.1], "custom", [0, ("cos", lambda row: np.cos(row[0]))])
    with pytest.raises(SerializationError):
        save_model(lpvio(A=[custom], B=[1.0]), tmp_path / "custom.json")
    (tmp_path / "broken.json").write_text("{not json")
    with pytest.raises(SerializationError):
        load_model(tmp_path / "broken.json")
    with pytest.raises(SerializationError):
        load_model(tmp_path / "missing.json")
