import numpy as np
import pytest

from lpvkit.errors import DataError, DomainMismatchError, TimeMapError
from lpvkit.scheduling import (
    SchedulingTrajectory,
    TimeMap,
    extend_trajectory,
    infer_sample_time,
    make_timemap,
    merge_all,
    merge_timemaps,
    valid_window,
)
from lpvkit.types import TimeDomain


def test_timemap_canonical_columns():
    tm = make_timemap([0, -1], "dt", ["q", "p"])
    assert tm.orders == (-1, 0)
    assert tm.names == ("p", "q")
    assert tm.columns == (("p", -1), ("q", -1), ("p", 0), ("q", 0))
    assert tm.dim == 4
    assert tm.column("q", 0) == 3
    assert tm.declared_columns[0] == ("q", 0)


def test_timemap_equality_ignores_declaration_order():
    assert make_timemap([0, -1]) == make_timemap([-1, 0])
    assert make_timemap([0], names=["p", "q"]) == make_timemap([0], names=["q", "p"])


@pytest.mark.parametrize(
    "orders, domain, names",
    [
        ([], "dt", None),
        ([-1], "ct", None),
        ([0], "dt", ["p", "p"]),
        ([0], "dt", [""]),
    ],
)
def test_timemap_rejects_bad_input(orders, domain, names):
    with pytest.raises(TimeMapError):
        make_timemap(orders, domain, names)


def test_missing_column_lookup():
    with pytest.raises(TimeMapError):
        make_timemap([0]).column("p", -1)


def test_merge_identical_maps_is_identity():
    tm = make_timemap([-2, 0])
    merged, map_a, map_b = merge_timemaps(tm, tm)
    assert merged == tm
    np.testing.assert_array_equal(map_a, [0, 1])
    np.testing.assert_array_equal(map_b, [0, 1])


def test_merge_is_a_union():
    a = make_timemap([0])
    b = make_timemap([-1], names=["q"])
    merged, map_a, map_b = merge_timemaps(a, b)
    assert merged.orders == (-1, 0)
    assert merged.names == ("p", "q")
    assert [merged.columns[i] for i in map_a] == [("p", 0)]
    assert [merged.columns[i] for i in map_b] == [("q", -1)]


def test_merge_is_commutative():
    a = make_timemap([0, -3], names=["p", "r"])
    b = make_timemap([-1], names=["q"])
    assert merge_timemaps(a, b)[0] == merge_timemaps(b, a)[0]
    assert merge_all([a, b, a]) == merge_timemaps(a, b)[0]


def test_merge_domain_mismatch():
    with pytest.raises(DomainMismatchError):
        merge_timemaps(make_timemap([0], "dt"), make_timemap([0], "ct"))


def test_shifted_map():
    assert make_timemap([0, -1]).shifted(-1) == make_timemap([-1, -2])


def test_timemap_dict_round_trip():
    tm = make_timemap([0, 2], "ct", ["v", "p"])
    restored = TimeMap.from_dict(tm.to_dict())
    assert restored == tm
    assert restored.domain is TimeDomain.CT


def test_extend_shifts():
    tm = make_timemap([0, -1])
    ext = extend_trajectory(tm, SchedulingTrajectory([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(ext.samples, [[1.0, 2.0], [2.0, 3.0]])
    assert ext.valid_range == (1, 3)
    assert ext.source_map == (("p", -1), ("p", 0))


def test_valid_window_with_future_shift():
    assert valid_window(make_timemap([-2, 1]), 10) == (2, 9)
    assert valid_window(make_timemap([0, 3], "ct"), 10) == (0, 10)


def test_extend_ignores_unused_channels():
    p = SchedulingTrajectory(np.column_stack([np.arange(5.0), np.ones(5)]), ("p", "q"))
    ext = extend_trajectory(make_timemap([-1]), p)
    np.testing.assert_array_equal(ext.samples[:, 0], [0.0, 1.0, 2.0, 3.0])


def test_extend_too_short():
    with pytest.raises(DataError):
        extend_trajectory(make_timemap([-3, 0]), SchedulingTrajectory([1.0, 2.0, 3.0]))


def test_extend_missing_channel():
    with pytest.raises(DataError):
        extend_trajectory(make_timemap([0], names=["q"]), SchedulingTrajectory([1.0, 2.0]))


def test_ct_derivatives():
    t = np.arange(50) * 0.1
    p = SchedulingTrajectory(np.column_stack([t, np.full(50, 3.0)]), ("p", "c"), sample_time=0.1)
    ext = extend_trajectory(make_timemap([0, 1, 2], "ct", ["p", "c"]), p)
    tm = ext.tm
    np.testing.assert_allclose(ext.samples[:, tm.column("p", 1)], 1.0, atol=1e-12)
    np.testing.assert_allclose(ext.samples[:, tm.column("p", 2)], 0.0, atol=1e-9)
    np.testing.assert_array_equal(ext.samples[:, tm.column("c", 1)], 0.0)
    assert ext.valid_range == (0, 50)


@pytest.mark.parametrize(
    "samples, names, ts",
    [
        ([1.0, np.nan], ("p",), 1.0),
        (np.ones((3, 2)), ("p",), 1.0),
        (np.ones((3, 2)), ("p", "p"), 1.0),
        ([1.0, 2.0], ("p",), 0.0),
    ],
)
def test_trajectory_validation(samples, names, ts):
    with pytest.raises(DataError):
        SchedulingTrajectory(samples, names, ts)


def test_trajectory_csv_round_trip(tmp_path):
    p = SchedulingTrajectory(np.random.default_rng(3).standard_normal((20, 2)), ("p", "q"), 0.05)
    path = tmp_path / "p.csv"
    p.to_csv(path)
    restored = SchedulingTrajectory.from_csv(path)
    np.testing.assert_array_equal(restored.samples, p.samples)
    assert restored.channel_names == ("p", "q")
    assert restored.sample_time == pytest.approx(0.05)


def test_irregular_time_vector():
    assert infer_sample_time(np.array([0.0, 0.5, 1.0])) == 0.5
    with pytest.raises(DataError):
        infer_sample_time(np.array([0.0, 0.5, 1.5]))
