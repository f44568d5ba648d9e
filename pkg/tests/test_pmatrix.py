import numpy as np
import pytest

from lpvkit.errors import BasisError, DimensionError, DomainMismatchError
from lpvkit.pmatrix import (
    Monomial,
    PVMatrix,
    blkdiag,
    diag,
    hconcat,
    kron,
    pdiff,
    pmatrix,
    preal,
    pshift,
    vconcat,
)
from lpvkit.scheduling import SchedulingTrajectory, extend_trajectory, make_timemap, merge_timemaps

NAME_SETS = (("p",), ("q",), ("p", "q"))


def random_pmatrix(rng, shape, poly=False) -> PVMatrix:
    orders = sorted({int(o) for o in rng.integers(-3, 1, size=rng.integers(1, 3))})
    tm = make_timemap(orders, "dt", NAME_SETS[rng.integers(len(NAME_SETS))])
    n_terms = int(rng.integers(0, 4))
    coeffs = [rng.standard_normal(shape) for _ in range(n_terms + 1)]
    if poly:
        degrees = [np.zeros(tm.dim, dtype=int)] + [rng.integers(0, 3, size=tm.dim) for _ in range(n_terms)]
        return pmatrix(coeffs, "poly", degrees, tm)
    return pmatrix(coeffs, "affine", [0, *rng.integers(1, tm.dim + 1, size=n_terms)], tm)


# ---------------------------------------------------------------------- construction


def test_affine_on_dynamic_dependence():
    a0, a1, a2 = np.eye(2), 2 * np.eye(2), 3 * np.eye(2)
    m = pmatrix([a0, a1, a2], "affine", [0, 1, 2], make_timemap([0, -1]))
    # canonical row is [p(t-1), p(t)]
    np.testing.assert_allclose(m.eval([-1.0, 1.0]), np.zeros((2, 2)), atol=1e-14)
    np.testing.assert_allclose(m.eval([1.0, 0.0]), 4 * np.eye(2), atol=1e-14)


def test_affine_on_two_channels():
    m = pmatrix([1, 2, 3, 4], "affine", [1, 2, 3, 4], make_timemap([-1, 0], "dt", ["p", "q"]))
    assert m.eval([1.0, 1.0, 1.0, 1.0])[0, 0] == pytest.approx(10.0, abs=1e-14)
    assert m.eval([0.0, 0.0, 0.0, 1.0])[0, 0] == pytest.approx(4.0, abs=1e-14)
    assert m.eval([0.0, 1.0, 0.0, 0.0])[0, 0] == pytest.approx(2.0, abs=1e-14)


def test_polynomial_basis():
    m = pmatrix([1, 2, 1], "poly", [[2, 0], [1, 1], [0, 2]], make_timemap([-2, 0]))
    assert m.eval([2.0, 3.0])[0, 0] == pytest.approx(25.0, abs=1e-14)
    assert m.n_terms == 3


def test_preal_and_shift_build_the_same_function():
    p = preal("p")
    built = 1 + 2 * p + 3 * pshift(p, -1)
    declared = pmatrix([1, 2, 3], "affine", [0, 1, 2], make_timemap([0, -1]))
    assert built.structurally_equal(declared)
    assert built.eval([-1.0, 1.0])[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_shifted_variable_on_trajectory():
    m = pshift(preal(), -1)
    ext = extend_trajectory(m.tm, SchedulingTrajectory([1.0, 2.0, 3.0]))
    values = m.evaluate(ext)
    assert values.shape == (2, 1, 1)
    assert values[0, 0, 0] == 1.0


def test_duplicate_bases_merge():
    m = pmatrix([0.0, 1.5, 2.5], "affine", [0, 1, 1])
    assert m.n_terms == 1
    assert m.eval([2.0])[0, 0] == pytest.approx(8.0)


def test_negligible_terms_are_pruned():
    p = preal()
    assert ((p + 1) - p).is_constant


def test_canonical_form_is_idempotent(rng):
    for _ in range(20):
        m = random_pmatrix(rng, (2, 3), poly=bool(rng.integers(2)))
        assert PVMatrix.from_dict(m.to_dict()).structurally_equal(m)


def test_product_of_affine_functions():
    p = preal()
    m = (1 + p) * (1 - p)
    assert [b.key() for b in m.basis] == [Monomial((2,)).key()]
    np.testing.assert_array_equal(m.coeffs[:, 0, 0], [1.0, -1.0])
    for x in (0.0, 1.0, 2.0):
        assert m.eval([x])[0, 0] == pytest.approx(1 - x ** 2)


def test_kron_with_identity():
    np.testing.assert_allclose(kron(np.eye(2), preal()).eval([5.0]), 5 * np.eye(2))


# ---------------------------------------------------------------------- algebra


def _samples(rng, tm, n=20):
    return rng.uniform(-1.0, 1.0, size=(n, tm.dim))


def _check(result, expected, rho, tm):
    np.testing.assert_allclose(result.evaluate(rho, tm), expected, rtol=0, atol=1e-12)


def test_evaluation_commutes_with_operations(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        a = random_pmatrix(rng, (n, n), poly=bool(rng.integers(2)))
        b = random_pmatrix(rng, (n, n), poly=bool(rng.integers(2)))
        tm, _, _ = merge_timemaps(a.tm, b.tm)
        rho = _samples(rng, tm)
        ea, eb = a.evaluate(rho, tm), b.evaluate(rho, tm)

        _check(a + b, ea + eb, rho, tm)
        _check(a - b, ea - eb, rho, tm)
        _check(-a, -ea, rho, tm)
        _check(a * b, ea * eb, rho, tm)
        _check(a @ b, ea @ eb, rho, tm)
        _check(hconcat(a, b), np.concatenate([ea, eb], axis=2), rho, tm)
        _check(vconcat(a, b), np.concatenate([ea, eb], axis=1), rho, tm)
        _check(a ** 2, ea ** 2, rho, tm)
        _check(a.matrix_power(2), ea @ ea, rho, tm)
        _check(a.T, ea.transpose(0, 2, 1), rho, tm)
        _check(a.ctranspose(), ea.transpose(0, 2, 1), rho, tm)
        _check(a.vec(), ea.transpose(0, 2, 1).reshape(len(rho), -1, 1), rho, tm)
        _check(a.sum(), ea.sum(axis=1, keepdims=True), rho, tm)
        _check(a[0, :], ea[:, :1, :], rho, tm)
        _check(kron(a, b), np.stack([np.kron(x, y) for x, y in zip(ea, eb)]), rho, tm)
        _check(blkdiag(a, b), np.stack([np.block([[x, np.zeros((n, n))], [np.zeros((n, n)), y]]) for x, y in zip(ea, eb)]), rho, tm)

        expected = ea.copy()
        expected[:, 0, 0] = eb[:, 0, 0]
        _check(a.assign((0, 0), b[0, 0]), expected, rho, tm)
        if n > 1:
            _check(a.diag(), np.stack([np.diag(x)[:, None] for x in ea]), rho, tm)
        _check(diag(a.vec()), np.stack([np.diag(x.T.ravel()) for x in ea]), rho, tm)


def test_rectangular_product(rng):
    a = random_pmatrix(rng, (2, 3))
    b = random_pmatrix(rng, (3, 4))
    tm, _, _ = merge_timemaps(a.tm, b.tm)
    rho = _samples(rng, tm)
    _check(a @ b, a.evaluate(rho, tm) @ b.evaluate(rho, tm), rho, tm)
    with pytest.raises(DimensionError):
        b @ a


def test_custom_basis_products(rng):
    square = pmatrix([1.0, 2.0], "custom", [0, ("p^2", lambda row: row[0] ** 2)])
    m = square * (1 + preal())
    for x in rng.uniform(-2, 2, size=5):
        assert m.eval([x])[0, 0] == pytest.approx((1 + 2 * x ** 2) * (1 + x))


def test_custom_basis_non_finite():
    m = pmatrix([0.0, 1.0], "custom", [0, ("bad", lambda row: np.inf if row[0] > 1 else row[0])])
    assert m.eval([0.5])[0, 0] == 0.5
    with pytest.raises(BasisError):
        m.eval([2.0])


def test_transpose_is_an_involution(rng):
    m = random_pmatrix(rng, (2, 3), poly=True)
    assert m.T.T.structurally_equal(m)
    assert m.T.shape == (3, 2)


# ---------------------------------------------------------------------- shifts and derivatives


def test_shift_group(rng):
    m = random_pmatrix(rng, (2, 2))
    assert pshift(pshift(m, -1), 1).structurally_equal(m)
    assert pshift(pshift(m, -2), 3).structurally_equal(pshift(m, 1))
    assert pshift(m, -1).cols == m.cols
    constant = pmatrix([np.ones((2, 2))])
    assert pshift(constant, -5) is constant


def test_derivative_of_ramp():
    dp = pdiff(preal("p", "ct"))
    assert dp.tm.orders == (0, 1)
    t = np.arange(40) * 0.25
    ext = extend_trajectory(dp.tm, SchedulingTrajectory(t, sample_time=0.25))
    np.testing.assert_allclose(dp.evaluate(ext)[:, 0, 0], 1.0, atol=1e-12)


def test_product_rule():
    p = preal("p", "ct")
    d = pdiff(p * p)
    # d/dt p^2 = 2 p dp
    assert d.eval([3.0, 0.5])[0, 0] == pytest.approx(3.0)


def test_shift_and_derivative_domains():
    with pytest.raises(DomainMismatchError):
        pshift(preal("p", "ct"), -1)
    with pytest.raises(DomainMismatchError):
        pdiff(preal("p", "dt"))
    with pytest.raises(BasisError):
        pdiff(preal("p", "ct"), 0)


# ---------------------------------------------------------------------- errors


def test_mixed_domains():
    with pytest.raises(DomainMismatchError):
        preal("p", "ct") + preal("p", "dt")


def test_shape_errors():
    with pytest.raises(DimensionError):
        pmatrix([np.eye(2), np.eye(3)])
    with pytest.raises(DimensionError):
        pmatrix([np.eye(2)]) + pmatrix([np.eye(3)])
    with pytest.raises(DimensionError):
        pmatrix([np.ones((2, 3))]).matrix_power(2)
    with pytest.raises(DimensionError):
        preal().eval([1.0, 2.0])


def test_basis_errors():
    tm = make_timemap([0, -1])
    with pytest.raises(BasisError):
        pmatrix([1.0, 2.0], "affine", [0, 3], tm)
    with pytest.raises(BasisError):
        pmatrix([1.0, 2.0], "poly", [[0, 0], [1]], tm)
    with pytest.raises(BasisError):
        pmatrix([1.0], "fourier")


def test_negative_power():
    with pytest.raises(BasisError):
        preal().matrix_power(-1)
    with pytest.raises(BasisError):
        preal() ** -1
