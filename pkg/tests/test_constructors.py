import itertools
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavegalerkin import (
    ConvergenceError,
    Filter,
    GridFn,
    InfiniteProduct,
    NotAnEigenvalueError,
    ProductParams,
    ValidationError,
    apply_grid,
    builtin,
    classify_cycles,
    detect_m0_cycles,
    h_family_gram,
    h_series,
    independence_matrix,
    iterated_filter,
    kernel_function,
    periodize,
    peripheral_basis,
    peripheral_phi,
    scaling_product,
)
from wavegalerkin.constructors import Periodization, discrete_slope, verification_grid

TWO_PI = 2 * np.pi


def haar_limit(x):
    # prod_l (1 + e^{-i x / 2^l}) / 2 -> (1 - e^{-i x}) / (i x)
    x = np.asarray(x, dtype=float)
    return np.where(x == 0, 1.0, (1 - np.exp(-1j * x)) / (1j * np.where(x == 0, 1, x)))


def haar_truncated(x, L):
    x = np.asarray(x, dtype=float)
    return (1 - np.exp(-1j * x)) / (2**L * (1 - np.exp(-1j * x / 2**L)))


def leibniz_det(A):
    n = A.shape[0]
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term *= A[i, perm[i]]
        total += term
    return total


def cycle_of(filt, *turns):
    want = tuple(Fraction(t) for t in turns)
    for c in classify_cycles(filt, len(want)):
        if c.turns == want:
            return c
    raise LookupError(want)


def test_haar_product_closed_form(haar):
    phi = scaling_product(haar)
    x = np.linspace(-50, 50, 401)
    x = x[x != 0]
    np.testing.assert_allclose(phi(x), haar_truncated(x, 40), atol=1e-12)
    np.testing.assert_allclose(phi(x), haar_limit(x), atol=1e-9)
    assert abs(phi(np.pi) - (-2j / np.pi)) < 1e-9


def test_product_is_one_at_origin(d4):
    assert abs(scaling_product(d4)(0.0) - 1) < 1e-14


@given(st.floats(-3000, 3000), st.sampled_from(["haar", "stretched-haar", "daubechies4"]))
def test_accelerated_product_matches_direct(x, name):
    phi = scaling_product(builtin(name))
    assert abs(phi(x) - phi.direct(x)) < 1e-12


@given(st.floats(-400, 400))
def test_refinement_identity(x):
    f = builtin("daubechies4")
    phi = scaling_product(f)
    assert abs(phi(x) - f(x / 2) / np.sqrt(2) * phi(x / 2)) < 1e-9


def test_on_translates_matches_pointwise(stretched):
    phi = scaling_product(stretched)
    theta = np.linspace(0.01, TWO_PI, 37)
    K = 40
    direct = phi.direct(theta[:, None] + TWO_PI * np.arange(-K, K + 1))
    np.testing.assert_allclose(phi.on_translates(theta, K), direct, atol=1e-13)


def test_generic_product_and_tail_deviation():
    p = InfiniteProduct(lambda t: np.exp(1j * t) * np.cos(t), 3.0, 30)
    x = np.linspace(-100, 100, 51)
    np.testing.assert_allclose(p(x), p.direct(x), atol=1e-12)
    assert p.tail_deviation(100.0) < 1e-10


def test_iterated_filter(haar):
    m3 = iterated_filter(haar, 3)
    xi = np.linspace(0, 6, 9)
    np.testing.assert_allclose(m3(xi), haar(xi) * haar(2 * xi) * haar(4 * xi), atol=1e-12)
    with pytest.raises(ValidationError):
        iterated_filter(haar, 0)


def test_scaling_product_requires_normalization():
    with pytest.raises(ValidationError, match="sqrt"):
        scaling_product(Filter(np.array([0.5, 0.5])))


def test_scaling_product_warns_for_non_qmf():
    f = Filter(np.ones(3)).normalize()
    with pytest.warns(RuntimeWarning, match="R1 = 1"):
        scaling_product(f)


@pytest.mark.parametrize("name", ["haar", "daubechies4"])
def test_orthonormal_filters_periodize_to_one(name):
    per = periodize(scaling_product(builtin(name)))
    theta = np.linspace(0.05, TWO_PI - 0.05, 64)
    s, d1, d0 = per.evaluate(theta)
    # the raw sum misses a tail of order 1/K; adding the doubling delta removes it
    assert np.max(np.abs(per.extrapolated(theta) - 1)) < 1e-4
    assert np.max(np.abs(s - 1)) < 1e-3
    assert np.max(np.abs(d1)) < np.max(np.abs(d0))


def test_stretched_haar_does_not_periodize_to_one(stretched):
    per = periodize(scaling_product(stretched))
    theta = np.linspace(0, TWO_PI, 64, endpoint=False)
    assert np.max(np.abs(per.extrapolated(theta) - 1)) > 0.1


def test_periodization_detects_non_decay():
    per = Periodization(lambda x: np.ones(np.shape(x), dtype=complex), 32)
    with pytest.raises(ConvergenceError, match="not decreasing"):
        per.check_convergence()


def test_product_params_validation():
    with pytest.raises(ValidationError):
        ProductParams(terms=5)
    with pytest.raises(ValidationError):
        ProductParams(per_range=8)


def test_peripheral_minus_one_residual_decreases(stretched):
    r256 = peripheral_basis(stretched, -1, ProductParams(40, 256, 1024))
    r512 = peripheral_basis(stretched, -1, ProductParams(40, 512, 1024))
    assert len(r256.functions) == 1
    assert r256.residuals[0] < 1e-3
    assert r256.residuals[0] / r512.residuals[0] >= 1.5
    assert r256.residuals[0] <= 10 * r256.tails[0]


def test_peripheral_minus_one_is_real_and_sign_changing(stretched):
    # g = g_1 - g_2 with both g_k real periodizations of |phi_k|^2
    g = peripheral_basis(stretched, -1, ProductParams(40, 256, 512)).functions[0].samples
    assert np.max(np.abs(g.imag)) < 1e-12
    assert g.real.max() > 0.1 and g.real.min() < -0.1


def test_peripheral_one_has_two_independent_functions(stretched):
    b = peripheral_basis(stretched, 1, ProductParams(40, 256, 1024))
    assert [c.period for c in b.cycles] == [1, 2]
    assert b.gram_det > 0.1
    for r, t in zip(b.residuals, b.tails):
        assert r < 10 * t


def test_peripheral_basis_for_complex_cube_root():
    a = np.zeros(8)
    a[0] = a[7] = 1 / np.sqrt(2)
    f = Filter(a)
    w = np.exp(2j * np.pi / 3)
    b = peripheral_basis(f, w, ProductParams(40, 128, 512))
    assert len(b.functions) == 2
    for r in b.residuals:
        assert r < 1e-3
    fine = b.fine[0]
    rg = apply_grid(f, fine).samples
    np.testing.assert_allclose(rg, w * b.functions[0].samples, atol=1e-3)


def test_peripheral_basis_errors(haar):
    with pytest.raises(ValidationError, match="not 1"):
        peripheral_basis(haar, 0.5)
    with pytest.raises(NotAnEigenvalueError):
        peripheral_basis(haar, -1)


def test_peripheral_phi_requires_m0_cycle(haar, stretched):
    c = cycle_of(haar, Fraction(1, 3), Fraction(2, 3))
    with pytest.raises(ValidationError, match="not an m0-cycle"):
        peripheral_phi(haar, c, 1)
    m0c = detect_m0_cycles(stretched)[1]
    with pytest.raises(ValidationError):
        peripheral_phi(stretched, m0c, 3)
    phi = peripheral_phi(stretched, m0c, 1)
    assert abs(phi(0.0) - 1) < 1e-12


def test_haar_kernel_function(haar):
    c = cycle_of(haar, Fraction(1, 3), Fraction(2, 3))
    kf = kernel_function(haar, c)
    assert kf.sup_residual < 1e-9
    assert abs(kf(np.array(TWO_PI / 3)) - 1) < 1e-14
    assert kf(np.array(2 * TWO_PI / 3)) == 0
    assert kf.delta < np.pi / 2
    # continuity: the sampled slope stays near the tent slope 1/delta times the weight ratio
    assert discrete_slope(kf.sample(8192)) < 10 / kf.delta


@given(st.sampled_from(["haar", "daubechies4", "stretched-haar"]), st.integers(2, 4))
def test_kernel_functions_are_annihilated(name, p):
    f = builtin(name)
    for c in classify_cycles(f, p):
        if c.period != p:
            continue
        try:
            kf = kernel_function(f, c, ProductParams(grid=512))
        except ValidationError:
            continue
        assert kf.sup_residual < 1e-9
        vals = kf(c.angles)
        assert abs(vals[0] - 1) < 1e-14 and np.all(vals[1:] == 0)


def test_kernel_rejects_short_cycle(haar):
    c = cycle_of(haar, 0)
    with pytest.raises(ValidationError, match="cycle too short"):
        kernel_function(haar, c)


def test_kernel_rejects_bad_delta(haar):
    c = cycle_of(haar, Fraction(1, 3), Fraction(2, 3))
    with pytest.raises(ValidationError, match="inadmissible"):
        kernel_function(haar, c, delta=2.0)


def test_h_series_cycle_values(haar):
    kf = kernel_function(haar, cycle_of(haar, Fraction(1, 3), Fraction(2, 3)))
    h = h_series(kf, 0.5)
    np.testing.assert_allclose(h.cycle_values(), [4 / 3, 2 / 3], atol=1e-9)
    assert h.residual < 1e-8


@given(
    st.complex_numbers(max_magnitude=0.8, allow_nan=False, allow_infinity=False),
    st.sampled_from([(1, 3), (1, 7)]),
)
def test_h_series_matches_cycle_formula(lam, start):
    f = builtin("haar")
    c = [c for c in classify_cycles(f, 3) if c.turns[0] == Fraction(*start)][0]
    h = h_series(kernel_function(f, c, ProductParams(grid=512)), lam, ProductParams(grid=512))
    p = c.period
    expected = np.array([lam ** ((p - i) % p) for i in range(p)]) / (1 - lam**p)
    np.testing.assert_allclose(h.cycle_values(), expected, atol=1e-9)
    assert h.residual < 1e-8


def test_h_series_at_zero_is_kernel(haar):
    kf = kernel_function(haar, cycle_of(haar, Fraction(1, 3), Fraction(2, 3)))
    h = h_series(kf, 0)
    assert h.n_terms == 1
    th = np.linspace(0, TWO_PI, 100)
    np.testing.assert_allclose(h(th), kf(th))


def test_h_series_float_and_index_paths_agree(haar):
    kf = kernel_function(haar, cycle_of(haar, Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)))
    h = h_series(kf, 0.3 + 0.2j)
    # a non power-of-two grid keeps orbits away from the fixed point
    g = h.sample(3 * 256)
    np.testing.assert_allclose(g.samples, h(g.angles), atol=1e-9)


def test_h_series_rejects_unit_modulus(haar):
    kf = kernel_function(haar, cycle_of(haar, Fraction(1, 3), Fraction(2, 3)))
    with pytest.raises(ValidationError):
        h_series(kf, 1.0)


def test_h_series_warns_when_capped(haar):
    kf = kernel_function(haar, cycle_of(haar, Fraction(1, 3), Fraction(2, 3)))
    with pytest.warns(RuntimeWarning, match="capped"):
        h_series(kf, 0.95)


@pytest.mark.parametrize("p", range(1, 7))
@pytest.mark.parametrize("lam", [0.5, 0.4 + 0.3j, 0.9j])
def test_independence_determinant(p, lam):
    A, det = independence_matrix(p, lam)
    assert abs(leibniz_det(A) - det) < 1e-10
    assert abs(det - (1 - lam**p) ** (p - 1)) < 1e-10


def test_independence_matrix_rejects_zero_period():
    with pytest.raises(ValidationError):
        independence_matrix(0, 0.5)


@pytest.mark.parametrize("turns", [(Fraction(1, 3), Fraction(2, 3)), (Fraction(1, 7), Fraction(2, 7), Fraction(4, 7))])
def test_h_family_is_independent(haar, turns):
    c = cycle_of(haar, *turns)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out = h_family_gram(haar, c, 0.9, ProductParams(grid=512))
    assert out["cond"] < 1e12
    assert abs(out["det"]) > 0


def test_verification_grid():
    assert verification_grid(1024, 2) == 1536
    assert verification_grid(1000, 2) == 1000
    assert verification_grid(243, 3) == 324


def test_discrete_slope_of_sine():
    g = GridFn(np.sin(np.linspace(0, TWO_PI, 4096, endpoint=False)))
    assert abs(discrete_slope(g) - 1) < 1e-3
