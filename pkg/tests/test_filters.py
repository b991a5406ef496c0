import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavegalerkin import (
    BUILTIN_NAMES,
    Filter,
    ValidationError,
    autocorrelation,
    builtin,
    load_filter,
    modulus_squared,
    qmf_residual,
    save_filter,
    zeros,
)

TWO_PI = 2 * np.pi

coeff_arrays = arrays(
    complex,
    st.integers(1, 7),
    elements=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
).filter(lambda a: np.any(np.abs(a) > 1e-3))


def direct_sum(coeffs, offset, xi):
    k = np.arange(offset, offset + len(coeffs))
    return np.exp(-1j * np.multiply.outer(xi, k)) @ coeffs


def brute_autocorrelation(a):
    # b_n = sum_k a_k conj(a_{k-n}) with plain loops
    L = len(a)
    return {n: sum(a[k] * np.conj(a[k - n]) for k in range(L) if 0 <= k - n < L) for n in range(-L + 1, L)}


@pytest.mark.parametrize("name", ["haar", "daubechies4", "stretched-haar"])
def test_builtin_filters_are_qmf(name):
    assert qmf_residual(builtin(name)) < 1e-12


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_are_normalized(name):
    f = builtin(name)
    assert abs(f(0.0) - np.sqrt(f.scale)) < 1e-12


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_pointwise_identity_on_builtins(name):
    f = builtin(name)
    xi = np.linspace(0, TWO_PI, 513)
    N = f.scale
    total = sum(modulus_squared(f, (xi + TWO_PI * k) / N) for k in range(N))
    np.testing.assert_allclose(total, N, atol=1e-12)


@given(coeff_arrays, st.integers(-3, 3), st.floats(-20, 20))
def test_evaluate_matches_direct_sum(a, offset, xi):
    f = Filter(a, 2, offset)
    assert abs(f(xi) - direct_sum(a, offset, xi)) < 1e-9 * (1 + np.abs(a).sum())


@given(coeff_arrays, st.floats(-10, 10))
def test_filter_is_two_pi_periodic(a, xi):
    f = Filter(a, 3, -1)
    assert abs(f(xi) - f(xi + TWO_PI)) < 1e-9 * (1 + np.abs(a).sum())


@given(coeff_arrays)
def test_autocorrelation_matches_loops(a):
    b = autocorrelation(Filter(a))
    ref = brute_autocorrelation(a)
    for n, v in ref.items():
        assert abs(b[n] - v) < 1e-10
    assert b[len(a) + 2] == 0


@given(coeff_arrays)
def test_autocorrelation_is_hermitian_and_reproduces_modulus(a):
    f = Filter(a, 2, 1)
    b = autocorrelation(f)
    np.testing.assert_allclose(b.coeffs[::-1], b.coeffs.conj(), atol=1e-12)
    xi = np.linspace(0, TWO_PI, 37)
    np.testing.assert_allclose(b(xi), modulus_squared(f, xi), atol=1e-9 * (1 + np.abs(a).sum() ** 2))


@given(coeff_arrays, st.integers(2, 4))
def test_residual_bounded_by_pointwise_deviation(a, N):
    # the residual collects Fourier coefficients of R1 - 1, each bounded by its sup norm
    f = Filter(a, N)
    th = np.linspace(0, TWO_PI, 4096, endpoint=False)
    r1 = sum(modulus_squared(f, (th + TWO_PI * k) / N) for k in range(N)) / N
    assert qmf_residual(f) <= np.max(np.abs(r1 - 1)) + 1e-9


def test_non_qmf_filter_has_positive_residual():
    f = Filter(np.array([1.0, 1.0, 1.0]), 2).normalize()
    assert qmf_residual(f) > 0.1


@given(coeff_arrays.filter(lambda a: abs(a.sum()) > 1e-2), st.integers(2, 5))
def test_normalize_sets_value_at_zero(a, N):
    f = Filter(a, N).normalize()
    assert abs(f(0.0) - np.sqrt(N)) < 1e-9


def test_derivative_matches_finite_difference(d4):
    xi = np.linspace(-3, 3, 11)
    h = 1e-6
    fd = (d4(xi + h) - d4(xi - h)) / (2 * h)
    np.testing.assert_allclose(d4.derivative(xi), fd, atol=1e-8)


def test_haar_zero_at_pi(haar):
    z = zeros(haar)
    assert len(z) == 1
    assert abs(z[0] - np.pi) < 1e-9


def test_stretched_haar_zeros(stretched):
    # 1 + e^{-3 i xi} vanishes where 3 xi = pi mod 2 pi
    z = zeros(stretched)
    np.testing.assert_allclose(z, [np.pi / 3, np.pi, 5 * np.pi / 3], atol=1e-9)


def test_daubechies_double_zero(d4):
    # a double zero is only located to about sqrt(machine eps)
    z = zeros(d4)
    assert len(z) == 1
    assert abs(z[0] - np.pi) < 1e-7


@given(coeff_arrays)
def test_zero_count_respects_degree_bound(a):
    f = Filter(a)
    zs = zeros(f, tol=1e-9)
    assert len(zs) <= max(2 * f.width, 0)
    for x in zs:
        assert abs(f(x)) < 1e-9


def test_dict_round_trip(d4):
    g = Filter.from_dict(json.loads(json.dumps(d4.to_dict())))
    np.testing.assert_array_equal(g.coeffs, d4.coeffs)
    assert (g.scale, g.offset, g.name) == (d4.scale, d4.offset, d4.name)


def test_file_round_trip(tmp_path, stretched):
    path = tmp_path / "f.json"
    save_filter(stretched, path)
    g = load_filter(path)
    np.testing.assert_array_equal(g.coeffs, stretched.coeffs)


def test_real_coefficients_accepted():
    f = Filter.from_dict({"scale": 2, "coefficients": [0.5, 0.5]})
    assert f(0.0) == 1.0


@pytest.mark.parametrize(
    "payload, match",
    [
        ({"scale": 1, "coefficients": [[1, 0]]}, "scale"),
        ({"scale": 2, "coefficients": []}, "no coefficients"),
        ({"scale": 2, "coefficients": [[1, 0, 0]]}, r"\[re, im\]"),
        ({"coefficients": [[1, 0]]}, "missing"),
        ({"scale": 2.5, "coefficients": [[1, 0]]}, "scale"),
    ],
)
def test_malformed_filter_dicts(payload, match):
    with pytest.raises(ValidationError, match=match):
        Filter.from_dict(payload)


def test_zero_filter_rejected():
    with pytest.raises(ValidationError):
        Filter(np.zeros(3))


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(ValidationError, match="no such filter file"):
        load_filter(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_filter(bad)


def test_unknown_builtin():
    with pytest.raises(ValidationError, match="unknown builtin"):
        builtin("coiflet")
