import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.interpolate import BSpline

from frolov.corpus import (NAMES, SmoothnessSpec, box_indicator, bspline_tensor, cardinal_bspline,
                           describe, format_fn_spec, get_integrand, hat_tensor, parse_fn_spec)

FREQS = np.linspace(-9.5, 9.5, 20)


def fourier_by_quadrature(fn1, xi, breaks, panels=16, order=24):
    """int_0^1 fn1(x) exp(-2 pi i xi x) dx on panels between breakpoints."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.unique(np.concatenate([np.linspace(a, b, panels + 1)
                                      for a, b in zip(breaks[:-1], breaks[1:])]))
    a, b = edges[:-1, None], edges[1:, None]
    nodes = ((a + b) / 2 + (b - a) / 2 * x).ravel()
    weights = ((b - a) / 2 * w).ravel()
    vals = fn1(nodes)
    return np.array([np.sum(weights * vals * np.exp(-2j * np.pi * k * nodes)) for k in xi])


def one_dim(f):
    return lambda x: f(np.c_[x])


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_cardinal_bspline_matches_scipy(r):
    x = np.linspace(-0.5, r + 0.5, 801)
    want = BSpline.basis_element(np.arange(r + 1), extrapolate=False)(x)
    want = np.nan_to_num(want)
    got = cardinal_bspline(r, x)
    interior = (x > 0) & (x < r)
    assert_allclose(got[interior], want[interior], atol=1e-13)
    assert np.all(got[~((x >= 0) & (x <= r))] == 0)


@pytest.mark.parametrize("f,breaks", [
    (bspline_tensor(1, 2), [0, 0.5, 1]),
    (bspline_tensor(1, 3), [0, 1 / 3, 2 / 3, 1]),
    (bspline_tensor(1, 4), [0, 0.25, 0.5, 0.75, 1]),
    (hat_tensor(1), [0, 0.5, 1]),
    (box_indicator(1), [0, 0.5, 1]),
    (box_indicator(1, 0.2, 0.9), [0, 0.2, 0.9, 1]),
])
def test_fourier_profile_matches_quadrature(f, breaks):
    want = fourier_by_quadrature(one_dim(f), FREQS, np.array(breaks))
    got = f.fourier(FREQS[:, None])
    assert_allclose(got, want, atol=1e-7, rtol=0)
    assert_allclose(f.fourier.modulus_squared(FREQS[:, None]), np.abs(want) ** 2, atol=1e-7)


def test_fourier_profile_tensorizes():
    f1, f2 = hat_tensor(1), hat_tensor(2)
    xi = np.array([[0.3, -1.7], [2.0, 0.5], [0.0, 4.25]])
    assert_allclose(f2.fourier(xi), f1.fourier(xi[:, :1]) * f1.fourier(xi[:, 1:]), rtol=1e-14)
    g = box_indicator(2, [0.1, 0.2], [0.6, 0.5])
    assert_allclose(g.fourier(np.zeros((1, 2))).real, 0.5 * 0.3, rtol=1e-14)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_profile_at_zero_is_integral(name, d):
    f = get_integrand(name, d)
    if f.fourier is not None:
        assert_allclose(f.fourier(np.zeros((1, d)))[0], f.exact_integral, rtol=1e-14)


@pytest.mark.parametrize("name", NAMES)
def test_exact_integral_by_quadrature(name):
    f = get_integrand(name, 1)
    breaks = np.array([0, 1 / 3, 0.5, 2 / 3, 1])
    got = fourier_by_quadrature(one_dim(f), [0.0], breaks)[0].real
    assert_allclose(got, f.exact_integral, rtol=1e-12)
    assert_allclose(get_integrand(name, 3).exact_integral, f.exact_integral ** 3, rtol=1e-14)


@pytest.mark.parametrize("name", NAMES)
def test_support_flag(name):
    f = get_integrand(name, 2)
    x = np.random.default_rng(0).uniform(-1, 2, (4000, 2))
    outside = ~np.all((x >= 0) & (x <= 1), axis=1)
    vals = f(x[outside])
    if f.support_in_domain:
        assert np.all(vals == 0)
    else:
        assert np.any(vals != 0)


def test_smoothness_metadata():
    assert bspline_tensor(2, 3).smoothness.S == (2.45, 2.45)
    assert hat_tensor(2).smoothness.s_min == pytest.approx(1.45)
    assert box_indicator(2).smoothness.s_min == pytest.approx(0.45)
    assert math.isinf(get_integrand("bump_tensor", 2).smoothness.s_min)


def test_smoothness_spec_derived():
    spec = SmoothnessSpec(S=(1.0, 2.0, 2.0), p=1.5, mode="isotropic")
    assert spec.g == pytest.approx(0.5)
    assert spec.s_min == 1.0
    assert spec.sigma_p == pytest.approx(1 / 1.5 - 0.5)
    assert SmoothnessSpec(S=(0.0, 1.0), p=2).g == 0.0
    with pytest.raises(ValueError):
        SmoothnessSpec(S=(-1.0,), p=2)
    with pytest.raises(ValueError):
        SmoothnessSpec(S=(1.0,), p=0.5)
    with pytest.raises(ValueError):
        SmoothnessSpec(S=(1.0,), p=2, mode="weird")


def test_get_integrand_errors():
    with pytest.raises(KeyError):
        get_integrand("nope", 2)
    with pytest.raises(ValueError):
        get_integrand("hat_tensor", 2, {"r": 3})
    with pytest.raises(ValueError):
        get_integrand("box_indicator", 2, {"a": 0.6, "b": 0.5})
    with pytest.raises(ValueError):
        get_integrand("box_indicator", 3, {"a": [0.1, 0.2]})
    with pytest.raises(ValueError):
        get_integrand("bspline_tensor", 2, {"r": 0})


def test_parse_fn_spec():
    assert parse_fn_spec("hat_tensor") == ("hat_tensor", {})
    assert parse_fn_spec("bspline_tensor:r=3") == ("bspline_tensor", {"r": 3})
    assert parse_fn_spec("box_indicator:a=0.1;0.2,b=0.5") == (
        "box_indicator", {"a": [0.1, 0.2], "b": 0.5})
    with pytest.raises(ValueError):
        parse_fn_spec("box_indicator:a")


@settings(max_examples=50, deadline=None)
@given(r=st.integers(1, 6), a=st.lists(st.floats(0, 0.4), min_size=2, max_size=2))
def test_fn_spec_round_trip(r, a):
    for name, params in [("bspline_tensor", {"r": r}), ("box_indicator", {"a": a, "b": 0.5})]:
        assert parse_fn_spec(format_fn_spec(name, params)) == (name, params)


def test_describe_lists_every_name():
    rows = describe()
    assert [r["name"] for r in rows] == list(NAMES)
    poly = rows[NAMES.index("poly_nobc")]
    assert poly["support_in_domain"] is False and poly["fourier"] is None
