import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import composite_gl
from frolov.corpus import NAMES, get_integrand
from frolov.cubature import randomized_frolov
from frolov.generator import build_generator, scale
from frolov.lattice import randomization_for
from frolov.transform import (bump, normalization_constant, psi, psi_prime,
                              randomized_frolov_cube, transform_T)


def mp_bump(t):
    return mp.e ** (-1 / (t * (1 - t)))


@pytest.fixture(scope="module")
def mp_c():
    with mp.workdps(30):
        return mp.quad(mp_bump, [0, 0.25, 0.5, 0.75, 1])


def test_normalization_matches_mpmath(mp_c):
    assert_allclose(normalization_constant(), float(mp_c), rtol=2e-16)
    assert_allclose(normalization_constant(), 0.0070298584066096562, rtol=1e-16)


@pytest.mark.parametrize("t", [0.01, 0.1, 0.3, 0.5, 0.62, 0.9, 0.999])
def test_psi_matches_mpmath(t, mp_c):
    with mp.workdps(30):
        want = mp.quad(mp_bump, [0, t / 2, t]) / mp_c
    # absolute accuracy near the flat ends is what T needs
    assert_allclose(psi(t), float(want), rtol=1e-14, atol=1e-40)


def test_psi_endpoints_and_center():
    assert psi(0.0) == 0.0 and psi(1.0) == 1.0
    assert psi(-3.0) == 0.0 and psi(7.0) == 1.0
    assert abs(psi(0.5) - 0.5) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_psi_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert psi(lo) <= psi(hi)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0, 1))
def test_psi_symmetry(t):
    assert abs(psi(1 - t) - (1 - psi(t))) <= 1e-15


def test_psi_prime_integrates_to_one():
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(0, 1, 129)
    total = sum(math.fsum((b - a) / 2 * w * psi_prime(a + (b - a) / 2 * (x + 1)))
                for a, b in zip(edges[:-1], edges[1:]))
    assert abs(total - 1) <= 1e-9


@pytest.mark.parametrize("a,b", [(0.05, 0.2), (0.3, 0.31), (0.4, 0.9)])
def test_psi_prime_is_derivative(a, b):
    x, w = np.polynomial.legendre.leggauss(40)
    mid, half = (a + b) / 2, (b - a) / 2
    increment = half * math.fsum(w * psi_prime(mid + half * x))
    assert_allclose(psi(b) - psi(a), increment, rtol=1e-13)


def test_bump_vanishes_outside():
    assert_allclose(bump([-1, 0, 1, 2]), 0)
    assert bump(0.5) == pytest.approx(math.exp(-4))


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("d", [1, 2])
def test_transform_preserves_integral(name, d):
    f = get_integrand(name, d)
    Tf = transform_T(f)
    assert Tf.support_in_domain and Tf.exact_integral == f.exact_integral
    assert abs(composite_gl(Tf, d) - f.exact_integral) <= 1e-6


@pytest.mark.parametrize("name", NAMES)
def test_transform_vanishes_on_boundary(name):
    Tf = transform_T(get_integrand(name, 2))
    s = np.linspace(0, 1, 101)
    faces = np.concatenate([np.c_[s, 0 * s], np.c_[s, 0 * s + 1],
                            np.c_[0 * s, s], np.c_[0 * s + 1, s]])
    assert np.all(Tf(faces) == 0)
    near = np.c_[s, np.full_like(s, 1e-3)]
    assert np.max(np.abs(Tf(near))) < 1e-300


def test_boundary_free_estimator_matches_composition():
    f = get_integrand("poly_nobc", 2)
    gen = scale(build_generator(2), 300)
    rand = randomization_for(2, 6, 0)
    a = randomized_frolov_cube(f, gen, rand).value
    b = randomized_frolov(transform_T(f), gen, rand).value
    assert a == b
