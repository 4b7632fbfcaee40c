import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodnls.fractional import (QuadratureScheme, TransverseFunction, ball_average_fractional,
                                chain_bound_check, hs_norm, leibniz_ratio, lp_norm, maximal_operator,
                                pointwise_max_check, random_trig_poly, spectral_fractional)
from prodnls.grid import TorusSpectrum

T32 = TorusSpectrum(1, (1.0,), 32)


def mode(torus, m, amp=1.0):
    return TransverseFunction.from_function(torus, lambda y: amp * np.exp(1j * m * y))


def test_spectral_fractional_on_modes():
    assert np.allclose(spectral_fractional(mode(T32, 1), 0.37).values, mode(T32, 1).values, atol=1e-14)
    const = TransverseFunction(np.full(32, 2.0 + 0j), T32)
    assert np.allclose(spectral_fractional(const, 0.5).values, 0, atol=1e-15)
    assert np.allclose(spectral_fractional(mode(T32, 2), 1.0).values, 2 * mode(T32, 2).values, atol=1e-13)
    with pytest.raises(ValueError):
        spectral_fractional(const, 0.0)


def test_ball_average_constant_and_single_mode():
    const = TransverseFunction(np.full(32, 1.5 + 0j), T32)
    assert not ball_average_fractional(const, 0.5).values.any()
    out = ball_average_fractional(mode(T32, 1), 0.5).values
    assert np.ptp(out) < 1e-12 * out.max()
    with pytest.raises(ValueError):
        ball_average_fractional(const, 1.0)


def test_ball_average_commutes_with_lattice_shift(rng):
    f = random_trig_poly(T32, rng, degree=6)
    a = ball_average_fractional(f, 0.4).values
    b = ball_average_fractional(f.with_values(np.roll(f.values, 5)), 0.4).values
    assert np.allclose(np.roll(a, 5), b, rtol=1e-12)


def test_ball_average_two_dimensional_torus():
    t2 = TorusSpectrum(2, (1.0, 0.5), 8)
    f = TransverseFunction.from_function(t2, lambda y1, y2: np.exp(1j * (y1 + 2 * y2)))
    out = ball_average_fractional(f, 0.5).values
    assert out.shape == (8, 8) and np.ptp(out) < 1e-12 * out.max()


def test_quadrature_scheme():
    q = QuadratureScheme.for_torus(T32)
    assert q.t_min == pytest.approx(math.pi / 32) and q.t_max == pytest.approx(math.pi)
    assert len(q.nodes) == 64 and np.all(np.diff(np.log(q.nodes)) > 0)
    with pytest.raises(ValueError):
        QuadratureScheme(1.0, 0.5)


# -- maximal operator -------------------------------------------------------------------

def arc(N):
    torus = TorusSpectrum(1, (1.0,), N)
    y = torus.axis_nodes(0)
    d = np.minimum(y, 2 * np.pi - y)
    return torus, TransverseFunction((d < np.pi / 2).astype(complex), torus), d


@pytest.mark.parametrize("N", [64, 128])
def test_half_arc(N):
    torus, f, d = arc(N)
    M = maximal_operator(f).values
    antipode = N // 2
    assert abs(M[antipode] - 0.5) <= 2 * np.pi / N
    assert np.all(M[d < np.pi / 2] == 1.0)


def test_maximal_constant():
    f = TransverseFunction(np.full(32, -0.7 + 0.2j), T32)
    assert np.allclose(maximal_operator(f).values, abs(-0.7 + 0.2j), rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_maximal_invariants(seed, c):
    rng = np.random.default_rng(seed)
    f = random_trig_poly(T32, rng, degree=5)
    a = np.abs(f.values)
    M = maximal_operator(f).values
    assert np.all(M <= a.max() * (1 + 1e-12)) and np.all(M >= a.mean() * (1 - 1e-12))
    assert np.allclose(maximal_operator(f.with_values(c * f.values)).values, abs(c) * M, rtol=1e-10, atol=1e-300)
    g = f.with_values(f.values * (1 + rng.uniform(0, 1, 32)))
    assert np.all(maximal_operator(g).values >= M * (1 - 1e-12))


# -- chain and pointwise bounds -----------------------------------------------------------

def test_chain_bound_zero_and_homogeneity():
    zero = TransverseFunction(np.zeros(32, complex), T32)
    assert chain_bound_check(zero, 0.8, 0.3, 0.6, 2, math.inf, 2).lhs == 0
    r1 = chain_bound_check(mode(T32, 1) , 0.8, 0.3, 0.6, 2, math.inf, 2)
    f = TransverseFunction.from_function(T32, lambda y: np.exp(1j * y) + 0.4 * np.exp(-2j * y))
    a = chain_bound_check(f, 0.8, 0.3, 0.6, 2, math.inf, 2).ratio
    b = chain_bound_check(f.with_values(3.7 * f.values), 0.8, 0.3, 0.6, 2, math.inf, 2).ratio
    # |a e^{iy}|^μ is constant, so its derivative vanishes up to roundoff
    assert a == pytest.approx(b, rel=1e-10) and r1.lhs < 1e-12


def test_chain_parameter_checks():
    f = mode(T32, 1)
    with pytest.raises(ValueError):
        chain_bound_check(f, 1.2, 0.3, 0.6, 2, math.inf, 2)
    with pytest.raises(ValueError):
        chain_bound_check(f, 0.8, 0.3, 0.3, 2, math.inf, 2)
    with pytest.raises(ValueError):
        chain_bound_check(f, 0.8, 0.3, 0.6, 2, 4, 2)


def test_chain_bound_random_sweep_stable():
    maxima = []
    for N in (32, 64):
        torus = TorusSpectrum(1, (1.0,), N)
        rng = np.random.default_rng(3)
        ratios = [chain_bound_check(random_trig_poly(torus, rng, degree=6), 0.8, 0.3, 0.6, 2, math.inf, 2).ratio
                  for _ in range(200)]
        maxima.append(max(ratios))
    assert np.isfinite(maxima).all() and max(maxima) / min(maxima) <= 1.5


def test_pointwise_check():
    const = TransverseFunction(np.full(32, 2.0 + 0j), T32)
    rep = pointwise_max_check(const, 0.8, 0.3, 0.6)
    assert rep.violations == 0 and rep.max_ratio == 0
    f = TransverseFunction.from_function(T32, lambda y: 1.0 + 0.5 * np.cos(y))
    rep = pointwise_max_check(f, 0.8, 0.3, 0.6)
    assert np.isfinite(rep.max_ratio) and rep.violations == 0 and np.isfinite(rep.max_ratio_literal)


def test_pointwise_random_sweep_stable():
    maxima = []
    for N in (32, 64):
        torus = TorusSpectrum(1, (1.0,), N)
        rng = np.random.default_rng(5)
        reps = [pointwise_max_check(random_trig_poly(torus, rng, degree=6), 0.8, 0.3, 0.6) for _ in range(200)]
        assert sum(r.violations for r in reps) == 0
        maxima.append(max(r.max_ratio for r in reps))
    assert max(maxima) / min(maxima) <= 1.5


# -- Leibniz ------------------------------------------------------------------------------

@pytest.mark.parametrize("sigma", [0.3, 0.8, 1.2])
def test_leibniz_modulus_constant(sigma):
    assert leibniz_ratio(mode(T32, 3, 0.6), 0.5, sigma) == pytest.approx(1.0, rel=1e-12)
    const = TransverseFunction(np.full(32, 2.5 + 0j), T32)
    assert leibniz_ratio(const, 0.5, sigma) == pytest.approx(1.0, rel=1e-12)


def test_leibniz_errors():
    with pytest.raises(ValueError):
        leibniz_ratio(TransverseFunction(np.zeros(32, complex), T32), 0.5, 0.3)
    with pytest.raises(ValueError):
        leibniz_ratio(mode(T32, 1), 0.0, 0.3)


def test_corollary_modulus_form_bounded():
    rng = np.random.default_rng(8)
    vals = [leibniz_ratio(random_trig_poly(T32, rng, degree=8), 0.5, 0.8, form="modulus") for _ in range(100)]
    assert np.isfinite(vals).all() and max(vals) < 10


def test_norm_helpers():
    f = mode(T32, 2, 0.5)
    assert lp_norm(f, 2) == pytest.approx(0.5 * math.sqrt(2 * math.pi), rel=1e-12)
    assert lp_norm(f, math.inf) == pytest.approx(0.5)
    assert hs_norm(f, 1.0) == pytest.approx(0.5 * math.sqrt(2 * math.pi * 5), rel=1e-12)


def test_random_poly_degree_guard(rng):
    with pytest.raises(ValueError):
        random_trig_poly(TorusSpectrum(1, (1.0,), 16), rng, degree=8)
