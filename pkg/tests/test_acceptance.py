"""Acceptance criteria 1-12; each test prints one PASS/FAIL line through ``record``."""
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from prodnls.evolution import (EvolutionConfig, ball_spec, contraction_factor, evolve, free_series,
                               picard_iterate)
from prodnls.exponents import (INF, ExponentPair, NonlinearityContext, derived_pair, is_acceptable,
                               is_admissible, scan_witnesses, solve_system, system_violations)
from prodnls.fields import Field, NormSpec, energy, mass, mixed_norm, sobolev_norm
from prodnls.fractional import (QuadratureScheme, TransverseFunction, ball_average_fractional, leibniz_ratio,
                                lp_norm, maximal_operator, random_trig_poly, spectral_fractional)
from prodnls.grid import BoxGrid, ProductGrid, TorusSpectrum, recurrence_horizon
from prodnls.scattering import dispersive_decay_fit, extract_wave_data, strichartz_ratios

from test_exponents import oracle_ok

EPS = (0.0125, 0.025, 0.05, 0.1)


def gauss_data(grid, eps):
    return Field.from_function(grid, lambda x, y: eps * np.exp(-x ** 2 / 2) * np.exp(1j * y))


def l2(grid, a):
    return float(np.sqrt(np.sum(np.abs(a) ** 2) * grid.cell_volume))


# -- 1, 2: exponents -------------------------------------------------------------------

def test_criterion_1_exponent_witness(record):
    t0 = time.perf_counter()
    sys = solve_system(NonlinearityContext(2, 1, F(3)))
    got = (sys.pair.q, sys.pair.r, sys.dual_pair.q, sys.dual_pair.r)
    lp = tuple(derived_pair(sys.ctx, sys.pair))
    ok = got == (F(15, 2), 5, F(15, 7), 5) and lp == (F(10, 3), 5) and not system_violations(sys.ctx, *got)
    counts = {}
    for n, mu in [(1, F(4)), (1, F(5)), (2, F(2)), (2, F(3)), (2, F(7, 2))]:
        ctx = NonlinearityContext(n, 1, mu)
        ws = list(scan_witnesses(ctx, 30))
        counts[(n, str(mu))] = len(ws)
        ok &= bool(ws)
        for w in ws:
            ex = (*w.pair, *w.dual_pair)
            ok &= not system_violations(ctx, *ex) and oracle_ok(n, mu, *ex)
    dt = time.perf_counter() - t0
    ok &= dt < 60
    assert record(1, "exponent witness", ok, f"({', '.join(map(str, got))}) -> ({', '.join(map(str, lp))}); "
                  f"witnesses {counts}; {dt:.1f}s")


def test_criterion_2_admissible_subset_of_acceptable(record):
    t0 = time.perf_counter()
    recips = {F(a, b) for b in range(1, 31) for a in range(0, b // 2 + 1)}  # 1/exponent in [0, 1/2]
    values = [INF if x == 0 else 1 / x for x in recips]
    admissible, failures = 0, []
    for n in (1, 2, 3):
        for l in values:
            for p in values:
                pair = ExponentPair(l, p)
                if is_admissible(n, pair):
                    admissible += 1
                    if not is_acceptable(n, pair):
                        failures.append((n, l, p))
    dt = time.perf_counter() - t0
    ok = admissible > 0 and not failures and dt < 60
    assert record(2, "admissible within acceptable", ok,
                  f"{admissible} admissible lattice pairs, {len(failures)} failures; {dt:.1f}s")


# -- 3, 4: split-step ------------------------------------------------------------------

def test_criterion_3_plane_wave(record):
    g = ProductGrid(BoxGrid(1, 4 * np.pi, 64), TorusSpectrum(1, (1.0,), 8))
    A, m, mu = 0.7, 2, 4
    xi = g.box.wavenumbers[3]
    x, y = g.coords()
    f = Field.from_function(g, lambda x, y: A * np.exp(1j * (xi * x + m * y)))
    worst = 0.0
    for lam in (-1.0, 1.0):
        exact = A * np.exp(1j * (xi * x + m * y - (xi ** 2 + m ** 2 - lam * A ** mu)))
        for dt in (1e-2, 1e-3):
            u = evolve(f, EvolutionConfig(NonlinearityContext(1, 1, mu, lam=lam), dt, 1.0,
                                          sample_stride=int(round(1 / dt))))
            worst = max(worst, l2(g, u.data[-1] - exact) / l2(g, exact))
    assert record(3, "plane-wave exactness", worst < 1e-10, f"max relative L2 error {worst:.2e}")


def test_criterion_4_conservation(record):
    t0 = time.perf_counter()
    g = ProductGrid(BoxGrid(1, 32.0, 256), TorusSpectrum(1, (1.0,), 16))
    f = Field.from_function(g, lambda x, y: 0.25 * np.exp(-x ** 2 / 2) * (np.exp(1j * y) + 0.5 * np.exp(-2j * y)))
    drifts, ratios = [], []
    for lam in (-1.0, 1.0):
        ctx = NonlinearityContext(1, 1, 4, lam=lam)
        edrift = []
        for dt in (0.02, 0.01):
            u = evolve(f, EvolutionConfig(ctx, dt, 20.0, sample_stride=int(round(0.5 / dt))))
            m = np.array([mass(u[j]) for j in range(len(u))])
            e = np.array([energy(u[j], lam, 4) for j in range(len(u))])
            drifts.append(np.max(np.abs(m - m[0])) / m[0])
            edrift.append(np.max(np.abs(e - e[0])))
        ratios.append(edrift[0] / edrift[1])
    dt = time.perf_counter() - t0
    ok = max(drifts) < 1e-10 and all(3.5 <= r <= 4.5 for r in ratios) and dt < 120
    assert record(4, "conservation", ok, f"mass drift {max(drifts):.2e}, energy ratios "
                  f"{', '.join(f'{r:.3f}' for r in ratios)}; {dt:.1f}s")


# -- 5: dispersion ------------------------------------------------------------------------

def test_criterion_5_gaussian_decay(record):
    g = ProductGrid(BoxGrid(1, 128.0, 4096), TorusSpectrum(1, (1.0,), 4))
    f = Field.from_function(g, lambda x, y: np.exp(-x ** 2 / 2) + 0 * y)
    hor = recurrence_horizon(g, 4.0)
    ts = np.linspace(0, hor / 4, 41)
    u = free_series(f, ts)
    i0 = g.box.N // 2
    err = max(abs(abs(u.data[j][i0, 0]) - (1 + 4 * t * t) ** -0.25) for j, t in enumerate(ts))
    slope, _ = dispersive_decay_fit(f, np.geomspace(2, hor, 16), hor)
    ok = err < 1e-4 and abs(slope + 0.5) <= 0.05
    assert record(5, "Gaussian dispersive decay", ok,
                  f"horizon {hor:g}, max error {err:.1e} for t <= {hor / 4:g}, slope {slope:.3f}")


# -- 6: Picard -----------------------------------------------------------------------------

def test_criterion_6_fixed_point(record):
    g = ProductGrid(BoxGrid(1, 32.0, 256), TorusSpectrum(1, (1.0,), 8))
    f = gauss_data(g, 0.05)
    cfg = EvolutionConfig(NonlinearityContext(1, 1, 4, lam=-1.0, sigma=0.75), 2e-3, 1.0)
    rep = picard_iterate(f, cfg, tol=1e-10, max_iter=8)
    u = evolve(f, cfg)
    err = max(l2(g, rep.series.data[j] - u.data[j]) for j in range(len(u)))
    ok = rep.converged and rep.iterations <= 8 and err < 1e-4
    assert record(6, "fixed-point consistency", ok,
                  f"{rep.iterations} iterations, distances {[f'{d:.1e}' for d in rep.distances]}, "
                  f"sup-t L2 gap {err:.1e}")


# -- 7, 9: ε sweep -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    g = ProductGrid(BoxGrid(1, 32.0, 256), TorusSpectrum(1, (1.0,), 8))
    ctx = NonlinearityContext(1, 1, 4, lam=-1.0, sigma=0.75)
    cfg = EvolutionConfig(ctx, 1e-2, 1.0)
    factors, ratios = [], []
    for eps in EPS:
        f = gauss_data(g, eps)
        radius = 0.5 * mixed_norm(free_series(f, cfg.sample_times()), ball_spec(ctx))
        factors.append(contraction_factor(f, cfg, radius, trials=8, seed=1).max)
        ratios.append(strichartz_ratios(evolve(f, cfg), ctx))
    return factors, ratios, time.perf_counter() - t0


def test_criterion_7_contraction_scaling(record, sweep):
    factors, _, dt = sweep
    slope = float(np.polyfit(np.log(EPS), np.log(factors), 1)[0])
    at05 = factors[EPS.index(0.05)]
    ok = at05 < 0.5 and abs(slope - 4) <= 1 and dt < 600
    assert record(7, "contraction scaling", ok,
                  f"factors {[f'{x:.2e}' for x in factors]}, slope {slope:.3f}, {dt:.1f}s")


def test_criterion_9_strichartz_smallness(record, sweep):
    _, ratios, _ = sweep
    key = (F(6), F(6))
    vals = [r[key] for r in ratios]
    spread = max(vals) / min(vals)
    ok = all(next(iter(r)) == key for r in ratios) and spread <= 2
    assert record(9, "Strichartz smallness", ok,
                  f"(6,6) ratios {[f'{v:.5f}' for v in vals]}, spread {spread:.4f}")


# -- 8: scattering -------------------------------------------------------------------------

def test_criterion_8_scattering(record):
    t0 = time.perf_counter()
    g = ProductGrid(BoxGrid(1, 128.0, 2048), TorusSpectrum(1, (1.0,), 8))
    hor = recurrence_horizon(g, 3.0)
    f = gauss_data(g, 0.05)
    spec = NormSpec("sobolev", sigma=0.75)
    fn = sobolev_norm(f, 0.0, 0.75)
    incs = {}
    for lam in (-1.0, 0.0):
        ctx = NonlinearityContext(1, 1, 4, lam=lam, sigma=0.75)
        u = evolve(f, EvolutionConfig(ctx, 0.01, 16.0, sample_stride=10))
        incs[lam] = extract_wave_data(u, spec, horizon=hor).cauchy(spec.name)
    d = incs[-1.0]
    monotone = all(b < a for a, b in zip(d, d[1:]))
    # a second torus dimension: the same harness adds H1 residuals
    g2 = ProductGrid(BoxGrid(1, 32.0, 256), TorusSpectrum(2, (1.0, 1.0), 8))
    f2 = Field.from_function(g2, lambda x, y1, y2: 0.05 * np.exp(-x ** 2 / 2) * np.exp(1j * y1))
    ctx2 = NonlinearityContext(1, 2, 4, lam=-1.0, sigma=1.2)
    u2 = evolve(f2, EvolutionConfig(ctx2, 0.01, 2.0, sample_stride=5))
    rep2 = extract_wave_data(u2, NormSpec("sobolev", sigma=1.2), horizon=recurrence_horizon(g2, 3.0))
    h1 = [v for _, name, v in rep2.residual_history if name == NormSpec("h1").name]
    dt = time.perf_counter() - t0
    ok = (monotone and d[-1] < 1e-3 * fn and max(incs[0.0]) < 1e-12
          and len(h1) == 4 and all(math.isfinite(v) for v in h1) and dt < 600)
    assert record(8, "scattering Cauchy decay", ok,
                  f"increments/|f| {[f'{x / fn:.2e}' for x in d]}, linear control {max(incs[0.0]):.1e}, "
                  f"k=2 H1 residuals {[f'{v:.1e}' for v in h1]}; {dt:.1f}s")


# -- 10-12: transverse harmonic analysis ---------------------------------------------------

def test_criterion_10_fractional_leibniz(record):
    t0 = time.perf_counter()
    best = {}
    for N in (64, 128):
        torus = TorusSpectrum(1, (1.0,), N)
        for sigma in (0.3, 0.8, 1.2):
            rng = np.random.default_rng(2024)
            best[N, sigma] = max(leibniz_ratio(random_trig_poly(torus, rng), 0.5, sigma) for _ in range(500))
    spread = {s: max(best[64, s], best[128, s]) / min(best[64, s], best[128, s]) for s in (0.3, 0.8, 1.2)}
    torus = TorusSpectrum(1, (1.0,), 64)
    const = [leibniz_ratio(TransverseFunction.from_function(torus, lambda y: 0.8 * np.exp(3j * y)), 0.5, s)
             for s in (0.3, 0.8, 1.2)]
    dt = time.perf_counter() - t0
    ok = (all(math.isfinite(v) for v in best.values()) and max(spread.values()) < 1.5
          and max(abs(c - 1) for c in const) < 1e-12 and dt < 120)
    assert record(10, "fractional Leibniz", ok,
                  f"max ratios {', '.join(f'N={N} s={s}: {v:.3f}' for (N, s), v in best.items())}; "
                  f"modulus-constant {max(abs(c - 1) for c in const):.0e} from 1; {dt:.1f}s")


def test_criterion_11_maximal_operator(record):
    N = 64
    torus = TorusSpectrum(1, (1.0,), N)
    y = torus.axis_nodes(0)
    d = np.minimum(y, 2 * np.pi - y)
    M = maximal_operator(TransverseFunction((d < np.pi / 2).astype(complex), torus)).values
    half = abs(M[N // 2] - 0.5)
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        f = random_trig_poly(torus, rng, degree=6)
        a = np.abs(f.values)
        Mf = maximal_operator(f).values
        c = complex(*rng.normal(size=2))
        g = f.with_values(f.values * (1 + rng.uniform(0, 1, N)))
        checks = [
            np.all(Mf <= a.max() * (1 + 1e-12)),
            np.all(Mf >= a.mean() * (1 - 1e-12)),
            np.all(Mf >= a * (1 - 1e-12)),
            np.allclose(maximal_operator(f.with_values(c * f.values)).values, abs(c) * Mf, rtol=1e-10),
            np.all(maximal_operator(g).values >= Mf * (1 - 1e-12)),
        ]
        bad += not all(checks)
    ok = half <= 2 * np.pi / N and bad == 0
    assert record(11, "maximal operator", ok, f"antipode off by {half:.3f} (allowed {2 * np.pi / N:.3f}), "
                  f"{bad}/100 invariant failures")


def test_criterion_12_spectral_vs_ball_average(record):
    torus = TorusSpectrum(1, (1.0,), 64)
    table = {}
    for count in (64, 128):
        quad = QuadratureScheme.for_torus(torus, count)
        for sigma in (0.3, 0.5, 0.7):
            for m in range(1, 9):
                f = TransverseFunction.from_function(torus, lambda y: np.exp(1j * m * y))
                table[count, sigma, m] = (lp_norm(ball_average_fractional(f, sigma, quad), 2)
                                          / lp_norm(spectral_fractional(f, sigma), 2))
    coarse = [v for (c, _, _), v in table.items() if c == 64]
    envelope = max(coarse) / min(coarse)
    drift = max(abs(table[128, s, m] / table[64, s, m] - 1) for (_, s, m) in table)
    ok = envelope <= 3 and drift <= 0.1
    assert record(12, "spectral vs ball-average", ok,
                  f"ratios in [{min(coarse):.3f}, {max(coarse):.3f}], envelope {envelope:.3f}, "
                  f"quadrature doubling drift {drift:.1e}")
