"""Time dynamics for ``i u_t + Δ_{x,y} u + λ|u|^μ u = 0``.

Sign conventions: the free flow multiplies Fourier coefficients by
``exp(-i t (|ξ|² + ν_m))``; the nonlinear substep ``i u_t = -λ|u|^μ u`` has
exact solution ``u · exp(iλ|u|^μ h)``; the Duhamel integral carries ``iλ``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exponents import NonlinearityContext, contraction_exponents, solve_system
from .fields import Field, NormSpec, TimeSeries, mixed_norm
from .grid import ProductGrid, recurrence_horizon

log = logging.getLogger(__name__)

__all__ = [
    "EvolutionConfig", "PicardReport", "ContractionStats", "EvolutionError", "NonFiniteError",
    "BlowUpError", "NotConverged", "free_propagate", "free_series", "nonlinear_phase", "evolve",
    "duhamel_term", "duhamel_apply", "picard_iterate", "contraction_factor", "metric_spec",
    "ball_spec", "random_bump",
]


class EvolutionError(RuntimeError):
    def __init__(self, msg: str, step: int):
        super().__init__(f"{msg} (step {step})")
        self.step = step


class NonFiniteError(EvolutionError):
    pass


class BlowUpError(EvolutionError):
    pass


class NotConverged(RuntimeError):
    def __init__(self, msg: str, distances: list[float]):
        super().__init__(msg)
        self.distances = distances


@dataclass
class EvolutionConfig:
    ctx: NonlinearityContext
    dt: float
    T: float
    sample_stride: int = 1
    dealias_factor: float = 2.0
    band: Optional[float] = None
    override_horizon: bool = False
    blowup_factor: float = 1e6

    def __post_init__(self):
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.dealias_factor < 1:
            raise ValueError("dealias_factor must be >= 1")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"dt={self.dt} does not divide T={self.T}")
        if round(steps) % self.sample_stride:
            raise ValueError("sample_stride must divide the number of steps")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def sample_dt(self) -> float:
        return self.dt * self.sample_stride

    def sample_times(self) -> np.ndarray:
        return self.sample_dt * np.arange(self.steps // self.sample_stride + 1)


# -- spectral helpers ------------------------------------------------------

def _padded_shape(grid: ProductGrid, factor: float) -> tuple[int, ...]:
    return tuple(max(N, 2 * math.ceil(factor * N / 2)) for N in grid.shape)


def _embed(c: np.ndarray, big: tuple[int, ...], lead: int = 0) -> np.ndarray:
    """Zero-pad Fourier coefficients (Nyquist kept on the negative side)."""
    axes = tuple(range(lead, c.ndim))
    out = np.zeros(c.shape[:lead] + big, dtype=complex)
    sl = tuple(slice(M // 2 - N // 2, M // 2 + N // 2) for N, M in zip(c.shape[lead:], big))
    out[(Ellipsis,) + sl] = np.fft.fftshift(c, axes=axes)
    return np.fft.ifftshift(out, axes=axes)


def _truncate(c: np.ndarray, small: tuple[int, ...], lead: int = 0) -> np.ndarray:
    axes = tuple(range(lead, c.ndim))
    sh = np.fft.fftshift(c, axes=axes)
    sl = tuple(slice(M // 2 - N // 2, M // 2 + N // 2) for N, M in zip(small, c.shape[lead:]))
    return np.fft.ifftshift(sh[(Ellipsis,) + sl], axes=axes)


def _to_fine(grid, coeffs, big, lead=0):
    """Physical values on the oversampled grid from coarse coefficients."""
    axes = tuple(range(lead, coeffs.ndim))
    if big == grid.shape:
        return np.fft.ifftn(coeffs, axes=axes, norm="forward")
    return np.fft.ifftn(_embed(coeffs, big, lead), axes=axes, norm="forward")


def _from_fine(grid, values, big, lead=0):
    axes = tuple(range(lead, values.ndim))
    c = np.fft.fftn(values, axes=axes, norm="forward")
    return c if big == grid.shape else _truncate(c, grid.shape, lead)


def _abs_pow(u: np.ndarray, mu: float) -> np.ndarray:
    a2 = u.real ** 2 + u.imag ** 2
    return a2 ** (0.5 * mu)


def _nonlinearity_coeffs(grid: ProductGrid, coeffs: np.ndarray, mu: float, factor: float,
                         lead: int = 0) -> np.ndarray:
    """Coefficients of ``u|u|^μ`` evaluated pointwise on the oversampled grid."""
    big = _padded_shape(grid, factor)
    u = _to_fine(grid, coeffs, big, lead)
    return _from_fine(grid, u * _abs_pow(u, mu), big, lead)


# -- flows -----------------------------------------------------------------

def free_propagate(f: Field, t: float) -> Field:
    """Exact free flow ``e^{itΔ_{x,y}} f``; returns a spectral field."""
    c = f.spectral() * np.exp(-1j * t * f.grid.symbol)
    return Field(f.grid, c, "spectral", f.t + t)


def free_series(f: Field, times) -> TimeSeries:
    """Free evolution of ``f`` sampled at ``times`` (physical storage)."""
    g = f.grid
    times = np.asarray(times, dtype=float)
    c = f.spectral()
    data = np.empty((len(times),) + g.shape, dtype=complex)
    for j, t in enumerate(times):
        data[j] = g.inverse(c * np.exp(-1j * t * g.symbol))
    return TimeSeries(g, times, data)


def nonlinear_phase(f: Field, lam: float, mu: float, h: float) -> Field:
    """Exact flow of ``i u_t = −λ|u|^μ u`` for time ``h`` (pointwise on the native grid)."""
    u = f.physical()
    return Field(f.grid, u * np.exp(1j * lam * h * _abs_pow(u, float(mu))), "physical", f.t + h)


def evolve(f0: Field, cfg: EvolutionConfig) -> TimeSeries:
    """Strang splitting ``free(dt/2) ∘ nonlinear(dt) ∘ free(dt/2)``.

    The nonlinear phase is applied on a grid oversampled by
    ``cfg.dealias_factor`` and projected back spectrally.

    Raises:
        NonFiniteError: a non-finite value appeared.
        BlowUpError: ``max|u|`` exceeded ``blowup_factor`` times its initial value.
        ValueError: ``T`` beyond the recurrence horizon (when ``cfg.band`` is set).
    """
    g = f0.grid
    if cfg.band is not None and not cfg.override_horizon:
        hor = recurrence_horizon(g, cfg.band)
        if cfg.T > hor:
            raise ValueError(f"T={cfg.T} exceeds the recurrence horizon {hor:g}")
    lam, mu = float(cfg.ctx.lam), float(cfg.ctx.mu)
    dt = cfg.dt
    half = np.exp(-0.5j * dt * g.symbol)
    big = _padded_shape(g, cfg.dealias_factor)

    c = f0.spectral().copy()
    if not np.all(np.isfinite(c)):
        raise NonFiniteError("non-finite initial data", 0)
    times = cfg.sample_times()
    data = np.empty((len(times),) + g.shape, dtype=complex)
    data[0] = g.inverse(c)
    amp0 = float(np.max(np.abs(data[0])))
    limit = cfg.blowup_factor * amp0 if amp0 > 0 else math.inf

    j = 1
    for step in range(1, cfg.steps + 1):
        c *= half
        if lam != 0.0:
            u = _to_fine(g, c, big)
            a2 = u.real ** 2 + u.imag ** 2
            peak = math.sqrt(float(a2.max()))
            if not math.isfinite(peak):
                raise NonFiniteError("non-finite value in the nonlinear substep", step)
            if peak > limit:
                raise BlowUpError(f"max|u| = {peak:.3e} exceeds {limit:.3e}", step)
            u *= np.exp(1j * lam * dt * a2 ** (0.5 * mu))
            c = _from_fine(g, u, big)
        c *= half
        if step % cfg.sample_stride == 0:
            data[j] = g.inverse(c)
            if not np.all(np.isfinite(data[j])):
                raise NonFiniteError("non-finite sample", step)
            j += 1
    return TimeSeries(g, times, data)


# -- Duhamel operator -------------------------------------------------------

def duhamel_term(u: TimeSeries, ctx: NonlinearityContext, dealias_factor: float = 2.0) -> np.ndarray:
    """``iλ ∫_0^t e^{i(t−τ)Δ} u|u|^μ dτ`` at the samples of ``u`` (physical, stacked).

    Trapezoid rule in the interaction picture with exact propagators.
    """
    g = u.grid
    if abs(u.times[0]) > 1e-12:
        raise ValueError("Duhamel series must start at t = 0")
    lam, mu = float(ctx.lam), float(ctx.mu)
    out = np.zeros_like(u.data)
    if lam == 0.0:
        return out
    acc = np.zeros(g.shape, dtype=complex)
    prev = None
    for j, t in enumerate(u.times):
        nj = _nonlinearity_coeffs(g, g.forward(u.data[j]), mu, dealias_factor)
        wj = np.exp(1j * t * g.symbol) * nj
        if prev is not None:
            acc += 0.5 * (t - u.times[j - 1]) * (prev + wj)
        prev = wj
        out[j] = g.inverse(1j * lam * np.exp(-1j * t * g.symbol) * acc)
    return out


def duhamel_apply(f: Field, u: TimeSeries, ctx: NonlinearityContext,
                  dealias_factor: float = 2.0) -> TimeSeries:
    """``𝒯_f u = e^{itΔ} f + iλ ∫_0^t e^{i(t−τ)Δ} u|u|^μ dτ`` on the samples of ``u``."""
    if f.grid != u.grid:
        raise ValueError("data and series live on different grids")
    free = free_series(f, u.times)
    return TimeSeries(u.grid, u.times, free.data + duhamel_term(u, ctx, dealias_factor))


def metric_spec(ctx: NonlinearityContext) -> NormSpec:
    """Contraction metric ``L^ℓ̄_t L^p̄_x L²_y`` (mass-critical) or ``L^q_t L^r_x L²_y`` otherwise."""
    if ctx.mass_critical:
        lbar, pbar, _, _ = contraction_exponents(ctx)
        return NormSpec("mixed", sigma=0.0, q=lbar, r=pbar)
    sys = solve_system(ctx)
    return NormSpec("mixed", sigma=0.0, q=sys.pair.q, r=sys.pair.r)


def ball_spec(ctx: NonlinearityContext) -> NormSpec:
    """Norm of the invariant ball: the metric exponents with ``H^σ_y`` inside."""
    m = metric_spec(ctx)
    return NormSpec("mixed", sigma=ctx.sigma, q=m.q, r=m.r)


@dataclass
class PicardReport:
    iterations: int
    distances: list[float]
    converged: bool
    series: TimeSeries
    metric: NormSpec = field(repr=False, default=None)


def picard_iterate(f: Field, cfg: EvolutionConfig, tol: float = 1e-10, max_iter: int = 20,
                   metric: Optional[NormSpec] = None) -> PicardReport:
    """Fixed-point iteration ``u^{(k+1)} = 𝒯_f u^{(k)}`` from the free evolution.

    Samples are spaced ``cfg.dt * cfg.sample_stride`` on ``[0, cfg.T]``.

    Raises:
        NotConverged: after ``max_iter`` iterates, or when a distance is not finite.
    """
    metric = metric or metric_spec(cfg.ctx)
    u = free_series(f, cfg.sample_times())
    distances: list[float] = []
    for it in range(1, max_iter + 1):
        # a diverging iteration overflows; that is reported, not warned about
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = duhamel_apply(f, u, cfg.ctx, cfg.dealias_factor)
            d = mixed_norm(TimeSeries(u.grid, u.times, nxt.data - u.data), metric)
        distances.append(d)
        log.debug("picard iterate %d: distance %.3e", it, d)
        u = nxt
        if not math.isfinite(d):
            raise NotConverged(f"Picard distance became non-finite at iterate {it}", distances)
        if d < tol:
            return PicardReport(it, distances, True, u, metric)
    raise NotConverged(f"no convergence to {tol:g} in {max_iter} iterates", distances)


# -- contraction measurement -----------------------------------------------

def random_bump(grid: ProductGrid, rng: np.random.Generator, max_mode: int = 2) -> Field:
    """Random smooth localized datum: modulated Gaussian in x, low transverse modes."""
    coords = grid.coords()
    xs, ys = coords[:grid.n], coords[grid.n:]
    center = rng.uniform(-1.0, 1.0, grid.n)
    width = rng.uniform(0.7, 1.3)
    freq = rng.uniform(-1.0, 1.0, grid.n)
    env = np.ones(1)
    for x, c, w in zip(xs, center, freq):
        env = env * np.exp(-((x - c) ** 2) / (2 * width ** 2) + 1j * w * x)
    modes = np.arange(-max_mode, max_mode + 1)
    trans = np.zeros(1, dtype=complex)
    for idx in np.ndindex(*(len(modes),) * grid.k):
        m = modes[list(idx)]
        coef = rng.normal() + 1j * rng.normal()
        phase = sum(mj * y / rho for mj, y, rho in zip(m, ys, grid.torus.radii))
        trans = trans + coef * np.exp(1j * phase)
    return Field(grid, np.broadcast_to(env * trans, grid.shape).copy(), "physical")


@dataclass
class ContractionStats:
    max: float
    mean: float
    ratios: list[float]
    resampled: int


def contraction_factor(f: Field, cfg: EvolutionConfig, radius: float, trials: int = 8,
                       seed: int = 0, metric: Optional[NormSpec] = None) -> ContractionStats:
    """Empirical Lipschitz constant of 𝒯_f on a ball around the free evolution of ``f``.

    Pairs ``v_i = e^{itΔ}(f + δ_i)`` with ``‖e^{itΔ}δ_i‖`` (ball norm) uniform in
    ``[radius/2, radius]``; the ratio ``‖𝒯v₁ − 𝒯v₂‖ / ‖v₁ − v₂‖`` is measured in
    the contraction metric.  Pairs at zero distance are redrawn and counted.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    if not radius > 0:
        raise ValueError("radius must be positive")
    metric = metric or metric_spec(cfg.ctx)
    ball = ball_spec(cfg.ctx)
    rng = np.random.default_rng(seed)
    times = cfg.sample_times()
    base = free_series(f, times)

    def draw() -> TimeSeries:
        d = free_series(random_bump(f.grid, rng), times)
        scale = radius * rng.uniform(0.5, 1.0) / mixed_norm(d, ball)
        return TimeSeries(f.grid, times, base.data + scale * d.data)

    ratios, resampled = [], 0
    while len(ratios) < trials:
        v1, v2 = draw(), draw()
        den = mixed_norm(TimeSeries(f.grid, times, v1.data - v2.data), metric)
        if den == 0.0:
            resampled += 1
            if resampled > 100 * trials:
                raise ValueError("every sampled pair coincides; the radius is too small")
            continue
        diff = duhamel_term(v1, cfg.ctx, cfg.dealias_factor) - duhamel_term(v2, cfg.ctx, cfg.dealias_factor)
        ratios.append(mixed_norm(TimeSeries(f.grid, times, diff), metric) / den)
    return ContractionStats(max(ratios), float(np.mean(ratios)), ratios, resampled)
