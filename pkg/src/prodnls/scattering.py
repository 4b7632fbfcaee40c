"""Scattering diagnostics on finite windows.

"Scattering at infinity" is read as Cauchy decay of the interaction profile
``v(t) = e^{-itΔ} u(t)`` on dyadic windows inside the recurrence horizon.
The extracted datum ``φ₊ = v(T)`` is compared against ``u(t)`` via the
forward free flow ``e^{itΔ} φ₊``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exponents import NonlinearityContext, admissible_pair, contraction_exponents, solve_system
from .evolution import _nonlinearity_coeffs, free_propagate
from .fields import Field, NormSpec, TimeSeries, h1_norm, mixed_norm, sobolev_norm

__all__ = [
    "ScatteringReport", "HorizonExceeded", "interaction_profile", "extract_wave_data",
    "duhamel_tail", "dispersive_decay_fit", "strichartz_monitor", "strichartz_ratios", "field_norm",
]


class HorizonExceeded(ValueError):
    pass


def field_norm(f: Field, spec: NormSpec) -> float:
    if spec.variant == "sobolev":
        return sobolev_norm(f, spec.s, spec.sigma)
    if spec.variant == "h1":
        return h1_norm(f)
    raise ValueError(f"single-time norm needed, got variant {spec.variant!r}")


@dataclass
class ScatteringReport:
    phi_plus: Field
    horizon: float
    cauchy_history: list[tuple[float, float, str, float]] = field(default_factory=list)
    residual_history: list[tuple[float, str, float]] = field(default_factory=list)
    duhamel_tail: list[tuple[float, float, str, float]] = field(default_factory=list)
    decay_fit: Optional[tuple[float, float]] = None

    def cauchy(self, name: Optional[str] = None) -> list[float]:
        return [v for _, _, n, v in self.cauchy_history if name is None or n == name]

    def rows(self) -> list[tuple[str, str, float]]:
        """``(window, norm, value)`` rows for CSV output."""
        out = [(f"cauchy[{a:g},{b:g}]", n, v) for a, b, n, v in self.cauchy_history]
        out += [(f"residual[{t:g}]", n, v) for t, n, v in self.residual_history]
        out += [(f"tail[{a:g},{b:g}]", n, v) for a, b, n, v in self.duhamel_tail]
        return out

    def summary(self) -> str:
        lines = [f"recurrence horizon: {self.horizon:g}"]
        for a, b, n, v in self.cauchy_history:
            lines.append(f"  |v({b:g}) - v({a:g})|_{n} = {v:.6e}")
        for t, n, v in self.residual_history:
            lines.append(f"  |u({t:g}) - e^(itD) phi+|_{n} = {v:.6e}")
        for a, b, n, v in self.duhamel_tail:
            lines.append(f"  Duhamel tail ({a:g},{b:g}) in {n} = {v:.6e}")
        return "\n".join(lines)


def interaction_profile(u: TimeSeries) -> TimeSeries:
    """``v(t_j) = e^{-i t_j Δ} u(t_j)``."""
    g = u.grid
    data = np.empty_like(u.data)
    for j, t in enumerate(u.times):
        data[j] = g.inverse(g.forward(u.data[j]) * np.exp(1j * t * g.symbol))
    return TimeSeries(g, u.times, data)


def _dyadic(T: float) -> list[float]:
    return [T / 8, T / 4, T / 2, T]


def extract_wave_data(u: TimeSeries, spec: NormSpec, horizon: float = math.inf,
                      ctx: Optional[NonlinearityContext] = None) -> ScatteringReport:
    """``φ₊ = v(T)`` with Cauchy increments and residuals on ``{T/8, T/4, T/2, T}``.

    Residuals are reported in ``spec`` and, for two-dimensional tori, also in H¹.
    If ``ctx`` is given the Duhamel tails on the same windows are filled in.

    Raises:
        HorizonExceeded: the run ends after ``horizon``.
    """
    T = float(u.times[-1])
    if T > horizon * (1 + 1e-12):
        raise HorizonExceeded(f"final time {T:g} beyond recurrence horizon {horizon:g}")
    v = interaction_profile(u)
    pts = _dyadic(T)
    idx = [u.index_of(t) for t in pts]
    phi = v[idx[-1]]
    specs = [spec]
    if u.grid.k == 2 and spec.variant != "h1":
        specs.append(NormSpec("h1"))
    rep = ScatteringReport(phi, horizon)
    for sp in specs:
        name = sp.name
        for (a, ia), (b, ib) in zip(zip(pts, idx), zip(pts[1:], idx[1:])):
            diff = Field(u.grid, v.data[ib] - v.data[ia])
            rep.cauchy_history.append((a, b, name, field_norm(diff, sp)))
        for t, it in zip(pts, idx):
            free = free_propagate(phi, float(u.times[it])).physical()
            rep.residual_history.append((t, name, field_norm(Field(u.grid, u.data[it] - free), sp)))
        if ctx is not None:
            for (a, b) in zip(pts, pts[1:]):
                rep.duhamel_tail.append((a, b, name, duhamel_tail(u, a, b, sp, ctx)))
    return rep


def duhamel_tail(u: TimeSeries, t1: float, t2: float, spec: NormSpec, ctx: NonlinearityContext,
                 dealias_factor: float = 2.0) -> float:
    """``‖λ ∫_{t1}^{t2} e^{-isΔ} u|u|^μ ds‖`` by the trapezoid rule on the samples.

    This is the increment of the interaction profile over ``[t1, t2]``, so it
    vanishes identically for ``λ = 0``.
    """
    lo, hi = u.window
    if t1 < lo - 1e-12 or t2 > hi + 1e-12 or t2 < t1:
        raise ValueError(f"window ({t1}, {t2}) outside the run ({lo}, {hi})")
    lam, mu = float(ctx.lam), float(ctx.mu)
    g = u.grid
    if lam == 0.0:
        return 0.0
    i1, i2 = u.index_of(t1), u.index_of(t2)
    acc = np.zeros(g.shape, dtype=complex)
    prev = None
    for j in range(i1, i2 + 1):
        t = u.times[j]
        w = np.exp(1j * t * g.symbol) * _nonlinearity_coeffs(g, g.forward(u.data[j]), mu, dealias_factor)
        if prev is not None:
            acc += 0.5 * (t - u.times[j - 1]) * (prev + w)
        prev = w
    return field_norm(Field(g, lam * acc, "spectral"), spec)


def dispersive_decay_fit(f: Field, times, horizon: float = math.inf) -> tuple[float, float]:
    """Least-squares slope of ``log ‖e^{itΔ} f‖_{L^∞_x L²_y}`` against ``log t``.

    Returns ``(slope, rms residual)``; the slope should approach ``-n/2``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise ValueError("decay fit needs positive times")
    if times.max() > horizon:
        raise HorizonExceeded(f"time {times.max():g} beyond recurrence horizon {horizon:g}")
    vals = []
    for t in times:
        # L^∞_x L²_y: max over x of the transverse L² profile
        u = free_propagate(f, float(t)).physical()
        prof = np.sqrt(np.sum(np.abs(u) ** 2, axis=f.grid.y_axes) * f.grid.torus.cell_volume)
        vals.append(prof.max())
    lt, lv = np.log(times), np.log(vals)
    slope, icpt = np.polyfit(lt, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lt + icpt)) ** 2)))
    return float(slope), resid


def _monitor_pairs(ctx: NonlinearityContext):
    if ctx.mass_critical:
        lbar, pbar, _, _ = contraction_exponents(ctx)
        first = (lbar, pbar)
    else:
        d = solve_system(ctx).derived_pair
        first = (d.q, d.r)
    n = ctx.n
    extra = [admissible_pair(n, 2)]
    # a second pair towards the large-p end: (8, 4) for n = 1, the endpoint for n >= 3
    p_hi = {1: 4, 2: 8}.get(n) or Fraction(2 * n, n - 2)
    extra.append(admissible_pair(n, p_hi))
    return [first] + [(e.q, e.r) for e in extra]


def strichartz_ratios(u: TimeSeries, ctx: NonlinearityContext) -> dict:
    """``{(ℓ, p): ‖u‖_{L^ℓ_t L^p_x H^σ_y} / ε}`` over the monitored pairs, ``ε = ‖u(0)‖_{𝓗^{0,σ}}``.

    Pairs: the contraction pair (or the derived pair off the mass-critical line)
    and two further admissible pairs, the first of which is ``(∞, 2)``.
    """
    pairs = _monitor_pairs(ctx)
    eps = sobolev_norm(u[0], 0.0, ctx.sigma)
    if eps == 0:
        return {pq: 0.0 for pq in pairs}
    return {(q, r): mixed_norm(u, NormSpec("mixed", sigma=ctx.sigma, q=q, r=r)) / eps for q, r in pairs}


def strichartz_monitor(u: TimeSeries, ctx: NonlinearityContext) -> float:
    """Max of :func:`strichartz_ratios`."""
    return max(strichartz_ratios(u, ctx).values())
