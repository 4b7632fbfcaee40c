"""Flat ``key=value`` experiment configuration.

One pair per line, ``#`` starts a comment, blank lines are ignored.  Every
problem found is collected with its line number; :class:`ConfigError` carries
the whole list so a user sees all of them at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .exponents import INF, NonlinearityContext, fmt, mu_star
from .evolution import EvolutionConfig
from .fields import Field
from .grid import ProductGrid, build_grid

__all__ = ["SimConfig", "ConfigError", "parse_config", "load_config", "EXPERIMENTS", "initial_data"]

EXPERIMENTS = ("exponents", "evolve", "picard", "scatter", "fracineq", "decay", "sweep")


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(violations))
        self.violations = violations


@dataclass
class SimConfig:
    # equation
    n: int = 1
    k: int = 1
    mu: Fraction = Fraction(4)
    lam: float = -1.0
    sigma: float = 0.75
    # grid
    L: float = 32.0
    Nx: int = 256
    Ny: int = 8
    radii: tuple[float, ...] = (1.0,)
    # time stepping; ``samples`` is the sample stride in steps
    dt: float = 0.01
    T: float = 1.0
    samples: int = 10
    dealias: float = 2.0
    band: Optional[float] = None
    checkpoint_every: int = 0
    # experiment
    experiment: str = "evolve"
    epsilons: tuple[float, ...] = (0.05,)
    seed: int = 0
    outdir: str = "out"
    tol: float = 1e-10
    maxiter: int = 20
    trials: int = 8
    exploratory: bool = False
    # fractional inequality sweep
    frac_mu: float = 0.5
    frac_sigmas: tuple[float, ...] = (0.3, 0.8, 1.2)
    frac_count: int = 500
    frac_degree: int = 8
    notes: list[str] = field(default_factory=list, compare=False)

    @property
    def ctx(self) -> NonlinearityContext:
        return NonlinearityContext(self.n, self.k, self.mu, lam=self.lam, sigma=self.sigma)

    @property
    def grid(self) -> ProductGrid:
        return build_grid(self)

    def evolution(self) -> EvolutionConfig:
        return EvolutionConfig(self.ctx, self.dt, self.T, sample_stride=self.samples,
                               dealias_factor=self.dealias, band=self.band)

    def to_text(self) -> str:
        """Canonical text form; ``parse_config(cfg.to_text()) == cfg``."""
        lines = []
        for key, attr in _KEYS.items():
            v = getattr(self, attr)
            if v is None:
                continue
            lines.append(f"{key}={_render(v)}")
        return "\n".join(lines) + "\n"


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_render(x) for x in v)
    return str(v)


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _rational(text: str) -> Fraction:
    return Fraction(text.strip())


def _floats(text: str) -> tuple[float, ...]:
    out = tuple(float(x) for x in text.split(",") if x.strip())
    if not out:
        raise ValueError("empty list")
    return out


def _opt_float(text: str) -> Optional[float]:
    return None if text.lower() in ("", "none") else float(text)


# config key -> attribute name
_KEYS = {
    "n": "n", "k": "k", "mu": "mu", "lambda": "lam", "sigma": "sigma",
    "L": "L", "Nx": "Nx", "Ny": "Ny", "radii": "radii",
    "dt": "dt", "T": "T", "samples": "samples", "dealias": "dealias", "band": "band",
    "checkpoint_every": "checkpoint_every",
    "experiment": "experiment", "epsilons": "epsilons", "seed": "seed", "outdir": "outdir",
    "tol": "tol", "maxiter": "maxiter", "trials": "trials", "exploratory": "exploratory",
    "frac_mu": "frac_mu", "frac_sigmas": "frac_sigmas", "frac_count": "frac_count",
    "frac_degree": "frac_degree",
}

_PARSERS = {
    "n": int, "k": int, "mu": _rational, "lambda": float, "sigma": float,
    "L": float, "Nx": int, "Ny": int, "radii": _floats,
    "dt": float, "T": float, "samples": int, "dealias": float, "band": _opt_float,
    "checkpoint_every": int,
    "experiment": str, "epsilons": _floats, "seed": int, "outdir": str,
    "tol": float, "maxiter": int, "trials": int, "exploratory": _bool,
    "frac_mu": float, "frac_sigmas": _floats, "frac_count": int, "frac_degree": int,
}


def parse_config(text: str, overrides: Optional[dict] = None) -> SimConfig:
    """Parse and validate; ``overrides`` (key -> string) replace file values.

    Raises:
        ConfigError: with one message per problem, each naming its line.
    """
    cfg = SimConfig()
    errors: list[str] = []
    where: dict[str, int] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {line!r}")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        where[key] = lineno
        try:
            setattr(cfg, _KEYS[key], _PARSERS[key](value))
        except (ValueError, ZeroDivisionError) as exc:
            errors.append(f"line {lineno}: cannot parse {key}={value!r} ({exc})")
    for key, value in (overrides or {}).items():
        try:
            setattr(cfg, _KEYS[key], _PARSERS[key](str(value)))
            where[key] = "command line"
        except (KeyError, ValueError) as exc:
            errors.append(f"override {key}: {exc}")
    if errors:
        raise ConfigError(errors)
    errors = _validate(cfg, where)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path, overrides: Optional[dict] = None) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def _at(where: dict, key: str) -> str:
    if key not in where:
        return "default"
    return f"line {where[key]}" if isinstance(where[key], int) else where[key]


def _validate(cfg: SimConfig, where: dict) -> list[str]:
    errs: list[str] = []

    def bad(key, msg):
        errs.append(f"{_at(where, key)}: {key}: {msg}")

    if cfg.experiment not in EXPERIMENTS:
        bad("experiment", f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if cfg.n < 1:
        bad("n", "n must be >= 1")
    if cfg.k < 1:
        bad("k", "k must be >= 1")
    if cfg.mu <= 0:
        bad("mu", "mu must be positive")
    if len(cfg.radii) == 1 and cfg.k > 1:
        cfg.radii = cfg.radii * cfg.k
    if len(cfg.radii) != max(cfg.k, 1):
        bad("radii", f"need {cfg.k} radii, got {len(cfg.radii)}")
    if any(not math.isfinite(e) or e < 0 for e in cfg.epsilons):
        bad("epsilons", "data sizes must be finite and non-negative")
    if cfg.seed < 0 or cfg.seed >= 2 ** 64:
        bad("seed", "seed must fit in an unsigned 64-bit integer")
    for key in ("tol", "dealias"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    for key in ("maxiter", "trials", "frac_count", "frac_degree"):
        if getattr(cfg, _KEYS[key]) < 1:
            bad(key, "must be >= 1")
    if cfg.checkpoint_every < 0:
        bad("checkpoint_every", "must be >= 0")
    if errs:
        return errs

    try:
        cfg.grid
    except ValueError as exc:
        bad("Nx" if "power of two" in str(exc) else "Ny", str(exc))
    try:
        cfg.evolution()
    except ValueError as exc:
        bad("dt" if "divide T" in str(exc) else "samples", str(exc))
    if not errs and cfg.experiment in ("scatter", "sweep"):
        # the Cauchy windows end at T/8, T/4, T/2, T and must land on samples
        every = cfg.dt * cfg.samples
        ratio = cfg.T / 8 / every
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            bad("samples", f"sample interval dt*samples = {every:g} must divide T/8 = {cfg.T / 8:g} "
                           "for the scattering windows")

    if not cfg.exploratory:
        errs += _hypotheses(cfg, where)
    return errs


def _hypotheses(cfg: SimConfig, where: dict) -> list[str]:
    """Check the nonlinearity range and the σ window of the small-data theorems."""
    errs = []
    n, k, mu, sigma = cfg.n, cfg.k, cfg.mu, cfg.sigma
    lo, hi = Fraction(4, n), mu_star(n)
    rng = "theorem range 4/n <= mu < mu*(n)"
    if mu < lo:
        errs.append(f"{_at(where, 'mu')}: μ >= 4/{n} = {fmt(lo)} violated by mu={fmt(mu)} ({rng})")
    if hi is not INF and mu >= hi:
        errs.append(f"{_at(where, 'mu')}: μ < μ*({n}) = {fmt(hi)} violated by mu={fmt(mu)} ({rng})")
    if not sigma > k / 2:
        errs.append(f"{_at(where, 'sigma')}: σ > k/2 = {k / 2:g} violated by sigma={sigma:g}")
    if cfg.experiment == "exponents":
        # the exponent scan only needs the nonlinearity range
        return errs
    if mu == lo:
        top = 4 / n + 1
        if not sigma < top:
            errs.append(f"{_at(where, 'sigma')}: σ < 4/n + 1 = {top:g} violated by sigma={sigma:g} "
                        "(mass-critical theorem)")
        if k < 2:
            cfg.notes.append("k = 1 at the mass-critical power is exploratory: the theorem assumes k >= 2")
    elif mu > lo:
        s = float((mu * n - 4) / (2 * mu))
        top = min((k + 1) / 2 - s, 1 + float(mu))
        if not sigma < top:
            errs.append(f"{_at(where, 'sigma')}: σ < min((k+1)/2 - s, 1 + μ) = {top:g} violated by "
                        f"sigma={sigma:g} (supercritical theorem, s = {s:g})")
    return errs


def initial_data(grid: ProductGrid, eps: float) -> Field:
    """``ε · exp(−|x|²/2) · exp(i y₁/ρ₁)``."""
    rho = grid.torus.radii[0]

    def func(*coords):
        xs, ys = coords[:grid.n], coords[grid.n:]
        r2 = sum(x ** 2 for x in xs)
        return eps * np.exp(-r2 / 2) * np.exp(1j * ys[0] / rho)

    return Field.from_function(grid, func)
