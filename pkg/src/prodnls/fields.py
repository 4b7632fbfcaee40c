"""State containers and the norms measured on them.

All fractional derivatives here are spectral multipliers.  Time integrals in
mixed norms use trapezoid weights on the stored samples; ``q`` or ``r`` equal
to infinity is realised as a max over samples / nodes, which is a lower bound
for the true essential supremum.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal, Optional

import numpy as np

from .exponents import INF, StrichartzSystem
from .grid import ProductGrid

__all__ = [
    "Field", "TimeSeries", "NormSpec", "sobolev_norm", "h1_norm", "h_sigma_y_profile",
    "mixed_norm", "resolution_norm", "mass", "energy", "gradient", "write_norm_csv",
]

Rep = Literal["physical", "spectral"]


@dataclass
class Field:
    grid: ProductGrid
    data: np.ndarray
    rep: Rep = "physical"
    t: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} != grid shape {self.grid.shape}")
        if self.rep not in ("physical", "spectral"):
            raise ValueError(f"unknown representation {self.rep!r}")

    def physical(self) -> np.ndarray:
        return self.data if self.rep == "physical" else self.grid.inverse(self.data)

    def spectral(self) -> np.ndarray:
        return self.data if self.rep == "spectral" else self.grid.forward(self.data)

    def to_physical(self) -> "Field":
        return self if self.rep == "physical" else Field(self.grid, self.physical(), "physical", self.t)

    def to_spectral(self) -> "Field":
        return self if self.rep == "spectral" else Field(self.grid, self.spectral(), "spectral", self.t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def copy(self) -> "Field":
        return replace(self, data=self.data.copy())

    @classmethod
    def from_function(cls, grid: ProductGrid, func, t: float = 0.0) -> "Field":
        """Sample ``func(x_1..x_n, y_1..y_k)`` (broadcast coordinates) on the grid."""
        vals = np.broadcast_to(func(*grid.coords()), grid.shape)
        return cls(grid, np.array(vals, dtype=complex), "physical", t)


@dataclass
class TimeSeries:
    """Physical-space samples ``u(t_j)`` stacked along axis 0."""

    grid: ProductGrid
    times: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (len(self.times),) + self.grid.shape:
            raise ValueError("series data must have shape (n_samples, *grid.shape)")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0):
                raise ValueError("sample times must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise ValueError("sample times must be uniformly spaced")

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, j: int) -> Field:
        return Field(self.grid, self.data[j], "physical", float(self.times[j]))

    @property
    def window(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > tol * max(1.0, abs(t)):
            raise ValueError(f"no sample at t={t}")
        return j

    @classmethod
    def from_fields(cls, fields: Iterable[Field]) -> "TimeSeries":
        fields = list(fields)
        grid = fields[0].grid
        return cls(grid, [f.t for f in fields], np.stack([f.physical() for f in fields]))


@dataclass(frozen=True)
class NormSpec:
    """Descriptor of one of the measured norms.

    ``variant``:
      * ``sobolev`` -- 𝓗^{s,σ} at a single time (``s``, ``sigma``);
      * ``h1`` -- isotropic H¹_{x,y} at a single time;
      * ``mixed`` -- L^q_t L^r_x H^σ_y of ``D_i^γ u`` (``gamma``, ``direction``);
      * ``gradient_mixed`` -- Σ_{γ=0,1} ‖D_i^γ u‖_{L^q_t L^r_x H^σ_y};
      * ``resolution`` -- ‖·‖_{L^q L^r H^σ} + ‖·‖_{L^ℓ L^p H^σ} (needs ``l``, ``p``).
    """

    variant: str = "mixed"
    s: float = 0.0
    sigma: float = 0.0
    q: object = 2
    r: object = 2
    gamma: int = 0
    direction: Optional[str] = None
    l: object = None
    p: object = None

    def __post_init__(self):
        if self.variant not in ("sobolev", "h1", "mixed", "gradient_mixed", "resolution"):
            raise ValueError(f"unknown norm variant {self.variant!r}")
        if self.gamma not in (0, 1):
            raise ValueError("gamma must be 0 or 1")
        if (self.gamma == 1 or self.variant == "gradient_mixed") and self.direction not in ("x", "y"):
            raise ValueError("gradient norms need direction 'x' or 'y'")
        for e in (self.q, self.r):
            if _exp(e) < 1:
                raise ValueError("Lebesgue exponents must be >= 1")
        if self.variant == "resolution" and (self.l is None or self.p is None):
            raise ValueError("resolution norm needs (l, p)")

    @property
    def name(self) -> str:
        if self.variant == "sobolev":
            return f"H^({self.s:g},{self.sigma:g})"
        if self.variant == "h1":
            return "H^1"
        g = {0: "", 1: f"D{self.direction} "}[self.gamma]
        core = f"L^{_fmt(self.q)}_t L^{_fmt(self.r)}_x H^{self.sigma:g}_y"
        if self.variant == "gradient_mixed":
            return f"X{self.direction}[{core}]"
        if self.variant == "resolution":
            return f"Z[{core} + L^{_fmt(self.l)}_t L^{_fmt(self.p)}_x]"
        return g + core


def _exp(e) -> float:
    return math.inf if e is INF else float(e)


def _fmt(e) -> str:
    return "inf" if _exp(e) == math.inf else str(e)


def _ensure_finite(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite values")


def sobolev_norm(f: Field, s: float = 0.0, sigma: float = 0.0) -> float:
    """‖f‖ in 𝓗^{s,σ}: multiplier ``(1+|ξ|²)^{s/2} (1+ν_m)^{σ/2}`` then L²."""
    _ensure_finite(f.data)
    g = f.grid
    c = f.spectral()
    w = np.ones(g.shape)
    if s:
        w = w * (1.0 + g.xi2) ** s
    if sigma:
        w = w * (1.0 + g.nu) ** sigma
    return float(np.sqrt(g.volume * np.sum(w * np.abs(c) ** 2)))


def h1_norm(f: Field) -> float:
    """Isotropic H¹_{x,y}: ``(∫ (1 + |ξ|² + ν) |û|²)^{1/2}``."""
    _ensure_finite(f.data)
    g = f.grid
    c = f.spectral()
    return float(np.sqrt(g.volume * np.sum((1.0 + g.symbol) * np.abs(c) ** 2)))


def _profile(grid: ProductGrid, values: np.ndarray, sigma: float) -> np.ndarray:
    """Transverse H^σ_y norm at each leading index of ``values`` (shape ``(..., *grid.shape)``)."""
    k = grid.k
    y_axes = tuple(range(values.ndim - k, values.ndim))
    vol_y = grid.torus.volume
    if sigma == 0:
        sq = np.sum(np.abs(values) ** 2, axis=y_axes) * grid.torus.cell_volume
    else:
        c = np.fft.fftn(values, axes=y_axes, norm="forward")
        w = (1.0 + grid.torus.eigenvalues) ** sigma
        sq = vol_y * np.sum(w * np.abs(c) ** 2, axis=y_axes)
    return np.sqrt(sq)


def h_sigma_y_profile(f: Field, sigma: float) -> np.ndarray:
    """Per-x-node transverse norm ``(Σ_m (1+ν_m)^σ |û(x,m)|²)^{1/2}`` (with torus volume)."""
    vals = f.physical()
    _ensure_finite(vals)
    return _profile(f.grid, vals, sigma)


def gradient(grid: ProductGrid, values: np.ndarray, direction: str) -> list[np.ndarray]:
    """Spectral gradient components along the Euclidean (``'x'``) or torus (``'y'``) axes."""
    coeffs = grid.forward(values)
    waves = grid.xi() if direction == "x" else grid.eta()
    return [grid.inverse(1j * w * coeffs) for w in waves]


def _lebesgue_x(grid: ProductGrid, prof: np.ndarray, r: float) -> np.ndarray:
    x_axes = tuple(range(prof.ndim - grid.n, prof.ndim))
    if math.isinf(r):
        return np.max(prof, axis=x_axes)
    return (np.sum(prof ** r, axis=x_axes) * grid.x_cell) ** (1.0 / r)


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros(len(times))
    dt = np.diff(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _lebesgue_t(times: np.ndarray, vals: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.sum(_trapezoid_weights(times) * vals ** q) ** (1.0 / q))


def _mixed_core(grid: ProductGrid, times, data: np.ndarray, q: float, r: float, sigma: float,
                gamma: int = 0, direction: Optional[str] = None) -> float:
    if gamma == 0:
        prof = _profile(grid, data, sigma)
    else:
        comps = gradient(grid, data, direction)
        prof = np.sqrt(sum(_profile(grid, c, sigma) ** 2 for c in comps))
    return _lebesgue_t(np.asarray(times), _lebesgue_x(grid, prof, r), q)


def mixed_norm(u: TimeSeries, spec: NormSpec) -> float:
    """Discrete ``L^q_t L^r_x H^σ_y`` composition (time outermost)."""
    if len(u) < 2:
        raise ValueError("mixed norms need at least two samples")
    _ensure_finite(u.data)
    q, r = _exp(spec.q), _exp(spec.r)
    if spec.variant == "mixed":
        return _mixed_core(u.grid, u.times, u.data, q, r, spec.sigma, spec.gamma, spec.direction)
    if spec.variant == "gradient_mixed":
        return sum(_mixed_core(u.grid, u.times, u.data, q, r, spec.sigma, g, spec.direction)
                   for g in (0, 1))
    if spec.variant == "resolution":
        return (_mixed_core(u.grid, u.times, u.data, q, r, spec.sigma)
                + _mixed_core(u.grid, u.times, u.data, _exp(spec.l), _exp(spec.p), spec.sigma))
    raise ValueError(f"mixed_norm does not handle variant {spec.variant!r}")


def resolution_norm(u: TimeSeries, sys: StrichartzSystem, sigma: float) -> float:
    """𝒵^σ(q, r) norm: L^q L^r H^σ plus L^ℓ L^p H^σ with (ℓ, p) the derived pair."""
    spec = NormSpec("resolution", sigma=sigma, q=sys.pair.q, r=sys.pair.r,
                    l=sys.derived_pair.q, p=sys.derived_pair.r)
    return mixed_norm(u, spec)


def mass(f: Field) -> float:
    """∫∫ |f|² over the product grid."""
    vals = f.physical()
    return float(np.sum(np.abs(vals) ** 2) * f.grid.cell_volume)


def energy(f: Field, lam: float, mu: float) -> float:
    """``∫ |∇_x u|² + |∇_y u|² − (2λ/(μ+2)) ∫ |u|^{μ+2}``.

    Gradients are taken spectrally (Parseval), the potential term pointwise.
    """
    g = f.grid
    c = f.spectral()
    kinetic = g.volume * float(np.sum(g.symbol * np.abs(c) ** 2))
    mu = float(mu)
    potential = float(np.sum(np.abs(f.physical()) ** (mu + 2)) * g.cell_volume)
    return kinetic - 2.0 * lam / (mu + 2.0) * potential


def write_norm_csv(path, rows: Iterable[tuple[float, str, float]]) -> None:
    """CSV with header ``t,norm_name,value``; floats written with ``repr`` for exact round trip."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm_name", "value"])
        for t, name, value in rows:
            w.writerow([repr(float(t)), name, repr(float(value))])
