"""Discretisation of ℝⁿ × Tᵏ.

The Euclidean factor is a periodic box ``[-L, L)ⁿ`` with ``N_x`` points per
axis; the compact factor is a rectangular torus with radii ``ρ_j`` (axis
length ``2πρ_j``) and ``N_y`` points per axis.  Arrays over the product grid
have shape ``(N_x,)*n + (N_y,)*k``: Euclidean axes first.

Spectral coefficients are Fourier-series coefficients (numpy ``norm="forward"``).
Because the box starts at ``-L``, the single mode ``A e^{i(ξ_j x + m y/ρ)}``
has coefficient ``(-1)^j A``; every operator used here is diagonal in the
modes, so the sign never matters.  The
Nyquist index ``-N/2`` sits on the negative side, as in ``numpy.fft.fftfreq``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["BoxGrid", "TorusSpectrum", "ProductGrid", "build_grid", "eigenvalue",
           "recurrence_horizon"]


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BoxGrid:
    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("box dimension n must be >= 1")
        if not self.L > 0:
            raise ValueError(f"half length L must be positive, got {self.L}")
        if not _is_pow2(self.N):
            raise ValueError(f"N_x must be a power of two, got {self.N}")

    @property
    def dx(self) -> float:
        return 2 * self.L / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # (π/L)·ℤ, Nyquist on the negative side
        return np.fft.fftfreq(self.N, d=1.0 / self.N) * (np.pi / self.L)


@dataclass(frozen=True)
class TorusSpectrum:
    k: int
    radii: tuple[float, ...]
    N: int

    def __post_init__(self):
        radii = tuple(float(r) for r in np.atleast_1d(self.radii))
        if len(radii) == 1 and self.k > 1:
            radii = radii * self.k
        object.__setattr__(self, "radii", radii)
        if self.k < 1 or len(radii) != self.k:
            raise ValueError(f"need {self.k} radii, got {radii}")
        if any(not r > 0 for r in radii):
            raise ValueError(f"radii must be positive, got {radii}")
        if self.N < 2 or self.N % 2:
            raise ValueError(f"N_y must be an even positive integer, got {self.N}")

    @cached_property
    def mode_indices(self) -> np.ndarray:
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)

    def axis_nodes(self, j: int) -> np.ndarray:
        return 2 * np.pi * self.radii[j] * np.arange(self.N) / self.N

    def spacing(self, j: int) -> float:
        return 2 * np.pi * self.radii[j] / self.N

    @property
    def volume(self) -> float:
        return float(np.prod([2 * np.pi * r for r in self.radii]))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.N ** self.k

    @property
    def diameter(self) -> float:
        """Largest geodesic distance on the flat torus."""
        return math.sqrt(sum((np.pi * r) ** 2 for r in self.radii))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """ν_m = Σ_j (m_j/ρ_j)² on the ``(N,)*k`` mode lattice (FFT order)."""
        m = self.mode_indices
        nu = np.zeros((self.N,) * self.k)
        for j, rho in enumerate(self.radii):
            shape = [1] * self.k
            shape[j] = self.N
            nu = nu + ((m / rho) ** 2).reshape(shape)
        return nu

    def wavenumbers(self, j: int) -> np.ndarray:
        return self.mode_indices / self.radii[j]


def eigenvalue(m, torus: TorusSpectrum) -> float:
    """Eigenvalue of −Δ_y for the mode with integer multi-index ``m``."""
    m = np.atleast_1d(np.asarray(m, dtype=int))
    if m.shape != (torus.k,):
        raise ValueError(f"multi-index must have {torus.k} entries")
    if np.any(np.abs(m) > torus.N // 2):
        raise ValueError(f"mode {tuple(m)} outside the band |m_j| <= {torus.N // 2}")
    return float(sum((mj / rho) ** 2 for mj, rho in zip(m, torus.radii)))


@dataclass(frozen=True)
class ProductGrid:
    box: BoxGrid
    torus: TorusSpectrum
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def k(self) -> int:
        return self.torus.k

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.box.N,) * self.n + (self.torus.N,) * self.k

    @property
    def size(self) -> int:
        return self.box.N ** self.n * self.torus.N ** self.k

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def y_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n, self.n + self.k))

    @property
    def x_cell(self) -> float:
        return self.box.dx ** self.n

    @property
    def cell_volume(self) -> float:
        return self.x_cell * self.torus.cell_volume

    @property
    def volume(self) -> float:
        return (2 * self.box.L) ** self.n * self.torus.volume

    def _bshape(self, axis: int) -> list[int]:
        shape = [1] * (self.n + self.k)
        shape[axis] = self.shape[axis]
        return shape

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable node coordinates ``(x_1..x_n, y_1..y_k)``."""
        out = [self.box.nodes.reshape(self._bshape(a)) for a in self.x_axes]
        out += [self.torus.axis_nodes(j).reshape(self._bshape(a)) for j, a in enumerate(self.y_axes)]
        return tuple(out)

    def xi(self) -> tuple[np.ndarray, ...]:
        return tuple(self.box.wavenumbers.reshape(self._bshape(a)) for a in self.x_axes)

    def eta(self) -> tuple[np.ndarray, ...]:
        """Transverse wavenumbers m_j/ρ_j, broadcastable."""
        return tuple(self.torus.wavenumbers(j).reshape(self._bshape(a)) for j, a in enumerate(self.y_axes))

    @property
    def xi2(self) -> np.ndarray:
        if "xi2" not in self._cache:
            self._cache["xi2"] = sum(x ** 2 for x in self.xi())
        return self._cache["xi2"]

    @property
    def nu(self) -> np.ndarray:
        if "nu" not in self._cache:
            shape = [1] * self.n + [self.torus.N] * self.k
            self._cache["nu"] = self.torus.eigenvalues.reshape(shape)
        return self._cache["nu"]

    @property
    def symbol(self) -> np.ndarray:
        """Symbol of −Δ_{x,y}: ``|ξ|² + ν_m`` on the full spectral lattice."""
        if "symbol" not in self._cache:
            self._cache["symbol"] = self.xi2 + self.nu
        return self._cache["symbol"]

    def _check(self, arr: np.ndarray) -> None:
        if arr.shape[-len(self.shape):] != self.shape:
            raise ValueError(f"array shape {arr.shape} does not end with grid shape {self.shape}")

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Physical values -> Fourier coefficients (trailing grid axes)."""
        values = np.asarray(values)
        self._check(values)
        axes = tuple(range(values.ndim - len(self.shape), values.ndim))
        return np.fft.fftn(values, axes=axes, norm="forward")

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        self._check(coeffs)
        axes = tuple(range(coeffs.ndim - len(self.shape), coeffs.ndim))
        return np.fft.ifftn(coeffs, axes=axes, norm="forward")

    def l2_physical(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(values) ** 2) * self.cell_volume))

    def l2_spectral(self, coeffs: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2) * self.volume))


def build_grid(config) -> ProductGrid:
    """Grid from any object with ``n, k, L, Nx, Ny, radii`` attributes (e.g. ``SimConfig``)."""
    box = BoxGrid(int(config.n), float(config.L), int(config.Nx))
    torus = TorusSpectrum(int(config.k), tuple(config.radii), int(config.Ny))
    return ProductGrid(box, torus)


def recurrence_horizon(grid: ProductGrid, band: float, cap: float = math.inf) -> float:
    """Time before which the periodic box stands in for ℝⁿ, for data in ``|ξ| <= band``.

    ``T_hor = L / (2·band)``: the time to cross one half-length ``L`` at the
    top group velocity ``2·band``.  Band 0 yields ``cap``.
    """
    if band < 0:
        raise ValueError("band must be non-negative")
    if band == 0:
        return cap
    return min(grid.box.L / (2.0 * band), cap)
