"""Numerics for the nonlinear Schrödinger equation on ℝⁿ × Tᵏ.

Submodules: ``exponents`` (exact Strichartz exponent bookkeeping), ``grid``
and ``fields`` (spectral product grid, states, norms), ``evolution`` (split
step, Duhamel operator, Picard iteration), ``fractional`` (derivatives and
inequality checks on tori), ``scattering`` (wave-data diagnostics),
``config`` and ``cli`` (the experiment harness).
"""
__version__ = "0.1.0"
