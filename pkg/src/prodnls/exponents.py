"""Exact rational calculus for Lebesgue / Sobolev exponents.

Every exponent is either a :class:`fractions.Fraction` or the sentinel
:data:`INF`.  Nothing in this module touches floating point: the strict
inequalities in the Strichartz conditions are meaningless under rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterator, Union

__all__ = [
    "INF", "ExtRational", "ExponentPair", "NonlinearityContext", "StrichartzSystem",
    "Infeasible", "parse_ext", "recip", "from_recip", "mu_star", "sobolev_index",
    "is_admissible", "is_acceptable", "homogeneous_ok", "inhomogeneous_ok",
    "system_violations", "solve_system", "scan_witnesses", "derived_pair",
    "contraction_exponents", "admissible_pair",
]


@total_ordering
class _Infinity:
    """The +infinity exponent.  ``1/INF == 0``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("prodnls.INF")

    def __lt__(self, other) -> bool:
        return False

    def __gt__(self, other) -> bool:
        return other is not self

    def __float__(self) -> float:
        return math.inf

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
ExtRational = Union[Fraction, _Infinity]


class Infeasible(ValueError):
    """No exponent witness exists within the search bound (or the input is out of range)."""


def _frac(x) -> ExtRational:
    if x is INF:
        return INF
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return INF
        raise TypeError("floats are not accepted as exponents; use Fraction or a 'p/q' string")
    return Fraction(x)


def parse_ext(text: str) -> ExtRational:
    """Parse ``'p/q'``, an integer, or ``'inf'`` into an exponent."""
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf", "∞"):
        return INF
    return Fraction(t)


def recip(x: ExtRational) -> Fraction:
    """Exact reciprocal with ``1/INF = 0``."""
    if x is INF:
        return Fraction(0)
    x = Fraction(x)
    if x == 0:
        raise ZeroDivisionError("exponent 0 has no reciprocal")
    return 1 / x


def from_recip(y: Fraction) -> ExtRational:
    """Inverse of :func:`recip`: ``0 -> INF``."""
    y = Fraction(y)
    return INF if y == 0 else 1 / y


def fmt(x: ExtRational) -> str:
    return str(x)


@dataclass(frozen=True)
class ExponentPair:
    q: ExtRational
    r: ExtRational

    def __post_init__(self):
        object.__setattr__(self, "q", _frac(self.q))
        object.__setattr__(self, "r", _frac(self.r))

    def __iter__(self):
        return iter((self.q, self.r))

    def as_floats(self) -> tuple[float, float]:
        return float(self.q), float(self.r)


@dataclass(frozen=True)
class NonlinearityContext:
    """Dimensions and nonlinearity of ``i u_t + Δu + λ|u|^μ u = 0`` on ℝⁿ × Tᵏ."""

    n: int
    k: int
    mu: Fraction
    lam: float = -1.0
    sigma: float = 0.75

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("dimensions n, k must be positive")
        mu = _frac(self.mu)
        if mu is INF or mu <= 0:
            raise ValueError("mu must be a positive rational")
        object.__setattr__(self, "mu", mu)

    @property
    def s(self) -> Fraction:
        return sobolev_index(self.mu, self.n)

    @property
    def mass_critical(self) -> bool:
        return self.mu == Fraction(4, self.n)

    def in_range(self) -> bool:
        """``4/n <= mu < mu*(n)``."""
        return Fraction(4, self.n) <= self.mu < mu_star(self.n)


@dataclass(frozen=True)
class StrichartzSystem:
    ctx: NonlinearityContext
    pair: ExponentPair
    dual_pair: ExponentPair
    derived_pair: ExponentPair

    def row(self) -> tuple[str, ...]:
        return tuple(fmt(v) for v in (*self.pair, *self.dual_pair, *self.derived_pair))


def mu_star(n: int) -> ExtRational:
    """Upper end of the nonlinearity range: ``4/(n-1)``, or ``INF`` when ``n == 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return INF if n == 1 else Fraction(4, n - 1)


def sobolev_index(mu, n: int) -> Fraction:
    """``s = (μn − 4) / (2μ)``; negative values are returned as-is."""
    mu = Fraction(mu)
    if mu <= 0:
        raise ValueError("mu must be positive")
    return (mu * n - 4) / (2 * mu)


def _in_closed(x: ExtRational, lo, hi: ExtRational = INF) -> bool:
    return x is INF and hi is INF or (x is not INF and lo <= x and (hi is INF or x <= hi))


def is_admissible(n: int, pair: ExponentPair) -> bool:
    """Schrödinger-admissible: ``2/ℓ + n/p = n/2``, ``2 <= ℓ, p <= ∞``, ``(ℓ,p,n) != (2,∞,2)``."""
    l, p = pair
    if not (_in_closed(l, 2) and _in_closed(p, 2)):
        return False
    if n == 2 and l == 2 and p is INF:
        return False
    return 2 * recip(l) + n * recip(p) == Fraction(n, 2)


def is_acceptable(n: int, pair: ExponentPair) -> bool:
    """Schrödinger-acceptable: ``1 <= q < ∞, 2 <= r <= ∞, 1/q < n(1/2 − 1/r)``, or ``(q, r) = (∞, 2)``."""
    q, r = pair
    if q is INF:
        return r == 2
    if q < 1 or not _in_closed(r, 2):
        return False
    return recip(q) < n * (Fraction(1, 2) - recip(r))


def homogeneous_ok(n: int, s, pair: ExponentPair) -> bool:
    """Scaling ``2/q + n/r = n/2 − s`` plus the dimension-dependent range of q."""
    s = Fraction(s)
    if s >= Fraction(n, 2):
        raise ValueError(f"need s < n/2, got s={s}, n={n}")
    q, r = pair
    if not _in_closed(r, 2):
        return False
    if n == 1:
        q_ok = _in_closed(q, 4)
    elif n == 2:
        q_ok = q is INF or q > 2
    else:
        q_ok = _in_closed(q, 2)
    if not q_ok:
        return False
    return 2 * recip(q) + n * recip(r) == Fraction(n, 2) - s


def inhomogeneous_ok(n: int, pair: ExponentPair, dual_pair: ExponentPair) -> bool:
    """Extended inhomogeneous conditions for two acceptable pairs (q, r), (q̃, r̃).

    Raises ``ValueError`` if either pair is not Schrödinger-acceptable.
    """
    if not (is_acceptable(n, pair) and is_acceptable(n, dual_pair)):
        raise ValueError("both pairs must be Schrödinger-acceptable")
    q, r = pair
    qt, rt = dual_pair
    if not all(_in_closed(v, 2) for v in (q, r, qt, rt)):
        return False
    # 1/q + 1/q̃ = n/2 (1/r̃' − 1/r), with 1/r̃' = 1 − 1/r̃
    if recip(q) + recip(qt) != Fraction(n, 2) * (1 - recip(rt) - recip(r)):
        return False
    if n == 2:
        return r is not INF and rt is not INF
    if n >= 3:
        if not recip(q) < 1 - recip(qt):
            return False
        # r / r̃ = (1/r̃) / (1/r)
        ir, irt = recip(r), recip(rt)
        if ir == 0 and irt == 0:
            ratio = Fraction(1)
        elif ir == 0:
            return False
        else:
            ratio = irt / ir
        return Fraction(n - 2, n) <= ratio <= Fraction(n, n - 2)
    return True


def system_violations(ctx: NonlinearityContext, q, r, qt, rt) -> list[str]:
    """Names of the feasibility constraints that the quadruple (q, r, q̃, r̃) violates.

    The second inequality of the strict-sum pair is read as ``1/q̃ + n/r̃ < n/2``
    (its coefficient is taken to be the Euclidean dimension).  The ratio and
    sum conditions on ``q + q̃`` and ``r / r̃`` are only imposed for ``n >= 3``.
    """
    n, mu, s = ctx.n, ctx.mu, ctx.s
    iq, ir, iqt, irt = (recip(_frac(v)) for v in (q, r, qt, rt))
    half = Fraction(1, 2)
    bad = []
    if not all(0 < v < half for v in (iq, ir, iqt, irt)):
        bad.append("open_box")
    if n >= 3:
        if not iq + iqt < 1:
            bad.append("dual_sum")
        # (n-2)/n < r/r̃ < n/(n-2), with r/r̃ = (1/r̃)/(1/r)
        if not (ir > 0 and Fraction(n - 2, n) < irt / ir < Fraction(n, n - 2)):
            bad.append("ratio")
    if not iq + n * ir < Fraction(n, 2):
        bad.append("strict_sum")
    if not iqt + n * irt < Fraction(n, 2):
        bad.append("strict_sum_dual")
    if 2 * iq + n * ir != Fraction(n, 2) - s:
        bad.append("scaling")
    if 2 * iq + n * ir + 2 * iqt + n * irt != n:
        bad.append("scaling_sum")
    if 1 - iqt != (mu + 1) * iq:
        bad.append("duality_q")
    if 1 - irt != (mu + 1) * ir:
        bad.append("duality_r")
    if mu * iq + mu * n * ir / 2 != 1:
        bad.append("balance")
    if not mu * ir < 1:
        bad.append("mu_over_r")
    return bad


def _check_range(ctx: NonlinearityContext) -> None:
    if not ctx.in_range():
        raise Infeasible(
            f"mu={ctx.mu} outside 4/n <= mu < mu*(n) = {mu_star(ctx.n)} for n={ctx.n}"
        )


def scan_witnesses(ctx: NonlinearityContext, denominator_bound: int = 60) -> Iterator[StrichartzSystem]:
    """All lattice witnesses in deterministic (denominator, numerator) order of r.

    For each candidate ``r = a/b`` the balance identity fixes
    ``1/q = 1/μ − n/(2r)``, and duality fixes ``q̃, r̃``.  Since
    ``1/r̃ = 1 − (μ+1)/r`` must lie in ``(0, 1/2)``, only ``μ+1 < r < 2(μ+1)``
    can succeed; numerators are bounded accordingly.
    """
    _check_range(ctx)
    n, mu = ctx.n, ctx.mu
    lo, hi = mu + 1, 2 * (mu + 1)
    for b in range(1, denominator_bound + 1):
        a_min = math.floor(lo * b) + 1
        a_max = math.ceil(hi * b) - 1
        for a in range(a_min, a_max + 1):
            if math.gcd(a, b) != 1:
                continue
            r = Fraction(a, b)
            iq = 1 / mu - Fraction(n, 2) / r
            if iq <= 0:
                continue
            iqt = 1 - (mu + 1) * iq
            irt = 1 - (mu + 1) / r
            if iqt <= 0 or irt <= 0:
                continue
            q, qt, rt = 1 / iq, 1 / iqt, 1 / irt
            if system_violations(ctx, q, r, qt, rt):
                continue
            pair = ExponentPair(q, r)
            yield StrichartzSystem(ctx, pair, ExponentPair(qt, rt), derived_pair(ctx, pair))


def solve_system(ctx: NonlinearityContext, denominator_bound: int = 60) -> StrichartzSystem:
    """First feasible (q, r, q̃, r̃) in the deterministic scan.

    Raises:
        Infeasible: mu out of range, or nothing found with denominators <= bound.
    """
    for system in scan_witnesses(ctx, denominator_bound):
        return system
    raise Infeasible(
        f"no witness for n={ctx.n}, mu={ctx.mu} with r-denominator <= {denominator_bound}"
    )


def derived_pair(ctx: NonlinearityContext, pair: ExponentPair) -> ExponentPair:
    """Admissible (ℓ, p) with ``1/ℓ = μn/(4r)`` and ``1/p = 1/2 − μ/(2r)``."""
    n, mu = ctx.n, ctx.mu
    if pair.r is INF:
        raise ValueError("r = inf never comes out of solve_system")
    ir = recip(pair.r)
    il = mu * n * ir / 4
    ip = Fraction(1, 2) - mu * ir / 2
    if il <= 0 or ip < 0:
        raise ValueError(f"degenerate derived pair from r={pair.r}")
    out = ExponentPair(from_recip(il), from_recip(ip))
    if not is_admissible(n, out):
        raise ValueError(f"derived pair {out} is not admissible; input pair is not a witness")
    if mu * n * ir / 2 + mu * recip(pair.q) != 1:
        raise ValueError("balance identity mu*n/(2r) + mu/q = 1 fails")
    return out


def contraction_exponents(ctx: NonlinearityContext) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Mass-critical exponents ``(ℓ̄, p̄, ℓ̃', p̃')`` with ``ℓ̄ = p̄ = μ + 2``."""
    if not ctx.mass_critical:
        raise ValueError(f"contraction exponents need mu = 4/n, got mu={ctx.mu}, n={ctx.n}")
    lbar = ctx.mu + 2
    dual = lbar / (ctx.mu + 1)
    assert is_admissible(ctx.n, ExponentPair(lbar, lbar))
    return lbar, lbar, dual, dual


def admissible_pair(n: int, p) -> ExponentPair:
    """The admissible pair with spatial exponent p (time exponent from the scaling)."""
    p = _frac(p)
    il = Fraction(n, 2) * (Fraction(1, 2) - recip(p))
    pair = ExponentPair(from_recip(il), p)
    if not is_admissible(n, pair):
        raise ValueError(f"no admissible pair with p={p} in dimension {n}")
    return pair
