"""Exact moments of the uniform probability measure on [-1,1]^n and on the unit ball.

All moments are exact rationals: the measure is normalized to total mass 1 on each
domain, which removes every factor of pi from the ball moments.
"""

import logging
from collections import defaultdict
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import ceil, isqrt, prod
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidInterval
from .polyring import MPoly, Monomial, UPoly, chebyshev_t, mp_mul

logger = logging.getLogger(__name__)

BALL_BOUND_BITS = 30

__all__ = [
    "DomainKind",
    "Domain",
    "MomentSeq",
    "monomial_moment",
    "poly_moment",
    "expectation_of_product",
    "pushforward_moments",
    "modified_moments",
    "ball_monomial_bound",
    "range_enclosure",
    "sample_uniform",
]


class DomainKind(Enum):
    BOX = "box"
    BALL = "ball"


class Domain(NamedTuple):
    """Uniform probability measure on [-1,1]^n (BOX) or the closed unit ball (BALL)."""

    kind: DomainKind
    nvars: int

    @classmethod
    def box(cls, nvars: int) -> "Domain":
        return cls(DomainKind.BOX, nvars)

    @classmethod
    def ball(cls, nvars: int) -> "Domain":
        return cls(DomainKind.BALL, nvars)

    @classmethod
    def parse(cls, kind: str, nvars: int) -> "Domain":
        return cls(DomainKind(kind.lower()), int(nvars))

    def __str__(self) -> str:
        return f"{self.kind.value}{self.nvars}"


def _double_factorial_odd(k: int) -> int:
    """(k-1)!! for even k >= 0, i.e. 1*3*...*(k-1)."""
    out = 1
    for j in range(1, k, 2):
        out *= j
    return out


@lru_cache(maxsize=None)
def _monomial_moment(kind: DomainKind, nvars: int, alpha: Monomial) -> Fraction:
    if any(e % 2 for e in alpha):
        return Fraction(0)
    if kind is DomainKind.BOX:
        den = 1
        for e in alpha:
            den *= e + 1
        return Fraction(1, den)
    # Sphere moment times E[R^|alpha|] for the radial law n r^(n-1) dr.
    num = 1
    for e in alpha:
        num *= _double_factorial_odd(e)
    den = 1
    for j in range(1, sum(alpha) // 2 + 1):
        den *= nvars + 2 * j
    return Fraction(num, den)


def monomial_moment(domain: Domain, alpha: Sequence[int]) -> Fraction:
    """Exact E[x^alpha] under the uniform probability measure on ``domain``.

    Args:
        domain: Box or Ball.
        alpha: Exponent vector of length ``domain.nvars``.

    Returns:
        Fraction: moment
    """
    alpha = tuple(int(e) for e in alpha)
    if len(alpha) != domain.nvars:
        raise DimensionMismatch(
            f"exponent vector {alpha} does not match domain dimension {domain.nvars}"
        )
    return _monomial_moment(domain.kind, domain.nvars, alpha)


def _check_dim(domain: Domain, p: MPoly) -> None:
    if p.nvars != domain.nvars:
        raise DimensionMismatch(
            f"polynomial in {p.nvars} variables on a {domain.nvars}-dimensional domain"
        )


def poly_moment(domain: Domain, p: MPoly) -> Fraction:
    """Exact E[p] by linearity."""
    _check_dim(domain, p)
    total = Fraction(0)
    for alpha, c in p.terms.items():
        total += c * _monomial_moment(domain.kind, domain.nvars, alpha)
    return total


def _parity(alpha: Monomial) -> Tuple[int, ...]:
    return tuple(e & 1 for e in alpha)


def expectation_of_product(domain: Domain, p: MPoly, q: MPoly) -> Fraction:
    """Exact E[p*q] without expanding the product.

    Only pairs of terms whose exponent sum is even in every coordinate contribute,
    so the terms of ``q`` are bucketed by parity pattern.
    """
    _check_dim(domain, p)
    _check_dim(domain, q)
    buckets: Dict[Tuple[int, ...], List[Tuple[Monomial, Fraction]]] = defaultdict(list)
    for beta, c in q.terms.items():
        buckets[_parity(beta)].append((beta, c))
    kind, n = domain.kind, domain.nvars
    total = Fraction(0)
    for alpha, a in p.terms.items():
        partial = Fraction(0)
        for beta, b in buckets.get(_parity(alpha), ()):
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            partial += b * _monomial_moment(kind, n, gamma)
        total += a * partial
    return total


class MomentSeq:
    """Exact push-forward moments ``values[k] = E[f^k]``, k = 0..order."""

    __slots__ = ("values", "f_ref", "domain")

    def __init__(self, values: Sequence[Fraction], f_ref: Optional[MPoly], domain: Optional[Domain]):
        self.values = tuple(Fraction(v) for v in values)
        if not self.values or self.values[0] != 1:
            raise ValueError("moment sequence must start with m_0 = 1")
        self.f_ref = f_ref
        self.domain = domain

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def __repr__(self) -> str:
        return f"MomentSeq(order={self.order}, domain={self.domain})"

    def hankel(self, r: int, shift: int = 0) -> List[List[Fraction]]:
        """The (r+1)x(r+1) matrix ``(m[i+j+shift])``."""
        if 2 * r + shift > self.order:
            raise ValueError(
                f"Hankel matrix of size {r + 1} with shift {shift} needs order "
                f"{2 * r + shift}, have {self.order}"
            )
        return [[self.values[i + j + shift] for j in range(r + 1)] for i in range(r + 1)]

    def is_hankel_positive_definite(self, r: int) -> bool:
        """Exact check through the rational LDL^T pivots of the Hankel matrix."""
        from .linalg import is_positive_definite_exact

        return is_positive_definite_exact(self.hankel(r))

    def scaled(self, c: Fraction) -> List[Fraction]:
        """All moments multiplied by ``c``; the moments of ``c`` times the measure."""
        c = Fraction(c)
        return [c * v for v in self.values]

    def rows(self) -> List[Tuple[int, int, int]]:
        """Rows ``(k, num, den)`` for CSV export."""
        return [(k, v.numerator, v.denominator) for k, v in enumerate(self.values)]


def pushforward_moments(
    domain: Domain, f: MPoly, order: int, term_cap: Optional[int] = None
) -> MomentSeq:
    """Exact moments E[f^k], k = 0..order, of the push-forward of the domain measure by f.

    Only powers up to ``ceil(order / 2)`` are expanded; ``E[f^k]`` is taken as
    ``E[f^floor(k/2) * f^ceil(k/2)]``.

    Args:
        domain: Box or Ball.
        f: Polynomial in ``domain.nvars`` variables.
        order: Largest moment index M >= 0.
        term_cap: Override of the term-count guard.

    Returns:
        MomentSeq: moments
    """
    _check_dim(domain, f)
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    powers = [MPoly.constant(f.nvars, 1)]
    for _ in range((order + 1) // 2):
        powers.append(mp_mul(powers[-1], f, term_cap))
    values = [Fraction(1)]
    for k in range(1, order + 1):
        values.append(expectation_of_product(domain, powers[k // 2], powers[k - k // 2]))
    logger.debug(
        "pushforward moments up to %d on %s, largest power has %d terms",
        order,
        domain,
        len(powers[-1]),
    )
    return MomentSeq(values, f, domain)


def affine_to_unit(lo: Fraction, hi: Fraction) -> UPoly:
    """The affine map sending [lo, hi] onto [-1, 1]."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise InvalidInterval(f"interval [{lo}, {hi}] is empty or degenerate")
    return UPoly([-(hi + lo) / (hi - lo), 2 / (hi - lo)])


def modified_moments(
    domain: Domain,
    f: MPoly,
    lo: Fraction,
    hi: Fraction,
    order: int,
    moments: Optional[MomentSeq] = None,
) -> List[Fraction]:
    """Exact Chebyshev moments E[T_j(l(f))], j = 0..order, with l mapping [lo, hi] to [-1, 1].

    Args:
        domain: Box or Ball.
        f: Polynomial whose range on the domain lies in [lo, hi].
        lo: Lower end of the enclosure.
        hi: Upper end of the enclosure.
        order: Largest index M.
        moments: Precomputed push-forward moments of order >= M (recomputed when None).

    Returns:
        list: modified moments
    """
    ell = affine_to_unit(lo, hi)
    if moments is None or moments.order < order:
        moments = pushforward_moments(domain, f, order)
    out = []
    for j in range(order + 1):
        composed = chebyshev_t(j).compose(ell)
        out.append(sum((c * moments[k] for k, c in enumerate(composed.coeffs)), Fraction(0)))
    return out


@lru_cache(maxsize=None)
def ball_monomial_bound(alpha: Monomial) -> Fraction:
    """Rational upper bound on max |x^alpha| over the unit ball.

    The maximum is sqrt(prod alpha_i^alpha_i / |alpha|^|alpha|); it is returned
    exactly when that is a rational square and rounded up on a 2^-30 grid otherwise.
    """
    total = sum(alpha)
    if not total:
        return Fraction(1)
    square = Fraction(prod(a**a for a in alpha), total**total)
    num, den = isqrt(square.numerator), isqrt(square.denominator)
    if num * num == square.numerator and den * den == square.denominator:
        return Fraction(num, den)
    scale = 4**BALL_BOUND_BITS
    return min(Fraction(1), Fraction(isqrt(ceil(square * scale)) + 1, 2**BALL_BOUND_BITS))


def range_enclosure(domain: Domain, f: MPoly) -> Tuple[Fraction, Fraction]:
    """Enclosure [lo, hi] of f over the domain from coefficient bounds.

    Every monomial lies in [0, m] when all exponents are even and in [-m, m]
    otherwise, with m = 1 on the box and m = ball_monomial_bound(alpha) on the
    ball; the constant term is exact.
    """
    _check_dim(domain, f)
    ball = domain.kind is DomainKind.BALL
    lo = hi = Fraction(0)
    for alpha, c in f.terms.items():
        if not any(alpha):
            lo += c
            hi += c
            continue
        m = ball_monomial_bound(alpha) if ball else Fraction(1)
        if any(e % 2 for e in alpha):
            lo -= abs(c) * m
            hi += abs(c) * m
        elif c > 0:
            hi += c * m
        else:
            lo += c * m
    return lo, hi


def sample_uniform(domain: Domain, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform samples from the domain as a (count, nvars) float array."""
    n = domain.nvars
    if domain.kind is DomainKind.BOX:
        return rng.uniform(-1.0, 1.0, size=(count, n))
    direction = rng.standard_normal(size=(count, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = rng.uniform(size=(count, 1)) ** (1.0 / n)
    return direction * radius
