"""Measure-based upper bounds f^(r) and push-forward bounds f_pfm^(r).

Both bounds are smallest generalized eigenvalues of moment matrix pairs: the full
bound over the monomial basis of degree <= r in n variables, the push-forward bound
over the univariate basis 1, t, ..., t^r with the moments of the push-forward measure.
"""

import logging
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath

from .config import resolve_precision
from .errors import BreakdownNonPositiveBeta, DimensionMismatch, InvalidParameters
from .linalg import SymMat, gen_eig_min, to_fraction
from .measures import (
    Domain,
    DomainKind,
    MomentSeq,
    expectation_of_product,
    modified_moments,
    monomial_moment,
    pushforward_moments,
    range_enclosure,
)
from .orthopoly import (
    chebyshev_recurrence,
    modified_chebyshev,
    orthonormal_polynomials,
    smallest_root,
)
from .polyring import MPoly, Monomial, UPoly, compose_uni, grlex_key, mp_eval, mp_mul
from .utils import grid_vector, make_grid

logger = logging.getLogger(__name__)

MAX_PRECISION_DOUBLINGS = 2

__all__ = [
    "Method",
    "BoundResult",
    "DensityPoly",
    "monomial_basis",
    "upper_bound_full",
    "upper_bound_pfm",
    "upper_bound",
    "pfm_hankel_bound",
    "optimal_density",
    "density_expectation",
    "density_grid",
    "sample_density",
]


class Method(Enum):
    FULL = "full"
    PFM_HANKEL = "pfm-hankel"
    PFM_CHEBYSHEV = "pfm-cheb"

    @property
    def is_pfm(self) -> bool:
        return self is not Method.FULL


class BoundResult(NamedTuple):
    """A bound value with the minimizing eigenvector in the basis it was computed in.

    For the full bound ``basis`` lists exponent vectors; for push-forward bounds it lists
    the powers 0..r of t and ``eigvec`` holds the coefficients of the univariate density root.
    """

    value: mpmath.mpf
    r: int
    method: Method
    eigvec: Tuple[mpmath.mpf, ...]
    basis: Tuple[Union[Monomial, int], ...]
    domain: Domain
    f_ref: MPoly
    precision: int


class DensityPoly(NamedTuple):
    """The density ``normalization * q(x)^2``; for push-forward bounds ``q = s(f)``."""

    q: MPoly
    normalization: Fraction
    domain: Domain
    s: Optional[UPoly] = None

    def value(self, point: Sequence[Fraction]) -> Fraction:
        return self.normalization * mp_eval(self.q, point) ** 2


def monomial_basis(nvars: int, r: int) -> List[Monomial]:
    """All exponent vectors of total degree <= r, graded-lexicographically ordered."""

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    if nvars == 0:
        return [()]
    basis = [alpha for d in range(r + 1) for alpha in compositions(d, nvars)]
    return sorted(basis, key=grlex_key)


def _check_dim(domain: Domain, f: MPoly) -> None:
    if f.nvars != domain.nvars:
        raise DimensionMismatch(
            f"polynomial in {f.nvars} variables on a {domain.nvars}-dimensional domain"
        )


def full_moment_matrices(f: MPoly, domain: Domain, r: int) -> Tuple[SymMat, SymMat, List[Monomial]]:
    """Exact pair (A, B) = (E[f b_a b_b], E[b_a b_b]) over the monomial basis of degree <= r."""
    basis = monomial_basis(domain.nvars, r)
    cache: Dict[Monomial, Tuple[Fraction, Fraction]] = {}
    f_terms = list(f.terms.items())

    def entries(i: int, j: int) -> Tuple[Fraction, Fraction]:
        key = tuple(x + y for x, y in zip(basis[i], basis[j]))
        if key not in cache:
            b = monomial_moment(domain, key)
            a = sum(
                (c * monomial_moment(domain, tuple(x + y for x, y in zip(key, g))) for g, c in f_terms),
                Fraction(0),
            )
            cache[key] = (a, b)
        return cache[key]

    A = SymMat.from_function(len(basis), lambda i, j: entries(i, j)[0])
    B = SymMat.from_function(len(basis), lambda i, j: entries(i, j)[1])
    return A, B, basis


def upper_bound_full(
    f: MPoly,
    domain: Domain,
    r: int,
    prec: Optional[int] = None,
    backend: str = "mpmath",
) -> BoundResult:
    """The bound f^(r): min E[f sigma] over SOS densities sigma of degree 2r.

    Args:
        f: Objective.
        domain: Box or Ball in ``f.nvars`` dimensions.
        r: Order, the density is the square of a degree-r polynomial.
        prec: Working precision in bits.
        backend: Eigensolver backend, "mpmath" or "lapack".

    Returns:
        BoundResult: result
    """
    _check_dim(domain, f)
    if r < 0:
        raise InvalidParameters(f"order must be non-negative, got {r}")
    prec = resolve_precision(prec)
    A, B, basis = full_moment_matrices(f, domain, r)
    logger.debug(
        "full bound r=%d on %s: matrix order %d (C(n+r, r) = %d)",
        r,
        domain,
        len(basis),
        comb(domain.nvars + r, r),
    )
    value, vec = gen_eig_min(A, B, prec=prec, backend=backend)
    return BoundResult(value, r, Method.FULL, tuple(vec), tuple(basis), domain, f, prec)


def pfm_hankel_bound(
    values: Sequence[Fraction], r: int, prec: Optional[int] = None
) -> Tuple[mpmath.mpf, List[mpmath.mpf]]:
    """Smallest generalized eigenvalue of the Hankel pair ((m[i+j+1]), (m[i+j])), i, j <= r.

    ``values`` may be the moments of any positive multiple of a probability measure.
    """
    if len(values) < 2 * r + 2:
        raise InvalidParameters(f"need {2 * r + 2} moments for order {r}, got {len(values)}")
    values = [Fraction(v) for v in values]
    A = SymMat.from_function(r + 1, lambda i, j: values[i + j + 1])
    B = SymMat.from_function(r + 1, lambda i, j: values[i + j])
    return gen_eig_min(A, B, prec=prec)


def _kernel_coefficients(rec, root: mpmath.mpf, r: int, prec: int) -> List[mpmath.mpf]:
    """Power coefficients of sum_i p_i(root) p_i(t), normalized to unit norm."""
    polys = orthonormal_polynomials(rec, r + 1, prec)
    with mpmath.workprec(prec):
        weights = [mpmath.polyval(list(reversed(p)), root) for p in polys]
        norm = mpmath.sqrt(mpmath.fdot(weights, weights))
        coeffs = [mpmath.mpf(0)] * (r + 1)
        for w, p in zip(weights, polys):
            for k, c in enumerate(p):
                coeffs[k] += w * c
        return [c / norm for c in coeffs]


def _chebyshev_bound(
    mods: Sequence[Fraction], lo: Fraction, hi: Fraction, r: int, prec: int
) -> Tuple[mpmath.mpf, List[mpmath.mpf]]:
    """Smallest Jacobi root from modified moments, doubling the precision on breakdown.

    The result is rounded to ``prec`` bits whatever precision it was computed at.
    """
    work = prec
    for attempt in range(MAX_PRECISION_DOUBLINGS + 1):
        try:
            aux = chebyshev_recurrence(2 * r + 1, work)
            rec = modified_chebyshev(mods, aux, r + 1, work, support=(lo, hi))
            break
        except BreakdownNonPositiveBeta:
            if attempt == MAX_PRECISION_DOUBLINGS:
                raise
            logger.info("modified Chebyshev broke down at %d bits, retrying at %d", work, 2 * work)
            work *= 2
    value = smallest_root(rec, r + 1, work)
    vec = _kernel_coefficients(rec, value, r, work)
    with mpmath.workprec(prec):
        return +value, [+c for c in vec]


def upper_bound_pfm(
    f: MPoly,
    domain: Domain,
    r: int,
    method: Method = Method.PFM_HANKEL,
    prec: Optional[int] = None,
    moments: Optional[MomentSeq] = None,
    enclosure: Optional[Tuple[Fraction, Fraction]] = None,
) -> BoundResult:
    """The push-forward bound f_pfm^(r): min E[f s(f)] over univariate SOS s of degree 2r.

    Args:
        f: Objective.
        domain: Box or Ball in ``f.nvars`` dimensions.
        r: Order.
        method: PFM_HANKEL (raw Hankel pair) or PFM_CHEBYSHEV (modified moments and
            the tridiagonal Jacobi matrix).
        prec: Working precision in bits.
        moments: Precomputed push-forward moments of order >= 2r + 1.
        enclosure: Interval containing f(K) for the Chebyshev path (coefficient bound if None).

    Returns:
        BoundResult: result
    """
    _check_dim(domain, f)
    if r < 0:
        raise InvalidParameters(f"order must be non-negative, got {r}")
    if not method.is_pfm:
        raise InvalidParameters(f"{method.value} is not a push-forward method")
    prec = resolve_precision(prec)
    if moments is None or moments.order < 2 * r + 1:
        moments = pushforward_moments(domain, f, 2 * r + 1)
    if method is Method.PFM_HANKEL:
        value, vec = pfm_hankel_bound(moments.values[: 2 * r + 2], r, prec)
    else:
        lo, hi = enclosure if enclosure is not None else range_enclosure(domain, f)
        if lo == hi:
            lo, hi = lo - 1, hi + 1
        mods = modified_moments(domain, f, lo, hi, 2 * r + 1, moments=moments)
        value, vec = _chebyshev_bound(mods, lo, hi, r, prec)
    return BoundResult(
        value, r, method, tuple(vec), tuple(range(r + 1)), domain, f, prec
    )


def upper_bound(
    f: MPoly, domain: Domain, r: int, method: Method, prec: Optional[int] = None, **kwargs
) -> BoundResult:
    """Dispatches to the full or push-forward bound."""
    if method is Method.FULL:
        return upper_bound_full(f, domain, r, prec=prec, **kwargs)
    return upper_bound_pfm(f, domain, r, method=method, prec=prec, **kwargs)


def optimal_density(
    result: BoundResult, f: Optional[MPoly] = None, max_denominator: int = 2**64
) -> DensityPoly:
    """Exactly normalized SOS density from the minimizing eigenvector.

    The eigenvector is rounded to rationals first, so ``E[density] == 1`` holds exactly.

    Args:
        result: Bound with its eigenvector.
        f: Objective (defaults to ``result.f_ref``).
        max_denominator: Denominator cap of the rational rounding.

    Returns:
        DensityPoly: density
    """
    f = result.f_ref if f is None else f
    domain = result.domain
    coeffs = [to_fraction(v, max_denominator) for v in result.eigvec]
    if result.method is Method.FULL:
        q = MPoly(domain.nvars, dict(zip(result.basis, coeffs)))
        s = None
        norm = expectation_of_product(domain, q, q)
    else:
        s = UPoly(coeffs)
        q = compose_uni(s, f)
        m = pushforward_moments(domain, f, 2 * max(s.degree, 0))
        norm = sum(
            (a * b * m[i + j] for i, a in enumerate(s.coeffs) for j, b in enumerate(s.coeffs)),
            Fraction(0),
        )
    if norm <= 0:
        raise InvalidParameters("rounded eigenvector gives a zero density")
    return DensityPoly(q, 1 / norm, domain, s)


def density_expectation(d: DensityPoly, f: MPoly) -> Fraction:
    """Exact E[f * density]."""
    return d.normalization * expectation_of_product(d.domain, mp_mul(f, d.q), d.q)


def density_grid(domain: Domain, step: Fraction) -> List[Tuple[Fraction, ...]]:
    """Regular grid with spacing ``step`` on [-1, 1]^n, clipped to the ball for BALL."""
    axis = grid_vector(Fraction(-1), Fraction(1), Fraction(step))
    points = make_grid([axis] * domain.nvars)
    if domain.kind is DomainKind.BALL:
        points = [p for p in points if sum(x * x for x in p) <= 1]
    return points


def sample_density(
    d: DensityPoly, grid: Sequence[Sequence[Fraction]]
) -> List[Tuple[Tuple[Fraction, ...], Fraction]]:
    """Exact density values at the grid points."""
    out = []
    for point in grid:
        point = tuple(Fraction(x) for x in point)
        if len(point) != d.domain.nvars:
            raise DimensionMismatch(
                f"point {point} does not match domain dimension {d.domain.nvars}"
            )
        out.append((point, d.value(point)))
    return out
