"""Three-term recurrences of orthonormal polynomial families and their smallest roots.

A ``Recurrence3`` with coefficients ``alpha[j]``, ``beta[j]`` encodes the orthonormal family

    beta[j+1] p_{j+1}(t) = (t - alpha[j]) p_j(t) - beta[j] p_{j-1}(t),   p_0 = 1 / beta[0],

so ``beta[0]`` is the square root of the total mass and ``beta[j]`` (j >= 1) is the
off-diagonal entry of the symmetric Jacobi matrix. By Golub-Welsch the roots of
``p_m`` are the eigenvalues of the leading m x m Jacobi matrix.
"""

import logging
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath

from .config import resolve_precision
from .errors import BreakdownNonPositiveBeta, InvalidParameters
from .linalg import to_hfloat

logger = logging.getLogger(__name__)

Real = Union[int, Fraction]

__all__ = [
    "JacobiParams",
    "Recurrence3",
    "jacobi_recurrence",
    "chebyshev_recurrence",
    "chebyshev_leading_coefficients",
    "smallest_root",
    "modified_chebyshev",
    "orthonormal_polynomials",
    "orthonormality_defect",
    "theorem3_reference",
]


class JacobiParams(NamedTuple):
    """Exponents of the weight (1 - x)^a (1 + x)^b on [-1, 1]."""

    a: Fraction
    b: Fraction

    def validate(self) -> "JacobiParams":
        if not (self.a > -1 and self.b > -1):
            raise InvalidParameters(
                f"Jacobi parameters must exceed -1, got a={self.a}, b={self.b}"
            )
        return self


class Recurrence3:
    """Coefficients ``alpha[j]``, ``beta[j]``, j < len, of an orthonormal family."""

    __slots__ = ("alpha", "beta")

    def __init__(self, alpha: Sequence[mpmath.mpf], beta: Sequence[mpmath.mpf]):
        if len(alpha) != len(beta):
            raise InvalidParameters(
                f"alpha and beta lengths differ: {len(alpha)} and {len(beta)}"
            )
        if any(b <= 0 for b in beta):
            raise BreakdownNonPositiveBeta("recurrence weights must be positive")
        self.alpha = tuple(alpha)
        self.beta = tuple(beta)

    def __len__(self) -> int:
        return len(self.alpha)

    def __repr__(self) -> str:
        return f"Recurrence3(length={len(self)})"

    def affine(self, lo: Real, hi: Real, prec: Optional[int] = None) -> "Recurrence3":
        """The recurrence after the change of variable [-1, 1] -> [lo, hi]."""
        lo, hi = Fraction(lo), Fraction(hi)
        prec = resolve_precision(prec)
        with mpmath.workprec(prec):
            c = to_hfloat((lo + hi) / 2, prec)
            s = to_hfloat((hi - lo) / 2, prec)
            alpha = tuple(c + s * a for a in self.alpha)
            beta = self.beta[:1] + tuple(s * b for b in self.beta[1:])
        return Recurrence3(alpha, beta)

    def rows(self) -> List[Tuple[int, mpmath.mpf, mpmath.mpf]]:
        """Rows ``(j, alpha, beta)`` for CSV export."""
        return [(j, a, b) for j, (a, b) in enumerate(zip(self.alpha, self.beta))]


def jacobi_recurrence(
    params: JacobiParams, n: int, prec: Optional[int] = None
) -> Recurrence3:
    """Recurrence of the orthonormal Jacobi family for the probability-normalized weight.

    Args:
        params: Weight exponents (a, b), both > -1. a = b = 0 gives Legendre.
        n: Number of coefficient pairs.
        prec: Working precision in bits.

    Returns:
        Recurrence3: rec
    """
    a, b = Fraction(params.a), Fraction(params.b)
    JacobiParams(a, b).validate()
    prec = resolve_precision(prec)
    alpha, beta = [], []
    for k in range(n):
        if k == 0:
            alpha.append((b - a) / (a + b + 2))
        else:
            alpha.append((b * b - a * a) / ((2 * k + a + b) * (2 * k + a + b + 2)))
        if k == 0:
            beta.append(Fraction(1))
        elif k == 1:
            beta.append(4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b)))
        else:
            s = 2 * k + a + b
            beta.append(4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1)))
    with mpmath.workprec(prec):
        return Recurrence3(
            tuple(to_hfloat(x, prec) for x in alpha),
            tuple(mpmath.sqrt(to_hfloat(x, prec)) for x in beta),
        )


def chebyshev_recurrence(n: int, prec: Optional[int] = None) -> Recurrence3:
    """Recurrence of the orthonormal Chebyshev (first kind) family on [-1, 1]."""
    prec = resolve_precision(prec)
    with mpmath.workprec(prec):
        beta = [mpmath.mpf(1), mpmath.sqrt(mpmath.mpf(1) / 2)] + [mpmath.mpf(1) / 2] * max(n - 2, 0)
        return Recurrence3(tuple(mpmath.mpf(0) for _ in range(n)), tuple(beta[:n]))


def chebyshev_leading_coefficients(n: int) -> List[int]:
    """Leading coefficients of T_0, ..., T_{n-1}."""
    return [1] + [2 ** (j - 1) for j in range(1, n)]


def _sturm_count(rec: Recurrence3, m: int, x: mpmath.mpf) -> int:
    """Number of eigenvalues of the leading m x m Jacobi matrix below x."""
    count = 0
    d = mpmath.mpf(1)
    tiny = mpmath.ldexp(1, -2 * mpmath.mp.prec)
    for i in range(m):
        off = rec.beta[i] ** 2 / d if i else 0
        d = rec.alpha[i] - x - off
        if d == 0:
            d = -tiny
        if d < 0:
            count += 1
    return count


def smallest_root(rec: Recurrence3, degree: int, prec: Optional[int] = None) -> mpmath.mpf:
    """Smallest root of p_degree, i.e. the smallest eigenvalue of the Jacobi matrix.

    Bisection on Sturm counts inside the Gershgorin interval.
    """
    if not 1 <= degree <= len(rec):
        raise InvalidParameters(f"degree {degree} outside 1..{len(rec)}")
    prec = resolve_precision(prec)
    with mpmath.workprec(prec + 16):
        m = degree
        radius = [
            (abs(rec.beta[i]) if i else 0) + (abs(rec.beta[i + 1]) if i + 1 < m else 0)
            for i in range(m)
        ]
        lo = min(rec.alpha[i] - radius[i] for i in range(m))
        hi = max(rec.alpha[i] + radius[i] for i in range(m))
        width = max(abs(lo), abs(hi), mpmath.mpf(1))
        target = mpmath.ldexp(width, -prec - 4)
        while hi - lo > target:
            mid = (lo + hi) / 2
            if _sturm_count(rec, m, mid) >= 1:
                hi = mid
            else:
                lo = mid
        root = (lo + hi) / 2
    with mpmath.workprec(prec):
        return +root


def modified_chebyshev(
    mod_moments: Sequence[Real],
    aux: Recurrence3,
    n: int,
    prec: Optional[int] = None,
    leading: Optional[Sequence[Real]] = None,
    support: Optional[Tuple[Real, Real]] = None,
) -> Recurrence3:
    """Recurrence of the measure whose modified moments against ``aux`` are given.

    The modified moments are integrals of the auxiliary polynomials with leading
    coefficients ``leading`` (Chebyshev T_j by default); they are normalized to the
    monic auxiliary family internally.

    Args:
        mod_moments: 2n modified moments.
        aux: Recurrence of the auxiliary family, at least 2n - 1 coefficients.
        n: Number of coefficient pairs to produce.
        prec: Working precision in bits.
        leading: Leading coefficients of the polynomials whose moments were taken.
        support: When given, the result is mapped from [-1, 1] to this interval.

    Returns:
        Recurrence3: rec
    """
    if len(mod_moments) < 2 * n:
        raise InvalidParameters(f"need {2 * n} modified moments, got {len(mod_moments)}")
    if len(aux) < 2 * n - 1:
        raise InvalidParameters(
            f"auxiliary recurrence has {len(aux)} coefficients, need {2 * n - 1}"
        )
    prec = resolve_precision(prec)
    leading = chebyshev_leading_coefficients(2 * n) if leading is None else leading
    with mpmath.workprec(prec):
        nu = [to_hfloat(Fraction(m) / Fraction(c), prec) for m, c in zip(mod_moments[: 2 * n], leading)]
        a = list(aux.alpha)
        b = [x * x for x in aux.beta]
        threshold = mpmath.ldexp(1, -(prec // 2))
        if nu[0] <= 0:
            raise BreakdownNonPositiveBeta(f"zeroth moment {mpmath.nstr(nu[0], 5)} is not positive")
        alpha = [a[0] + nu[1] / nu[0]]
        beta = [nu[0]]
        prev = [mpmath.mpf(0)] * (2 * n + 1)
        cur = list(nu) + [mpmath.mpf(0)]
        for k in range(1, n):
            nxt = [mpmath.mpf(0)] * (2 * n + 1)
            for l in range(k, 2 * n - k):
                nxt[l] = (
                    cur[l + 1]
                    - (alpha[k - 1] - a[l]) * cur[l]
                    - beta[k - 1] * prev[l]
                    + b[l] * cur[l - 1]
                )
            bk = nxt[k] / cur[k - 1]
            if bk <= threshold:
                raise BreakdownNonPositiveBeta(
                    f"beta_{k} = {mpmath.nstr(bk, 5)} is not positive; the measure may "
                    f"have finite support or the precision is exhausted"
                )
            alpha.append(a[k] + nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1])
            beta.append(bk)
            prev, cur = cur, nxt
        rec = Recurrence3(tuple(alpha), tuple(mpmath.sqrt(x) for x in beta))
    logger.debug("modified Chebyshev produced %d coefficient pairs", n)
    return rec.affine(*support, prec=prec) if support is not None else rec


def orthonormal_polynomials(rec: Recurrence3, n: int, prec: Optional[int] = None) -> List[List[mpmath.mpf]]:
    """Power-basis coefficients of p_0, ..., p_{n-1}."""
    if n > len(rec):
        raise InvalidParameters(f"recurrence has {len(rec)} coefficients, need {n}")
    prec = resolve_precision(prec)
    with mpmath.workprec(prec):
        polys = [[1 / rec.beta[0]]]
        prev: List[mpmath.mpf] = []
        for j in range(n - 1):
            cur = polys[-1]
            nxt = [mpmath.mpf(0)] * (len(cur) + 1)
            for i, c in enumerate(cur):
                nxt[i + 1] += c
                nxt[i] -= rec.alpha[j] * c
            for i, c in enumerate(prev):
                nxt[i] -= rec.beta[j] * c
            nxt = [x / rec.beta[j + 1] for x in nxt]
            prev = cur
            polys.append(nxt)
        return polys


def orthonormality_defect(
    rec: Recurrence3, moments: Sequence[Real], n: int, prec: Optional[int] = None
) -> mpmath.mpf:
    """max |<p_i, p_j> - delta_ij| over i, j < n, integrating with the given power moments."""
    if len(moments) < 2 * n - 1:
        raise InvalidParameters(f"need {2 * n - 1} moments, got {len(moments)}")
    prec = resolve_precision(prec)
    polys = orthonormal_polynomials(rec, n, prec)
    with mpmath.workprec(prec):
        m = [to_hfloat(Fraction(x), prec) for x in moments[: 2 * n - 1]]
        worst = mpmath.mpf(0)
        for i in range(n):
            for j in range(i + 1):
                inner = mpmath.fsum(
                    ci * cj * m[k + l]
                    for k, ci in enumerate(polys[i])
                    for l, cj in enumerate(polys[j])
                )
                worst = max(worst, abs(inner - (1 if i == j else 0)))
        return worst


def theorem3_reference(k: int, r: int, prec: Optional[int] = None) -> mpmath.mpf:
    """Push-forward bound of x^(2k) on [-1, 1] at order r from the Jacobi root.

    Equals (1 + xi) / 2 with xi the smallest root of the degree r + 1 Jacobi
    polynomial for a = 0, b = -1 + 1/(2k).
    """
    if k < 1:
        raise InvalidParameters(f"k must be positive, got {k}")
    prec = resolve_precision(prec)
    params = JacobiParams(Fraction(0), Fraction(-1) + Fraction(1, 2 * k))
    rec = jacobi_recurrence(params, r + 1, prec)
    xi = smallest_root(rec, r + 1, prec)
    with mpmath.workprec(prec):
        return (1 + xi) / 2
