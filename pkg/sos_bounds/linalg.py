"""Extended-precision symmetric eigenvalue and Cholesky routines.

Matrices are assembled in exact rationals and rounded once, entry-wise and
correctly, to mpmath floats at the working precision. Dense extended-precision
matrices are plain lists of rows of ``mpmath.mpf``.
"""

import logging
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import scipy.linalg
from mpmath.libmp import from_rational, mpf_pos, round_nearest

from .config import get_settings, resolve_precision
from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite

logger = logging.getLogger(__name__)

HFloat = mpmath.mpf
Matrix = List[List[mpmath.mpf]]
Vector = List[mpmath.mpf]

WARM_START_ORDER = 12

__all__ = [
    "HFloat",
    "SymMat",
    "to_hfloat",
    "to_fraction",
    "rational_pivots",
    "is_positive_definite_exact",
    "cholesky",
    "sym_eig_min",
    "gen_eig_min",
    "rayleigh_quotient",
]


def to_hfloat(x: Union[int, Fraction, float, mpmath.mpf], prec: Optional[int] = None) -> mpmath.mpf:
    """Correctly rounded (round-to-nearest) conversion of ``x`` to ``prec`` bits."""
    prec = resolve_precision(prec)
    if isinstance(x, mpmath.mpf):
        return mpmath.mp.make_mpf(mpf_pos(x._mpf_, prec, round_nearest))
    x = Fraction(x)
    return mpmath.mp.make_mpf(from_rational(x.numerator, x.denominator, prec, round_nearest))


def to_fraction(x, max_denominator: Optional[int] = 2**64) -> Fraction:
    """Rational value of a binary float, optionally reduced by continued fractions."""
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(float(x))
    man, exp = int(x.man), int(x.exp)
    value = Fraction(man) * 2**exp if exp >= 0 else Fraction(man, 2 ** (-exp))
    if max_denominator is not None:
        value = value.limit_denominator(max_denominator)
    return value


class SymMat:
    """Dense symmetric matrix stored as its lower triangle.

    Entries are ``Fraction`` at assembly time; ``to_mp`` performs the single rounding
    step to extended precision.
    """

    __slots__ = ("_lower",)

    def __init__(self, lower: Sequence[Sequence]):
        self._lower = [list(row[: i + 1]) for i, row in enumerate(lower)]
        for i, row in enumerate(self._lower):
            if len(row) != i + 1:
                raise DimensionMismatch(f"row {i} of the lower triangle has {len(row)} entries")

    @classmethod
    def from_function(cls, order: int, entry: Callable[[int, int], object]) -> "SymMat":
        return cls([[entry(i, j) for j in range(i + 1)] for i in range(order)])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "SymMat":
        n = len(rows)
        for i in range(n):
            if len(rows[i]) != n:
                raise DimensionMismatch("matrix is not square")
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"matrix is not symmetric at ({i}, {j})")
        return cls([[rows[i][j] for j in range(i + 1)] for i in range(n)])

    @classmethod
    def identity(cls, order: int) -> "SymMat":
        return cls.from_function(order, lambda i, j: Fraction(int(i == j)))

    @classmethod
    def diagonal(cls, values: Sequence) -> "SymMat":
        return cls.from_function(len(values), lambda i, j: Fraction(values[i]) if i == j else Fraction(0))

    @property
    def order(self) -> int:
        return len(self._lower)

    def __len__(self) -> int:
        return len(self._lower)

    def __getitem__(self, index: Tuple[int, int]):
        i, j = index
        return self._lower[i][j] if j <= i else self._lower[j][i]

    def rows(self) -> List[List]:
        n = self.order
        return [[self[i, j] for j in range(n)] for i in range(n)]

    def scale(self, c) -> "SymMat":
        return SymMat([[c * v for v in row] for row in self._lower])

    def to_mp(self, prec: Optional[int] = None) -> Matrix:
        prec = resolve_precision(prec)
        n = self.order
        out = [[None] * n for _ in range(n)]
        for i, row in enumerate(self._lower):
            for j, v in enumerate(row):
                out[i][j] = out[j][i] = to_hfloat(v, prec)
        return out

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.rows()], dtype=float)


def _as_symmat(M) -> SymMat:
    return M if isinstance(M, SymMat) else SymMat.from_rows(M)


def rational_pivots(S) -> List[Fraction]:
    """Exact pivots of Gaussian elimination without row exchanges (the D of LDL^T).

    Stops after the first non-positive pivot, which is the last entry returned.
    """
    a = [[Fraction(v) for v in row] for row in _as_symmat(S).rows()]
    n = len(a)
    pivots = []
    for k in range(n):
        pivot = a[k][k]
        pivots.append(pivot)
        if pivot <= 0:
            break
        for i in range(k + 1, n):
            factor = a[i][k] / pivot
            if factor:
                for j in range(k + 1, i + 1):
                    a[i][j] -= factor * a[k][j]
                    a[j][i] = a[i][j]
    return pivots


def is_positive_definite_exact(S) -> bool:
    pivots = rational_pivots(S)
    return len(pivots) == _as_symmat(S).order and all(p > 0 for p in pivots)


def _cholesky_mp(a: Matrix) -> Matrix:
    n = len(a)
    scale = max((abs(a[i][i]) for i in range(n)), default=mpmath.mpf(1))
    tol = mpmath.ldexp(scale, 8 - mpmath.mp.prec)
    L = [[mpmath.mpf(0)] * n for _ in range(n)]
    for j in range(n):
        pivot = a[j][j] - mpmath.fdot(L[j][:j], L[j][:j])
        if pivot <= tol:
            raise NotPositiveDefinite(
                f"Cholesky pivot {mpmath.nstr(pivot, 5)} at index {j} is not above "
                f"{mpmath.nstr(tol, 3)}"
            )
        d = mpmath.sqrt(pivot)
        L[j][j] = d
        for i in range(j + 1, n):
            L[i][j] = (a[i][j] - mpmath.fdot(L[i][:j], L[j][:j])) / d
    return L


def cholesky(B, prec: Optional[int] = None) -> Matrix:
    """Lower-triangular L with L L^T = B to working precision.

    Args:
        B: SymMat (or square nested sequence) of exact or extended-precision entries.
        prec: Working precision in bits.

    Returns:
        list: L as a list of rows of mpf.
    """
    prec = resolve_precision(prec)
    B = _as_symmat(B)
    with mpmath.workprec(prec):
        return _cholesky_mp(B.to_mp(prec))


def _lower_inverse(L: Matrix) -> Matrix:
    n = len(L)
    inv = [[mpmath.mpf(0)] * n for _ in range(n)]
    for i in range(n):
        inv[i][i] = 1 / L[i][i]
        for j in range(i):
            s = mpmath.fdot(L[i][j:i], [inv[k][j] for k in range(j, i)])
            inv[i][j] = -s / L[i][i]
    return inv


def _transpose(M: Matrix) -> Matrix:
    return [list(col) for col in zip(*M)]


def _matmul(X: Matrix, Y: Matrix) -> Matrix:
    cols = _transpose(Y)
    return [[mpmath.fdot(row, col) for col in cols] for row in X]


def _frobenius_off(a: Matrix) -> mpmath.mpf:
    n = len(a)
    return mpmath.sqrt(2 * mpmath.fsum(a[i][j] ** 2 for i in range(n) for j in range(i)))


def _frobenius(a: Matrix) -> mpmath.mpf:
    return mpmath.sqrt(mpmath.fsum(v**2 for row in a for v in row))


def _gram_schmidt(columns: Matrix) -> Matrix:
    """Modified Gram-Schmidt on a list of column vectors."""
    basis: Matrix = []
    for v in columns:
        w = list(v)
        for q in basis:
            c = mpmath.fdot(q, w)
            w = [wi - c * qi for wi, qi in zip(w, q)]
        norm = mpmath.sqrt(mpmath.fdot(w, w))
        basis.append([wi / norm for wi in w])
    return basis


def _warm_start(a: Matrix) -> Optional[Matrix]:
    """Float64 eigenbasis of ``a`` re-orthonormalized at the working precision."""
    dense = np.array([[float(v) for v in row] for row in a], dtype=float)
    if not np.all(np.isfinite(dense)):
        return None
    _, vecs = np.linalg.eigh(dense)
    columns = [[mpmath.mpf(float(x)) for x in vecs[:, k]] for k in range(vecs.shape[1])]
    return _transpose(_gram_schmidt(columns))


def _jacobi_sweeps(a: Matrix, v: Matrix, max_sweeps: int) -> int:
    """Cyclic Jacobi rotations on ``a`` in place, accumulating into ``v``. Returns sweeps used."""
    n = len(a)
    norm = _frobenius(a)
    if not norm:
        return 0
    target = mpmath.ldexp(norm, -(mpmath.mp.prec // 2))
    skip = mpmath.ldexp(norm, -mpmath.mp.prec)
    for sweep in range(max_sweeps + 1):
        if _frobenius_off(a) < target:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * apq)
                t = 1 / (abs(theta) + mpmath.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / mpmath.sqrt(t * t + 1)
                s = t * c
                tau = s / (1 + c)
                a[p][p] -= t * apq
                a[q][q] += t * apq
                a[p][q] = a[q][p] = mpmath.mpf(0)
                for k in range(n):
                    if k != p and k != q:
                        g, h = a[k][p], a[k][q]
                        a[k][p] = a[p][k] = g - s * (h + g * tau)
                        a[k][q] = a[q][k] = h + s * (g - h * tau)
                for row in v:
                    g, h = row[p], row[q]
                    row[p] = g - s * (h + g * tau)
                    row[q] = h + s * (g - h * tau)
    raise NoConvergence(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {mpmath.nstr(_frobenius_off(a), 5)})"
    )


def _sym_eig_min_mp(
    s: Matrix, max_sweeps: int, warm_start: bool = True
) -> Tuple[mpmath.mpf, Vector]:
    n = len(s)
    a = [list(row) for row in s]
    v = None
    if warm_start and n > WARM_START_ORDER:
        v = _warm_start(a)
        if v is not None:
            a = _matmul(_transpose(v), _matmul(a, v))
            for i in range(n):
                for j in range(i):
                    a[i][j] = a[j][i] = (a[i][j] + a[j][i]) / 2
    if v is None:
        v = [[mpmath.mpf(int(i == j)) for j in range(n)] for i in range(n)]
    sweeps = _jacobi_sweeps(a, v, max_sweeps)
    logger.debug("Jacobi eigensolver of order %d converged in %d sweeps", n, sweeps)
    k = min(range(n), key=lambda i: a[i][i])
    vec = [row[k] for row in v]
    norm = mpmath.sqrt(mpmath.fdot(vec, vec))
    return a[k][k], [x / norm for x in vec]


def sym_eig_min(
    S,
    prec: Optional[int] = None,
    max_sweeps: Optional[int] = None,
    warm_start: bool = True,
) -> Tuple[mpmath.mpf, Vector]:
    """Smallest eigenvalue and unit eigenvector of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm drops below 2^(-prec/2) times the
    norm of S. Above order 12 the rotations start from a float64 eigenbasis.

    Args:
        S: SymMat, or a square nested sequence of numbers.
        prec: Working precision in bits.
        max_sweeps: Sweep limit before NoConvergence.
        warm_start: Start from a float64 eigenbasis for large orders.

    Returns:
        tuple: (lambda_min, v)
    """
    prec = resolve_precision(prec)
    max_sweeps = get_settings().max_sweeps if max_sweeps is None else max_sweeps
    with mpmath.workprec(prec):
        s = _as_symmat(S).to_mp(prec)
        return _sym_eig_min_mp(s, max_sweeps, warm_start)


def _gen_eig_min_lapack(A: SymMat, B: SymMat) -> Tuple[mpmath.mpf, Vector]:
    try:
        w, v = scipy.linalg.eigh(A.to_numpy(), B.to_numpy(), subset_by_index=[0, 0])
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"LAPACK generalized eigensolver failed: {e}") from e
    return mpmath.mpf(float(w[0])), [mpmath.mpf(float(x)) for x in v[:, 0]]


def gen_eig_min(
    A,
    B,
    prec: Optional[int] = None,
    backend: str = "mpmath",
    max_sweeps: Optional[int] = None,
) -> Tuple[mpmath.mpf, Vector]:
    """Smallest generalized eigenvalue of ``A v = lambda B v`` with B positive definite.

    The mpmath backend scales B to unit diagonal, factors it, and solves the standard
    problem for L^-1 A L^-T. The lapack backend calls ``scipy.linalg.eigh`` in float64
    and is meant for large well-conditioned pairs only.

    Args:
        A: Symmetric matrix.
        B: Symmetric positive definite matrix of the same order.
        prec: Working precision in bits (mpmath backend).
        backend: "mpmath" or "lapack".
        max_sweeps: Jacobi sweep limit.

    Returns:
        tuple: (lambda_min, v) with v^T B v = 1.
    """
    A, B = _as_symmat(A), _as_symmat(B)
    if A.order != B.order:
        raise DimensionMismatch(f"matrix orders differ: {A.order} and {B.order}")
    if backend == "lapack":
        return _gen_eig_min_lapack(A, B)
    if backend != "mpmath":
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    prec = resolve_precision(prec)
    max_sweeps = get_settings().max_sweeps if max_sweeps is None else max_sweeps
    n = A.order
    with mpmath.workprec(prec):
        a, b = A.to_mp(prec), B.to_mp(prec)
        if any(b[i][i] <= 0 for i in range(n)):
            raise NotPositiveDefinite("B has a non-positive diagonal entry")
        d = [1 / mpmath.sqrt(b[i][i]) for i in range(n)]
        a = [[d[i] * a[i][j] * d[j] for j in range(n)] for i in range(n)]
        b = [[d[i] * b[i][j] * d[j] for j in range(n)] for i in range(n)]
        linv = _lower_inverse(_cholesky_mp(b))
        c = _matmul(linv, _matmul(a, _transpose(linv)))
        for i in range(n):
            for j in range(i):
                c[i][j] = c[j][i] = (c[i][j] + c[j][i]) / 2
        lam, y = _sym_eig_min_mp(c, max_sweeps)
        x = [mpmath.fdot([linv[k][i] for k in range(i, n)], y[i:]) for i in range(n)]
        v = [d[i] * x[i] for i in range(n)]
        bnorm = mpmath.sqrt(_quadratic_form(B.to_mp(prec), v))
        return lam, [vi / bnorm for vi in v]


def _quadratic_form(m: Matrix, v: Vector) -> mpmath.mpf:
    return mpmath.fdot(v, [mpmath.fdot(row, v) for row in m])


def rayleigh_quotient(A, B, v: Sequence, prec: Optional[int] = None) -> mpmath.mpf:
    """v^T A v / v^T B v at the working precision."""
    prec = resolve_precision(prec)
    A, B = _as_symmat(A), _as_symmat(B)
    with mpmath.workprec(prec):
        v = [mpmath.mpf(x) for x in v]
        return _quadratic_form(A.to_mp(prec), v) / _quadratic_form(B.to_mp(prec), v)
