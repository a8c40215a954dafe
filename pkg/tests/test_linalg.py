from fractions import Fraction

import mpmath
import numpy as np
import pytest

from sos_bounds.errors import DimensionMismatch, NoConvergence, NotPositiveDefinite
from sos_bounds.linalg import (
    SymMat,
    cholesky,
    gen_eig_min,
    is_positive_definite_exact,
    rational_pivots,
    rayleigh_quotient,
    sym_eig_min,
    to_fraction,
    to_hfloat,
)

HILBERT5_MIN = 3.287928772171863e-06


def hilbert(n):
    return SymMat.from_function(n, lambda i, j: Fraction(1, i + j + 1))


def exact_det(rows):
    a = [[Fraction(v) for v in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            factor = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= factor * a[k][j]
    return det


def shifted(S, lam):
    return [[S[i, j] - (lam if i == j else 0) for j in range(S.order)] for i in range(S.order)]


def test_to_hfloat_is_correctly_rounded():
    with mpmath.workprec(64):
        expected = mpmath.mpf(1) / 3
    assert to_hfloat(Fraction(1, 3), 64) == expected
    assert to_hfloat(Fraction(1, 4), 64) == mpmath.mpf(0.25)
    with mpmath.workprec(256):
        third = mpmath.mpf(1) / 3
    assert to_hfloat(third, 64) == expected


def test_to_fraction():
    assert to_fraction(0.5) == Fraction(1, 2)
    assert to_fraction(mpmath.mpf(3)) == 3
    with mpmath.workprec(256):
        third = mpmath.mpf(1) / 3
    assert to_fraction(third) == Fraction(1, 3)
    assert to_fraction(third, None) != Fraction(1, 3)


def test_symmat():
    S = SymMat.from_rows([[2, 1], [1, 3]])
    assert S.order == 2
    assert S[0, 1] == S[1, 0] == 1
    assert S.rows() == [[2, 1], [1, 3]]
    assert S.scale(2).rows() == [[4, 2], [2, 6]]
    np.testing.assert_array_equal(SymMat.identity(3).to_numpy(), np.eye(3))
    assert SymMat.diagonal([1, 2]).rows() == [[1, 0], [0, 2]]
    with pytest.raises(ValueError):
        SymMat.from_rows([[1, 2], [3, 4]])
    with pytest.raises(DimensionMismatch):
        SymMat.from_rows([[1, 2], [2]])


def test_rational_pivots():
    assert rational_pivots([[2, 1], [1, 2]]) == [2, Fraction(3, 2)]
    assert is_positive_definite_exact([[2, 1], [1, 2]])
    assert not is_positive_definite_exact([[1, 2], [2, 1]])
    assert not is_positive_definite_exact([[1, 1], [1, 1]])
    assert is_positive_definite_exact(hilbert(8))


def test_cholesky():
    L = cholesky([[4, 2], [2, 3]])
    with mpmath.workprec(256):
        assert L[0][0] == 2
        assert L[1][0] == 1
        assert abs(L[1][1] - mpmath.sqrt(2)) < mpmath.mpf(10) ** -70
        assert L[0][1] == 0


def test_cholesky_rejects_singular():
    with pytest.raises(NotPositiveDefinite):
        cholesky([[1, 1], [1, 1]])
    with pytest.raises(NotPositiveDefinite):
        cholesky([[1, 2], [2, 1]])


def test_hilbert_smallest_eigenvalue():
    H = hilbert(5)
    lam, v = sym_eig_min(H)
    assert float(lam) == pytest.approx(HILBERT5_MIN, rel=1e-12)
    # det(H - lam I) changes sign across a tight bracket around the computed value
    exact = to_fraction(lam, None)
    lo, hi = exact * (1 - Fraction(1, 10**9)), exact * (1 + Fraction(1, 10**9))
    assert exact_det(shifted(H, lo)) * exact_det(shifted(H, hi)) < 0
    with mpmath.workprec(256):
        assert abs(mpmath.fdot(v, v) - 1) < mpmath.mpf(10) ** -60
        assert abs(rayleigh_quotient(H, SymMat.identity(5), v) - lam) < mpmath.mpf(10) ** -60


def test_warm_start_agrees_with_cold_start():
    # second-difference matrix, eigenvalues 2 - 2 cos(k pi / 16)
    S = SymMat.from_function(15, lambda i, j: 2 if i == j else (-1 if i - j == 1 else 0))
    warm, _ = sym_eig_min(S)
    cold, _ = sym_eig_min(S, warm_start=False)
    with mpmath.workprec(256):
        expected = 2 - 2 * mpmath.cos(mpmath.pi / 16)
        assert abs(warm - expected) < mpmath.mpf(10) ** -50
        assert abs(cold - expected) < mpmath.mpf(10) ** -50
    assert float(warm) == pytest.approx(np.linalg.eigvalsh(S.to_numpy())[0], abs=1e-12)


def test_sweep_limit():
    with pytest.raises(NoConvergence):
        sym_eig_min([[2, 1], [1, 2]], max_sweeps=0)
    lam, _ = sym_eig_min([[3, 0], [0, 2]], max_sweeps=0)
    assert lam == 2


def test_gen_eig_min():
    A = [[0, Fraction(1, 3)], [Fraction(1, 3), 0]]
    B = [[1, 0], [0, Fraction(1, 3)]]
    lam, v = gen_eig_min(A, B)
    with mpmath.workprec(256):
        assert abs(lam + 1 / mpmath.sqrt(3)) < mpmath.mpf(10) ** -70
        Bv = [mpmath.fdot([to_hfloat(x) for x in row], v) for row in B]
        assert abs(mpmath.fdot(v, Bv) - 1) < mpmath.mpf(10) ** -70
        assert abs(rayleigh_quotient(A, B, v) - lam) < mpmath.mpf(10) ** -70


def test_gen_eig_min_lapack_backend():
    A = SymMat.from_function(4, lambda i, j: Fraction(1, i + j + 2))
    B = SymMat.from_function(4, lambda i, j: Fraction(2 if i == j else 0) + Fraction(1, i + j + 1))
    exact, _ = gen_eig_min(A, B)
    approx, v = gen_eig_min(A, B, backend="lapack")
    assert float(approx) == pytest.approx(float(exact), rel=1e-10)
    assert len(v) == 4


def test_gen_eig_min_errors():
    with pytest.raises(DimensionMismatch):
        gen_eig_min(SymMat.identity(2), SymMat.identity(3))
    with pytest.raises(NotPositiveDefinite):
        gen_eig_min(SymMat.identity(2), [[1, 1], [1, 1]])
    with pytest.raises(NotPositiveDefinite):
        gen_eig_min(SymMat.identity(2), [[0, 0], [0, 1]])
    with pytest.raises(ValueError):
        gen_eig_min(SymMat.identity(2), SymMat.identity(2), backend="eispack")
