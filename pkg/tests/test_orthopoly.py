from fractions import Fraction

import mpmath
import pytest

from sos_bounds.errors import BreakdownNonPositiveBeta, InvalidParameters
from sos_bounds.experiments import catalog
from sos_bounds.measures import Domain, modified_moments, pushforward_moments, range_enclosure
from sos_bounds.orthopoly import (
    JacobiParams,
    Recurrence3,
    chebyshev_leading_coefficients,
    chebyshev_recurrence,
    jacobi_recurrence,
    modified_chebyshev,
    orthonormal_polynomials,
    orthonormality_defect,
    smallest_root,
    theorem3_reference,
)

LEGENDRE = JacobiParams(Fraction(0), Fraction(0))


def tiny(exponent=-60):
    return mpmath.mpf(10) ** exponent


def uniform_moments(count):
    return [Fraction(1, k + 1) if k % 2 == 0 else Fraction(0) for k in range(count)]


def uniform_chebyshev_moments(count):
    return [Fraction(1, 1 - j * j) if j % 2 == 0 else Fraction(0) for j in range(count)]


def test_legendre_roots():
    rec = jacobi_recurrence(LEGENDRE, 6)
    with mpmath.workprec(256):
        assert abs(smallest_root(rec, 1)) < tiny()
        assert abs(smallest_root(rec, 2) + 1 / mpmath.sqrt(3)) < tiny()
        assert abs(smallest_root(rec, 3) + mpmath.sqrt(mpmath.mpf(3) / 5)) < tiny()
        nodes, _ = mpmath.mp.gauss_quadrature(6, "legendre")
        assert abs(smallest_root(rec, 6) - min(nodes[i] for i in range(6))) < tiny(-50)


def test_jacobi_recurrence_normalization():
    rec = jacobi_recurrence(JacobiParams(Fraction(1, 2), Fraction(-1, 2)), 4)
    assert len(rec) == 4
    assert rec.beta[0] == 1
    with pytest.raises(InvalidParameters):
        jacobi_recurrence(JacobiParams(Fraction(-1), Fraction(0)), 3)


def test_chebyshev_recurrence():
    rec = chebyshev_recurrence(5)
    assert chebyshev_leading_coefficients(5) == [1, 1, 2, 4, 8]
    with mpmath.workprec(256):
        assert abs(smallest_root(rec, 3) + mpmath.sqrt(3) / 2) < tiny()
        assert abs(smallest_root(rec, 5) + mpmath.cos(mpmath.pi / 10)) < tiny()


def test_affine():
    rec = jacobi_recurrence(LEGENDRE, 3).affine(0, 1)
    with mpmath.workprec(256):
        assert abs(smallest_root(rec, 1) - mpmath.mpf(1) / 2) < tiny()
        expected = (1 - 1 / mpmath.sqrt(3)) / 2
        assert abs(smallest_root(rec, 2) - expected) < tiny()


def test_recurrence_validation():
    with pytest.raises(InvalidParameters):
        Recurrence3([0, 0], [1])
    with pytest.raises(BreakdownNonPositiveBeta):
        Recurrence3([0, 0], [1, 0])
    with pytest.raises(InvalidParameters):
        smallest_root(jacobi_recurrence(LEGENDRE, 3), 0)
    with pytest.raises(InvalidParameters):
        smallest_root(jacobi_recurrence(LEGENDRE, 3), 4)


def test_modified_chebyshev_recovers_legendre():
    n = 6
    rec = modified_chebyshev(uniform_chebyshev_moments(2 * n), chebyshev_recurrence(2 * n - 1), n)
    ref = jacobi_recurrence(LEGENDRE, n)
    with mpmath.workprec(256):
        for j in range(n):
            assert abs(rec.alpha[j] - ref.alpha[j]) < tiny()
            assert abs(rec.beta[j] - ref.beta[j]) < tiny()


def test_modified_chebyshev_support_mapping():
    n = 3
    rec = modified_chebyshev(
        uniform_chebyshev_moments(2 * n), chebyshev_recurrence(2 * n - 1), n, support=(0, 2)
    )
    with mpmath.workprec(256):
        assert abs(smallest_root(rec, 2) - (1 - 1 / mpmath.sqrt(3))) < tiny()


def test_modified_chebyshev_breakdown():
    # point mass at 0: T_j(0) = 1, 0, -1, 0
    with pytest.raises(BreakdownNonPositiveBeta):
        modified_chebyshev([1, 0, -1, 0], chebyshev_recurrence(3), 2)
    with pytest.raises(InvalidParameters):
        modified_chebyshev([1, 0, Fraction(-1, 3)], chebyshev_recurrence(3), 2)
    with pytest.raises(InvalidParameters):
        modified_chebyshev(uniform_chebyshev_moments(4), chebyshev_recurrence(2), 2)


def test_orthonormal_polynomials():
    polys = orthonormal_polynomials(jacobi_recurrence(LEGENDRE, 3), 3)
    with mpmath.workprec(256):
        # sqrt(3) x and sqrt(5) (3 x^2 - 1) / 2
        assert abs(polys[0][0] - 1) < tiny()
        assert abs(polys[1][1] - mpmath.sqrt(3)) < tiny()
        assert abs(polys[2][2] - 3 * mpmath.sqrt(5) / 2) < tiny()
        assert abs(polys[2][0] + mpmath.sqrt(5) / 2) < tiny()


def test_orthonormality_defect():
    rec = jacobi_recurrence(LEGENDRE, 8)
    assert orthonormality_defect(rec, uniform_moments(15), 8) < tiny(-50)
    wrong = jacobi_recurrence(JacobiParams(Fraction(1), Fraction(1)), 4)
    assert orthonormality_defect(wrong, uniform_moments(7), 4) > mpmath.mpf(10) ** -3
    with pytest.raises(InvalidParameters):
        orthonormality_defect(rec, uniform_moments(5), 4)


def test_theorem3_reference():
    with mpmath.workprec(256):
        assert abs(theorem3_reference(1, 0) - mpmath.mpf(1) / 3) < tiny()
        # E[x^(2k)] = 1 / (2k + 1) at order 0
        assert abs(theorem3_reference(3, 0) - mpmath.mpf(1) / 7) < tiny()
    values = [theorem3_reference(2, r) for r in range(6)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(v > 0 for v in values)
    with pytest.raises(InvalidParameters):
        theorem3_reference(0, 1)


@pytest.mark.parametrize("name", catalog.NAMES)
@pytest.mark.parametrize("domain", [Domain.box(2), Domain.ball(2)], ids=str)
def test_pushforward_recurrence_is_orthonormal(name, domain):
    f = catalog.test_function(name).poly
    n = 8
    moments = pushforward_moments(domain, f, 2 * n - 1)
    lo, hi = range_enclosure(domain, f)
    mods = modified_moments(domain, f, lo, hi, 2 * n - 1, moments=moments)
    rec = modified_chebyshev(mods, chebyshev_recurrence(2 * n - 1), n, 256, support=(lo, hi))
    with mpmath.workprec(256):
        assert orthonormality_defect(rec, moments.values, n, 256) < mpmath.ldexp(1, -128)
