from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sos_bounds.errors import DimensionMismatch, PolyFormatError, TermCountExceeded
from sos_bounds.experiments import catalog
from sos_bounds.polyring import (
    MPoly,
    UPoly,
    chebyshev_t,
    compose_uni,
    format_poly,
    mp_eval,
    mp_mul,
    mp_pow,
    parse_poly,
    read_poly,
)

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=7)
exponents = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(exponents, coefficients, max_size=5).map(lambda terms: MPoly(2, terms))
points = st.tuples(coefficients, coefficients)


@settings(max_examples=50, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, s):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + s == p + (q + s)
    assert (p * q) * s == p * (q * s)
    assert p * (q + s) == p * q + p * s
    assert p - p == MPoly(2)
    assert p * 1 == p


@settings(max_examples=50, deadline=None)
@given(polys, polys, points)
def test_evaluation_is_a_homomorphism(p, q, x):
    assert mp_eval(p * q, x) == mp_eval(p, x) * mp_eval(q, x)
    assert mp_eval(p + q, x) == mp_eval(p, x) + mp_eval(q, x)


@settings(max_examples=30, deadline=None)
@given(polys, st.integers(0, 4))
def test_power_matches_repeated_product(p, k):
    expected = MPoly.constant(2, 1)
    for _ in range(k):
        expected = expected * p
    assert mp_pow(p, k) == expected


def test_zero_power_is_one():
    x1, x2 = MPoly.variables(2)
    assert (x1 + x2) ** 0 == 1
    assert MPoly(2) ** 0 == 1


def test_degree_and_coefficients():
    x1, x2 = MPoly.variables(2)
    p = 3 * x1**2 * x2 - x2 + Fraction(1, 2)
    assert p.degree == 3
    assert p.coefficient((2, 1)) == 3
    assert p.coefficient((0, 0)) == Fraction(1, 2)
    assert p.coefficient((1, 1)) == 0
    assert MPoly(2).degree == -1
    assert MPoly(2).is_zero()
    assert MPoly.constant(2, 5).is_constant()


def test_sorted_terms_are_graded_lexicographic():
    x1, x2 = MPoly.variables(2)
    p = x1**2 + x1 * x2 + x2**2 + x1 + 1
    assert [alpha for alpha, _ in p.sorted_terms()] == [(0, 0), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_mixed_dimensions_raise():
    with pytest.raises(DimensionMismatch):
        MPoly.variable(2, 0) + MPoly.variable(3, 0)
    with pytest.raises(DimensionMismatch):
        mp_eval(MPoly.variable(2, 0), (1, 2, 3))
    with pytest.raises(DimensionMismatch):
        MPoly(2, {(1, 0, 0): 1})


def test_term_cap():
    x = MPoly.variables(10)
    linear = sum(x[1:], x[0])
    assert len(mp_mul(linear, linear)) == 55
    with pytest.raises(TermCountExceeded):
        mp_mul(linear, linear, term_cap=10)


def test_compose_uni():
    x1, x2 = MPoly.variables(2)
    s = UPoly([1, 0, 1])
    assert compose_uni(s, x1 + x2) == 1 + x1**2 + 2 * x1 * x2 + x2**2
    assert compose_uni(UPoly(), x1) == MPoly(2)


def test_chebyshev_t():
    assert chebyshev_t(0) == UPoly([1])
    assert chebyshev_t(1) == UPoly([0, 1])
    assert chebyshev_t(3).coeffs == (0, -3, 0, 4)
    t5 = chebyshev_t(5)
    assert t5(1) == 1
    assert t5(-1) == -1
    # cos(5 pi / 3)
    assert t5(Fraction(1, 2)) == Fraction(1, 2)


def test_upoly_arithmetic():
    p = UPoly([1, 2])
    q = UPoly([0, 1, 1])
    assert (p * q).coeffs == (0, 1, 3, 2)
    assert (p - p).is_zero()
    assert p.compose(q) == UPoly([1, 2, 2])
    assert q(Fraction(1, 2)) == Fraction(3, 4)
    assert UPoly([1, 0, 0]).degree == 0
    assert UPoly([Fraction(1, 3), 1024]).max_coefficient_bits() == 11


def test_evaluate_array_matches_exact():
    f = catalog.test_function("camel").poly
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(20, 2))
    approx = f.evaluate_array(pts)
    exact = [float(mp_eval(f, [Fraction(x) for x in row])) for row in pts]
    np.testing.assert_allclose(approx, exact, rtol=1e-12, atol=1e-9)


def test_parse_poly():
    p = parse_poly("# nvars: 2\n# Matyas\n26 2 0\n-48 1 1\n\n26 0 2\n")
    x1, x2 = MPoly.variables(2)
    assert p == 26 * x1**2 - 48 * x1 * x2 + 26 * x2**2
    assert parse_poly("# nvars: 3\n") == MPoly(3)
    assert parse_poly("1/2 0\n1/2 0\n") == MPoly.constant(1, 1)


def test_parse_poly_errors():
    with pytest.raises(PolyFormatError):
        parse_poly("1/0 1 2\n")
    with pytest.raises(PolyFormatError):
        parse_poly("1 1 2\n1 1\n")
    with pytest.raises(PolyFormatError):
        parse_poly("1 x 2\n")
    with pytest.raises(PolyFormatError):
        parse_poly("1 -1 2\n")
    with pytest.raises(PolyFormatError):
        parse_poly("# just a comment\n")
    with pytest.raises(DimensionMismatch):
        parse_poly("1 1 2\n", nvars=3)


def test_format_poly_is_parseable():
    f = catalog.test_function("booth").poly
    text = format_poly(f)
    assert text.startswith("# nvars: 2\n")
    assert parse_poly(text) == f


@pytest.mark.parametrize("name", catalog.NAMES)
def test_sample_files_match_catalog(name):
    path = f"{catalog.sample_data_dir()}/polys/{name}.txt"
    assert read_poly(path) == catalog.test_function(name).poly
