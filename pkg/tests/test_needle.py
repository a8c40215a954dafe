import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from sos_bounds.errors import InvalidOrder, InvalidParameters
from sos_bounds.experiments import catalog
from sos_bounds.hierarchy import upper_bound_pfm
from sos_bounds.linalg import to_hfloat
from sos_bounds.measures import Domain
from sos_bounds.needle import (
    NeedleParams,
    annealing_bound,
    build_needle,
    certificate_bound,
    certificate_h,
    certificate_integrals_exact,
    estimate_extrema,
    fitting_h_constant,
    needle_root,
    verify_needle,
)
from sos_bounds.polyring import UPoly
from sos_bounds.utils import fit_line

BOX1 = Domain.box(1)
BOX2 = Domain.box(2)
HALF = Fraction(1, 2)


def test_order_one_needle():
    params = NeedleParams(1, Fraction(1, 4))
    assert needle_root(params) == UPoly([1, Fraction(-8, 5)])
    assert build_needle(params) == UPoly([1, Fraction(-16, 5), Fraction(64, 25)])


@pytest.mark.parametrize("r, h", [(2, Fraction(1, 2)), (5, Fraction(1, 4)), (12, Fraction(1, 10))])
def test_needle_properties(r, h):
    params = NeedleParams(r, h)
    v = build_needle(params)
    assert v.degree == 2 * r
    assert v(0) == 1
    report = verify_needle(v, params, grid_size=2000)
    assert report.passed, report.failures
    assert report.value_at_zero == 1
    assert report.max_value <= 1 + 1e-12
    assert report.min_value >= -1e-12
    assert 0 < report.near_peak_radius <= Fraction(1, 64 * r * r)


def test_needle_tail_is_chebyshev_small():
    params = NeedleParams(6, Fraction(1, 4))
    report = verify_needle(build_needle(params), params, grid_size=4000)
    # on [h, 1] the needle is at most 1 / T_6((1 + h) / (1 - h))^2
    expected = 1 / math.cosh(6 * math.acosh(5 / 3)) ** 2
    assert report.max_on_tail <= expected * (1 + 1e-9)
    assert report.max_on_tail <= report.decay_bound


def test_verify_needle_reports_failures():
    params = NeedleParams(3, Fraction(1, 4))
    report = verify_needle(UPoly([2, -1]), params, grid_size=100)
    assert not report.passed
    assert any("v(0)" in failure for failure in report.failures)
    report = verify_needle(UPoly([1, -4]), params, grid_size=100)
    assert not report.passed


def test_needle_params_validation():
    with pytest.raises(InvalidParameters):
        build_needle(NeedleParams(0, HALF))
    with pytest.raises(InvalidParameters):
        build_needle(NeedleParams(3, Fraction(1)))
    with pytest.raises(InvalidParameters):
        build_needle(NeedleParams(3, Fraction(0)))


def test_certificate_h():
    h = certificate_h(8, 1, HALF)
    assert h == pytest.approx((math.log(8) / 8) ** 2, rel=1e-9)
    assert certificate_h(1000, 1, Fraction(1, 1000)) == Fraction(1, 64 * 1000 * 1000)
    with pytest.raises(InvalidOrder):
        certificate_h(1, 2)
    with pytest.raises(InvalidOrder):
        certificate_h(4, 2)


def test_fitting_h_constant():
    assert fitting_h_constant(4, 2) == HALF
    assert fitting_h_constant(8, 2) == 1
    assert fitting_h_constant(1000, 1) == 4
    assert certificate_h(4, 2, fitting_h_constant(4, 2)) < 1
    with pytest.raises(InvalidOrder):
        fitting_h_constant(1, 2)


def test_certificate_matches_exact_integrals():
    tf = catalog.test_function("matyas")
    report = certificate_bound(tf.poly, BOX2, 4, tf.f_min, tf.f_max, h_constant=HALF)
    assert not report.degenerate
    num, den = certificate_integrals_exact(tf.poly, BOX2, 4, report.h_used, tf.f_min, tf.f_max)
    with mpmath.workprec(256):
        exact = to_hfloat(num / den)
        assert abs(report.ratio - exact) < mpmath.mpf(10) ** -30
        assert report.quadrature_error < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("name", ["matyas", "booth"])
def test_certificate_dominates_pushforward_bound(name):
    tf = catalog.test_function(name)
    for r in (4, 6):
        report = certificate_bound(tf.poly, BOX2, r, tf.f_min, tf.f_max, h_constant=HALF)
        pfm = upper_bound_pfm(tf.poly, BOX2, r).value
        assert float(report.bound) >= float(pfm) - 1e-6
        assert float(report.bound) <= float(tf.f_max)


def test_certificate_degenerate_and_domain():
    tf = catalog.test_function("matyas")
    report = certificate_bound(tf.poly, BOX2, 4, 3, 3, h_constant=HALF)
    assert report.degenerate
    assert report.bound == 3
    with pytest.raises(InvalidParameters):
        certificate_bound(tf.poly, Domain.ball(2), 4, tf.f_min, tf.f_max, h_constant=HALF)


def test_estimate_extrema():
    f = catalog.test_function("matyas").poly
    with pytest.warns(UserWarning):
        lo, hi = estimate_extrema(f, BOX2, points_per_axis=101)
    assert abs(float(lo)) < 1e-6
    assert float(hi) == pytest.approx(100, abs=1e-6)


def test_certificate_without_extrema_warns():
    f = catalog.power_function(1)
    with pytest.warns(UserWarning):
        report = certificate_bound(f, BOX1, 8, h_constant=HALF)
    assert report.f_min == pytest.approx(0, abs=1e-9)
    assert report.f_max == pytest.approx(1, abs=1e-9)


def test_annealing_bound():
    f = catalog.power_function(1)
    for r in (1, 3, 5):
        bound = annealing_bound(f, BOX1, r)
        pfm = upper_bound_pfm(f, BOX1, r).value
        assert isinstance(bound, Fraction)
        assert 0 <= bound <= 1
        assert float(bound) >= float(pfm) - 1e-12
    matyas = catalog.test_function("matyas")
    bound = annealing_bound(matyas.poly, Domain.ball(2), 3, f_min=0, f_max=100)
    assert float(bound) >= float(upper_bound_pfm(matyas.poly, Domain.ball(2), 3).value) - 1e-9
    with pytest.raises(InvalidParameters):
        annealing_bound(f, BOX1, 0)
    with pytest.raises(InvalidParameters):
        annealing_bound(f, BOX1, 2, temperature=-1)


@pytest.mark.long
def test_certificate_decreases_with_order():
    tf = catalog.test_function("booth")
    bounds = []
    for r in (4, 8, 16):
        report = certificate_bound(tf.poly, BOX2, r, tf.f_min, tf.f_max, h_constant=HALF)
        assert float(report.bound) >= float(upper_bound_pfm(tf.poly, BOX2, r).value) - 1e-6
        bounds.append(float(report.bound))
    assert bounds[0] > bounds[1] > bounds[2]


@pytest.mark.long
def test_certificate_rate_for_square():
    f = catalog.power_function(1)
    scaled = []
    for r in (8, 16, 32):
        report = certificate_bound(f, BOX1, r, 0, 1, h_constant=HALF)
        scaled.append(float(report.bound) * r * r / math.log(r) ** 2)
    assert max(scaled) <= 2 * scaled[0]


@pytest.mark.parametrize("h", [Fraction(1, 20), Fraction(1, 10), Fraction(1, 4)])
@pytest.mark.parametrize("r", [5, 10, 20, pytest.param(40, marks=pytest.mark.long)])
def test_needle_grid(r, h):
    params = NeedleParams(r, h)
    report = verify_needle(build_needle(params), params)
    assert report.passed, report.failures
    assert report.near_peak_radius >= Fraction(1, 128 * r * r)
    assert report.max_on_tail <= report.decay_bound


@pytest.mark.parametrize("h", [Fraction(1, 20), Fraction(1, 10), Fraction(1, 4)])
def test_needle_tail_decays_exponentially_in_order(h):
    orders = np.array([5, 10, 20, 40])
    logs = []
    for r in orders:
        params = NeedleParams(int(r), h)
        logs.append(math.log(verify_needle(build_needle(params), params, grid_size=2000).max_on_tail))
    slope, _, _ = fit_line(orders.astype(float), np.array(logs))
    # the tail maximum is 1 / T_r(u(0))^2 = 1 / cosh(r theta)^2
    theta = math.acosh(float((1 + h) / (1 - h)))
    assert slope == pytest.approx(-2 * theta, rel=0.02)
    assert slope <= -math.sqrt(float(h)) / 2
