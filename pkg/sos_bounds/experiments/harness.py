"""Experiment tables: bound comparisons, density samples and a quick self-check battery."""

import logging
from fractions import Fraction
from math import comb
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import mpmath

from ..config import resolve_precision
from ..errors import DenominatorZero, UnknownName
from ..hierarchy import (
    Method,
    density_grid,
    optimal_density,
    upper_bound_full,
    upper_bound_pfm,
)
from ..linalg import to_hfloat
from ..measures import Domain, pushforward_moments
from ..needle import NeedleParams, build_needle, verify_needle
from ..orthopoly import JacobiParams, jacobi_recurrence, smallest_root, theorem3_reference
from ..polyring import MPoly, mp_eval
from . import catalog

logger = logging.getLogger(__name__)

FULL_BASIS_BUDGET = 500
FIGURES = ("fig1", "fig2", "fig3", "fig4")

Table = Tuple[str, List[str], List[Tuple[Any, ...]]]


class ExperimentRow(NamedTuple):
    function: str
    domain: str
    r: int
    full: Optional[mpmath.mpf]
    pfm: mpmath.mpf
    rho: Optional[mpmath.mpf]


def resolve_function(name: str) -> Tuple[MPoly, Fraction]:
    """Polynomial and minimum for a catalog name, ``x``, or ``x2k:<k>`` (x^(2k))."""
    if name == "x":
        return catalog.identity_function(), Fraction(-1)
    if name.startswith("x2k:"):
        return catalog.power_function(int(name.split(":", 1)[1])), Fraction(0)
    tf = catalog.test_function(name)
    return tf.poly, tf.f_min


def rho_from_bounds(full, pfm, f_min: Fraction, prec: Optional[int] = None) -> mpmath.mpf:
    """(f_pfm - f_min) / (f_full - f_min)."""
    prec = resolve_precision(prec)
    with mpmath.workprec(prec):
        fm = to_hfloat(f_min, prec)
        gap = full - fm
        tol = mpmath.ldexp(max(1, abs(fm)), -(prec // 2))
        if abs(gap) <= tol:
            raise DenominatorZero(f"f^(r) - f_min = {mpmath.nstr(gap, 5)} is zero to tolerance")
        return (pfm - fm) / gap


def rho_ratio(name: str, domain: Domain, r: int, prec: Optional[int] = None) -> mpmath.mpf:
    """rho_r(f) = (f_pfm^(r) - f_min) / (f^(r) - f_min) for a named function."""
    f, f_min = resolve_function(name)
    full = upper_bound_full(f, domain, r, prec=prec).value
    pfm = upper_bound_pfm(f, domain, r, prec=prec).value
    return rho_from_bounds(full, pfm, f_min, prec)


def compare_bounds(
    name: str, domain: Domain, r_values: Sequence[int], prec: Optional[int] = None
) -> List[ExperimentRow]:
    """Full and push-forward bounds with rho for each r, sharing one moment sequence."""
    prec = resolve_precision(prec)
    f, f_min = resolve_function(name)
    moments = pushforward_moments(domain, f, 2 * max(r_values) + 1)
    rows = []
    for r in r_values:
        full = None
        if comb(domain.nvars + r, r) <= FULL_BASIS_BUDGET:
            full = upper_bound_full(f, domain, r, prec=prec).value
        pfm = upper_bound_pfm(f, domain, r, prec=prec, moments=moments).value
        rho = None
        if full is not None:
            try:
                rho = rho_from_bounds(full, pfm, f_min, prec)
            except DenominatorZero:
                logger.info("rho undefined for %s at r=%d", name, r)
        logger.info("%s on %s r=%d done", name, domain, r)
        rows.append(ExperimentRow(name, str(domain), r, full, pfm, rho))
    return rows


def _fig3(r_max: int, prec: int) -> Table:
    rows = []
    for name in catalog.NAMES:
        for domain in (Domain.box(2), Domain.ball(2)):
            rows.extend(compare_bounds(name, domain, range(1, r_max + 1), prec))
    return "fig3", list(ExperimentRow._fields), [tuple(row) for row in rows]


def _fig4(r_max: int, prec: int) -> Table:
    rows = []
    for k in range(1, 6):
        rows.extend(compare_bounds(f"x2k:{k}", Domain.box(1), range(1, r_max + 1), prec))
    return "fig4", list(ExperimentRow._fields), [tuple(row) for row in rows]


def _densities(f: MPoly, domain: Domain, r: int, prec: int):
    full = optimal_density(upper_bound_full(f, domain, r, prec=prec))
    pfm = optimal_density(upper_bound_pfm(f, domain, r, prec=prec))
    return full, pfm


def _fig1(step: Fraction, prec: int, r: int = 6) -> Table:
    f = catalog.test_function("camel").poly
    domain = Domain.box(2)
    full, pfm = _densities(f, domain, r, prec)
    rows = [
        (float(x1), float(x2), float(mp_eval(f, (x1, x2))), float(full.value((x1, x2))), float(pfm.value((x1, x2))))
        for x1, x2 in density_grid(domain, step)
    ]
    return "fig1", ["x1", "x2", "f", "full_density", "pfm_density"], rows


def _fig2(step: Fraction, prec: int, r: int = 6) -> Table:
    domain = Domain.box(1)
    rows = []
    for k in (1, 3, 5):
        f = catalog.power_function(k)
        full, pfm = _densities(f, domain, r, prec)
        for (x,) in density_grid(domain, step):
            rows.append((k, float(x), float(full.value((x,))), float(pfm.value((x,)))))
    return "fig2", ["k", "x", "full_density", "pfm_density"], rows


def figure_data(which: str, r_max: int = 20, prec: Optional[int] = None, step: Optional[Fraction] = None) -> Table:
    """Data behind the comparison and density figures as ``(schema, columns, rows)``.

    fig1: full and push-forward densities of the Camel function at r = 6 on the box.
    fig2: the same for x^(2k), k in {1, 3, 5}, on [-1, 1].
    fig3: f^(r), f_pfm^(r) and rho_r for the four test functions on box and ball.
    fig4: the same for x^(2k), k = 1..5, on [-1, 1].
    """
    prec = resolve_precision(prec)
    if which == "fig1":
        return _fig1(Fraction(1, 10) if step is None else Fraction(step), prec)
    if which == "fig2":
        return _fig2(Fraction(1, 50) if step is None else Fraction(step), prec)
    if which == "fig3":
        return _fig3(r_max, prec)
    if which == "fig4":
        return _fig4(r_max, prec)
    raise UnknownName(f"unknown figure {which!r}; known: {', '.join(FIGURES)}")


def _rel(a, b) -> mpmath.mpf:
    with mpmath.workprec(resolve_precision()):
        return abs(a - b) / max(abs(b), mpmath.mpf(10) ** -30)


def selftest(prec: Optional[int] = None) -> List[Tuple[str, bool, str]]:
    """A fast battery of oracle checks; rows are ``(check, passed, detail)``."""
    prec = resolve_precision(prec)
    results: List[Tuple[str, bool, str]] = []

    def record(check: str, passed: bool, detail: str) -> None:
        logger.info("%s: %s (%s)", check, "ok" if passed else "FAILED", detail)
        results.append((check, bool(passed), detail))

    box1 = Domain.box(1)
    x = catalog.identity_function()
    legendre = jacobi_recurrence(JacobiParams(Fraction(0), Fraction(0)), 7, prec)
    worst = max(
        _rel(upper_bound_full(x, box1, r, prec=prec).value, smallest_root(legendre, r + 1, prec))
        for r in range(1, 6)
    )
    record("legendre-root", worst < 1e-10, f"max rel diff {mpmath.nstr(worst, 3)}")

    worst = max(
        _rel(upper_bound_pfm(catalog.power_function(k), box1, r, prec=prec).value, theorem3_reference(k, r, prec))
        for k in (1, 2, 3)
        for r in range(0, 6)
    )
    record("jacobi-root", worst < 1e-8, f"max rel diff {mpmath.nstr(worst, 3)}")

    x2 = catalog.power_function(1)
    worst = max(
        _rel(upper_bound_pfm(x2, box1, r, prec=prec).value, upper_bound_full(x2, box1, 2 * r, prec=prec).value)
        for r in range(1, 4)
    )
    record("pfm-equals-full-2r", worst < 1e-8, f"max rel diff {mpmath.nstr(worst, 3)}")

    worst = max(
        _rel(upper_bound_pfm(x, box1, r, prec=prec).value, upper_bound_full(x, box1, r, prec=prec).value)
        for r in range(1, 4)
    )
    record("identity-pushforward", worst < 1e-20, f"max rel diff {mpmath.nstr(worst, 3)}")

    ok = True
    for k in (2, 3):
        f = catalog.power_function(k)
        for r in (1, 2):
            full = upper_bound_full(f, box1, 2 * k * r, prec=prec).value
            pfm = upper_bound_pfm(f, box1, r, prec=prec).value
            ok &= 0 <= full <= pfm + 1e-8
    record("power-chain", ok, "0 <= f^(2kr) <= f_pfm^(r) for k in {2, 3}, r <= 2")

    ok = True
    worst = mpmath.mpf(0)
    for name in catalog.NAMES:
        tf = catalog.test_function(name)
        scale = tf.f_max - tf.f_min
        d = tf.poly.degree
        for r in (1, 2):
            if comb(2 + r * d, r * d) > FULL_BASIS_BUDGET:
                continue
            full = upper_bound_full(tf.poly, Domain.box(2), r * d, prec=prec).value
            pfm = upper_bound_pfm(tf.poly, Domain.box(2), r, prec=prec).value
            ok &= full <= pfm + 1e-8 * float(scale)
        for r in range(0, 5):
            hankel = upper_bound_pfm(tf.poly, Domain.box(2), r, Method.PFM_HANKEL, prec=prec).value
            cheb = upper_bound_pfm(tf.poly, Domain.box(2), r, Method.PFM_CHEBYSHEV, prec=prec).value
            worst = max(worst, _rel(hankel, cheb))
    record("test-function-chain", ok, "f^(rd) <= f_pfm^(r) on the box for r <= 2")
    record("method-agreement", worst < 1e-8, f"max rel diff {mpmath.nstr(worst, 3)}")

    params = NeedleParams(5, Fraction(1, 4))
    report = verify_needle(build_needle(params), params, grid_size=1000, prec=prec)
    record("needle", report.passed, "; ".join(report.failures) or f"radius {report.near_peak_radius}")
    return results
