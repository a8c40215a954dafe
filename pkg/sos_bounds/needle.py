"""Half-needle polynomials and the needle certificate for the push-forward bound.

The needle of order r and width h is

    v(t) = (T_r(u(t)) / T_r(u(0)))^2,   u(t) = (1 + h - 2t) / (1 - h),

a perfect square of degree 2r with v(0) = 1, 0 <= v <= 1 on [0, 1] and
v <= 1 / T_r(u(0))^2 on [h, 1], where u maps [h, 1] onto [-1, 1].
"""

import logging
import math
import warnings
from fractions import Fraction
from math import factorial
from typing import List, NamedTuple, Optional, Tuple

import mpmath
import numpy as np
from scipy.optimize import minimize

from .config import resolve_precision
from .errors import InvalidOrder, InvalidParameters
from .linalg import to_hfloat
from .measures import Domain, DomainKind, pushforward_moments, range_enclosure
from .polyring import MPoly, UPoly, chebyshev_t

logger = logging.getLogger(__name__)

GRID_POINTS_TOTAL = 10**6
MAX_AXIS_POINTS = 1001
PEAK_CHECK_POINTS = 65

__all__ = [
    "NeedleParams",
    "NeedleReport",
    "CertificateReport",
    "needle_root",
    "build_needle",
    "verify_needle",
    "estimate_extrema",
    "certificate_h",
    "fitting_h_constant",
    "certificate_bound",
    "certificate_integrals_exact",
    "annealing_bound",
]


class NeedleParams(NamedTuple):
    r: int
    h: Fraction

    def validate(self) -> "NeedleParams":
        if self.r < 1:
            raise InvalidParameters(f"needle order must be at least 1, got {self.r}")
        if not 0 < Fraction(self.h) < 1:
            raise InvalidParameters(f"needle width must lie in (0, 1), got {self.h}")
        return self


class NeedleReport(NamedTuple):
    r: int
    h: Fraction
    value_at_zero: Fraction
    min_value: float
    max_value: float
    max_on_tail: float
    decay_bound: float
    near_peak_radius: Fraction
    failures: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


class CertificateReport(NamedTuple):
    r: int
    h_used: Fraction
    numerator: mpmath.mpf
    denominator: mpmath.mpf
    ratio: mpmath.mpf
    bound: mpmath.mpf
    quadrature_order: int
    quadrature_error: mpmath.mpf
    f_min: Fraction
    f_max: Fraction
    degenerate: bool = False


def needle_root(params: NeedleParams) -> UPoly:
    """T_r(u(t)) / T_r(u(0)), the polynomial whose square is the needle."""
    params.validate()
    h = Fraction(params.h)
    u = UPoly([(1 + h) / (1 - h), Fraction(-2) / (1 - h)])
    g = chebyshev_t(params.r).compose(u)
    return g.scale(1 / g(0))


def build_needle(params: NeedleParams) -> UPoly:
    """The degree-2r needle v with v(0) = 1 peaked at t = 0 on [0, 1]."""
    root = needle_root(params)
    return root * root


def _evaluator(v: UPoly, prec: int):
    extra = v.max_coefficient_bits() + 16

    def evaluate(t: Fraction) -> float:
        with mpmath.workprec(prec + extra):
            x = mpmath.mpf(t.numerator) / t.denominator
            return float(v.evaluate_mp(x))

    return evaluate


def verify_needle(
    v: UPoly, params: NeedleParams, grid_size: int = 10**4, prec: Optional[int] = None
) -> NeedleReport:
    """Checks the needle properties on a uniform grid of [0, 1].

    Checks v(0) = 1 exactly, 0 <= v <= 1 on [0, 1], the decay bound
    4 exp(-r sqrt(h) / 2) on [h, 1], and searches the largest dyadic radius
    rho <= 1/(64 r^2) with v >= 1/2 on [0, rho].

    Args:
        v: Candidate needle.
        params: Order and width it was built for.
        grid_size: Number of grid points on [0, 1].
        prec: Working precision in bits.

    Returns:
        NeedleReport: report
    """
    params.validate()
    prec = resolve_precision(prec)
    r, h = params.r, Fraction(params.h)
    evaluate = _evaluator(v, prec)
    failures: List[str] = []
    at_zero = v(0)
    if at_zero != 1:
        failures.append(f"v(0) = {at_zero}, expected 1")
    tol = 2.0**-40
    grid = [Fraction(i, grid_size - 1) for i in range(grid_size)]
    values = [evaluate(t) for t in grid]
    lo, hi = min(values), max(values)
    if lo < -tol or hi > 1 + tol:
        failures.append(f"values leave [0, 1]: min {lo:.3g}, max {hi:.3g}")
    tail = [val for t, val in zip(grid, values) if t >= h]
    max_tail = max(tail, default=0.0)
    decay = 4 * math.exp(-0.5 * r * math.sqrt(h))
    if max_tail > decay + tol:
        failures.append(f"max on [h, 1] is {max_tail:.3g} > {decay:.3g}")
    radius = Fraction(0)
    k = math.ceil(math.log2(64 * r * r))
    for kk in range(k, k + 24):
        candidate = Fraction(1, 2**kk)
        points = [candidate * Fraction(i, PEAK_CHECK_POINTS - 1) for i in range(PEAK_CHECK_POINTS)]
        if all(evaluate(t) >= 0.5 for t in points):
            radius = candidate
            break
    if not radius:
        failures.append("no dyadic radius with v >= 1/2 near the peak")
    report = NeedleReport(r, h, at_zero, lo, hi, max_tail, decay, radius, tuple(failures))
    logger.debug("needle r=%d h=%s: %s", r, h, "passed" if report.passed else failures)
    return report


def estimate_extrema(
    f: MPoly, domain: Domain, points_per_axis: Optional[int] = None
) -> Tuple[Fraction, Fraction]:
    """Grid search for min and max of f on the box, refined with bounded L-BFGS-B."""
    n = f.nvars
    if points_per_axis is None:
        points_per_axis = min(MAX_AXIS_POINTS, max(3, round(GRID_POINTS_TOTAL ** (1.0 / n))))
    axis = np.linspace(-1.0, 1.0, points_per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    if domain.kind is DomainKind.BALL:
        mesh = mesh[np.sum(mesh**2, axis=1) <= 1.0]
    values = f.evaluate_array(mesh)
    bounds = [(-1.0, 1.0)] * n
    extrema = []
    for sign in (1.0, -1.0):
        signed = sign * values
        x0 = mesh[np.argmin(signed)]
        res = minimize(
            lambda x: sign * f.evaluate_array(x[None, :])[0], x0, method="L-BFGS-B", bounds=bounds
        )
        extrema.append(sign * min(float(signed.min()), float(res.fun)))
    warnings.warn("extrema of f obtained by grid search; the certificate assumes they are exact")
    return Fraction(extrema[0]), Fraction(extrema[1])


def certificate_h(r: int, nvars: int, h_constant: Fraction = Fraction(4)) -> Fraction:
    """h = (c (N + 1) log r / r)^2 with N = n, rationalized and clamped to >= 1/(64 r^2)."""
    if r < 2:
        raise InvalidOrder(f"certificate needs r >= 2, got {r}")
    h = (float(h_constant) * (nvars + 1) * math.log(r) / r) ** 2
    if h >= 1:
        raise InvalidOrder(
            f"h = {h:.4g} >= 1 for r = {r}; increase r or lower h_constant"
        )
    return max(Fraction(h).limit_denominator(10**12), Fraction(1, 64 * r * r))


def fitting_h_constant(r: int, nvars: int, start: Fraction = Fraction(4)) -> Fraction:
    """Largest c = start / 2^k for which certificate_h(r, nvars, c) is below 1."""
    if r < 2:
        raise InvalidOrder(f"certificate needs r >= 2, got {r}")
    c = Fraction(start)
    while (float(c) * (nvars + 1) * math.log(r) / r) ** 2 >= 1:
        c /= 2
    if c != start:
        logger.info("h_constant %s gives h >= 1 at r = %d, using %s", start, r, c)
    return c


def _rescaled(f: MPoly, f_min: Fraction, f_max: Fraction) -> MPoly:
    return (f - f_min).scale(1 / (f_max - f_min))


def _tensor_quadrature(F: MPoly, v: UPoly, order: int, prec: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """Gauss-Legendre approximations of E[F v(F)] and E[v(F)] on [-1, 1]^n."""
    n = F.nvars
    extra = v.max_coefficient_bits() + 16
    with mpmath.workprec(prec + extra):
        nodes, weights = mpmath.mp.gauss_quadrature(order, "legendre")
        nodes = [nodes[i] for i in range(order)]
        weights = [weights[i] / 2 for i in range(order)]
        num = mpmath.mpf(0)
        den = mpmath.mpf(0)
        index = [0] * n
        while True:
            point = [nodes[i] for i in index]
            w = mpmath.fprod(weights[i] for i in index)
            t = F.evaluate_mp(point)
            vt = v.evaluate_mp(t)
            num += w * t * vt
            den += w * vt
            for axis in range(n):
                index[axis] += 1
                if index[axis] < order:
                    break
                index[axis] = 0
            else:
                break
        return num, den


def certificate_bound(
    f: MPoly,
    domain: Domain,
    r: int,
    f_min: Optional[Fraction] = None,
    f_max: Optional[Fraction] = None,
    h_constant: Fraction = Fraction(4),
    prec: Optional[int] = None,
) -> CertificateReport:
    """Upper bound on f_pfm^(r) from the needle density v(F) of the rescaled objective.

    F = (f - f_min) / (f_max - f_min) maps the box into [0, 1]; the density v(F) is
    feasible for the push-forward problem, so f_min + (f_max - f_min) E[F v(F)] / E[v(F)]
    dominates f_pfm^(r). Both integrals are computed by tensor Gauss-Legendre quadrature
    exact for the polynomial integrand; the error is estimated by doubling the order.

    Args:
        f: Objective.
        domain: Box domain.
        r: Order, at least 2 and large enough that h < 1.
        f_min: Minimum of f on the box (grid search when None).
        f_max: Maximum of f on the box (grid search when None).
        h_constant: Constant c in h = (c (n + 1) log r / r)^2.
        prec: Working precision in bits.

    Returns:
        CertificateReport: report
    """
    if domain.kind is not DomainKind.BOX:
        raise InvalidParameters("the quadrature certificate supports the box only")
    prec = resolve_precision(prec)
    h = certificate_h(r, domain.nvars, h_constant)
    if f_min is None or f_max is None:
        lo, hi = estimate_extrema(f, domain)
        f_min = lo if f_min is None else f_min
        f_max = hi if f_max is None else f_max
    f_min, f_max = Fraction(f_min), Fraction(f_max)
    if f_max <= f_min:
        zero = mpmath.mpf(0)
        return CertificateReport(
            r, h, zero, mpmath.mpf(1), zero, to_hfloat(f_min, prec), 0, zero, f_min, f_max, True
        )
    F = _rescaled(f, f_min, f_max)
    v = build_needle(NeedleParams(r, h))
    order = max(F.degree, 1) * (2 * r + 1) // 2 + 1
    num, den = _tensor_quadrature(F, v, order, prec)
    num2, den2 = _tensor_quadrature(F, v, 2 * order, prec)
    with mpmath.workprec(prec):
        ratio = num / den
        error = abs(num2 / den2 - ratio)
        bound = to_hfloat(f_min, prec) + to_hfloat(f_max - f_min, prec) * ratio
    logger.debug("certificate r=%d h=%s quadrature order %d", r, h, order)
    return CertificateReport(r, h, num, den, ratio, bound, order, error, f_min, f_max)


def certificate_integrals_exact(
    f: MPoly,
    domain: Domain,
    r: int,
    h: Fraction,
    f_min: Fraction,
    f_max: Fraction,
) -> Tuple[Fraction, Fraction]:
    """Exact E[F v(F)] and E[v(F)] from the push-forward moments of F (box or ball)."""
    F = _rescaled(f, Fraction(f_min), Fraction(f_max))
    v = build_needle(NeedleParams(r, Fraction(h)))
    m = pushforward_moments(domain, F, v.degree + 1)
    den = sum((c * m[k] for k, c in enumerate(v.coeffs)), Fraction(0))
    num = sum((c * m[k + 1] for k, c in enumerate(v.coeffs)), Fraction(0))
    return num, den


def annealing_bound(
    f: MPoly,
    domain: Domain,
    r: int,
    temperature: Optional[Fraction] = None,
    f_min: Optional[Fraction] = None,
    f_max: Optional[Fraction] = None,
) -> Fraction:
    """Exact upper bound on f_pfm^(r) from the truncated Boltzmann density.

    s(t) = sum_{k <= 2r} (-(t - f_min) / T)^k / k! is an even-degree Taylor truncation
    of exp(-(t - f_min) / T), hence positive on the real line and a sum of squares.
    Missing extrema come from the coefficient enclosure; T defaults to (f_max - f_min) / r.
    """
    if r < 1:
        raise InvalidParameters(f"order must be at least 1, got {r}")
    lo, hi = range_enclosure(domain, f)
    f_min = lo if f_min is None else Fraction(f_min)
    f_max = hi if f_max is None else Fraction(f_max)
    if temperature is None:
        temperature = (f_max - f_min) / r if f_max > f_min else Fraction(1)
    temperature = Fraction(temperature)
    if temperature <= 0:
        raise InvalidParameters(f"temperature must be positive, got {temperature}")
    y = UPoly([f_min / temperature, -1 / temperature])
    taylor = UPoly([Fraction(1, factorial(k)) for k in range(2 * r + 1)])
    s = taylor.compose(y)
    m = pushforward_moments(domain, f, 2 * r + 1)
    den = sum((c * m[k] for k, c in enumerate(s.coeffs)), Fraction(0))
    num = sum((c * m[k + 1] for k, c in enumerate(s.coeffs)), Fraction(0))
    return num / den
