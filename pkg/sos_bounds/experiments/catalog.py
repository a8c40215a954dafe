"""Named objectives and polynomial loading.

The four bivariate test functions are rescaled to [-1, 1]^2 with their known minima
and box maxima; x^(2k) and the identity live on [-1, 1].
"""

import os
from fractions import Fraction
from typing import NamedTuple, Tuple

from ..errors import UnknownName
from ..polyring import MPoly, read_poly

NAMES = ("booth", "matyas", "camel", "motzkin")


class TestFunction(NamedTuple):
    """A polynomial test function on [-1, 1]^2 with its known minimum.

    ``f_max`` is the maximum over the box, attained at a corner.
    """

    __test__ = False

    name: str
    poly: MPoly
    f_min: Fraction
    minimizers: Tuple[Tuple[Fraction, ...], ...]
    f_max: Fraction


def _booth() -> TestFunction:
    x1, x2 = MPoly.variables(2)
    poly = (10 * x1 + 20 * x2 - 7) ** 2 + (20 * x1 + 10 * x2 - 5) ** 2
    return TestFunction("booth", poly, Fraction(0), ((Fraction(1, 10), Fraction(3, 10)),), Fraction(2594))


def _matyas() -> TestFunction:
    x1, x2 = MPoly.variables(2)
    poly = 26 * (x1**2 + x2**2) - 48 * x1 * x2
    return TestFunction("matyas", poly, Fraction(0), ((Fraction(0), Fraction(0)),), Fraction(100))


def _camel() -> TestFunction:
    x1, x2 = MPoly.variables(2)
    poly = (
        50 * x1**2
        - Fraction(2625, 4) * x1**4
        + Fraction(15625, 6) * x1**6
        + 25 * x1 * x2
        + 25 * x2**2
    )
    return TestFunction("camel", poly, Fraction(0), ((Fraction(0), Fraction(0)),), Fraction(24575, 12))


def _motzkin() -> TestFunction:
    x1, x2 = MPoly.variables(2)
    poly = 64 * x1**4 * x2**2 + 64 * x1**2 * x2**4 - 48 * x1**2 * x2**2 + 1
    half = Fraction(1, 2)
    minimizers = tuple((s1 * half, s2 * half) for s1 in (1, -1) for s2 in (1, -1))
    return TestFunction("motzkin", poly, Fraction(0), minimizers, Fraction(81))


_BUILDERS = {"booth": _booth, "matyas": _matyas, "camel": _camel, "motzkin": _motzkin}


def test_function(name: str) -> TestFunction:
    try:
        return _BUILDERS[name.lower()]()
    except KeyError:
        raise UnknownName(f"unknown test function {name!r}; known: {', '.join(NAMES)}") from None


test_function.__test__ = False


def power_function(k: int) -> MPoly:
    """x^(2k) in one variable."""
    return MPoly(1, {(2 * k,): 1})


def identity_function() -> MPoly:
    return MPoly(1, {(1,): 1})


def sample_data_dir() -> str:
    return os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir, "sample_data"))


def load_poly(source: str) -> MPoly:
    """A catalog name or a path to a polynomial text file."""
    if source.lower() in _BUILDERS:
        return test_function(source).poly
    for path in (source, os.path.join(sample_data_dir(), "polys", source)):
        if os.path.isfile(path):
            return read_poly(path)
    raise UnknownName(f"{source!r} is neither a test function nor a polynomial file")
