"""Exact polynomial arithmetic over the rationals.

Multivariate polynomials (``MPoly``) are sparse maps from exponent vectors to
nonzero ``Fraction`` coefficients; univariate polynomials (``UPoly``) are dense
coefficient tuples indexed by degree. Both are immutable after construction.
"""

import logging
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .config import resolve_term_cap
from .errors import DimensionMismatch, PolyFormatError, TermCountExceeded

logger = logging.getLogger(__name__)

Rat = Fraction
Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]

__all__ = [
    "Rat",
    "MPoly",
    "UPoly",
    "mp_mul",
    "mp_pow",
    "mp_eval",
    "compose_uni",
    "chebyshev_t",
    "grlex_key",
    "parse_poly",
    "format_poly",
    "read_poly",
    "write_poly",
]


def grlex_key(alpha: Monomial) -> Tuple[int, Monomial]:
    """Graded-lexicographic sort key: total degree first, then lexicographic."""
    return sum(alpha), alpha


def _add_exponents(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class MPoly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("_nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Mapping[Monomial, Scalar]] = None):
        if nvars < 0:
            raise DimensionMismatch(f"nvars must be non-negative, got {nvars}")
        clean: Dict[Monomial, Fraction] = {}
        for alpha, coeff in (terms or {}).items():
            alpha = tuple(int(e) for e in alpha)
            if len(alpha) != nvars:
                raise DimensionMismatch(
                    f"exponent vector {alpha} does not have length {nvars}"
                )
            if any(e < 0 for e in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            coeff = Fraction(coeff)
            if coeff:
                clean[alpha] = clean.get(alpha, Fraction(0)) + coeff
                if not clean[alpha]:
                    del clean[alpha]
        self._nvars = nvars
        self._terms = clean
        self._hash = None

    @classmethod
    def _trusted(cls, nvars: int, terms: Dict[Monomial, Fraction]) -> "MPoly":
        """Wraps an already clean term dict without copying or validating."""
        p = cls.__new__(cls)
        p._nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, nvars: int, value: Scalar = 1) -> "MPoly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MPoly":
        alpha = [0] * nvars
        alpha[index] = 1
        return cls(nvars, {tuple(alpha): 1})

    @classmethod
    def variables(cls, nvars: int) -> List["MPoly"]:
        return [cls.variable(nvars, i) for i in range(nvars)]

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(alpha) for alpha in self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(alpha) for alpha in self._terms), default=-1)

    def coefficient(self, alpha: Monomial) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in graded-lexicographic order."""
        return sorted(self._terms.items(), key=lambda item: grlex_key(item[0]))

    def _check(self, other: "MPoly") -> None:
        if self._nvars != other._nvars:
            raise DimensionMismatch(
                f"polynomials in {self._nvars} and {other._nvars} variables"
            )

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.constant(self._nvars, other)
        return NotImplemented

    def __add__(self, other) -> "MPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for alpha, c in other._terms.items():
            value = terms.get(alpha, 0) + c
            if value:
                terms[alpha] = value
            else:
                terms.pop(alpha, None)
        return MPoly._trusted(self._nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._trusted(self._nvars, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> "MPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "MPoly":
        return (-self) + other

    def scale(self, c: Scalar) -> "MPoly":
        c = Fraction(c)
        if not c:
            return MPoly(self._nvars)
        return MPoly._trusted(self._nvars, {a: c * v for a, v in self._terms.items()})

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, MPoly):
            return mp_mul(self, other)
        return NotImplemented

    def __rmul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "MPoly":
        return mp_pow(self, k)

    def __call__(self, point: Sequence[Scalar]) -> Fraction:
        return mp_eval(self, point)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MPoly.constant(self._nvars, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self._nvars == other._nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return f"MPoly({self._nvars}, 0)"
        parts = []
        for alpha, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(alpha) if e
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"MPoly({self._nvars}, " + " + ".join(parts) + ")"

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Float64 evaluation at an (m, nvars) array of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self._nvars:
            raise DimensionMismatch(
                f"points have {points.shape[1]} coordinates, polynomial has {self._nvars}"
            )
        out = np.zeros(points.shape[0], dtype=float)
        for alpha, c in self._terms.items():
            term = np.full(points.shape[0], float(c))
            for i, e in enumerate(alpha):
                if e:
                    term *= points[:, i] ** e
            out += term
        return out

    def evaluate_mp(self, point: Sequence) -> mpmath.mpf:
        """Evaluation in the current mpmath precision."""
        if len(point) != self._nvars:
            raise DimensionMismatch(
                f"point has {len(point)} coordinates, polynomial has {self._nvars}"
            )
        total = mpmath.mpf(0)
        for alpha, c in self._terms.items():
            term = mpmath.mpf(c.numerator) / c.denominator
            for x, e in zip(point, alpha):
                if e:
                    term *= x**e
            total += term
        return total


class UPoly:
    """Dense univariate polynomial with exact rational coefficients, index = degree."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        values = [Fraction(c) for c in coeffs]
        while values and not values[-1]:
            values.pop()
        self._coeffs = tuple(values)

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "UPoly":
        return cls([0] * k + [c])

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    def is_zero(self) -> bool:
        return not self._coeffs

    def __len__(self) -> int:
        return len(self._coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self._coeffs[k] if 0 <= k < len(self._coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = UPoly([other])
        if not isinstance(other, UPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        return f"UPoly({[str(c) for c in self._coeffs]})"

    def _coerce(self, other) -> "UPoly":
        if isinstance(other, UPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return UPoly([other])
        return NotImplemented

    def __add__(self, other) -> "UPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self), len(other))
        return UPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> "UPoly":
        return UPoly(-c for c in self._coeffs)

    def __sub__(self, other) -> "UPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "UPoly":
        return (-self) + other

    def scale(self, c: Scalar) -> "UPoly":
        c = Fraction(c)
        return UPoly(c * v for v in self._coeffs)

    def __mul__(self, other) -> "UPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return UPoly()
        out = [Fraction(0)] * (len(self) + len(other) - 1)
        for i, a in enumerate(self._coeffs):
            if a:
                for j, b in enumerate(other._coeffs):
                    out[i + j] += a * b
        return UPoly(out)

    def __rmul__(self, other) -> "UPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __call__(self, t: Scalar) -> Fraction:
        """Exact Horner evaluation."""
        t = Fraction(t)
        value = Fraction(0)
        for c in reversed(self._coeffs):
            value = value * t + c
        return value

    def evaluate_mp(self, t) -> mpmath.mpf:
        """Horner evaluation in the current mpmath precision."""
        value = mpmath.mpf(0)
        for c in reversed(self._coeffs):
            value = value * t + mpmath.mpf(c.numerator) / c.denominator
        return value

    def compose(self, inner: "UPoly") -> "UPoly":
        """Returns ``self(inner(t))``."""
        out = UPoly()
        for c in reversed(self._coeffs):
            out = out * inner + c
        return out

    def max_coefficient_bits(self) -> int:
        """Bit size of the largest |coefficient| (at least 1)."""
        return max(
            (abs(c.numerator).bit_length() - c.denominator.bit_length() + 1 for c in self._coeffs),
            default=1,
        )


def mp_mul(p: MPoly, q: MPoly, term_cap: Optional[int] = None) -> MPoly:
    """Exact product of two polynomials in the same variables.

    Args:
        p: Left factor.
        q: Right factor.
        term_cap: Maximum number of terms in the product (default from Settings).

    Returns:
        MPoly: product
    """
    p._check(q)
    cap = resolve_term_cap(term_cap)
    if len(p) > len(q):
        p, q = q, p
    out: Dict[Monomial, Fraction] = {}
    q_items = list(q._terms.items())
    for a, ca in p._terms.items():
        for b, cb in q_items:
            key = _add_exponents(a, b)
            value = out.get(key)
            out[key] = ca * cb if value is None else value + ca * cb
        if len(out) > cap:
            raise TermCountExceeded(
                f"product exceeds the term cap of {cap} (reached {len(out)} terms)"
            )
    return MPoly._trusted(p.nvars, {a: c for a, c in out.items() if c})


def mp_pow(p: MPoly, k: int, term_cap: Optional[int] = None) -> MPoly:
    """Exact k-th power by repeated squaring; ``p**0`` is the constant 1."""
    if k < 0:
        raise ValueError(f"exponent must be non-negative, got {k}")
    result = MPoly.constant(p.nvars, 1)
    base = p
    while k:
        if k & 1:
            result = mp_mul(result, base, term_cap)
        k >>= 1
        if k:
            base = mp_mul(base, base, term_cap)
    logger.debug("power with %d terms", len(result))
    return result


def mp_eval(p: MPoly, point: Sequence[Scalar]) -> Fraction:
    """Exact value of ``p`` at a rational point."""
    if len(point) != p.nvars:
        raise DimensionMismatch(
            f"point has {len(point)} coordinates, polynomial has {p.nvars}"
        )
    point = [Fraction(x) for x in point]
    total = Fraction(0)
    for alpha, c in p.terms.items():
        term = c
        for x, e in zip(point, alpha):
            if e:
                term *= x**e
        total += term
    return total


def compose_uni(s: UPoly, f: MPoly, term_cap: Optional[int] = None) -> MPoly:
    """Returns ``s(f(x))`` by Horner's scheme over polynomials."""
    out = MPoly(f.nvars)
    for c in reversed(s.coeffs):
        out = mp_mul(out, f, term_cap) + c
    return out


def chebyshev_t(r: int) -> UPoly:
    """Chebyshev polynomial of the first kind T_r."""
    if r < 0:
        raise ValueError(f"degree must be non-negative, got {r}")
    t = UPoly([0, 1])
    prev, cur = UPoly([1]), t
    if r == 0:
        return prev
    for _ in range(r - 1):
        prev, cur = cur, (t * cur).scale(2) - prev
    return cur


def _parse_coefficient(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as e:
        raise PolyFormatError(f"line {lineno}: bad coefficient {token!r}") from e


def parse_poly(text: str, nvars: Optional[int] = None) -> MPoly:
    """Parses the one-term-per-line text format ``num/den e1 e2 ... en``.

    Lines starting with ``#`` are comments, except ``# nvars: n`` which records the
    number of variables (needed for the zero polynomial). Blank lines are ignored.

    Args:
        text: Polynomial text.
        nvars: Expected number of variables; inferred from the terms when None.

    Returns:
        MPoly: poly
    """
    terms: Dict[Monomial, Fraction] = {}
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("nvars:"):
                declared = int(body.split(":", 1)[1])
            continue
        tokens = line.split()
        coeff = _parse_coefficient(tokens[0], lineno)
        try:
            alpha = tuple(int(t) for t in tokens[1:])
        except ValueError as e:
            raise PolyFormatError(f"line {lineno}: bad exponent in {line!r}") from e
        if any(e < 0 for e in alpha):
            raise PolyFormatError(f"line {lineno}: negative exponent in {line!r}")
        if declared is None:
            declared = len(alpha)
        if len(alpha) != declared:
            raise PolyFormatError(
                f"line {lineno}: expected {declared} exponents, got {len(alpha)}"
            )
        terms[alpha] = terms.get(alpha, Fraction(0)) + coeff
    if nvars is not None:
        if declared is not None and declared != nvars:
            raise DimensionMismatch(
                f"polynomial text has {declared} variables, expected {nvars}"
            )
        declared = nvars
    if declared is None:
        raise PolyFormatError("cannot infer the number of variables of an empty polynomial")
    return MPoly(declared, terms)


def format_poly(p: MPoly) -> str:
    """Writes ``p`` in the text format; ``parse_poly(format_poly(p)) == p``."""
    lines = [f"# nvars: {p.nvars}"]
    for alpha, c in p.sorted_terms():
        lines.append(" ".join([str(c)] + [str(e) for e in alpha]))
    return "\n".join(lines) + "\n"


def read_poly(path: str, nvars: Optional[int] = None) -> MPoly:
    with open(path) as f:
        return parse_poly(f.read(), nvars=nvars)


def write_poly(path: str, p: MPoly) -> None:
    with open(path, "w") as f:
        f.write(format_poly(p))
