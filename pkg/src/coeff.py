"""
Coefficient fields: Gaussian rationals Q(i), cyclotomic fields Q(zeta_m) and complex floats.

Scalars are immutable. Arithmetic between different fields raises
FieldMismatchError; Python ints and Fractions are accepted by every field as
elements of the prime field. Use `embed` to move exact scalars between fields.
"""

from __future__ import annotations

import cmath
import math
import re
from abc import ABC, abstractmethod
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import sympy
from sympy import Poly, Rational as SymRational, Symbol, cyclotomic_poly

from src.config import get_config
from src.errors import ConfigurationBoundError, EmbeddingError, FieldMismatchError, GermCalcError
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

RationalLike = Union[int, Fraction]
_X = Symbol("x")


# ============================================================================
# Fields
# ============================================================================

class Field(ABC):
    """A coefficient field; knows how to build its own scalars."""

    is_exact: bool = True

    @abstractmethod
    def from_rational(self, q: RationalLike) -> "Scalar":
        ...

    @abstractmethod
    def spec(self) -> str:
        """Textual name accepted by `field_from_spec`."""

    @abstractmethod
    def parse(self, text: str) -> "Scalar":
        ...

    @abstractmethod
    def roots_of_unity(self) -> List["Scalar"]:
        """All roots of unity of an exact field (empty for floats)."""

    def zero(self) -> "Scalar":
        return self.from_rational(0)

    def one(self) -> "Scalar":
        return self.from_rational(1)

    def coerce(self, value: Union["Scalar", RationalLike, float, complex]) -> "Scalar":
        if isinstance(value, Scalar):
            if value.field != self:
                raise FieldMismatchError(f"scalar of {value.field.spec()} used in {self.spec()}")
            return value
        if isinstance(value, (int, Fraction)):
            return self.from_rational(value)
        if isinstance(value, (float, complex)) and not self.is_exact:
            return ComplexF64(complex(value))
        raise FieldMismatchError(f"cannot use {type(value).__name__} in {self.spec()}")

    def __repr__(self) -> str:
        return f"Field({self.spec()})"


class GaussianField(Field):
    """Q(i)."""

    def from_rational(self, q: RationalLike) -> "GaussianRational":
        return GaussianRational(Fraction(q), Fraction(0))

    def i(self) -> "GaussianRational":
        return GaussianRational(Fraction(0), Fraction(1))

    def spec(self) -> str:
        return "gaussian"

    def parse(self, text: str) -> "GaussianRational":
        return GaussianRational.parse(text)

    def roots_of_unity(self) -> List["Scalar"]:
        one, i = self.one(), self.i()
        return [one, i, -one, -i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GaussianField)

    def __hash__(self) -> int:
        return hash("gaussian")


class CyclotomicField(Field):
    """Q(zeta_m) with basis 1, zeta, ..., zeta^(phi(m)-1)."""

    def __init__(self, m: int):
        if m < 1:
            raise GermCalcError(f"cyclotomic order must be positive, got {m}")
        bound = get_config().max_cyclotomic
        if m > bound:
            raise ConfigurationBoundError(
                f"cyclotomic order {m} exceeds GERMCALC_MAX_CYCLOTOMIC={bound}"
            )
        self.m = m
        self.modulus = cyclotomic_modulus(m)
        self.degree = len(self.modulus) - 1
        logger.debug("cyclotomic_field.created", m=m, degree=self.degree)

    def from_rational(self, q: RationalLike) -> "Cyclotomic":
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = Fraction(q)
        return Cyclotomic(self, tuple(coeffs))

    def zeta(self, power: int = 1) -> "Cyclotomic":
        """zeta_m ** power, reduced."""
        return Cyclotomic.from_polynomial(self, _monomial(power % self.m))

    def spec(self) -> str:
        return f"cyclotomic:{self.m}"

    def parse(self, text: str) -> "Cyclotomic":
        return Cyclotomic.parse(text, self)

    def roots_of_unity(self) -> List["Scalar"]:
        # Q(zeta_m) contains exactly the lcm(2, m)-th roots of unity
        w = self.unity_count
        z = self.zeta(1)
        minus_one = self.from_rational(-1)
        gen = z if self.m % 2 == 0 else minus_one * z
        out, cur = [], self.one()
        for _ in range(w):
            out.append(cur)
            cur = cur * gen
        return out

    @property
    def unity_count(self) -> int:
        return self.m if self.m % 2 == 0 else 2 * self.m

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CyclotomicField) and other.m == self.m

    def __hash__(self) -> int:
        return hash(("cyclotomic", self.m))


class FloatField(Field):
    """Complex double precision; equality is tolerance based in comparisons."""

    is_exact = False

    def from_rational(self, q: RationalLike) -> "ComplexF64":
        return ComplexF64(complex(float(Fraction(q))))

    def spec(self) -> str:
        return "f64"

    def parse(self, text: str) -> "ComplexF64":
        return ComplexF64.parse(text)

    def roots_of_unity(self) -> List["Scalar"]:
        return []

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FloatField)

    def __hash__(self) -> int:
        return hash("f64")


GAUSSIAN = GaussianField()
F64 = FloatField()


def field_from_spec(spec: str) -> Field:
    """Build a field from `gaussian`, `cyclotomic:m` or `f64`."""
    text = spec.strip().lower()
    if text == "gaussian":
        return GAUSSIAN
    if text in ("f64", "float"):
        return F64
    match = re.fullmatch(r"cyclotomic:(\d+)", text)
    if match:
        return CyclotomicField(int(match.group(1)))
    raise GermCalcError(f"unknown field spec '{spec}' (gaussian | cyclotomic:m | f64)")


@lru_cache(maxsize=None)
def cyclotomic_modulus(m: int) -> Tuple[int, ...]:
    """Integer coefficients (low to high) of the m-th cyclotomic polynomial."""
    coeffs = Poly(cyclotomic_poly(m, _X), _X).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


# ============================================================================
# Scalars
# ============================================================================

class Scalar(ABC):
    """Element of a coefficient field."""

    __slots__ = ()

    @property
    @abstractmethod
    def field(self) -> Field:
        ...

    @abstractmethod
    def is_zero(self) -> bool:
        ...

    @abstractmethod
    def _add(self, other: "Scalar") -> "Scalar":
        ...

    @abstractmethod
    def _mul(self, other: "Scalar") -> "Scalar":
        ...

    @abstractmethod
    def __neg__(self) -> "Scalar":
        ...

    @abstractmethod
    def inverse(self) -> "Scalar":
        ...

    @abstractmethod
    def to_complex(self) -> complex:
        """Value under the principal embedding zeta_m -> exp(2 pi i / m)."""

    @abstractmethod
    def to_text(self) -> str:
        ...

    @abstractmethod
    def rational_value(self) -> Optional[Fraction]:
        """The scalar as a rational number, when it is one."""

    @abstractmethod
    def to_dsl(self) -> str:
        """Expression-language rendering; a bare rational or a parenthesized sum."""

    def is_one(self) -> bool:
        return (self - 1).is_zero()

    def is_negligible(self, tol: float) -> bool:
        return self.is_zero()

    def close_to(self, other: Union["Scalar", RationalLike], tol: float = 0.0) -> bool:
        return (self - other).is_negligible(tol)

    def __add__(self, other):
        return self._add(self.field.coerce(other))

    def __radd__(self, other):
        return self._add(self.field.coerce(other))

    def __sub__(self, other):
        return self._add(-self.field.coerce(other))

    def __rsub__(self, other):
        return self.field.coerce(other)._add(-self)

    def __mul__(self, other):
        return self._mul(self.field.coerce(other))

    def __rmul__(self, other):
        return self._mul(self.field.coerce(other))

    def __truediv__(self, other):
        return self._mul(self.field.coerce(other).inverse())

    def __rtruediv__(self, other):
        return self.field.coerce(other)._mul(self.inverse())

    def __pow__(self, k: int) -> "Scalar":
        if not isinstance(k, int):
            raise TypeError("scalar powers take integer exponents")
        if k < 0:
            return self.inverse() ** (-k)
        result, base = self.field.one(), self
        while k:
            if k & 1:
                result = result._mul(base)
            base = base._mul(base)
            k >>= 1
        return result

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_text()})"

    def __str__(self) -> str:
        return self.to_text()


class GaussianRational(Scalar):
    __slots__ = ("re", "im")

    _PATTERN = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)\s*i\s*$")

    def __init__(self, re_part: RationalLike, im_part: RationalLike = 0):
        self.re = Fraction(re_part)
        self.im = Fraction(im_part)

    @property
    def field(self) -> Field:
        return GAUSSIAN

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def _add(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def _mul(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        return GaussianRational(self.re / norm, -self.im / norm)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def rational_value(self) -> Optional[Fraction]:
        return self.re if self.im == 0 else None

    def to_text(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"

    def to_dsl(self) -> str:
        if self.im == 0:
            return _rational_dsl(self.re)
        imag = "i" if self.im == 1 else f"{_rational_dsl(self.im)}*i"
        if self.re == 0:
            return f"({imag})"
        return f"({_rational_dsl(self.re)} + {imag})"

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        match = cls._PATTERN.match(text)
        if not match:
            raise GermCalcError(f"malformed Gaussian rational '{text}'")
        im = Fraction(match.group(3))
        return cls(Fraction(match.group(1)), -im if match.group(2) == "-" else im)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return isinstance(other, GaussianRational) and self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash(("gaussian", self.re, self.im))


class Cyclotomic(Scalar):
    __slots__ = ("_field", "coeffs")

    _PATTERN = re.compile(r"^\s*poly\(\s*(\d+)\s*;\s*([^)]*)\)\s*$")

    def __init__(self, field: CyclotomicField, coeffs: Tuple[Fraction, ...]):
        if len(coeffs) != field.degree:
            raise GermCalcError("cyclotomic coefficient vector has wrong length")
        self._field = field
        self.coeffs = coeffs

    @classmethod
    def from_polynomial(cls, field: CyclotomicField, poly: Sequence[RationalLike]) -> "Cyclotomic":
        """Reduce a polynomial in zeta (low to high coefficients) modulo Phi_m."""
        return cls(field, _reduce(field, [Fraction(c) for c in poly]))

    @property
    def field(self) -> Field:
        return self._field

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _add(self, other: "Cyclotomic") -> "Cyclotomic":
        return Cyclotomic(self._field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def _mul(self, other: "Cyclotomic") -> "Cyclotomic":
        a, b = self.coeffs, other.coeffs
        # Fast path for prime-field elements
        if not any(a[1:]):
            return Cyclotomic(self._field, tuple(a[0] * c for c in b))
        if not any(b[1:]):
            return Cyclotomic(self._field, tuple(b[0] * c for c in a))
        prod = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        return Cyclotomic(self._field, _reduce(self._field, prod))

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic(self._field, tuple(-c for c in self.coeffs))

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError(f"inverse of zero in Q(zeta_{self._field.m})")
        if not any(self.coeffs[1:]):
            return self._field.from_rational(1 / self.coeffs[0])
        return Cyclotomic(self._field, _cyclotomic_inverse(self._field.m, self.coeffs))

    def to_complex(self) -> complex:
        zeta = cmath.exp(2j * math.pi / self._field.m)
        return sum((float(c) * zeta**k for k, c in enumerate(self.coeffs)), 0j)

    def rational_value(self) -> Optional[Fraction]:
        return None if any(self.coeffs[1:]) else self.coeffs[0]

    def to_text(self) -> str:
        return f"poly({self._field.m}; {','.join(str(c) for c in self.coeffs)})"

    def to_dsl(self) -> str:
        m = self._field.m
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(_rational_dsl(c))
            else:
                power = f"zeta{m}" if k == 1 else f"zeta{m}^{k}"
                terms.append(power if c == 1 else f"{_rational_dsl(c)}*{power}")
        if not terms:
            return "0"
        if len(terms) == 1 and not any(self.coeffs[1:]):
            return terms[0]
        return "(" + " + ".join(terms) + ")"

    @classmethod
    def parse(cls, text: str, field: Optional[CyclotomicField] = None) -> "Cyclotomic":
        match = cls._PATTERN.match(text)
        if not match:
            raise GermCalcError(f"malformed cyclotomic literal '{text}'")
        m = int(match.group(1))
        target = field if field is not None else CyclotomicField(m)
        if target.m != m:
            raise FieldMismatchError(f"literal in Q(zeta_{m}) parsed into {target.spec()}")
        parts = [p.strip() for p in match.group(2).split(",") if p.strip()]
        return cls.from_polynomial(target, [Fraction(p) for p in parts])

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return (
            isinstance(other, Cyclotomic)
            and other._field == self._field
            and other.coeffs == self.coeffs
        )

    def __hash__(self) -> int:
        if not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash(("cyclotomic", self._field.m, self.coeffs))


class ComplexF64(Scalar):
    __slots__ = ("value",)

    def __init__(self, value: complex):
        self.value = complex(value)

    @property
    def field(self) -> Field:
        return F64

    def is_zero(self) -> bool:
        return self.value == 0

    def is_negligible(self, tol: float) -> bool:
        return abs(self.value) <= tol

    def _add(self, other: "ComplexF64") -> "ComplexF64":
        return ComplexF64(self.value + other.value)

    def _mul(self, other: "ComplexF64") -> "ComplexF64":
        return ComplexF64(self.value * other.value)

    def __neg__(self) -> "ComplexF64":
        return ComplexF64(-self.value)

    def inverse(self) -> "ComplexF64":
        if self.value == 0:
            raise ZeroDivisionError("inverse of 0.0")
        return ComplexF64(1 / self.value)

    def to_complex(self) -> complex:
        return self.value

    def rational_value(self) -> Optional[Fraction]:
        tol = get_config().float_tolerance
        if abs(self.value.imag) > tol:
            return None
        approx = Fraction(self.value.real).limit_denominator(get_config().relation_height)
        return approx if abs(float(approx) - self.value.real) <= tol else None

    def to_text(self) -> str:
        re_part, im_part = self.value.real, self.value.imag
        sign = "-" if math.copysign(1.0, im_part) < 0 else "+"
        return f"{re_part!r}{sign}{abs(im_part)!r}j"

    def to_dsl(self) -> str:
        return f"({self.to_text()})"

    @classmethod
    def parse(cls, text: str) -> "ComplexF64":
        try:
            return cls(complex(text.replace(" ", "").replace("+-", "-")))
        except ValueError as exc:
            raise GermCalcError(f"malformed float literal '{text}'") from exc

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Fraction):
            other = float(other)
        if isinstance(other, (int, float, complex)):
            return self.value == other
        return isinstance(other, ComplexF64) and other.value == self.value

    def __hash__(self) -> int:
        return hash(self.value)


# ============================================================================
# Cyclotomic helpers
# ============================================================================

def _rational_dsl(q: Fraction) -> str:
    return str(q) if q >= 0 else f"({q})"


def _monomial(k: int) -> List[Fraction]:
    out = [Fraction(0)] * (k + 1)
    out[k] = Fraction(1)
    return out


def _reduce(field: CyclotomicField, poly: List[Fraction]) -> Tuple[Fraction, ...]:
    """Remainder of a polynomial in zeta modulo the monic integer polynomial Phi_m."""
    modulus, deg = field.modulus, field.degree
    work = list(poly)
    for top in range(len(work) - 1, deg - 1, -1):
        c = work[top]
        if c:
            shift = top - deg
            for j in range(deg):
                if modulus[j]:
                    work[shift + j] -= c * modulus[j]
            work[top] = Fraction(0)
    work.extend([Fraction(0)] * max(0, deg - len(work)))
    return tuple(work[:deg])


@lru_cache(maxsize=4096)
def _cyclotomic_inverse(m: int, coeffs: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    to_sym = [SymRational(c.numerator, c.denominator) for c in reversed(coeffs)]
    element = Poly(to_sym, _X, domain="QQ")
    modulus = Poly(cyclotomic_poly(m, _X), _X, domain="QQ")
    inv = sympy.invert(element, modulus)
    low_to_high = [Fraction(int(c.p), int(c.q)) for c in reversed(inv.all_coeffs())]
    degree = len(cyclotomic_modulus(m)) - 1
    low_to_high.extend([Fraction(0)] * (degree - len(low_to_high)))
    return tuple(low_to_high[:degree])


# ============================================================================
# Operations
# ============================================================================

def root_of_unity_order(s: Scalar) -> Optional[int]:
    """Least k with s**k == 1, or None when s is not a root of unity."""
    if s.is_zero():
        raise GermCalcError("root_of_unity_order of zero")
    field = s.field
    if isinstance(field, FloatField):
        config = get_config()
        value, power = s.to_complex(), complex(1.0)
        for k in range(1, config.unity_power_bound + 1):
            power *= value
            if not (math.isfinite(power.real) and math.isfinite(power.imag)):
                raise GermCalcError("float overflow while searching for a root of unity")
            if abs(power - 1) < config.float_tolerance:
                return k
        return None
    w = 4 if isinstance(field, GaussianField) else field.unity_count
    if not (s**w).is_one():
        return None
    for k in sorted(sympy.divisors(w)):
        if (s**k).is_one():
            return k
    return w


def embed(s: Union[Scalar, RationalLike], target_m: int) -> Cyclotomic:
    """Canonical embedding of an exact scalar into Q(zeta_target_m)."""
    target = CyclotomicField(target_m)
    if isinstance(s, (int, Fraction)):
        return target.from_rational(s)
    if isinstance(s, GaussianRational):
        if target_m % 4:
            raise EmbeddingError(f"Q(i) does not embed in Q(zeta_{target_m})")
        i_image = target.zeta(target_m // 4)
        return target.from_rational(s.re) + i_image * s.im
    if isinstance(s, Cyclotomic):
        k = s.field.m
        if target_m % k:
            raise EmbeddingError(f"Q(zeta_{k}) does not embed in Q(zeta_{target_m})")
        step = target_m // k
        poly = [Fraction(0)] * (step * (len(s.coeffs) - 1) + 1)
        for j, c in enumerate(s.coeffs):
            poly[j * step] = c
        return Cyclotomic.from_polynomial(target, poly)
    raise EmbeddingError("float scalars have no exact embedding")


def rational_nth_root(q: Fraction, k: int) -> Optional[Fraction]:
    """Exact k-th root of a rational, if one exists."""
    if q == 0:
        return Fraction(0)
    if q < 0:
        if k % 2 == 0:
            return None
        root = rational_nth_root(-q, k)
        return -root if root is not None else None
    num, num_exact = sympy.integer_nthroot(q.numerator, k)
    den, den_exact = sympy.integer_nthroot(q.denominator, k)
    if num_exact and den_exact:
        return Fraction(int(num), int(den))
    return None


def nth_root(s: Scalar, k: int) -> Optional[Scalar]:
    """Some c in the field of s with c**k == s; principal root for floats."""
    if k < 1:
        raise GermCalcError("root index must be positive")
    if k == 1:
        return s
    field = s.field
    if not field.is_exact:
        return ComplexF64(s.to_complex() ** (1.0 / k))
    for eta in field.roots_of_unity():
        rest = (s / eta**k).rational_value()
        if rest is None:
            continue
        root = rational_nth_root(rest, k)
        if root is not None:
            return eta * root
    return None


def all_equal_field(values: Iterable[Scalar]) -> Optional[Field]:
    """Common field of a non-empty scalar collection; raises on mixtures."""
    field: Optional[Field] = None
    for v in values:
        if field is None:
            field = v.field
        elif v.field != field:
            raise FieldMismatchError(f"mixed fields {field.spec()} and {v.field.spec()}")
    return field
