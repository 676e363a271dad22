"""
Truncated multivariate power series (jets) over a coefficient field.

A Jet stores its coefficients bucketed by total degree: bucket k maps exponent
tuples of degree k to nonzero scalars. Every jet carries its truncation order N;
arithmetic between jets of different orders truncates to the smaller order,
logs a warning and sets `order_mismatch` on the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from src.coeff import Field, RationalLike, Scalar, nth_root
from src.config import get_config
from src.errors import AmbientMismatchError, FieldMismatchError, JetError
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

Exponent = Tuple[int, ...]
Coefficient = Union[Scalar, RationalLike]


@lru_cache(maxsize=None)
def monomials_of_degree(n_vars: int, degree: int) -> Tuple[Exponent, ...]:
    """Exponents of total degree `degree` in graded-lex order (x1 heaviest first)."""
    out = []
    for combo in combinations_with_replacement(range(n_vars), degree):
        exp = [0] * n_vars
        for i in combo:
            exp[i] += 1
        out.append(tuple(exp))
    return tuple(sorted(out, reverse=True))


def monomials_up_to(n_vars: int, max_degree: int, min_degree: int = 0) -> List[Exponent]:
    out: List[Exponent] = []
    for k in range(min_degree, max_degree + 1):
        out.extend(monomials_of_degree(n_vars, k))
    return out


def grlex_key(exp: Exponent) -> Tuple[int, Tuple[int, ...]]:
    """Sort key placing low degrees first and, within a degree, x1-heavy monomials first."""
    return sum(exp), tuple(-e for e in exp)


class Jet:
    """Element of O_n / m^(N+1)."""

    __slots__ = ("field", "n_vars", "order", "_buckets", "order_mismatch")

    def __init__(
        self,
        field: Field,
        n_vars: int,
        order: int,
        terms: Optional[Mapping[Exponent, Coefficient]] = None,
        *,
        order_mismatch: bool = False,
    ):
        if n_vars < 1:
            raise JetError("jets need at least one variable")
        if order < 0:
            raise JetError(f"negative truncation order {order}")
        self.field = field
        self.n_vars = n_vars
        self.order = order
        self.order_mismatch = order_mismatch
        self._buckets: List[Dict[Exponent, Scalar]] = [{} for _ in range(order + 1)]
        for exp, c in (terms or {}).items():
            if len(exp) != n_vars:
                raise AmbientMismatchError(f"exponent {exp} does not have {n_vars} entries")
            deg = sum(exp)
            if deg > order:
                continue
            value = field.coerce(c)
            if not value.is_zero():
                self._buckets[deg][tuple(exp)] = value

    # ------------------------------------------------------------------ builders

    @classmethod
    def _from_buckets(
        cls, field: Field, n_vars: int, order: int, buckets: List[Dict[Exponent, Scalar]], mismatch: bool = False
    ) -> "Jet":
        jet = cls.__new__(cls)
        jet.field = field
        jet.n_vars = n_vars
        jet.order = order
        jet.order_mismatch = mismatch
        jet._buckets = [{e: c for e, c in b.items() if not c.is_zero()} for b in buckets[: order + 1]]
        while len(jet._buckets) < order + 1:
            jet._buckets.append({})
        return jet

    @classmethod
    def zero(cls, field: Field, n_vars: int, order: int) -> "Jet":
        return cls(field, n_vars, order)

    @classmethod
    def constant(cls, field: Field, n_vars: int, order: int, value: Coefficient) -> "Jet":
        return cls(field, n_vars, order, {(0,) * n_vars: value})

    @classmethod
    def variable(cls, field: Field, n_vars: int, order: int, index: int) -> "Jet":
        if not 0 <= index < n_vars:
            raise JetError(f"variable index {index} out of range for {n_vars} variables")
        exp = [0] * n_vars
        exp[index] = 1
        return cls(field, n_vars, order, {tuple(exp): 1})

    @classmethod
    def monomial(cls, field: Field, n_vars: int, order: int, exp: Exponent, coeff: Coefficient = 1) -> "Jet":
        return cls(field, n_vars, order, {tuple(exp): coeff})

    def like(self, terms: Optional[Mapping[Exponent, Coefficient]] = None, order: Optional[int] = None) -> "Jet":
        """A jet in the same ambient as self."""
        return Jet(self.field, self.n_vars, self.order if order is None else order, terms)

    # ------------------------------------------------------------------ access

    def terms(self) -> Iterator[Tuple[Exponent, Scalar]]:
        """Nonzero terms in graded-lex order."""
        for bucket in self._buckets:
            for exp in sorted(bucket, key=grlex_key):
                yield exp, bucket[exp]

    def bucket(self, degree: int) -> Dict[Exponent, Scalar]:
        if 0 <= degree <= self.order:
            return self._buckets[degree]
        return {}

    def coefficient(self, exp: Sequence[int]) -> Scalar:
        exp = tuple(exp)
        return self.bucket(sum(exp)).get(exp, self.field.zero())

    def __getitem__(self, exp: Sequence[int]) -> Scalar:
        return self.coefficient(exp)

    def constant_term(self) -> Scalar:
        return self.coefficient((0,) * self.n_vars)

    def is_zero(self, tol: Optional[float] = None) -> bool:
        if self.field.is_exact:
            return not any(self._buckets)
        tol = get_config().float_tolerance if tol is None else tol
        return all(c.is_negligible(tol) for b in self._buckets for c in b.values())

    def valuation(self) -> Optional[int]:
        """Lowest degree with a nonzero coefficient; None for the zero jet."""
        for k, b in enumerate(self._buckets):
            if b:
                return k
        return None

    def homogeneous_part(self, degree: int) -> "Jet":
        return Jet._from_buckets(
            self.field, self.n_vars, self.order,
            [dict(self.bucket(degree)) if k == degree else {} for k in range(self.order + 1)],
        )

    def leading_form(self) -> "Jet":
        v = self.valuation()
        return self.homogeneous_part(v) if v is not None else self

    def is_homogeneous(self) -> bool:
        return sum(1 for b in self._buckets if b) <= 1

    def max_degree(self) -> Optional[int]:
        for k in range(self.order, -1, -1):
            if self._buckets[k]:
                return k
        return None

    def lowest_term(self) -> Optional[Tuple[Exponent, Scalar]]:
        return next(self.terms(), None)

    def truncate(self, order: int) -> "Jet":
        order = min(order, self.order)
        return Jet._from_buckets(self.field, self.n_vars, order, self._buckets, self.order_mismatch)

    def with_order(self, order: int) -> "Jet":
        """Re-declare the truncation order (only for jets known to be polynomials)."""
        buckets = [dict(b) for b in self._buckets[: order + 1]]
        return Jet._from_buckets(self.field, self.n_vars, order, buckets, self.order_mismatch)

    def n_terms(self) -> int:
        return sum(len(b) for b in self._buckets)

    # ------------------------------------------------------------------ arithmetic

    def _coerce(self, other: Union["Jet", Coefficient]) -> "Jet":
        if isinstance(other, Jet):
            if other.field != self.field:
                raise FieldMismatchError(f"jets over {self.field.spec()} and {other.field.spec()}")
            if other.n_vars != self.n_vars:
                raise AmbientMismatchError(f"jets in {self.n_vars} and {other.n_vars} variables")
            return other
        return Jet.constant(self.field, self.n_vars, self.order, self.field.coerce(other))

    def _joint_order(self, other: "Jet") -> Tuple[int, bool]:
        mismatch = self.order_mismatch or other.order_mismatch
        if self.order != other.order:
            logger.warning("jet.order_mismatch", left=self.order, right=other.order)
            mismatch = True
        return min(self.order, other.order), mismatch

    def __add__(self, other: Union["Jet", Coefficient]) -> "Jet":
        other = self._coerce(other)
        order, mismatch = self._joint_order(other)
        buckets = []
        for k in range(order + 1):
            merged = dict(self._buckets[k])
            for exp, c in other._buckets[k].items():
                merged[exp] = merged[exp] + c if exp in merged else c
            buckets.append(merged)
        return Jet._from_buckets(self.field, self.n_vars, order, buckets, mismatch)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet._from_buckets(
            self.field, self.n_vars, self.order,
            [{e: -c for e, c in b.items()} for b in self._buckets], self.order_mismatch,
        )

    def __sub__(self, other: Union["Jet", Coefficient]) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union["Jet", Coefficient]) -> "Jet":
        return self._coerce(other) + (-self)

    def scale(self, c: Coefficient) -> "Jet":
        c = self.field.coerce(c)
        if c.is_zero():
            return Jet.zero(self.field, self.n_vars, self.order)
        return Jet._from_buckets(
            self.field, self.n_vars, self.order,
            [{e: v * c for e, v in b.items()} for b in self._buckets], self.order_mismatch,
        )

    def __mul__(self, other: Union["Jet", Coefficient]) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        other = self._coerce(other)
        order, mismatch = self._joint_order(other)
        buckets: List[Dict[Exponent, Scalar]] = [{} for _ in range(order + 1)]
        for da in range(order + 1):
            left = self._buckets[da]
            if not left:
                continue
            for db in range(order + 1 - da):
                right = other._buckets[db]
                if not right:
                    continue
                target = buckets[da + db]
                for ea, ca in left.items():
                    for eb, cb in right.items():
                        exp = tuple(a + b for a, b in zip(ea, eb))
                        prod = ca * cb
                        target[exp] = target[exp] + prod if exp in target else prod
        return Jet._from_buckets(self.field, self.n_vars, order, buckets, mismatch)

    def __rmul__(self, other: Coefficient) -> "Jet":
        return self.scale(other)

    def __truediv__(self, other: Coefficient) -> "Jet":
        if isinstance(other, Jet):
            return self * jet_unit_inverse(other)
        return self.scale(self.field.coerce(other).inverse())

    def __pow__(self, k: int) -> "Jet":
        if k < 0:
            return jet_unit_inverse(self) ** (-k)
        result = Jet.constant(self.field, self.n_vars, self.order, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, Scalar)):
            other = self._coerce(other)
        if not isinstance(other, Jet):
            return NotImplemented
        if other.field != self.field or other.n_vars != self.n_vars:
            return False
        order = min(self.order, other.order)
        return (self.truncate(order) - other.truncate(order)).is_zero()

    __hash__ = None  # type: ignore[assignment]

    # ------------------------------------------------------------------ calculus

    def derivative(self, index: int) -> "Jet":
        """d/dz_index; the result is reliable to order N-1."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        buckets: List[Dict[Exponent, Scalar]] = [{} for _ in range(self.order)]
        for k in range(1, self.order + 1):
            for exp, c in self._buckets[k].items():
                e = exp[index]
                if e:
                    lowered = exp[:index] + (e - 1,) + exp[index + 1:]
                    buckets[k - 1][lowered] = c * e
        return Jet._from_buckets(self.field, self.n_vars, self.order - 1, buckets, self.order_mismatch)

    def gradient(self) -> List["Jet"]:
        return [self.derivative(i) for i in range(self.n_vars)]

    def scale_by_degree(self, lam: Coefficient) -> "Jet":
        """The composition f(lam * z): degree-k part multiplied by lam**k."""
        lam = self.field.coerce(lam)
        buckets, power = [], self.field.one()
        for b in self._buckets:
            buckets.append({e: c * power for e, c in b.items()})
            power = power * lam
        return Jet._from_buckets(self.field, self.n_vars, self.order, buckets, self.order_mismatch)

    def divide_by_monomial(self, exp: Exponent) -> "Jet":
        """Exact division by z^exp; raises when some term is not divisible."""
        d = sum(exp)
        buckets: List[Dict[Exponent, Scalar]] = [{} for _ in range(max(self.order - d, 0) + 1)]
        for e, c in self.terms():
            if any(a < b for a, b in zip(e, exp)):
                raise JetError(f"term {e} is not divisible by {exp}")
            q = tuple(a - b for a, b in zip(e, exp))
            buckets[sum(q)][q] = c
        return Jet._from_buckets(self.field, self.n_vars, max(self.order - d, 0), buckets, self.order_mismatch)

    def evaluate(self, point: Sequence[Union[Scalar, complex]]) -> Union[Scalar, complex]:
        """Value of the truncated polynomial at a point."""
        if len(point) != self.n_vars:
            raise AmbientMismatchError("point has the wrong number of coordinates")
        total = None
        for exp, c in self.terms():
            term = c if not isinstance(point[0], complex) else c.to_complex()
            for p, e in zip(point, exp):
                if e:
                    term = term * p**e
            total = term if total is None else total + term
        if total is None:
            return 0j if point and isinstance(point[0], complex) else self.field.zero()
        return total

    def compose(self, maps: Sequence["Jet"]) -> "Jet":
        return jet_compose(self, maps)

    # ------------------------------------------------------------------ text

    def to_dsl(self, names: Optional[Sequence[str]] = None) -> str:
        """Canonical expression-language rendering."""
        names = list(names) if names is not None else default_names(self.n_vars)
        parts: List[str] = []
        for exp, c in self.terms():
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e
            )
            q = c.rational_value() if self.field.is_exact else None
            if q is not None:
                sign = "-" if q < 0 else "+"
                mag = abs(q)
                body = mono if (mag == 1 and mono) else (f"{mag}*{mono}" if mono else str(mag))
                parts.append(f"{sign} {body}")
            else:
                body = f"{c.to_dsl()}*{mono}" if mono else c.to_dsl()
                parts.append(f"+ {body}")
        if not parts:
            return "0"
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"Jet(n={self.n_vars}, N={self.order}, {self.to_dsl()})"


def default_names(n_vars: int) -> List[str]:
    if n_vars <= 3:
        return ["x", "y", "z"][:n_vars]
    return [f"z{i + 1}" for i in range(n_vars)]


@dataclass(frozen=True)
class Ambient:
    """Field, number of variables and truncation order shared by a family of jets."""

    field: Field
    n_vars: int
    order: int

    def zero(self) -> Jet:
        return Jet.zero(self.field, self.n_vars, self.order)

    def one(self) -> Jet:
        return Jet.constant(self.field, self.n_vars, self.order, 1)

    def const(self, value: Coefficient) -> Jet:
        return Jet.constant(self.field, self.n_vars, self.order, value)

    def var(self, index: int) -> Jet:
        return Jet.variable(self.field, self.n_vars, self.order, index)

    def variables(self) -> List[Jet]:
        return [self.var(i) for i in range(self.n_vars)]

    def jet(self, terms: Mapping[Exponent, Coefficient]) -> Jet:
        return Jet(self.field, self.n_vars, self.order, terms)

    def scalar(self, value: Coefficient) -> Scalar:
        return self.field.coerce(value)

    def with_order(self, order: int) -> "Ambient":
        return Ambient(self.field, self.n_vars, order)


# ============================================================================
# Operations
# ============================================================================

def jet_compose(f: Jet, maps: Sequence[Jet]) -> Jet:
    """f(map_1, ..., map_n) truncated at the smallest order involved."""
    if len(maps) != f.n_vars:
        raise JetError(f"composition needs {f.n_vars} substitutions, got {len(maps)}")
    if not maps:
        return f
    k_vars = maps[0].n_vars
    for g in maps:
        if g.n_vars != k_vars:
            raise AmbientMismatchError("substituted jets live in different numbers of variables")
        if g.field != f.field:
            raise FieldMismatchError("substituted jets live over a different field")
        if not g.constant_term().is_zero():
            raise JetError("substituted components must have zero constant term")
    orders = {f.order} | {g.order for g in maps}
    order = min(orders)
    if len(orders) > 1:
        logger.warning("jet.order_mismatch", left=f.order, right=sorted({g.order for g in maps}))
    mismatch = f.order_mismatch or any(g.order_mismatch for g in maps) or len(orders) > 1
    maps = [g.truncate(order) for g in maps]

    one = Jet.constant(f.field, k_vars, order, 1)
    cache: Dict[Exponent, Jet] = {(0,) * f.n_vars: one}

    def monomial_value(exp: Exponent) -> Jet:
        if exp in cache:
            return cache[exp]
        i = next(j for j, e in enumerate(exp) if e)
        lower = exp[:i] + (exp[i] - 1,) + exp[i + 1:]
        value = monomial_value(lower) * maps[i]
        cache[exp] = value
        return value

    buckets: List[Dict[Exponent, Scalar]] = [{} for _ in range(order + 1)]
    for exp, c in f.terms():
        if sum(exp) > order:
            break
        value = monomial_value(exp)
        for k in range(sum(exp), order + 1):
            target = buckets[k]
            for e, v in value.bucket(k).items():
                prod = v * c
                target[e] = target[e] + prod if e in target else prod
    return Jet._from_buckets(f.field, k_vars, order, buckets, mismatch)


def jet_unit_inverse(u: Jet) -> Jet:
    """v with u*v = 1 mod m^(N+1), solved degree by degree."""
    u0 = u.constant_term()
    if u0.is_zero():
        raise JetError("jet_unit_inverse needs a nonzero constant term")
    inv0 = u0.inverse()
    field, n, order = u.field, u.n_vars, u.order
    parts: List[Dict[Exponent, Scalar]] = [{(0,) * n: inv0}]
    for k in range(1, order + 1):
        acc: Dict[Exponent, Scalar] = {}
        for j in range(1, k + 1):
            uj = u.bucket(j)
            if not uj:
                continue
            for ea, ca in uj.items():
                for eb, cb in parts[k - j].items():
                    exp = tuple(a + b for a, b in zip(ea, eb))
                    prod = ca * cb
                    acc[exp] = acc[exp] + prod if exp in acc else prod
        parts.append({e: -(c * inv0) for e, c in acc.items() if not c.is_zero()})
    return Jet._from_buckets(field, n, order, parts, u.order_mismatch)


def jet_exp(f: Jet) -> Jet:
    """exp(f) for f(0) = 0."""
    if not f.constant_term().is_zero():
        raise JetError("jet_exp needs f(0) = 0")
    result = Jet.constant(f.field, f.n_vars, f.order, 1)
    power = Jet.constant(f.field, f.n_vars, f.order, 1)
    for k in range(1, f.order + 1):
        power = power * f
        if power.is_zero():
            break
        result = result + power.scale(Fraction(1, factorial(k)))
    return result


def jet_log(u: Jet) -> Jet:
    """log(u) for u(0) = 1."""
    if not u.constant_term().is_one():
        raise JetError("jet_log needs u(0) = 1")
    g = u - 1
    result = Jet.zero(u.field, u.n_vars, u.order)
    power = Jet.constant(u.field, u.n_vars, u.order, 1)
    for k in range(1, u.order + 1):
        power = power * g
        if power.is_zero():
            break
        sign = 1 if k % 2 else -1
        result = result + power.scale(Fraction(sign, k))
    return result


def jet_nth_root(u: Jet, k: int) -> Jet:
    """Some w with w**k = u for a unit u whose constant term has a k-th root in the field."""
    u0 = u.constant_term()
    if u0.is_zero():
        raise JetError("jet_nth_root needs a unit")
    c = nth_root(u0, k)
    if c is None:
        raise JetError(f"constant term {u0} has no {k}-th root in {u.field.spec()}")
    if k == 1:
        return u
    return jet_exp(jet_log(u / u0).scale(Fraction(1, k))).scale(c)


def linear_substitution(f: Jet, matrix: Sequence[Sequence[Scalar]]) -> Jet:
    """f(T z) for an n x n matrix T."""
    n = f.n_vars
    z = [Jet.variable(f.field, n, f.order, j) for j in range(n)]
    images = []
    for row in matrix:
        acc = Jet.zero(f.field, n, f.order)
        for j, a in enumerate(row):
            if not f.field.coerce(a).is_zero():
                acc = acc + z[j].scale(a)
        images.append(acc)
    return jet_compose(f, images)


def sum_jets(jets: Iterable[Jet], like: Jet) -> Jet:
    total = like.like()
    for j in jets:
        total = total + j
    return total
