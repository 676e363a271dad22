"""
Exterior calculus over jets: p-forms, vector fields and diffeomorphism jets.

Differentiation lowers the reliable truncation order by one. Every object
carries its effective order, and binary operations silently truncate their
operands to the common order before combining them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from src.coeff import Field, RationalLike, Scalar
from src.config import get_config
from src.errors import (
    AmbientMismatchError,
    FieldMismatchError,
    FormDegreeError,
    JetError,
    NonHomogeneousError,
    SingularLinearPartError,
)
from src.jets import Ambient, Jet, default_names, jet_compose
from src.linalg import Matrix, determinant, identity, inverse, is_zero_matrix, matpow, matsub
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

Index = Tuple[int, ...]
Coefficient = Union[Scalar, RationalLike]


def _common_order(jets: Iterable[Jet]) -> int:
    return min(j.order for j in jets)


def _merge(left: Index, right: Index) -> Optional[Tuple[int, Index]]:
    """Sign and sorted index of dz_left ^ dz_right; None when the indices overlap."""
    if set(left) & set(right):
        return None
    inversions = sum(1 for a in left for b in right if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(left + right))


def differential_names(names: Sequence[str]) -> List[str]:
    return [f"d{name}" for name in names]


# ============================================================================
# PForm
# ============================================================================

class PForm:
    """A p-form sum_I F_I dz^I with jet coefficients, I strictly increasing."""

    __slots__ = ("field", "n_vars", "degree", "order", "_components")

    def __init__(
        self,
        field: Field,
        n_vars: int,
        degree: int,
        order: int,
        components: Optional[Mapping[Index, Jet]] = None,
    ):
        if degree < 0:
            raise FormDegreeError(f"negative form degree {degree}")
        self.field = field
        self.n_vars = n_vars
        self.degree = degree
        self.order = order
        self._components: Dict[Index, Jet] = {}
        if degree > n_vars:
            return
        for index, jet in (components or {}).items():
            index = tuple(index)
            if len(index) != degree or list(index) != sorted(set(index)):
                raise FormDegreeError(f"index {index} is not a strictly increasing {degree}-tuple")
            if any(not 0 <= i < n_vars for i in index):
                raise AmbientMismatchError(f"index {index} out of range for {n_vars} variables")
            if jet.field != field:
                raise FieldMismatchError("form coefficient over a different field")
            if jet.n_vars != n_vars:
                raise AmbientMismatchError("form coefficient in a different number of variables")
            coeff = jet.truncate(order)
            if coeff.n_terms():
                self._components[index] = coeff

    # ------------------------------------------------------------------ builders

    @classmethod
    def zero(cls, ambient: Ambient, degree: int) -> "PForm":
        return cls(ambient.field, ambient.n_vars, degree, ambient.order)

    @classmethod
    def function(cls, f: Jet) -> "PForm":
        """The 0-form f."""
        return cls(f.field, f.n_vars, 0, f.order, {(): f})

    @classmethod
    def one_form(cls, coefficients: Sequence[Jet]) -> "PForm":
        """sum_i a_i dz_i."""
        first = coefficients[0]
        order = _common_order(coefficients)
        return cls(first.field, first.n_vars, 1, order, {(i,): a for i, a in enumerate(coefficients)})

    @classmethod
    def differential(cls, ambient: Ambient, index: int) -> "PForm":
        return cls(ambient.field, ambient.n_vars, 1, ambient.order, {(index,): ambient.one()})

    @classmethod
    def volume(cls, ambient: Ambient, degree: Optional[int] = None) -> "PForm":
        """dz_1 ^ ... ^ dz_p (p = n by default)."""
        p = ambient.n_vars if degree is None else degree
        return cls(ambient.field, ambient.n_vars, p, ambient.order, {tuple(range(p)): ambient.one()})

    # ------------------------------------------------------------------ access

    @property
    def ambient(self) -> Ambient:
        return Ambient(self.field, self.n_vars, self.order)

    def items(self) -> Iterator[Tuple[Index, Jet]]:
        for index in sorted(self._components):
            yield index, self._components[index]

    def component(self, index: Sequence[int]) -> Jet:
        return self._components.get(tuple(index), Jet.zero(self.field, self.n_vars, self.order))

    def coefficients(self) -> List[Jet]:
        """Coefficients of a 1-form in variable order."""
        if self.degree != 1:
            raise FormDegreeError("coefficients() is defined for 1-forms")
        return [self.component((i,)) for i in range(self.n_vars)]

    def as_function(self) -> Jet:
        if self.degree != 0:
            raise FormDegreeError("not a 0-form")
        return self.component(())

    def is_zero(self, tol: Optional[float] = None) -> bool:
        return all(jet.is_zero(tol) for jet in self._components.values())

    def truncate(self, order: int) -> "PForm":
        order = min(order, self.order)
        return PForm(self.field, self.n_vars, self.degree, order, self._components)

    def coefficient_degrees(self) -> List[int]:
        """Total degrees present among the coefficients."""
        degrees = set()
        for _, jet in self.items():
            degrees.update(k for k in range(jet.order + 1) if jet.bucket(k))
        return sorted(degrees)

    def is_homogeneous(self) -> bool:
        return len(self.coefficient_degrees()) <= 1

    def valuation(self) -> Optional[int]:
        degrees = self.coefficient_degrees()
        return degrees[0] if degrees else None

    def homogeneous_part(self, degree: int) -> "PForm":
        return PForm(
            self.field, self.n_vars, self.degree, self.order,
            {i: jet.homogeneous_part(degree) for i, jet in self.items()},
        )

    # ------------------------------------------------------------------ arithmetic

    def _check(self, other: "PForm") -> None:
        if other.field != self.field:
            raise FieldMismatchError(f"forms over {self.field.spec()} and {other.field.spec()}")
        if other.n_vars != self.n_vars:
            raise AmbientMismatchError(f"forms in {self.n_vars} and {other.n_vars} variables")

    def __add__(self, other: "PForm") -> "PForm":
        self._check(other)
        if other.degree != self.degree:
            raise FormDegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")
        order = min(self.order, other.order)
        out = {i: jet.truncate(order) for i, jet in self.items()}
        for i, jet in other.items():
            jet = jet.truncate(order)
            out[i] = out[i] + jet if i in out else jet
        return PForm(self.field, self.n_vars, self.degree, order, out)

    def __neg__(self) -> "PForm":
        return PForm(self.field, self.n_vars, self.degree, self.order, {i: -j for i, j in self.items()})

    def __sub__(self, other: "PForm") -> "PForm":
        return self + (-other)

    def multiply(self, factor: Union[Jet, Coefficient]) -> "PForm":
        """Multiply every coefficient by a scalar or a function."""
        if isinstance(factor, Jet):
            order = min(self.order, factor.order)
            f = factor.truncate(order)
            return PForm(
                self.field, self.n_vars, self.degree, order,
                {i: jet.truncate(order) * f for i, jet in self.items()},
            )
        return PForm(self.field, self.n_vars, self.degree, self.order, {i: j.scale(factor) for i, j in self.items()})

    __mul__ = multiply
    __rmul__ = multiply

    def equals(self, other: "PForm", tol: Optional[float] = None) -> bool:
        """Componentwise equality up to the smaller effective order."""
        if other.field != self.field or other.n_vars != self.n_vars or other.degree != self.degree:
            return False
        if not self.field.is_exact and tol is None:
            tol = get_config().float_tolerance
        return (self - other).is_zero(tol)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PForm):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    # ------------------------------------------------------------------ text

    def to_dsl(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names) if names is not None else default_names(self.n_vars)
        dnames = differential_names(names)
        parts = []
        for index, jet in self.items():
            if not index:
                parts.append(f"({jet.to_dsl(names)})")
                continue
            basis = dnames[index[0]] if len(index) == 1 else f"wedge({', '.join(dnames[i] for i in index)})"
            coeff = jet.to_dsl(names)
            parts.append(basis if coeff == "1" else f"({coeff})*{basis}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"PForm(p={self.degree}, N={self.order}, {self.to_dsl()})"


# ============================================================================
# VectorField
# ============================================================================

class VectorField:
    """sum_j X_j d/dz_j with jet coefficients."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Jet]):
        if not components:
            raise AmbientMismatchError("a vector field needs at least one component")
        first = components[0]
        if len(components) != first.n_vars:
            raise AmbientMismatchError(f"{len(components)} components for {first.n_vars} variables")
        for c in components:
            if c.field != first.field:
                raise FieldMismatchError("vector field components over different fields")
            if c.n_vars != first.n_vars:
                raise AmbientMismatchError("vector field components in different variables")
        order = _common_order(components)
        self.components: Tuple[Jet, ...] = tuple(c.truncate(order) for c in components)

    @classmethod
    def radial(cls, ambient: Ambient) -> "VectorField":
        return cls(ambient.variables())

    @classmethod
    def linear(cls, ambient: Ambient, matrix: Sequence[Sequence[Coefficient]]) -> "VectorField":
        """X_A(z) = A z."""
        z = ambient.variables()
        comps = []
        for row in matrix:
            acc = ambient.zero()
            for j, a in enumerate(row):
                if not ambient.scalar(a).is_zero():
                    acc = acc + z[j].scale(a)
            comps.append(acc)
        return cls(comps)

    @classmethod
    def zero(cls, ambient: Ambient) -> "VectorField":
        return cls([ambient.zero() for _ in range(ambient.n_vars)])

    @property
    def field(self) -> Field:
        return self.components[0].field

    @property
    def n_vars(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def ambient(self) -> Ambient:
        return Ambient(self.field, self.n_vars, self.order)

    def vanishes_at_origin(self) -> bool:
        return all(c.constant_term().is_zero() for c in self.components)

    def linear_part(self) -> Matrix:
        n = self.n_vars
        return [
            [c.coefficient(tuple(1 if k == j else 0 for k in range(n))) for j in range(n)]
            for c in self.components
        ]

    def is_linear_diagonal(self) -> bool:
        """X = sum w_j z_j d/dz_j exactly."""
        n = self.n_vars
        for j, c in enumerate(self.components):
            exp = tuple(1 if k == j else 0 for k in range(n))
            if any(e != exp for e, _ in c.terms()):
                return False
        return True

    def apply(self, f: Jet) -> Jet:
        """The derivation X(f) = sum X_j df/dz_j.

        When X(0) = 0 the result is exact to the order of f; otherwise it loses one order.
        """
        order = min(self.order, f.order)
        f = f.truncate(order)
        if order == 0:
            return Jet.zero(f.field, f.n_vars, 0)
        keep = order if self.vanishes_at_origin() else order - 1
        total = Jet.zero(f.field, f.n_vars, keep)
        for j, c in enumerate(self.components):
            if c.is_zero():
                continue
            total = total + f.derivative(j).with_order(keep) * c.truncate(keep)
        return total

    def bracket(self, other: "VectorField") -> "VectorField":
        """[X, Y]_i = X(Y_i) - Y(X_i)."""
        return VectorField([self.apply(b) - other.apply(a) for a, b in zip(self.components, other.components)])

    def __add__(self, other: "VectorField") -> "VectorField":
        order = min(self.order, other.order)
        return VectorField([a.truncate(order) + b.truncate(order) for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "VectorField":
        return VectorField([-c for c in self.components])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, c: Union[Jet, Coefficient]) -> "VectorField":
        if isinstance(c, Jet):
            order = min(self.order, c.order)
            return VectorField([x.truncate(order) * c.truncate(order) for x in self.components])
        return VectorField([x.scale(c) for x in self.components])

    def truncate(self, order: int) -> "VectorField":
        return VectorField([c.truncate(order) for c in self.components])

    def is_zero(self, tol: Optional[float] = None) -> bool:
        return all(c.is_zero(tol) for c in self.components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return other.n_vars == self.n_vars and all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None  # type: ignore[assignment]

    def to_dsl(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names) if names is not None else default_names(self.n_vars)
        return "field[" + ", ".join(c.to_dsl(names) for c in self.components) + "]"

    def __repr__(self) -> str:
        return f"VectorField(N={self.order}, {self.to_dsl()})"


# ============================================================================
# DiffeoJet
# ============================================================================

class DiffeoJet:
    """A jet of diffeomorphism germ (C^n, 0) -> (C^n, 0)."""

    __slots__ = ("components", "_linear")

    def __init__(self, components: Sequence[Jet]):
        if not components:
            raise AmbientMismatchError("a diffeomorphism needs at least one component")
        first = components[0]
        if len(components) != first.n_vars:
            raise AmbientMismatchError(f"{len(components)} components for {first.n_vars} variables")
        for c in components:
            if c.field != first.field:
                raise FieldMismatchError("diffeomorphism components over different fields")
            if c.n_vars != first.n_vars:
                raise AmbientMismatchError("diffeomorphism components in different variables")
            if not c.constant_term().is_zero():
                raise JetError("diffeomorphism components must vanish at the origin")
        order = _common_order(components)
        self.components: Tuple[Jet, ...] = tuple(c.truncate(order) for c in components)
        n = len(components)
        self._linear: Matrix = [
            [c.coefficient(tuple(1 if k == j else 0 for k in range(n))) for j in range(n)]
            for c in self.components
        ]
        det = determinant(self._linear)
        if det.is_negligible(get_config().float_tolerance if not first.field.is_exact else 0.0):
            raise SingularLinearPartError("linear part of the diffeomorphism is singular")

    @classmethod
    def identity(cls, ambient: Ambient) -> "DiffeoJet":
        return cls(ambient.variables())

    @classmethod
    def linear(cls, ambient: Ambient, matrix: Sequence[Sequence[Coefficient]]) -> "DiffeoJet":
        return cls(VectorField.linear(ambient, matrix).components)

    @classmethod
    def dilation(cls, ambient: Ambient, rho: Coefficient) -> "DiffeoJet":
        return cls([z.scale(rho) for z in ambient.variables()])

    @property
    def field(self) -> Field:
        return self.components[0].field

    @property
    def n_vars(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def ambient(self) -> Ambient:
        return Ambient(self.field, self.n_vars, self.order)

    def linear_part(self) -> Matrix:
        return [list(row) for row in self._linear]

    def nonlinear_part(self) -> List[Jet]:
        return [c - c.homogeneous_part(1) for c in self.components]

    def is_unipotent(self) -> bool:
        n = self.n_vars
        nil = matsub(self._linear, identity(self.field, n))
        tol = 0.0 if self.field.is_exact else get_config().float_tolerance
        return is_zero_matrix(matpow(nil, n), tol)

    def is_identity(self, tol: Optional[float] = None) -> bool:
        return all((c - z).is_zero(tol) for c, z in zip(self.components, self.ambient.variables()))

    def truncate(self, order: int) -> "DiffeoJet":
        return DiffeoJet([c.truncate(order) for c in self.components])

    def pull(self, f: Jet) -> Jet:
        """f o Phi."""
        order = min(self.order, f.order)
        return jet_compose(f.truncate(order), [c.truncate(order) for c in self.components])

    def compose(self, other: "DiffeoJet") -> "DiffeoJet":
        """self o other."""
        if other.n_vars != self.n_vars or other.field != self.field:
            raise AmbientMismatchError("composing diffeomorphisms of different ambients")
        return DiffeoJet([other.pull(c) for c in self.components])

    def __matmul__(self, other: "DiffeoJet") -> "DiffeoJet":
        return self.compose(other)

    def inverse(self) -> "DiffeoJet":
        """Order-by-order fixed point psi = L^-1 (z - N(psi))."""
        linv = inverse(self._linear)
        z = self.ambient.variables()
        nonlinear = self.nonlinear_part()

        def apply_linv(vec: Sequence[Jet]) -> List[Jet]:
            out = []
            for row in linv:
                acc = self.ambient.zero()
                for a, v in zip(row, vec):
                    if not a.is_zero():
                        acc = acc + v.scale(a)
                out.append(acc)
            return out

        psi = apply_linv(z)
        for _ in range(max(self.order - 1, 0)):
            values = [jet_compose(g, psi) for g in nonlinear]
            psi = apply_linv([zi - vi for zi, vi in zip(z, values)])
        return DiffeoJet(psi)

    def power(self, k: int) -> "DiffeoJet":
        if k < 0:
            return self.inverse().power(-k)
        result, base = DiffeoJet.identity(self.ambient), self
        while k:
            if k & 1:
                result = result.compose(base)
            base = base.compose(base)
            k >>= 1
        return result

    def equals(self, other: "DiffeoJet", tol: Optional[float] = None) -> bool:
        if other.n_vars != self.n_vars or other.field != self.field:
            return False
        order = min(self.order, other.order)
        if not self.field.is_exact and tol is None:
            tol = get_config().float_tolerance
        return all(
            (a.truncate(order) - b.truncate(order)).is_zero(tol)
            for a, b in zip(self.components, other.components)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffeoJet):
            return NotImplemented
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def to_dsl(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names) if names is not None else default_names(self.n_vars)
        return "[" + ", ".join(c.to_dsl(names) for c in self.components) + "]"

    def __repr__(self) -> str:
        return f"DiffeoJet(N={self.order}, {self.to_dsl()})"


# ============================================================================
# Operations
# ============================================================================

def wedge(a: PForm, b: PForm) -> PForm:
    a._check(b)
    degree = a.degree + b.degree
    order = min(a.order, b.order)
    if degree > a.n_vars:
        return PForm(a.field, a.n_vars, degree, order)
    out: Dict[Index, Jet] = {}
    for i, f in a.items():
        for j, g in b.items():
            merged = _merge(i, j)
            if merged is None:
                continue
            sign, index = merged
            term = f.truncate(order) * g.truncate(order)
            if sign < 0:
                term = -term
            out[index] = out[index] + term if index in out else term
    return PForm(a.field, a.n_vars, degree, order, out)


def exterior_d(a: PForm) -> PForm:
    """d a; the result carries order N-1."""
    if a.order == 0:
        raise JetError("cannot differentiate a form of order 0")
    order = a.order - 1
    degree = a.degree + 1
    if degree > a.n_vars:
        return PForm(a.field, a.n_vars, degree, order)
    out: Dict[Index, Jet] = {}
    for index, f in a.items():
        for k in range(a.n_vars):
            if k in index:
                continue
            partial = f.derivative(k)
            if partial.is_zero():
                continue
            sign, merged = _merge((k,), index)  # type: ignore[misc]
            term = partial if sign > 0 else -partial
            out[merged] = out[merged] + term if merged in out else term
    return PForm(a.field, a.n_vars, degree, order, out)


def interior_product(x: VectorField, a: PForm) -> PForm:
    if a.degree == 0:
        raise FormDegreeError("interior product of a 0-form")
    if x.n_vars != a.n_vars or x.field != a.field:
        raise AmbientMismatchError("vector field and form live in different ambients")
    order = min(x.order, a.order)
    out: Dict[Index, Jet] = {}
    for index, f in a.items():
        f = f.truncate(order)
        for s, i in enumerate(index):
            xi = x.components[i]
            if xi.is_zero():
                continue
            rest = index[:s] + index[s + 1:]
            term = xi.truncate(order) * f
            if s % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return PForm(a.field, a.n_vars, a.degree - 1, order, out)


def lie_derivative(x: VectorField, a: PForm) -> PForm:
    """L_X a = i_X da + d i_X a; order N-1."""
    contracted_d = interior_product(x, exterior_d(a))
    if a.degree == 0:
        return contracted_d
    return contracted_d + exterior_d(interior_product(x, a))


def pullback_map(components: Sequence[Jet], a: PForm) -> PForm:
    """Pull a form back along an arbitrary polynomial map given by its components.

    The components live in the target variables; their number must equal a.n_vars.
    """
    if len(components) != a.n_vars:
        raise AmbientMismatchError(f"map has {len(components)} components, form has {a.n_vars} variables")
    first = components[0]
    k = first.n_vars
    order = min([a.order] + [c.order for c in components])
    comps = [c.truncate(order) for c in components]
    if a.degree == 0:
        return PForm(a.field, k, 0, order, {(): jet_compose(a.as_function().truncate(order), comps)})
    reduced = order - 1
    if reduced < 0:
        raise JetError("cannot pull back a form at order 0")
    differentials = [
        PForm(a.field, k, 1, reduced, {(j,): c.derivative(j) for j in range(k)}) for c in comps
    ]
    result = PForm(a.field, k, a.degree, reduced)
    for index, f in a.items():
        coeff = jet_compose(f.truncate(order), comps).truncate(reduced)
        term = PForm.function(coeff)
        for i in index:
            term = wedge(term, differentials[i])
        result = result + term
    return result


def pullback(phi: DiffeoJet, a: PForm) -> PForm:
    """Phi^* a; order N-1 for p >= 1."""
    if phi.n_vars != a.n_vars or phi.field != a.field:
        raise AmbientMismatchError("diffeomorphism and form live in different ambients")
    return pullback_map(phi.components, a)


def pushforward_field(phi: DiffeoJet, x: VectorField) -> VectorField:
    """Phi_* X = (DPhi . X) o Phi^-1."""
    if phi.n_vars != x.n_vars or phi.field != x.field:
        raise AmbientMismatchError("diffeomorphism and field live in different ambients")
    order = min(phi.order, x.order)
    phi = phi.truncate(order)
    keep = order if x.vanishes_at_origin() else order - 1
    pushed = []
    for c in phi.components:
        acc = Jet.zero(phi.field, phi.n_vars, keep)
        for j, xj in enumerate(x.components):
            if not xj.is_zero():
                acc = acc + c.derivative(j).with_order(keep) * xj.truncate(keep)
        pushed.append(acc)
    inv = phi.inverse().truncate(keep)
    return VectorField([jet_compose(p, list(inv.components)) for p in pushed])


# ============================================================================
# Checks and certificates
# ============================================================================

@dataclass(frozen=True)
class IntegrabilityReport:
    integrable: bool
    residuals: Tuple[PForm, ...]
    order: int
    decomposes: Optional[bool] = None


def integrability_check(omega: PForm, decomposition: Optional[Sequence[PForm]] = None) -> IntegrabilityReport:
    """Frobenius test: omega ^ d omega = 0 for 1-forms, d omega_j ^ Omega = 0 for decomposed p-forms."""
    if omega.degree == 1 and decomposition is None:
        residual = wedge(omega, exterior_d(omega))
        report = IntegrabilityReport(residual.is_zero(), (residual,), residual.order)
    else:
        if not decomposition:
            raise FormDegreeError("integrability of a p-form with p > 1 needs its decomposition omega_1..omega_p")
        if len(decomposition) != omega.degree:
            raise FormDegreeError(f"decomposition has {len(decomposition)} factors for a {omega.degree}-form")
        product = decomposition[0]
        for w in decomposition[1:]:
            product = wedge(product, w)
        residuals = tuple(wedge(exterior_d(w), omega) for w in decomposition)
        report = IntegrabilityReport(
            all(r.is_zero() for r in residuals),
            residuals,
            min(r.order for r in residuals),
            decomposes=product.equals(omega),
        )
    logger.info("calculus.integrability", integrable=report.integrable, order=report.order)
    return report


@dataclass(frozen=True)
class QuasiHomogeneity:
    weight: Optional[int]
    conical: bool
    order: int


def quasi_homogeneity_check(eta: PForm, s: VectorField) -> QuasiHomogeneity:
    """Weight k with L_S eta = k eta for a diagonal S with positive integer weights, plus i_S eta = 0."""
    if not s.is_linear_diagonal():
        raise FormDegreeError("quasi-homogeneity needs a linear diagonal vector field")
    weights = []
    for j, w in enumerate(s.linear_part()):
        q = w[j].rational_value()
        if q is None or q.denominator != 1 or q <= 0:
            raise FormDegreeError("quasi-homogeneity needs positive integer weights")
        weights.append(int(q))
    conical = eta.degree == 0 or interior_product(s, eta).is_zero()
    lie = lie_derivative(s, eta)
    order = lie.order
    lowered = eta.truncate(order)
    first = next(((i, jet.lowest_term()) for i, jet in lowered.items() if jet.lowest_term()), None)
    if first is None:
        return QuasiHomogeneity(None, conical, order)
    index, (exp, _) = first
    candidate = sum(w * e for w, e in zip(weights, exp)) + sum(weights[i] for i in index)
    weight = candidate if lie.equals(lowered.multiply(candidate)) else None
    return QuasiHomogeneity(weight, conical, order)


def closedness_residual(omega: PForm, f: Jet) -> PForm:
    """f d omega - df ^ omega; zero exactly when d(omega / f) = 0."""
    d_omega = exterior_d(omega)
    df = exterior_d(PForm.function(f))
    order = min(d_omega.order, df.order)
    return d_omega.truncate(order).multiply(f.truncate(order)) - wedge(df, omega.truncate(order))


@dataclass(frozen=True)
class IntegratingFactorCertificate:
    factor: Jet
    residual: PForm

    @property
    def closed(self) -> bool:
        return self.residual.is_zero()


def homogeneous_integrating_factor(omega: PForm) -> Optional[IntegratingFactorCertificate]:
    """For a homogeneous integrable non-conical 1-form, i_R omega is an integrating factor."""
    if omega.degree != 1:
        raise FormDegreeError("homogeneous integrating factor needs a 1-form")
    if not omega.is_homogeneous():
        raise NonHomogeneousError("form coefficients are not homogeneous of a single degree")
    f = interior_product(VectorField.radial(omega.ambient), omega).as_function()
    if f.is_zero():
        return None
    return IntegratingFactorCertificate(f, closedness_residual(omega, f))


def basis_one_forms(ambient: Ambient) -> List[PForm]:
    return [PForm.differential(ambient, i) for i in range(ambient.n_vars)]


def all_indices(n_vars: int, degree: int) -> List[Index]:
    return list(combinations(range(n_vars), degree))
