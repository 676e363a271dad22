"""
Holonomy of the invariant leaf {y = 0} of the foliation F(z, y) d/dz + y G(z, y) d/dy.

Along a loop gamma in the leaf the transversal coordinate obeys

    dy/ds = y * G(gamma(s), y) / F(gamma(s), y) * gamma'(s),

which is integrated with scipy's adaptive Runge-Kutta for a geometric grid of
initial values; the holonomy jet is then fitted by least squares. The multiplier
is computed independently as exp of the contour integral of G(z, 0) / F(z, 0).

Composition convention: h_{g1 . g2} = h_{g2} o h_{g1} (g1 traversed first).
"""

from __future__ import annotations

import cmath
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from src.coeff import F64
from src.config import get_config
from src.errors import HolonomyError, TangencyUndefinedError
from src.jets import Jet, jet_compose
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

CLOSURE_TOLERANCE = 1e-12
PATH_SAMPLES = 256


# ============================================================================
# Paths
# ============================================================================

class Segment(ABC):
    """A smooth piece of path parametrized by s in [0, 1]."""

    @abstractmethod
    def point(self, s: float) -> complex:
        ...

    @abstractmethod
    def velocity(self, s: float) -> complex:
        ...

    @abstractmethod
    def reversed(self) -> "Segment":
        ...

    @property
    def start(self) -> complex:
        return self.point(0.0)

    @property
    def end(self) -> complex:
        return self.point(1.0)


@dataclass(frozen=True)
class Line(Segment):
    a: complex
    b: complex

    def point(self, s: float) -> complex:
        return self.a + (self.b - self.a) * s

    def velocity(self, s: float) -> complex:
        return self.b - self.a

    def reversed(self) -> "Line":
        return Line(self.b, self.a)


@dataclass(frozen=True)
class Arc(Segment):
    """center + radius * exp(i (start_angle + 2 pi turns s))."""

    center: complex
    radius: float
    start_angle: float
    turns: float

    def point(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * (self.start_angle + 2 * math.pi * self.turns * s))

    def velocity(self, s: float) -> complex:
        return 2j * math.pi * self.turns * (self.point(s) - self.center)

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.start_angle + 2 * math.pi * self.turns, -self.turns)


@dataclass(frozen=True)
class Loop:
    """Closed piecewise-smooth path based at `base`; an empty segment list is the constant loop."""

    base: complex
    segments: Tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        cursor = self.base
        for seg in self.segments:
            if abs(seg.start - cursor) > CLOSURE_TOLERANCE * max(1.0, abs(cursor)):
                raise HolonomyError(f"path is discontinuous at {cursor}")
            cursor = seg.end
        if abs(cursor - self.base) > CLOSURE_TOLERANCE * max(1.0, abs(self.base)):
            raise HolonomyError(f"loop does not close: ends at {cursor}, based at {self.base}")

    @classmethod
    def constant(cls, base: complex) -> "Loop":
        return cls(complex(base))

    @classmethod
    def circle(cls, center: complex, base: complex, winding: int = 1) -> "Loop":
        """The circle around `center` through `base`, traversed `winding` times (negative = clockwise)."""
        offset = complex(base) - complex(center)
        if offset == 0:
            raise HolonomyError("base point coincides with the circle center")
        if winding == 0:
            return cls.constant(base)
        arc = Arc(complex(center), abs(offset), cmath.phase(offset), float(winding))
        return cls(complex(base), (arc,))

    def then(self, other: "Loop") -> "Loop":
        """Concatenation: self first, then other."""
        if abs(self.base - other.base) > CLOSURE_TOLERANCE * max(1.0, abs(self.base)):
            raise HolonomyError("loops have different base points")
        return Loop(self.base, self.segments + other.segments)

    def __mul__(self, other: "Loop") -> "Loop":
        return self.then(other)

    def inverse(self) -> "Loop":
        return Loop(self.base, tuple(seg.reversed() for seg in reversed(self.segments)))

    def is_constant(self) -> bool:
        return not self.segments

    def sample(self, per_segment: int = PATH_SAMPLES) -> np.ndarray:
        points = [self.base]
        for seg in self.segments:
            points.extend(seg.point(s) for s in np.linspace(0.0, 1.0, per_segment)[1:])
        return np.asarray(points, dtype=complex)


def commutator(a: Loop, b: Loop) -> Loop:
    """a . b . a^-1 . b^-1."""
    return a.then(b).then(a.inverse()).then(b.inverse())


# ============================================================================
# Foliation data
# ============================================================================

def to_float_jet(jet: Jet) -> Jet:
    """The same jet with coefficients mapped to complex floats."""
    if not jet.field.is_exact:
        return jet
    return Jet(F64, jet.n_vars, jet.order, {e: c.to_complex() for e, c in jet.terms()})


@dataclass(frozen=True)
class HolonomyField:
    """Polynomials G(z, y) and F(z, y) of the field F d/dz + y G d/dy."""

    g: Jet
    f: Jet
    _g_terms: Tuple[Tuple[int, int, complex], ...] = dc_field(init=False, repr=False, compare=False)
    _f_terms: Tuple[Tuple[int, int, complex], ...] = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name, jet in (("G", self.g), ("F", self.f)):
            if jet.n_vars != 2:
                raise HolonomyError(f"{name} must be a polynomial in (z, y)")
        object.__setattr__(self, "_g_terms", _terms(self.g))
        object.__setattr__(self, "_f_terms", _terms(self.f))

    def rate(self, z: complex, y: np.ndarray) -> np.ndarray:
        """G(z, y) / F(z, y), vectorized over y."""
        return _evaluate(self._g_terms, z, y) / _evaluate(self._f_terms, z, y)

    def leaf_rate(self, z: complex) -> complex:
        """G(z, 0) / F(z, 0)."""
        zero = np.zeros(1, dtype=complex)
        return complex(self.rate(z, zero)[0])

    def f_on_leaf(self, z: complex) -> complex:
        return complex(_evaluate(self._f_terms, z, np.zeros(1, dtype=complex))[0])


def _terms(jet: Jet) -> Tuple[Tuple[int, int, complex], ...]:
    return tuple((e[0], e[1], c.to_complex()) for e, c in jet.terms())


def _evaluate(terms: Sequence[Tuple[int, int, complex]], z: complex, y: np.ndarray) -> np.ndarray:
    total = np.zeros_like(y, dtype=complex)
    for i, j, c in terms:
        total = total + c * z**i * y**j
    return total


# ============================================================================
# Holonomy maps
# ============================================================================

@dataclass(frozen=True)
class HolonomyMap:
    multiplier: complex
    jet: Jet
    fitted_multiplier: complex
    diagnostics: Dict[str, float] = dc_field(default_factory=dict)

    def coefficients(self) -> List[complex]:
        return [self.jet.coefficient((k,)).to_complex() for k in range(self.jet.order + 1)]

    def evaluate(self, x: complex) -> complex:
        return complex(self.jet.evaluate([complex(x)]))  # type: ignore[arg-type]


def _check_path(holo: HolonomyField, loop: Loop) -> float:
    values = np.array([abs(holo.f_on_leaf(z)) for z in loop.sample()])
    smallest = float(values.min()) if values.size else math.inf
    if smallest <= get_config().float_tolerance:
        raise HolonomyError(f"F vanishes along the path (min |F(gamma, 0)| = {smallest:.3e})")
    return smallest


def transport(holo: HolonomyField, loop: Loop, initial: Sequence[complex]) -> Tuple[np.ndarray, Dict[str, float]]:
    """Values after transport along the loop of the given initial transversal coordinates."""
    config = get_config()
    state = np.asarray(initial, dtype=complex)
    scale = np.maximum(np.abs(state), config.float_tolerance)
    stats = {"nfev": 0.0, "steps": 0.0}
    for index, seg in enumerate(loop.segments):

        def rhs(s: float, y: np.ndarray, seg: Segment = seg) -> np.ndarray:
            return y * holo.rate(seg.point(s), y) * seg.velocity(s)

        sol = solve_ivp(
            rhs,
            (0.0, 1.0),
            state,
            method="RK45",
            rtol=config.holonomy_rtol,
            atol=config.holonomy_atol * scale,
        )
        if not sol.success:
            raise HolonomyError(f"integration failed on segment {index}: {sol.message}")
        steps = len(sol.t) - 1
        if steps > config.holonomy_max_steps:
            raise HolonomyError(f"segment {index} needed {steps} steps (budget {config.holonomy_max_steps})")
        stats["nfev"] += sol.nfev
        stats["steps"] += steps
        state = sol.y[:, -1]
    return state, stats


def fitting_grid() -> np.ndarray:
    config = get_config()
    return np.array(
        [config.holonomy_grid_largest * config.holonomy_grid_ratio**j for j in range(config.holonomy_grid_points)],
        dtype=complex,
    )


def multiplier_integral(holo: HolonomyField, loop: Loop) -> complex:
    """exp of the contour integral of G(z, 0)/F(z, 0) along the loop."""
    total = 0j
    for seg in loop.segments:

        def integrand(s: float, seg: Segment = seg) -> complex:
            return holo.leaf_rate(seg.point(s)) * seg.velocity(s)

        re_part = quad(lambda s: integrand(s).real, 0.0, 1.0, limit=200, epsabs=1e-14, epsrel=1e-13)[0]
        im_part = quad(lambda s: integrand(s).imag, 0.0, 1.0, limit=200, epsabs=1e-14, epsrel=1e-13)[0]
        total += complex(re_part, im_part)
    return cmath.exp(total)


def _fit_jet(grid: np.ndarray, values: np.ndarray, order: int) -> Tuple[np.ndarray, float]:
    """Least-squares coefficients a_1..a_order of values = sum a_k grid^k."""
    largest = float(np.max(np.abs(grid)))
    scaled = grid / largest
    vander = np.stack([scaled**k for k in range(1, order + 1)], axis=1)
    coeffs, _, _, _ = np.linalg.lstsq(vander, values, rcond=None)
    residual = float(np.max(np.abs(vander @ coeffs - values))) if len(values) else 0.0
    return coeffs / largest ** np.arange(1, order + 1), residual


def holonomy_map(holo: HolonomyField, loop: Loop, order: Optional[int] = None) -> HolonomyMap:
    """Holonomy of the leaf y = 0 along `loop`, fitted to a jet of the given order."""
    config = get_config()
    order = config.holonomy_jet_order if order is None else order
    if loop.is_constant():
        identity = Jet.variable(F64, 1, order, 0)
        return HolonomyMap(1 + 0j, identity, 1 + 0j, {"nfev": 0.0, "steps": 0.0, "fit_residual": 0.0})
    smallest_f = _check_path(holo, loop)
    grid = fitting_grid()
    values, stats = transport(holo, loop, grid)
    if not np.all(np.isfinite(values)):
        raise HolonomyError("transport diverged")
    coeffs, residual = _fit_jet(grid, values, order)
    jet = Jet(F64, 1, order, {(k + 1,): complex(c) for k, c in enumerate(coeffs)})
    multiplier = multiplier_integral(holo, loop)
    fitted = complex(coeffs[0])
    diagnostics = dict(stats)
    diagnostics.update(
        fit_residual=residual,
        multiplier_discrepancy=abs(fitted - multiplier),
        min_abs_f=smallest_f,
    )
    logger.info(
        "holonomy.map",
        multiplier=str(multiplier),
        discrepancy=diagnostics["multiplier_discrepancy"],
        nfev=int(stats["nfev"]),
    )
    return HolonomyMap(multiplier, jet, fitted, diagnostics)


def compose_holonomy(first: HolonomyMap, second: HolonomyMap) -> HolonomyMap:
    """Holonomy of `first`'s loop followed by `second`'s: second o first."""
    order = min(first.jet.order, second.jet.order)
    jet = jet_compose(second.jet.truncate(order), [first.jet.truncate(order)])
    diagnostics = {
        key: first.diagnostics.get(key, 0.0) + second.diagnostics.get(key, 0.0) for key in ("nfev", "steps")
    }
    return HolonomyMap(
        first.multiplier * second.multiplier,
        jet,
        first.fitted_multiplier * second.fitted_multiplier,
        diagnostics,
    )


def tangency_order(h: HolonomyMap, tol: float = 1e-6) -> Optional[int]:
    """Least k >= 2 with |a_k| > tol, for h tangent to the identity; None if h is the identity to its order."""
    if abs(h.multiplier - 1) > tol:
        raise TangencyUndefinedError(f"multiplier {h.multiplier} is not 1 within {tol}")
    for k, a in enumerate(h.coefficients()):
        if k >= 2 and abs(a) > tol:
            return k
    return None


@dataclass(frozen=True)
class RamificationCheck:
    r: int
    holds: bool
    offending: Tuple[int, ...]


def ramification_check(h: HolonomyMap, r: int, tol: float = 1e-6) -> RamificationCheck:
    """Whether h(x) = x * g(x^r): every coefficient a_k with k != 1 mod r is below tol."""
    if r < 1:
        raise HolonomyError("ramification index must be positive")
    offending = tuple(
        k for k, a in enumerate(h.coefficients()) if k >= 1 and (k - 1) % r and abs(a) > tol
    )
    return RamificationCheck(r, not offending, offending)
