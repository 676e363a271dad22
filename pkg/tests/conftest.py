"""
Pytest configuration and fixtures for testing.
"""

import random
from fractions import Fraction
from typing import Callable

import pytest

from src.coeff import GAUSSIAN, CyclotomicField, GaussianRational
from src.jets import Ambient, Jet, monomials_up_to


@pytest.fixture
def rng() -> random.Random:
    """Seeded generator for the property tests."""
    return random.Random(20241018)


@pytest.fixture
def cyclo3() -> CyclotomicField:
    return CyclotomicField(3)


@pytest.fixture
def plane() -> Ambient:
    """Q(i)-jets in two variables to order 6."""
    return Ambient(GAUSSIAN, 2, 6)


@pytest.fixture
def space() -> Ambient:
    """Q(i)-jets in three variables to order 5."""
    return Ambient(GAUSSIAN, 3, 5)


def random_rational(rng: random.Random, height: int = 5) -> Fraction:
    return Fraction(rng.randint(-height, height), rng.randint(1, height))


def random_gaussian(rng: random.Random) -> GaussianRational:
    return GaussianRational(random_rational(rng), random_rational(rng) if rng.random() < 0.5 else 0)


def random_jet(
    rng: random.Random, ambient: Ambient, min_degree: int = 0, max_degree: int = 3, density: float = 0.5
) -> Jet:
    terms = {
        exp: random_gaussian(rng)
        for exp in monomials_up_to(ambient.n_vars, min(max_degree, ambient.order), min_degree)
        if rng.random() < density
    }
    return ambient.jet(terms)


@pytest.fixture
def jet_factory(rng: random.Random) -> Callable[..., Jet]:
    """Random Q(i)-jets: jet_factory(ambient, min_degree=0, max_degree=3)."""

    def make(ambient: Ambient, min_degree: int = 0, max_degree: int = 3, density: float = 0.5) -> Jet:
        return random_jet(rng, ambient, min_degree, max_degree, density)

    return make
