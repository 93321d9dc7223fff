import random
from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from cliffobs.exterior import Multivector, blades_of_grade

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def multivectors(draw, dim=None, grade=None, max_terms=5, min_dim=2, max_dim=6):
    n = dim if dim is not None else draw(st.integers(min_dim, max_dim))
    if grade is None:
        pool = list(range(1 << n))
    else:
        pool = list(blades_of_grade(n, grade))
    bits = draw(st.lists(st.sampled_from(pool), max_size=max_terms, unique=True))
    coeffs = {b: draw(small_fractions) for b in bits}
    return Multivector(n, coeffs, exact=True)


@st.composite
def same_dim(draw, count=2, **kw):
    n = draw(st.integers(kw.pop("min_dim", 2), kw.pop("max_dim", 6)))
    return [draw(multivectors(dim=n, **kw)) for _ in range(count)]


def random_rational_mv(rng: random.Random, n: int, terms: int = 4, grade=None) -> Multivector:
    pool = list(range(1 << n)) if grade is None else list(blades_of_grade(n, grade))
    picks = rng.sample(pool, min(terms, len(pool)))
    return Multivector(n, {b: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for b in picks}, exact=True)


def random_float_mv(rng, n: int, grade: int) -> Multivector:
    values = [rng.uniform(-1, 1) for _ in blades_of_grade(n, grade)]
    return Multivector.from_vector(n, grade, values, exact=False)


@pytest.fixture
def rng():
    return random.Random(1234)
