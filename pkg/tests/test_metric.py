import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cliffobs.errors import DimensionError, GradeError, MetricError, ModeError
from cliffobs.exterior import (
    Multivector,
    blade,
    blades_of_grade,
    clifford_euclidean,
    euclidean_inner,
    grade_project,
    hodge_star,
    pseudoscalar,
    wedge,
)
from cliffobs.metric import (
    GramMetric,
    LinearMap,
    check_pullback_naturality,
    clifford_metric,
    clifford_scalar_part,
    hodge_star_metric,
    metric_inner,
    metric_norm,
    pullback_form,
    pullback_metric,
    scaled_clifford,
    scaled_clifford_sum,
)

from conftest import random_float_mv, random_rational_mv


def random_spd(rng, n, exact=True):
    A = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]
    G = [[sum(A[i][k] * A[j][k] for k in range(n)) + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    return GramMetric(G, True) if exact else GramMetric([[float(x) for x in r] for r in G], False)


def random_invertible(rng, n, exact=True):
    while True:
        rows = [[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)] for _ in range(n)]
        T = LinearMap(rows, True)
        if T.det() != 0:
            return T if exact else T.to_float()


def diag(*values):
    n = len(values)
    return GramMetric([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])


# -- metric validation -------------------------------------------------------

def test_rejects_bad_metrics():
    with pytest.raises(MetricError):
        GramMetric([[1, 2], [0, 1]])
    with pytest.raises(MetricError):
        GramMetric([[1, 2], [2, 1]])
    with pytest.raises(MetricError):
        GramMetric([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DimensionError):
        GramMetric([[1, 0]])
    with pytest.raises(MetricError):
        diag(1, 1).conformal(0)


def test_json_round_trip(rng):
    g = random_spd(rng, 4)
    assert GramMetric.from_json(g.to_json()) == g


# -- inner products ---------------------------------------------------------

def test_inner_diagonal_examples():
    g = diag(4, 1, 1, 1)
    assert metric_inner(g, blade(4, 1), blade(4, 1)) == 4
    assert metric_inner(g, blade(4, 1, 2), blade(4, 1, 2)) == 4


def test_identity_agrees_with_euclidean(rng):
    g = GramMetric.identity(5)
    for _ in range(1000):
        a, b = random_rational_mv(rng, 5, 5), random_rational_mv(rng, 5, 5)
        assert metric_inner(g, a, b) == euclidean_inner(a, b)
        if _ % 10 == 0:
            assert clifford_metric(g, a, b) == clifford_euclidean(a, b)


def test_inner_is_symmetric_and_positive(rng):
    for _ in range(50):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        a, b = random_rational_mv(rng, n), random_rational_mv(rng, n)
        assert metric_inner(g, a, b) == metric_inner(g, b, a)
        if a:
            assert metric_inner(g, a, a) > 0


# -- Clifford product -------------------------------------------------------

def test_vector_square_is_norm(rng):
    for _ in range(100):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        v = random_rational_mv(rng, n, 3, grade=1)
        assert clifford_metric(g, v, v) == Multivector(n, {0: metric_inner(g, v, v)})


def test_vector_anticommutator(rng):
    for _ in range(100):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        v, w = random_rational_mv(rng, n, 3, grade=1), random_rational_mv(rng, n, 3, grade=1)
        lhs = clifford_metric(g, v, w) + clifford_metric(g, w, v)
        assert lhs == Multivector(n, {0: 2 * metric_inner(g, v, w)})


def test_metric_clifford_associative_and_wedge_top_grade(rng):
    for _ in range(60):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        a, b, c = (random_rational_mv(rng, n, 3) for _ in range(3))
        assert clifford_metric(g, clifford_metric(g, a, b), c) == clifford_metric(g, a, clifford_metric(g, b, c))
        l, m = rng.randint(0, n), rng.randint(0, n)
        if l + m <= n:
            x, y = random_rational_mv(rng, n, 3, grade=l), random_rational_mv(rng, n, 3, grade=m)
            assert grade_project(clifford_metric(g, x, y), l + m) == wedge(x, y)


def test_clifford_conformal_law(rng):
    for _ in range(100):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        rho = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        l, m = rng.randint(0, n), rng.randint(0, n)
        a, b = random_rational_mv(rng, n, 3, grade=l), random_rational_mv(rng, n, 3, grade=m)
        lhs = clifford_metric(g.conformal(rho), a, b)
        rhs = clifford_metric(g, a, b)
        for k in range(n + 1):
            assert grade_project(lhs, k) == grade_project(rhs, k).scale(rho ** (k - l - m))


def test_mode_errors():
    g = GramMetric.identity(3)
    with pytest.raises(ModeError):
        clifford_metric(g, blade(3, 1), blade(3, 1).to_float())
    with pytest.raises(ModeError):
        clifford_metric(g.to_float(), blade(3, 1), blade(3, 2))
    with pytest.raises(ModeError):
        hodge_star_metric(g, blade(3, 1))


# -- Hodge star -------------------------------------------------------------

def test_hodge_identity_metric():
    g = GramMetric.identity(4, exact=False)
    assert hodge_star_metric(g, blade(4, 1, 2).to_float()).allclose(blade(4, 3, 4).to_float(), atol=1e-12)


def test_hodge_defining_relation_and_conformal_law():
    rnd = random.Random(3)
    for _ in range(100):
        n = rnd.randint(2, 5)
        g = random_spd(rnd, n, exact=False)
        k = rnd.randint(0, n)
        a, b = random_float_mv(rnd, n, k), random_float_mv(rnd, n, k)
        vol = pseudoscalar(n).to_float().scale(1 / math.sqrt(g.det()))
        lhs = wedge(a, hodge_star_metric(g, b))
        assert lhs.allclose(vol.scale(metric_inner(g, a, b)), rtol=1e-10, atol=1e-10)
        rho = rnd.uniform(0.2, 5)
        scaled = hodge_star_metric(g.conformal(rho), a)
        assert scaled.allclose(hodge_star_metric(g, a).scale(rho ** (n - 2 * k)), rtol=1e-10, atol=1e-12)


def test_hodge_matches_euclidean_on_identity(rng):
    g = GramMetric.identity(5, exact=False)
    for _ in range(50):
        a = random_rational_mv(rng, 5, 4)
        assert hodge_star_metric(g, a.to_float()).allclose(hodge_star(a).to_float(), atol=1e-12)


# -- scaled product ---------------------------------------------------------

def test_scaled_examples():
    g = GramMetric.identity(4)
    e1, e2 = blade(4, 1), blade(4, 2)
    assert scaled_clifford(g, e1, e2) == Multivector(4, {0: 1.0, 0b11: 1.0})
    assert scaled_clifford(g, e1, e1) == Multivector(4, {0: 1.0})
    assert clifford_scalar_part(g, e1, e1) == 1
    assert scaled_clifford(g, Multivector(4, {0: 2}), Multivector(4, {0: 3})) == Multivector(4, {0: 6.0})


def test_scaled_needs_homogeneous_inputs():
    g = GramMetric.identity(3)
    with pytest.raises(GradeError):
        scaled_clifford(g, blade(3, 1) + blade(3, 1, 2), blade(3, 2))
    with pytest.raises(GradeError):
        scaled_clifford(g, Multivector(3), blade(3, 2))
    assert scaled_clifford(g, Multivector(3), blade(3, 2), grades=(1, 1)) == Multivector(3, {0: 1.0})


def test_scaled_sum_splits_grades():
    g = GramMetric.identity(3)
    a = blade(3, 1) + blade(3, 1, 2)
    b = blade(3, 2)
    expected = scaled_clifford(g, blade(3, 1), b) + scaled_clifford(g, blade(3, 1, 2), b)
    assert scaled_clifford_sum(g, a, b).allclose(expected)


def test_scaled_product_conformally_invariant():
    rnd = random.Random(11)
    for _ in range(300):
        n = rnd.randint(2, 5)
        g = random_spd(rnd, n, exact=False)
        l, m = rnd.randint(1, n), rnd.randint(1, n)
        a, b = random_float_mv(rnd, n, l), random_float_mv(rnd, n, m)
        rho = rnd.uniform(0.1, 10)
        assert scaled_clifford(g.conformal(rho), a, b).allclose(scaled_clifford(g, a, b), rtol=1e-9, atol=1e-9)


def test_scaled_product_exact_inputs_detect_cancellation():
    g = GramMetric.identity(4)
    # (e1 + e2)(e1 - e2) = -2 e12 exactly, no vector part
    out = scaled_clifford(g, blade(4, 1) + blade(4, 2), blade(4, 1) - blade(4, 2))
    assert out.grades() == {0, 2}


# -- pullbacks ----------------------------------------------------------------

def test_pullback_examples(rng):
    n = 4
    a = random_rational_mv(rng, n, 5, grade=2)
    assert pullback_form(LinearMap.identity(n), a) == a
    two = LinearMap([[2 if i == j else 0 for j in range(n)] for i in range(n)])
    for k in range(n + 1):
        for bits in blades_of_grade(n, k):
            assert pullback_form(two, Multivector(n, {bits: 1})) == Multivector(n, {bits: 2 ** k})
    T = random_invertible(rng, n)
    assert pullback_form(T, pseudoscalar(n)) == pseudoscalar(n).scale(T.det())
    g = random_spd(rng, n)
    assert pullback_metric(LinearMap.identity(n), g) == g


def test_pullback_of_scaling_is_isometry():
    g = diag(3, 1, 2)
    lam = LinearMap([[Fraction(5, 2) if i == j else 0 for j in range(3)] for i in range(3)])
    e1 = blade(3, 1)
    pg = pullback_metric(lam, g)
    assert metric_inner(pg, pullback_form(lam, e1), pullback_form(lam, e1)) == metric_inner(g, e1, e1)


def test_pullback_functorial(rng):
    for _ in range(100):
        n = rng.randint(2, 5)
        S, T = random_invertible(rng, n), random_invertible(rng, n)
        a, b = random_rational_mv(rng, n), random_rational_mv(rng, n)
        assert pullback_form(S, pullback_form(T, a)) == pullback_form(T @ S, a)
        assert pullback_form(T, wedge(a, b)) == wedge(pullback_form(T, a), pullback_form(T, b))


def test_pullback_metric_is_isometry(rng):
    for _ in range(50):
        n = rng.randint(2, 4)
        T, g = random_invertible(rng, n), random_spd(rng, n)
        a, b = random_rational_mv(rng, n), random_rational_mv(rng, n)
        pg = pullback_metric(T, g)
        assert metric_inner(pg, pullback_form(T, a), pullback_form(T, b)) == metric_inner(g, a, b)


def test_pullback_metric_rejects_singular():
    with pytest.raises(MetricError):
        pullback_metric(LinearMap([[1, 1], [1, 1]]), GramMetric.identity(2))


def test_naturality_permutation_exact():
    P = LinearMap([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    g = GramMetric.identity(3)
    assert check_pullback_naturality(P, g, blade(3, 1) + 2 * blade(3, 2), blade(3, 2, 3))


def test_naturality_random_float():
    rnd = random.Random(7)
    for _ in range(200):
        n = rnd.randint(2, 5)
        T = random_invertible(rnd, n, exact=False)
        g = random_spd(rnd, n, exact=False)
        l, m = rnd.randint(1, n), rnd.randint(1, n)
        assert check_pullback_naturality(T, g, random_float_mv(rnd, n, l), random_float_mv(rnd, n, m))


def test_float_clifford_matches_exact(rng):
    for _ in range(30):
        n = rng.randint(2, 5)
        g = random_spd(rng, n)
        a, b = random_rational_mv(rng, n), random_rational_mv(rng, n)
        exact = clifford_metric(g, a, b).to_float()
        approx = clifford_metric(g.to_float(), a.to_float(), b.to_float())
        scale = max([abs(v) for _, v in exact] + [1.0])
        assert approx.allclose(exact, rtol=1e-9, atol=1e-9 * scale)
        assert metric_norm(g, a) == pytest.approx(math.sqrt(float(metric_inner(g, a, a))))
        assert np.isfinite(metric_norm(g.to_float(), a.to_float()))
