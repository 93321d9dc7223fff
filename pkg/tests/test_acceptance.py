"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from cliffobs.cli import main
from cliffobs.exterior import (
    blade,
    clifford_euclidean,
    clifford_grade_bound_check,
    grade_project,
    wedge,
)
from cliffobs.metric import (
    GramMetric,
    LinearMap,
    check_pullback_naturality,
    clifford_metric,
    scaled_clifford,
)
from cliffobs.obstructions import build_eigen_split, check_p_closure, hodge_is_left_clifford, p_map, p_table
from cliffobs.ring import make_connected_sum, make_product, make_sphere, make_torus, signature
from cliffobs.search import EmbeddingCandidate, SearchFailure, search

from conftest import random_float_mv, random_rational_mv


@contextmanager
def criterion(capsys, number, title, limit):
    start = time.perf_counter()
    ok = False
    notes: list[str] = []
    try:
        yield notes.append
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        detail = " ".join(notes)
        within = elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] criterion {number}: {title} ({elapsed:.2f}s, limit {limit}s){' ' + detail if detail else ''}")
    assert within, f"criterion {number} took {elapsed:.2f}s, limit {limit}s"


def sparse_rational(rnd, n):
    return random_rational_mv(rnd, n, rnd.randint(1, 4))


def homogeneous_rational(rnd, n, k):
    return random_rational_mv(rnd, n, rnd.randint(1, 3), grade=k)


def test_criterion_1_clifford_axioms(capsys):
    with criterion(capsys, 1, "Clifford axioms, 10^4 random rational multivectors, n <= 6", 30) as note:
        rnd = random.Random(1)
        checked = 0
        for n in range(2, 7):
            for i in range(1, n + 1):
                assert blade(n, i) * blade(n, i) == 1
                for j in range(1, n + 1):
                    if i != j:
                        assert blade(n, i) * blade(n, j) == -(blade(n, j) * blade(n, i))
        while checked < 10_000:
            n = rnd.randint(2, 6)
            a, b, c = (sparse_rational(rnd, n) for _ in range(3))
            assert clifford_euclidean(clifford_euclidean(a, b), c) == clifford_euclidean(a, clifford_euclidean(b, c))
            l = rnd.randint(0, n)
            m = rnd.randint(0, n - l)
            x, y = homogeneous_rational(rnd, n, l), homogeneous_rational(rnd, n, m)
            assert grade_project(clifford_euclidean(x, y), l + m) == wedge(x, y)
            checked += 5
        note(f"[{checked} multivectors]")


def test_criterion_2_holder_bound(capsys):
    with criterion(capsys, 2, "Hoelder bound |<ab>_k| <= 2^n |a||b|, 10^4 random pairs, exact", 10):
        rnd = random.Random(2)
        for _ in range(10_000):
            n = rnd.randint(2, 6)
            a, b = sparse_rational(rnd, n), sparse_rational(rnd, n)
            k = rnd.randint(0, n)
            assert clifford_grade_bound_check(a, b, k)


def test_criterion_3_p_table(capsys):
    with criterion(capsys, 3, "P-table on the self-dual and anti-self-dual triples, exact", 1):
        split = build_eigen_split(1)
        cross = [[(0, 0, 0), (0, 0, 1), (0, -1, 0)],
                 [(0, 0, -1), (0, 0, 0), (1, 0, 0)],
                 [(0, 1, 0), (-1, 0, 0), (0, 0, 0)]]
        expected = [[tuple(Fraction(c) for c in cell) for cell in row] for row in cross]
        assert p_table(split.plus) == expected
        assert p_table(split.minus) == expected
        f1, f2, f3 = split.plus
        assert p_map(1, f1, f2) == f3


def test_criterion_4_hodge_as_left_clifford(capsys):
    with criterion(capsys, 4, "Hodge star equals left Clifford multiplication by +-e_1..n, m = 1, 2", 5):
        assert hodge_is_left_clifford(1)
        assert hodge_is_left_clifford(2)


def test_criterion_5_p_closure(capsys):
    with criterion(capsys, 5, "P-closure of both eigenspaces, exhaustive, m = 1, 2", 30):
        assert check_p_closure(1)
        assert check_p_closure(2)


def _spd(rnd, n, exact):
    A = [[Fraction(rnd.randint(-3, 3), rnd.randint(1, 3)) for _ in range(n)] for _ in range(n)]
    G = [[sum(A[i][k] * A[j][k] for k in range(n)) + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    return GramMetric(G if exact else [[float(x) for x in r] for r in G], exact)


def _invertible(rnd, n):
    while True:
        T = LinearMap([[Fraction(rnd.randint(-3, 3), rnd.randint(1, 2)) for _ in range(n)] for _ in range(n)])
        if T.det() != 0:
            return T.to_float()


def test_criterion_6_conformal_laws(capsys):
    with criterion(capsys, 6, "conformal Clifford law (exact), scaled-product invariance and pullback naturality (1e-9)", 60):
        rnd = random.Random(6)
        for _ in range(300):
            n = rnd.randint(2, 5)
            g = _spd(rnd, n, True)
            rho = Fraction(rnd.randint(1, 12), rnd.randint(1, 12))
            l, m = rnd.randint(0, n), rnd.randint(0, n)
            a, b = homogeneous_rational(rnd, n, l), homogeneous_rational(rnd, n, m)
            lhs, rhs = clifford_metric(g.conformal(rho), a, b), clifford_metric(g, a, b)
            for k in range(n + 1):
                assert grade_project(lhs, k) == grade_project(rhs, k).scale(rho ** (k - l - m))
        for _ in range(1000):
            n = rnd.randint(2, 5)
            g = _spd(rnd, n, False)
            l, m = rnd.randint(1, n), rnd.randint(1, n)
            a, b = random_float_mv(rnd, n, l), random_float_mv(rnd, n, m)
            rho = rnd.uniform(0.1, 10)
            assert scaled_clifford(g.conformal(rho), a, b).allclose(scaled_clifford(g, a, b), rtol=1e-9, atol=1e-9)
            assert check_pullback_naturality(_invertible(rnd, n), g, a, b, rtol=1e-9)


def test_criterion_7_signature_oracle(capsys):
    with criterion(capsys, 7, "exact signature matches eigenvalue-sign oracle, 50 random 6x6", 5):
        rnd = random.Random(7)
        for _ in range(50):
            Q = [[Fraction(0)] * 6 for _ in range(6)]
            for i in range(6):
                for j in range(i, 6):
                    Q[i][j] = Q[j][i] = Fraction(rnd.randint(-9, 9), rnd.randint(1, 6))
            ev = np.linalg.eigvalsh(np.array(Q, dtype=float))
            tol = 1e-9 * max(1.0, float(abs(ev).max()))
            oracle = (int((ev > tol).sum()), int((ev < -tol).sum()), int((abs(ev) <= tol).sum()))
            assert tuple(signature(Q)) == oracle


HEADLINES = [
    ("connsum(prod(S2,S2),prod(S2,S2))", 2, "dim4_clifford", (2, 2)),
    ("S4", 0, "dim4_clifford", (0, 0)),
    ("S2xS2", 0, "dim4_clifford", (1, 1)),
    ("T4", 0, "dim4_clifford", (3, 3)),
    ("connsum^15(prod(S2,S4))", 2, "wedge_surjectivity", None),
    ("connsum^3(prod(S1,S3))", 2, "b1", None),
    ("connsum^4(CP2)", 2, "middle_split", None),
]


def test_criterion_8_headline_verdicts(capsys):
    with criterion(capsys, 8, "headline verdicts, one CLI invocation each", 5):
        for expr, code, check_id, pm in HEADLINES:
            assert main(["run", expr, "--format", "json"]) == code, expr
            report = json.loads(capsys.readouterr().out)
            checks = {c["id"]: c for c in report["checks"]}
            expected = "obstruction" if code == 2 else "pass"
            assert checks[check_id]["verdict"] == expected, expr
            if pm is not None:
                assert (checks[check_id]["witness"]["b_plus"], checks[check_id]["witness"]["b_minus"]) == pm
            if code == 0:
                assert all(c["verdict"] != "obstruction" for c in report["checks"])
            if expr.startswith("connsum(prod(S2,S2)"):
                assert report["overall"]["uqr_elliptic_possible"] is False


@pytest.mark.parametrize("name, ring", [
    ("T4", make_torus(4)),
    ("S2xS2", make_product(make_sphere(2), make_sphere(2))),
])
def test_criterion_9_certificates(capsys, name, ring):
    with criterion(capsys, 9, f"{name} certificate in clifford mode within 100 restarts", 120) as note:
        cand = search(ring, mode="clifford", restarts=100, seed=0)
        assert isinstance(cand, EmbeddingCandidate)
        assert cand.residual < 1e-8 and cand.margin > 1e-4
        note(f"[residual {cand.residual:.2e}]")


def test_criterion_9_no_certificate_for_main_manifold(capsys):
    S2xS2 = make_product(make_sphere(2), make_sphere(2))
    with criterion(capsys, 9, "(S2xS2)#(S2xS2) clifford mode: no certificate in 100 restarts, floor >= 1e-5",
                   600) as note:
        res = search(make_connected_sum(S2xS2, S2xS2), mode="clifford", restarts=100, seed=0)
        assert isinstance(res, SearchFailure)
        assert res.best_residual >= 1e3 * 1e-8
        note(f"[floor {res.best_residual:.3e}]")


def test_criterion_10_cli_contract(capsys, tmp_path):
    with criterion(capsys, 10, "CLI exit codes 2/0/1 and byte-identical JSON round trip", 5):
        assert main(["run", "connsum(prod(S2,S2),prod(S2,S2))"]) == 2
        assert main(["run", "S4"]) == 0
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"name": "bad", "n": 4, "betti": [1, 1, 0, 2, 1], "cup": []}))
        assert main(["run", "--input", str(bad)]) == 1
        assert "Poincare duality" in capsys.readouterr().err
        for expr in ("connsum(prod(S2,S2),prod(S2,S2))", "S4", "T4"):
            main(["run", expr, "--format", "json"])
            text = capsys.readouterr().out.rstrip("\n")
            assert json.dumps(json.loads(text), sort_keys=True, indent=2) == text
