"""Cohomological obstructions to conformal formality and UQR ellipticity.

Each ``check_*`` function returns a :class:`CheckResult` whose witness is a
JSON-serialisable dict.  :func:`full_report` aggregates them.

A passing report means only that *no obstruction was found*; none of these
checks can certify that a manifold is conformally formal or UQR-elliptic.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

from . import _exact
from .errors import GradeError
from .exterior import (
    Multivector,
    blade,
    blades_of_grade,
    clifford_euclidean,
    euclidean_inner,
    format_multivector,
    grade_project,
    hodge_star,
    pseudoscalar,
    wedge,
)
from .ring import GradedRing, cup_rank, intersection_form, require_nondegenerate


class Verdict(str, enum.Enum):
    PASS = "pass"
    OBSTRUCTION = "obstruction"
    INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class CheckResult:
    id: str
    verdict: Verdict
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "verdict": self.verdict.value, "witness": self.witness}


# -- Betti-number checks -------------------------------------------------------

def check_betti_bound(R: GradedRing) -> CheckResult:
    violations = [{"k": k, "b_k": b, "binomial": comb(R.n, k)}
                  for k, b in enumerate(R.betti) if b > comb(R.n, k)]
    verdict = Verdict.OBSTRUCTION if violations else Verdict.PASS
    return CheckResult("betti_bound", verdict, {"violations": violations})


def check_b1(R: GradedRing) -> CheckResult:
    b1 = R.betti[1] if R.n >= 1 else 0
    verdict = Verdict.OBSTRUCTION if b1 == R.n - 1 else Verdict.PASS
    return CheckResult("b1", verdict, {"b1": b1, "n": R.n})


def check_middle_split(R: GradedRing) -> CheckResult:
    """``b_{2m}^+`` and ``b_{2m}^-`` are each at most half of ``C(4m, 2m)``.

    Raises :class:`~cliffobs.errors.DegenerateFormError` for a degenerate form.
    """
    if R.n % 4:
        return CheckResult("middle_split", Verdict.INAPPLICABLE, {"reason": f"n = {R.n} is not divisible by 4"})
    form = require_nondegenerate(intersection_form(R))
    bound = comb(R.n, R.n // 2) // 2
    sig = form.signature
    over = sig.plus > bound or sig.minus > bound
    return CheckResult("middle_split", Verdict.OBSTRUCTION if over else Verdict.PASS,
                       {"b_plus": sig.plus, "b_minus": sig.minus, "bound": bound})


def wedge_rank(n: int, k: int) -> int:
    """Dimension of the span of ``u ^ v`` over all ``u, v`` in the k-th exterior power."""
    if 2 * k > n:
        return 0
    blades = [Multivector(n, {b: 1}) for b in blades_of_grade(n, k)]
    target = blades_of_grade(n, 2 * k)
    rows = []
    for u in blades:
        for v in blades:
            w = wedge(u, v)
            if w:
                rows.append([w[t] for t in target])
    return _exact.rank(rows) if rows else 0


def check_wedge_surjectivity(R: GradedRing) -> CheckResult:
    """Degrees where an embedding would have to be onto the whole exterior power.

    If ``b_k = C(n, k)`` then ``Phi`` identifies ``H^k`` with the k-th exterior
    power, so products ``H^k x H^k`` must span a space of the same dimension
    as the wedges of k-vectors.  This compares ranks only and does not decide
    the full embedding problem.
    """
    saturated = [k for k in range(1, R.n) if R.betti[k] == comb(R.n, k)]
    degrees = []
    failed = False
    for k in saturated:
        c_rank, w_rank = cup_rank(R, k), wedge_rank(R.n, k)
        degrees.append({"k": k, "cup_rank": c_rank, "wedge_rank": w_rank})
        failed |= c_rank < w_rank
    witness = {"degrees": degrees}
    if not saturated:
        witness["reason"] = "no degree with b_k = C(n, k); vacuous"
    return CheckResult("wedge_surjectivity", Verdict.OBSTRUCTION if failed else Verdict.PASS, witness)


# -- self-dual forms and the map P ---------------------------------------------

@dataclass(frozen=True)
class EigenSplit:
    m: int
    plus: tuple
    minus: tuple

    @property
    def n(self) -> int:
        return 4 * self.m


def build_eigen_split(m: int) -> EigenSplit:
    """Bases of the +1 / -1 eigenspaces of the Hodge star on middle-degree forms of R^{4m}.

    For ``m = 1`` these are ``f1 = (e12 + e34)/2``, ``f2 = (e14 + e23)/2``,
    ``f3 = (e13 + e42)/2`` and ``f1' = (e12 - e34)/2``, ``f2' = (e13 - e42)/2``,
    ``f3' = (e14 - e23)/2``.  In general each basis vector is
    ``(e_I +- *e_I) / 2`` for a middle blade ``I`` containing index 1.
    """
    if m not in (1, 2):
        raise ValueError(f"eigen split is built for m in {{1, 2}}, got {m}")
    n = 4 * m
    if m == 1:
        e = lambda *idx: blade(4, *idx)  # noqa: E731
        plus = ((e(1, 2) + e(3, 4)) / 2, (e(1, 4) + e(2, 3)) / 2, (e(1, 3) + e(4, 2)) / 2)
        minus = ((e(1, 2) - e(3, 4)) / 2, (e(1, 3) - e(4, 2)) / 2, (e(1, 4) - e(2, 3)) / 2)
        return EigenSplit(1, plus, minus)
    plus, minus = [], []
    for bits in blades_of_grade(n, 2 * m):
        if not bits & 1:
            continue
        b = Multivector(n, {bits: 1})
        plus.append((b + hodge_star(b)) / 2)
        minus.append((b - hodge_star(b)) / 2)
    return EigenSplit(m, tuple(plus), tuple(minus))


def _check_middle(m: int, v: Multivector):
    if v.dim != 4 * m:
        raise GradeError(f"expected a form on R^{4 * m}, got dimension {v.dim}")
    if v and v.grades() != {2 * m}:
        raise GradeError(f"expected a {2 * m}-form, got grades {sorted(v.grades())}")


def p_map(m: int, v: Multivector, w: Multivector) -> Multivector:
    """``P(v, w)``: middle-degree part of the Euclidean Clifford product."""
    _check_middle(m, v)
    _check_middle(m, w)
    return grade_project(clifford_euclidean(v, w), 2 * m)


def hodge_is_left_clifford(m: int) -> bool:
    """``(-1)^m e_{1..n} v`` projected to degree 2m equals ``*v`` for every middle blade."""
    n = 4 * m
    vol = pseudoscalar(n) * (-1) ** m
    return all(
        grade_project(clifford_euclidean(vol, b), 2 * m) == hodge_star(b)
        for b in (Multivector(n, {bits: 1}) for bits in blades_of_grade(n, 2 * m))
    )


def check_p_closure(m: int) -> bool:
    """Exhaustively verify ``P`` preserves both eigenspaces and commutes with ``*``."""
    split = build_eigen_split(m)
    for basis, sign in ((split.plus, 1), (split.minus, -1)):
        if any(hodge_star(v) != v * sign for v in basis):
            return False
        for v in basis:
            for w in basis:
                p = p_map(m, v, w)
                if hodge_star(p) != p * sign:
                    return False
    n = 4 * m
    blades = [Multivector(n, {bits: 1}) for bits in blades_of_grade(n, 2 * m)]
    for v in blades:
        sv = hodge_star(v)
        for w in blades:
            if hodge_star(p_map(m, v, w)) != p_map(m, sv, w):
                return False
    return hodge_is_left_clifford(m)


@dataclass(frozen=True)
class CrossCertificate:
    """``P(u, w)`` and its component orthogonal to ``span{u, w}``."""

    product: Multivector
    orthogonal: Multivector

    def to_dict(self) -> dict:
        return {"product": format_multivector(self.product), "orthogonal": format_multivector(self.orthogonal)}


def _eigen_sign(v: Multivector) -> int:
    s = hodge_star(v)
    if s == v:
        return 1
    if s == -v:
        return -1
    return 0


def cross_product_certificate(u: Multivector, w: Multivector) -> CrossCertificate | None:
    """Witness that ``span{u, w}`` inside a single eigenspace of ``*`` on 2-forms of R^4 is not P-closed.

    Returns ``None`` exactly when ``u`` and ``w`` are linearly dependent.
    """
    _check_middle(1, u)
    _check_middle(1, w)
    su, sw = _eigen_sign(u), _eigen_sign(w)
    if su == 0 or sw == 0 or (u and w and su != sw):
        raise ValueError("u and w must lie in the same eigenspace of the Hodge star")
    uu, ww, uw = euclidean_inner(u, u), euclidean_inner(w, w), euclidean_inner(u, w)
    gram = uu * ww - uw * uw
    if gram == 0:
        return None
    p = p_map(1, u, w)
    pu, pw = euclidean_inner(p, u), euclidean_inner(p, w)
    # solve the 2x2 Gram system for the projection onto span{u, w}
    a = (pu * ww - pw * uw) / gram
    b = (pw * uu - pu * uw) / gram
    return CrossCertificate(p, p - u * a - w * b)


def eigen_coordinates(v: Multivector, basis) -> tuple[Fraction, ...]:
    """Coordinates in an orthogonal eigenbasis whose vectors all have squared norm 1/2."""
    return tuple(euclidean_inner(v, f) * 2 for f in basis)


def lagrange_identity_holds(u: Multivector, w: Multivector) -> bool:
    """In eigenbasis coordinates ``|P(u,w)|^2 = |u|^2 |w|^2 - (u.w)^2`` (cross product)."""
    split = build_eigen_split(1)
    basis = split.plus if _eigen_sign(u if u else w) >= 0 else split.minus
    a, b = eigen_coordinates(u, basis), eigen_coordinates(w, basis)
    c = eigen_coordinates(p_map(1, u, w), basis)
    dot = lambda x, y: sum(p * q for p, q in zip(x, y))  # noqa: E731
    return dot(c, c) == dot(a, a) * dot(b, b) - dot(a, b) ** 2


def p_table(basis) -> list[list[tuple[Fraction, ...]]]:
    """``P(f_i, f_j)`` in coordinates of ``basis`` (which must be a m=1 eigenbasis)."""
    return [[eigen_coordinates(p_map(1, x, y), basis) for y in basis] for x in basis]


DIM4_ALLOWED = (0, 1, 3)


def check_dim4_clifford(R: GradedRing) -> CheckResult:
    """For 4-manifolds, ``b_2^+`` and ``b_2^-`` must lie in {0, 1, 3}."""
    if R.n != 4:
        return CheckResult("dim4_clifford", Verdict.INAPPLICABLE, {"reason": f"n = {R.n} is not 4"})
    sig = require_nondegenerate(intersection_form(R)).signature
    offending = sorted({v for v in (sig.plus, sig.minus) if v not in DIM4_ALLOWED})
    witness: dict = {"b_plus": sig.plus, "b_minus": sig.minus, "allowed": list(DIM4_ALLOWED)}
    if 2 in offending:
        split = build_eigen_split(1)
        family = []
        for label, basis in (("plus", split.plus), ("minus", split.minus)):
            for i, j in combinations(range(3), 2):
                cert = cross_product_certificate(basis[i], basis[j])
                family.append({"eigenspace": label, "pair": [i + 1, j + 1], **cert.to_dict()})
        witness["cross_product_certificates"] = family
        witness["p_closure_verified"] = check_p_closure(1)
    return CheckResult("dim4_clifford", Verdict.OBSTRUCTION if offending else Verdict.PASS, witness)


# -- aggregation ---------------------------------------------------------------

CHECKS = {
    "betti_bound": check_betti_bound,
    "b1": check_b1,
    "middle_split": check_middle_split,
    "wedge_surjectivity": check_wedge_surjectivity,
    "dim4_clifford": check_dim4_clifford,
}
CONFORMAL_CHECKS = ("betti_bound", "b1", "middle_split", "wedge_surjectivity")


@dataclass(frozen=True)
class ObstructionReport:
    ring: str
    n: int
    checks: tuple

    def _clear(self, ids) -> bool:
        return not any(c.verdict is Verdict.OBSTRUCTION for c in self.checks if c.id in ids)

    @property
    def conformally_formal_possible(self) -> bool:
        return self._clear(CONFORMAL_CHECKS)

    @property
    def clifford_formal_possible(self) -> bool:
        return self._clear(CONFORMAL_CHECKS + ("dim4_clifford",))

    @property
    def uqr_elliptic_possible(self) -> bool | None:
        return self.clifford_formal_possible if self.n == 4 else None

    @property
    def any_obstruction(self) -> bool:
        return any(c.verdict is Verdict.OBSTRUCTION for c in self.checks)

    def overall(self) -> dict:
        return {
            "conformally_formal_possible": self.conformally_formal_possible,
            "clifford_formal_possible": self.clifford_formal_possible,
            "uqr_elliptic_possible": self.uqr_elliptic_possible,
        }

    def to_dict(self) -> dict:
        return {"ring": self.ring, "n": self.n, "checks": [c.to_dict() for c in self.checks],
                "overall": self.overall()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def full_report(R: GradedRing, checks=None) -> ObstructionReport:
    ids = list(CHECKS) if checks is None else list(checks)
    unknown = [c for c in ids if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; available: {list(CHECKS)}")
    return ObstructionReport(R.name, R.n, tuple(CHECKS[c](R) for c in ids))
