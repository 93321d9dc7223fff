"""Metric-dependent products at a single cotangent space.

A :class:`GramMetric` stores the Gram matrix ``G[i][j] = <e_i, e_j>_g`` of the
standard basis *covectors*.  Consequently the conformally rescaled metric
``rho^2 g`` has covector Gram matrix ``G / rho^2``; see
:meth:`GramMetric.conformal`.

Exact mode covers the inner product, the Clifford product and pullbacks.  The
Hodge star and the scaled Clifford product need square roots and fractional
powers and always produce float multivectors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import _exact
from .errors import DimensionError, GradeError, MetricError, ModeError
from .exterior import (
    Multivector,
    bits_to_indices,
    blades_of_grade,
    grade_project,
    hodge_star,
    reorder_sign,
)


def _as_matrix(rows, exact):
    if exact:
        try:
            return tuple(tuple(Fraction(x) for x in row) for row in rows)
        except TypeError as exc:
            raise ModeError(f"non-rational entry in exact matrix: {exc}") from None
    return tuple(tuple(float(x) for x in row) for row in rows)


def _infer_exact(rows):
    return all(not isinstance(x, float) for row in rows for x in row)


def _det(rows, exact):
    if not rows:
        return Fraction(1) if exact else 1.0
    if exact:
        return _exact.det(rows)
    return float(np.linalg.det(np.array(rows, dtype=float)))


@dataclass(frozen=True)
class GramMetric:
    """Symmetric positive-definite inner product on the cotangent space."""

    matrix: tuple
    exact: bool = True

    def __init__(self, rows, exact: bool | None = None):
        rows = [list(r) for r in rows]
        if exact is None:
            exact = _infer_exact(rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionError("Gram matrix must be square and non-empty")
        m = _as_matrix(rows, exact)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "exact", exact)
        for i in range(n):
            for j in range(i):
                if m[i][j] != m[j][i]:
                    raise MetricError(f"Gram matrix not symmetric at ({i}, {j})")
        if exact:
            if any(d <= 0 for d in _exact.leading_minors([list(r) for r in m])):
                raise MetricError("Gram matrix not positive definite")
        else:
            try:
                np.linalg.cholesky(np.array(m))
            except np.linalg.LinAlgError:
                raise MetricError("Gram matrix not positive definite") from None

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "GramMetric":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], exact)

    def conformal(self, rho) -> "GramMetric":
        """The metric ``rho^2 g``: covector Gram matrix divided by ``rho^2``."""
        if rho <= 0:
            raise MetricError("conformal factor must be positive")
        if self.exact:
            r2 = Fraction(rho) ** 2
            return GramMetric([[x / r2 for x in row] for row in self.matrix], True)
        r2 = float(rho) ** 2
        return GramMetric([[x / r2 for x in row] for row in self.matrix], False)

    def to_float(self) -> "GramMetric":
        return self if not self.exact else GramMetric(self.matrix, False)

    def det(self):
        return _det([list(r) for r in self.matrix], self.exact)

    def to_json(self) -> str:
        rows = [[str(x) if self.exact else x for x in row] for row in self.matrix]
        return json.dumps({"metric": rows})

    @classmethod
    def from_json(cls, text: str, exact: bool = True) -> "GramMetric":
        data = json.loads(text)
        rows = data["metric"] if isinstance(data, dict) else data
        if exact:
            return cls([[Fraction(x) for x in row] for row in rows], True)
        return cls([[float(Fraction(x)) if isinstance(x, str) else float(x) for x in row] for row in rows], False)

    @cached_property
    def _orthogonal_frame(self):
        # u_i = sum_j L[i][j] e_j, pairwise g-orthogonal, L unit lower triangular,
        # d_i = <u_i, u_i>_g.  No normalisation, so exact mode stays rational.
        G = self.matrix
        n = self.dim
        one, zero = (Fraction(1), Fraction(0)) if self.exact else (1.0, 0.0)
        L = []
        d = []
        for i in range(n):
            row = [one if j == i else zero for j in range(n)]
            for j in range(i):
                # <e_i, u_j> = sum_k G[i][k] L[j][k]
                proj = sum(G[i][k] * L[j][k] for k in range(j + 1)) / d[j]
                for k in range(j + 1):
                    row[k] -= proj * L[j][k]
            L.append(row)
            d.append(sum(row[a] * G[a][b] * row[b] for a in range(i + 1) for b in range(i + 1)))
        if self.exact:
            M = _exact.inverse(L)
        else:
            M = np.linalg.inv(np.array(L)).tolist()
        return L, M, d

    @cached_property
    def _cholesky(self):
        # G = C C^T, so <a, a>_g = |wedge(C^T) a|^2 by Cauchy-Binet; far better
        # conditioned in floating point than summing minors of G directly
        return np.linalg.cholesky(np.array(self.matrix, float)).tolist()


@dataclass(frozen=True)
class LinearMap:
    """Square matrix acting on covectors by ``e_i -> sum_j T[i][j] e_j``.

    This is the pointwise pullback ``f^*`` (the transpose of the derivative in
    coordinates).  Pullbacks compose contravariantly:
    ``pullback_form(S, pullback_form(T, a)) == pullback_form(T @ S, a)``.
    """

    matrix: tuple
    exact: bool = True

    def __init__(self, rows, exact: bool | None = None):
        rows = [list(r) for r in rows]
        if exact is None:
            exact = _infer_exact(rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionError("linear map must be square and non-empty")
        object.__setattr__(self, "matrix", _as_matrix(rows, exact))
        object.__setattr__(self, "exact", exact)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def det(self):
        return _det([list(r) for r in self.matrix], self.exact)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if self.exact and other.exact:
            return LinearMap(_exact.matmul(self.matrix, other.matrix), True)
        return LinearMap((np.array(self.matrix, float) @ np.array(other.matrix, float)).tolist(), False)

    def to_float(self) -> "LinearMap":
        return self if not self.exact else LinearMap(self.matrix, False)


def _check_dim(dim, a: Multivector):
    if a.dim != dim:
        raise DimensionError(f"dimension mismatch: {dim} vs {a.dim}")


def _exterior_apply(M, a: Multivector, exact: bool) -> Multivector:
    """Extend ``e_j -> sum_i M[j][i] e_i`` to all grades: coefficient minors."""
    n = a.dim
    out: dict[int, object] = {}
    minors: dict[tuple[int, int], object] = {}
    for bits, coeff in a.items():
        rows = bits_to_indices(bits)
        k = len(rows)
        for target in blades_of_grade(n, k):
            key = (bits, target)
            m = minors.get(key)
            if m is None:
                cols = bits_to_indices(target)
                m = _det([[M[r - 1][c - 1] for c in cols] for r in rows], exact) if k else (
                    Fraction(1) if exact else 1.0)
                minors[key] = m
            if m != 0:
                out[target] = out.get(target, 0) + coeff * m
    return Multivector(n, {b: v for b, v in out.items() if v != 0}, exact)


def _matrix_for(mode_exact: bool, matrix, obj_exact: bool):
    if mode_exact and not obj_exact:
        raise ModeError("float-mode metric or map used with an exact multivector")
    if not mode_exact and obj_exact:
        return tuple(tuple(float(x) for x in row) for row in matrix)
    return matrix


def metric_inner(g: GramMetric, a: Multivector, b: Multivector):
    """``<a, b>_g`` with ``<e_I, e_J>_g = det G[I, J]``; different grades are orthogonal."""
    _check_dim(g.dim, a)
    _check_dim(g.dim, b)
    if a.exact != b.exact:
        raise ModeError("cannot mix exact and float multivectors")
    G = _matrix_for(a.exact, g.matrix, g.exact)
    total = Fraction(0) if a.exact else 0.0
    for ba, va in a.items():
        rows = bits_to_indices(ba)
        for bb, vb in b.items():
            if ba.bit_count() != bb.bit_count():
                continue
            cols = bits_to_indices(bb)
            total += va * vb * _det([[G[r - 1][c - 1] for c in cols] for r in rows], a.exact)
    return total


def metric_norm(g: GramMetric, a: Multivector) -> float:
    if a.exact:
        return math.sqrt(max(float(metric_inner(g, a, a)), 0.0))
    _check_dim(g.dim, a)
    y = _exterior_apply(g.to_float()._cholesky, a, False)
    return math.sqrt(sum(v * v for _, v in y.items()))


def _clifford_diagonal(a: Multivector, b: Multivector, d) -> Multivector:
    # product in an orthogonal frame with u_i u_i = d_i
    out: dict[int, object] = {}
    for ba, va in a.items():
        for bb, vb in b.items():
            term = va * vb
            common = ba & bb
            i = 0
            while common:
                if common & 1:
                    term = term * d[i]
                common >>= 1
                i += 1
            if reorder_sign(ba, bb) < 0:
                term = -term
            bits = ba ^ bb
            out[bits] = out.get(bits, 0) + term
    return Multivector(a.dim, {k: v for k, v in out.items() if v != 0}, a.exact)


def clifford_metric(g: GramMetric, a: Multivector, b: Multivector) -> Multivector:
    """Clifford product of ``Cl(R^n, <.,.>_g)`` transported to the exterior algebra."""
    _check_dim(g.dim, a)
    _check_dim(g.dim, b)
    if a.exact != b.exact:
        raise ModeError("cannot mix exact and float multivectors")
    exact = a.exact
    if exact and not g.exact:
        raise ModeError("float-mode metric used with exact multivectors")
    frame = g._orthogonal_frame if g.exact == exact else g.to_float()._orthogonal_frame
    L, M, d = frame
    au = _exterior_apply(M, a, exact)
    bu = _exterior_apply(M, b, exact)
    return _exterior_apply(L, _clifford_diagonal(au, bu, d), exact)


def clifford_scalar_part(g: GramMetric, a: Multivector, b: Multivector):
    """The grade-0 part of ``a ._g b``, which the scaled product discards."""
    return grade_project(clifford_metric(g, a, b), 0)[0]


def hodge_star_metric(g: GramMetric, a: Multivector) -> Multivector:
    """Hodge star of ``g`` with ``vol_g = e_{12...n} / sqrt(det G)``.

    Float mode only.  Uses ``*_g b = *( wedge^k(G) b ) / sqrt(det G)``, which
    is the unique solution of ``a ^ *_g b = <a, b>_g vol_g``.
    """
    _check_dim(g.dim, a)
    if a.exact:
        raise ModeError("hodge_star_metric needs square roots; pass a float multivector")
    gf = g.to_float()
    G = gf.matrix
    raised: dict[int, float] = {}
    for bits, v in a.items():
        rows = bits_to_indices(bits)
        for target in blades_of_grade(a.dim, len(rows)):
            cols = bits_to_indices(target)
            m = _det([[G[r - 1][c - 1] for c in cols] for r in rows], False) if rows else 1.0
            raised[target] = raised.get(target, 0.0) + v * m
    scale = 1.0 / math.sqrt(gf.det())
    return hodge_star(Multivector(a.dim, raised, False)).scale(scale)


def _homogeneous_grade(a: Multivector, given):
    if given is not None:
        if a and a.grade != given:
            raise GradeError(f"declared grade {given} but multivector has grade {a.grade}")
        return given
    if not a:
        raise GradeError("grade of the zero multivector is ambiguous; pass grades=")
    return a.grade


def scaled_clifford(g: GramMetric, a: Multivector, b: Multivector, *, grades=None,
                    zero_tol: float = 1e-12) -> Multivector:
    """Conformally invariant scaled Clifford product of homogeneous ``a``, ``b``.

    ``1 + sum_{k>=1} c_k / |c_k|_g^((l+m-k)/(l+m))`` where ``c_k`` is the grade-k
    part of ``a ._g b``; vanishing ``c_k`` contribute nothing.  For two
    scalars the ordinary product is returned.  The result is float.

    Exact inputs are multiplied exactly so vanishing components are detected
    without rounding.  For float inputs a component counts as zero when
    ``|c_k|_g <= zero_tol * |a|_g |b|_g``.
    """
    l, m = grades if grades is not None else (None, None)
    l = _homogeneous_grade(a, l)
    m = _homogeneous_grade(b, m)
    if l == 0 and m == 0:
        return clifford_metric(g, a, b).to_float()
    prod = clifford_metric(g, a, b)
    gf = g.to_float()
    floor = 0.0
    if not prod.exact:
        floor = zero_tol * metric_norm(gf, a) * metric_norm(gf, b)
    out = Multivector(a.dim, {0: 1.0}, False)
    total = l + m
    for k in range(1, a.dim + 1):
        part = grade_project(prod, k)
        if not part:
            continue
        norm = metric_norm(g, part) if prod.exact else metric_norm(gf, part)
        if norm <= floor:
            continue
        out = out + part.to_float().scale(norm ** (-(total - k) / total))
    return out


def scaled_clifford_sum(g: GramMetric, a: Multivector, b: Multivector) -> Multivector:
    """Extension to inhomogeneous inputs by summing over homogeneous component pairs."""
    result = Multivector(a.dim, {}, False)
    for l in sorted(a.grades()):
        for m in sorted(b.grades()):
            result = result + scaled_clifford(g, grade_project(a, l), grade_project(b, m))
    return result


def pullback_form(T: LinearMap, a: Multivector) -> Multivector:
    """``(f^* a)_J = sum_I a_I det T[I, J]``."""
    _check_dim(T.dim, a)
    return _exterior_apply(_matrix_for(a.exact, T.matrix, T.exact), a, a.exact)


def pullback_metric(T: LinearMap, g: GramMetric) -> GramMetric:
    """Gram matrix ``T^-1 G T^-T`` of ``f^* g``, making ``f^*`` an isometry."""
    if T.dim != g.dim:
        raise DimensionError(f"dimension mismatch: {T.dim} vs {g.dim}")
    if T.det() == 0:
        raise MetricError("cannot pull back a metric along a singular map")
    if T.exact and g.exact:
        Ti = _exact.inverse([list(r) for r in T.matrix])
        return GramMetric(_exact.matmul(_exact.matmul(Ti, g.matrix), _exact.transpose(Ti)), True)
    Ti = np.linalg.inv(np.array(T.matrix, float))
    G = Ti @ np.array(g.matrix, float) @ Ti.T
    return GramMetric(((G + G.T) / 2).tolist(), False)


def check_pullback_naturality(T: LinearMap, g: GramMetric, a: Multivector, b: Multivector,
                              rtol: float = 1e-9) -> bool:
    """Whether pullback commutes with both the Clifford and the scaled Clifford product.

    The Clifford identity is compared exactly when every input is exact.
    """
    if T.det() == 0:
        raise MetricError("pullback naturality needs an invertible map")
    pg = pullback_metric(T, g)
    pa, pb = pullback_form(T, a), pullback_form(T, b)
    lhs = clifford_metric(pg, pa, pb)
    rhs = pullback_form(T, clifford_metric(g, a, b))
    if a.exact and g.exact and T.exact:
        clifford_ok = lhs == rhs
    else:
        clifford_ok = lhs.allclose(rhs, rtol=rtol, atol=rtol)
    s_lhs = scaled_clifford(pg, pa, pb, grades=(_grade_or_none(a), _grade_or_none(b)))
    s_rhs = pullback_form(T.to_float(), scaled_clifford(g, a, b, grades=(_grade_or_none(a), _grade_or_none(b))))
    return clifford_ok and s_lhs.allclose(s_rhs, rtol=rtol, atol=rtol)


def _grade_or_none(a: Multivector):
    return a.grade if a else None
