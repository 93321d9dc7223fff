"""Real cohomology rings of closed oriented manifolds, presented by structure constants.

A :class:`GradedRing` fixes a basis of every ``H^k`` and stores the cup
products of basis classes.  ``H^0`` is spanned by the unit and ``H^n`` by the
orientation class, so products with the unit are implicit and never stored.
Basis indices are 0-based.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Mapping, NamedTuple

from . import _exact
from .errors import DegenerateFormError, DimensionError, RingValidationError

CupKey = tuple  # (k, l, i, j)


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise RingValidationError(f"cup coefficients must be rational, got float {x!r}")
    return Fraction(x)


def _frac_to_json(x: Fraction):
    return int(x) if x.denominator == 1 else str(x)


class GradedRing:
    """Finite presentation of ``H^*(M; R)`` for a closed connected oriented ``n``-manifold."""

    __slots__ = ("n", "betti", "cup", "name")

    def __init__(self, n: int, betti, cup: Mapping[CupKey, object] | None = None, name: str = ""):
        betti = tuple(int(b) for b in betti)
        if n < 1:
            raise RingValidationError("manifold dimension must be positive")
        if len(betti) != n + 1:
            raise RingValidationError(f"expected {n + 1} Betti numbers, got {len(betti)}")
        if any(b < 0 for b in betti):
            raise RingValidationError("Betti numbers must be non-negative")
        if betti[0] != 1 or betti[n] != 1:
            raise RingValidationError(f"b_0 = b_n = 1 required for a closed connected oriented manifold, got {betti}")
        for k in range(n + 1):
            if betti[k] != betti[n - k]:
                raise RingValidationError(
                    f"Poincare duality violated: b_{k} = {betti[k]} but b_{n - k} = {betti[n - k]}")
        table: dict[CupKey, tuple[Fraction, ...]] = {}
        for key, coeffs in (cup or {}).items():
            k, l, i, j = (int(x) for x in key)
            if k < 0 or l < 0 or k > n or l > n:
                raise RingValidationError(f"cup entry {key}: degree out of range")
            if not (0 <= i < betti[k] and 0 <= j < betti[l]):
                raise RingValidationError(f"cup entry {key}: basis index out of range")
            if k + l > n:
                if any(_frac(c) != 0 for c in coeffs):
                    raise RingValidationError(f"cup entry {key}: product lands above degree {n}")
                continue
            coeffs = tuple(_frac(c) for c in coeffs)
            if len(coeffs) != betti[k + l]:
                raise RingValidationError(
                    f"cup entry {key}: expected {betti[k + l]} coefficients, got {len(coeffs)}")
            if k == 0 or l == 0:
                other = j if k == 0 else i
                unit = tuple(Fraction(int(m == other)) for m in range(betti[k + l]))
                if coeffs != unit:
                    raise RingValidationError(f"cup entry {key}: contradicts the unit H^0 class")
                continue
            if any(coeffs):
                table[(k, l, i, j)] = coeffs
        for (k, l, i, j), coeffs in table.items():
            sign = -1 if (k * l) % 2 else 1
            partner = table.get((l, k, j, i), (Fraction(0),) * len(coeffs))
            if any(c != sign * p for c, p in zip(coeffs, partner)):
                raise RingValidationError(
                    f"graded commutativity violated: H^{k}[{i}] * H^{l}[{j}] != "
                    f"{'-' if sign < 0 else ''}H^{l}[{j}] * H^{k}[{i}]")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "betti", betti)
        object.__setattr__(self, "cup", table)
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("GradedRing is immutable")

    def __reduce__(self):
        return GradedRing, (self.n, self.betti, self.cup, self.name)

    def __eq__(self, other):
        if not isinstance(other, GradedRing):
            return NotImplemented
        return self.n == other.n and self.betti == other.betti and self.cup == other.cup

    def __hash__(self):
        return hash((self.n, self.betti, frozenset(self.cup.items())))

    def __repr__(self):
        return f"GradedRing({self.name or '?'}, n={self.n}, betti={self.betti})"

    @property
    def dimension(self) -> int:
        return sum(self.betti)

    def product(self, k: int, i: int, l: int, j: int) -> tuple[Fraction, ...]:
        """Coordinates of ``x^k_i * x^l_j`` in the basis of ``H^{k+l}`` (empty above degree n)."""
        if k + l > self.n:
            return ()
        if k == 0:
            return tuple(Fraction(int(m == j)) for m in range(self.betti[l]))
        if l == 0:
            return tuple(Fraction(int(m == i)) for m in range(self.betti[k]))
        return self.cup.get((k, l, i, j), (Fraction(0),) * self.betti[k + l])

    def multiply(self, k: int, x, l: int, y) -> tuple[Fraction, ...]:
        """Bilinear cup product of coordinate vectors ``x`` in ``H^k`` and ``y`` in ``H^l``."""
        if k + l > self.n:
            return ()
        out = [Fraction(0)] * self.betti[k + l]
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                for m, c in enumerate(self.product(k, i, l, j)):
                    if c:
                        out[m] += xi * yj * c
        return tuple(out)

    def renamed(self, name: str) -> "GradedRing":
        return GradedRing(self.n, self.betti, self.cup, name)

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        entries = [
            {"k": k, "l": l, "i": i, "j": j, "coeffs": [_frac_to_json(c) for c in coeffs]}
            for (k, l, i, j), coeffs in sorted(self.cup.items())
        ]
        return {"name": self.name, "n": self.n, "betti": list(self.betti), "cup": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "GradedRing":
        try:
            n = int(data["n"])
            betti = data["betti"]
            cup = {}
            for entry in data.get("cup", []):
                key = (entry["k"], entry["l"], entry["i"], entry["j"])
                if key in cup:
                    raise RingValidationError(f"duplicate cup entry {key}")
                cup[key] = entry["coeffs"]
        except (KeyError, TypeError) as exc:
            raise RingValidationError(f"malformed ring description: missing or bad field {exc}") from None
        return cls(n, betti, cup, str(data.get("name", "")))

    @classmethod
    def from_json(cls, text: str) -> "GradedRing":
        return cls.from_dict(json.loads(text))


# -- constructors ----------------------------------------------------------

def make_sphere(n: int) -> GradedRing:
    if n < 2:
        raise RingValidationError(f"make_sphere needs n >= 2, got {n}; use make_circle for S^1")
    return GradedRing(n, [1] + [0] * (n - 1) + [1], {}, f"S{n}")


def make_circle() -> GradedRing:
    return GradedRing(1, [1, 1], {}, "S1")


def make_cp2(orientation: int = 1) -> GradedRing:
    """``CP^2`` (``x * x = V``); ``orientation=-1`` gives the reversed orientation."""
    name = "CP2" if orientation > 0 else "CP2bar"
    return GradedRing(4, [1, 0, 1, 0, 1], {(2, 2, 0, 0): [orientation]}, name)


def _product_basis(A: GradedRing, B: GradedRing, k: int):
    return [(p, i, k - p, j)
            for p in range(max(0, k - B.n), min(k, A.n) + 1)
            for i in range(A.betti[p]) for j in range(B.betti[k - p])]


def make_product(A: GradedRing, B: GradedRing, name: str | None = None) -> GradedRing:
    """Kunneth ring: ``(a x b)(a' x b') = (-1)^{|b||a'|} (a a') x (b b')``."""
    n = A.n + B.n
    bases = [_product_basis(A, B, k) for k in range(n + 1)]
    index = [{t: pos for pos, t in enumerate(basis)} for basis in bases]
    cup = {}
    for k in range(1, n + 1):
        for l in range(1, n - k + 1):
            for x, (p, i, q, j) in enumerate(bases[k]):
                for y, (r, s, t, u) in enumerate(bases[l]):
                    left = A.product(p, i, r, s)
                    right = B.product(q, j, t, u)
                    if not any(left) or not any(right):
                        continue
                    sign = -1 if (q * r) % 2 else 1
                    out = [Fraction(0)] * len(bases[k + l])
                    for a_idx, ca in enumerate(left):
                        if not ca:
                            continue
                        for b_idx, cb in enumerate(right):
                            if cb:
                                out[index[k + l][(p + r, a_idx, q + t, b_idx)]] += sign * ca * cb
                    if any(out):
                        cup[(k, l, x, y)] = out
    return GradedRing(n, [len(b) for b in bases], cup,
                      name if name is not None else f"prod({A.name},{B.name})")


def make_torus(n: int) -> GradedRing:
    ring = make_circle()
    for _ in range(n - 1):
        ring = make_product(ring, make_circle())
    return ring.renamed(f"T{n}")


def make_connected_sum(A: GradedRing, B: GradedRing, name: str | None = None) -> GradedRing:
    """Cohomology ring of ``A # B``.

    In degrees strictly between 0 and n the basis is A's classes followed by
    B's.  Products within a summand are kept (with top-degree results landing
    on the shared orientation class); products of classes from different
    summands vanish.  This is the standard convention for connected sums of
    closed oriented manifolds; it is encoded here, not derived.
    """
    if A.n != B.n:
        raise DimensionError(f"connected sum needs equal dimensions, got {A.n} and {B.n}")
    n = A.n
    betti = [1] + [A.betti[k] + B.betti[k] for k in range(1, n)] + [1] if n > 1 else [1, 1]
    offset = {k: A.betti[k] for k in range(n + 1)}
    cup = {}
    for source, shift in ((A, False), (B, True)):
        for (k, l, i, j), coeffs in source.cup.items():
            target = k + l
            out = [Fraction(0)] * betti[target]
            for m, c in enumerate(coeffs):
                pos = m + (offset[target] if shift and target < n else 0)
                out[pos] += c
            ii = i + (offset[k] if shift else 0)
            jj = j + (offset[l] if shift else 0)
            cup[(k, l, ii, jj)] = out
    return GradedRing(n, betti, cup, name if name is not None else f"connsum({A.name},{B.name})")


def connected_sum_power(A: GradedRing, times: int) -> GradedRing:
    if times < 1:
        raise ValueError("connected sum power needs at least one summand")
    ring = A
    for _ in range(times - 1):
        ring = make_connected_sum(ring, A)
    return ring.renamed(f"connsum^{times}({A.name})")


# -- intersection forms -------------------------------------------------------

class Signature(NamedTuple):
    plus: int
    minus: int
    zero: int


class IntersectionForm(NamedTuple):
    m: int
    matrix: tuple
    signature: Signature

    @property
    def degenerate(self) -> bool:
        return self.signature.zero > 0


def signature(Q) -> Signature:
    """Sylvester signature by exact symmetric (congruence) diagonalisation."""
    A = [[Fraction(x) for x in row] for row in Q]
    size = len(A)
    if any(len(row) != size for row in A):
        raise ValueError("signature needs a square matrix")
    for i in range(size):
        for j in range(i):
            if A[i][j] != A[j][i]:
                raise ValueError(f"matrix not symmetric at ({i}, {j})")
    plus = minus = 0
    active = list(range(size))
    while active:
        pivot = next((i for i in active if A[i][i] != 0), None)
        if pivot is None:
            pair = next(((i, j) for i in active for j in active if A[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # e_i -> e_i + e_j; new diagonal entry is 2 A[i][j] != 0
            for r in range(size):
                A[r][i] += A[r][j]
            for c in range(size):
                A[i][c] += A[j][c]
            pivot = i
        p = A[pivot][pivot]
        if p > 0:
            plus += 1
        else:
            minus += 1
        active.remove(pivot)
        for r in active:
            f = A[r][pivot]
            if f:
                f = f / p
                for c in active:
                    A[r][c] -= f * A[pivot][c]
                A[r][pivot] = Fraction(0)
        for c in active:
            A[pivot][c] = Fraction(0)
    return Signature(plus, minus, size - plus - minus)


def intersection_form(R: GradedRing) -> IntersectionForm:
    """``I(u, u') V = u * u'`` on ``H^{2m}`` of a ``4m``-manifold."""
    if R.n % 4:
        raise DimensionError(f"intersection form needs dimension divisible by 4, got {R.n}")
    mid = R.n // 2
    b = R.betti[mid]
    Q = tuple(tuple(R.product(mid, i, mid, j)[0] for j in range(b)) for i in range(b))
    return IntersectionForm(R.n // 4, Q, signature(Q))


def require_nondegenerate(form: IntersectionForm) -> IntersectionForm:
    if form.degenerate:
        raise DegenerateFormError(
            f"intersection form has a {form.signature.zero}-dimensional kernel; "
            "not a closed oriented manifold")
    return form


def cup_rank(R: GradedRing, k: int) -> int:
    """Dimension of the span of all products ``H^k x H^k -> H^{2k}``."""
    if 2 * k > R.n:
        return 0
    rows = [list(R.product(k, i, k, j)) for i in range(R.betti[k]) for j in range(R.betti[k])]
    return _exact.rank(rows) if rows else 0
