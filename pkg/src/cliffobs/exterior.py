"""Multivectors on the exterior algebra of R^n with blade-bitmask coefficients.

A blade ``e_I = e_{i1} ^ ... ^ e_{ik}`` (``i1 < ... < ik``) is stored as the
integer mask with bit ``i - 1`` set for every ``i`` in ``I``.  Coefficients are
either all :class:`fractions.Fraction` (exact mode, the default) or all
``float`` (float mode); the two never mix.

The Euclidean Clifford product uses ``e_i e_i = 1`` and ``e_i e_j = -e_j e_i``;
the Hodge star is fixed by ``e_I ^ *e_I = e_{12...n}``.
"""
from __future__ import annotations

import numbers
import re
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Mapping

from .errors import DimensionError, GradeError, ModeError

MIN_DIM = 2
MAX_DIM = 12


def reorder_sign(a: int, b: int) -> int:
    """Sign of the permutation sorting the concatenated index lists of ``a`` and ``b``.

    Shared indices are counted as if they were distinct, which is exactly what
    the Clifford rule needs before the squares are collapsed.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += (a & b).bit_count()
        a >>= 1
    return -1 if swaps & 1 else 1


def bits_to_indices(bits: int) -> tuple[int, ...]:
    out = []
    i = 1
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def indices_to_bits(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << (i - 1)
    return bits


@lru_cache(maxsize=None)
def blades_of_grade(dim: int, k: int) -> tuple[int, ...]:
    """Masks of grade ``k`` in lexicographic order of their index tuples."""
    return tuple(indices_to_bits(c) for c in combinations(range(1, dim + 1), k))


@lru_cache(maxsize=None)
def blade_position(dim: int, k: int) -> dict[int, int]:
    return {b: i for i, b in enumerate(blades_of_grade(dim, k))}


def _coerce(value, exact: bool):
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, numbers.Rational):
            return Fraction(int(value.numerator), int(value.denominator))
        raise ModeError(f"float scalar {value!r} in exact-mode multivector")
    return float(value)


def _is_float_scalar(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, numbers.Rational)


class Multivector:
    """Immutable element of the exterior algebra of R^dim."""

    __slots__ = ("dim", "exact", "_coeffs", "_hash")

    def __init__(self, dim: int, coeffs: Mapping[int, object] | None = None, exact: bool | None = None):
        if not isinstance(dim, int) or not MIN_DIM <= dim <= MAX_DIM:
            raise DimensionError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {dim!r}")
        coeffs = dict(coeffs or {})
        if exact is None:
            exact = not any(_is_float_scalar(v) for v in coeffs.values())
        top = 1 << dim
        clean = {}
        for bits, value in coeffs.items():
            if not isinstance(bits, int) or not 0 <= bits < top:
                raise DimensionError(f"blade mask {bits!r} out of range for dimension {dim}")
            value = _coerce(value, exact)
            if value != 0:
                clean[bits] = value
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "exact", bool(exact))
        object.__setattr__(self, "_coeffs", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    def __reduce__(self):
        return Multivector, (self.dim, dict(self._coeffs), self.exact)

    @classmethod
    def _raw(cls, dim: int, coeffs: dict, exact: bool) -> "Multivector":
        # trusted fast path: coeffs already coerced, zeros dropped
        mv = object.__new__(cls)
        object.__setattr__(mv, "dim", dim)
        object.__setattr__(mv, "exact", exact)
        object.__setattr__(mv, "_coeffs", coeffs)
        object.__setattr__(mv, "_hash", None)
        return mv

    # -- access ---------------------------------------------------------
    def __getitem__(self, bits: int):
        return self._coeffs.get(bits, Fraction(0) if self.exact else 0.0)

    def items(self):
        return self._coeffs.items()

    def blades(self):
        return self._coeffs.keys()

    def __iter__(self) -> Iterator[tuple[int, object]]:
        return iter(sorted(self._coeffs.items(), key=lambda kv: _blade_sort_key(kv[0])))

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def grades(self) -> set[int]:
        return {b.bit_count() for b in self._coeffs}

    @property
    def grade(self) -> int:
        """Grade of a nonzero homogeneous multivector."""
        gs = self.grades()
        if len(gs) != 1:
            raise GradeError(f"multivector is not homogeneous (grades {sorted(gs)})")
        return gs.pop()

    def is_homogeneous(self) -> bool:
        return len(self.grades()) == 1

    def zero(self) -> "Multivector":
        return Multivector._raw(self.dim, {}, self.exact)

    def to_float(self) -> "Multivector":
        return Multivector._raw(self.dim, {b: float(v) for b, v in self._coeffs.items()}, False)

    def to_exact(self) -> "Multivector":
        """Exact copy; float coefficients are converted without rounding."""
        return Multivector._raw(self.dim, {b: Fraction(v) for b, v in self._coeffs.items()}, True)

    def vector(self, k: int) -> list:
        """Coefficients of the grade-``k`` part in :func:`blades_of_grade` order."""
        return [self[b] for b in blades_of_grade(self.dim, k)]

    @classmethod
    def from_vector(cls, dim: int, k: int, values, exact: bool | None = None) -> "Multivector":
        blades = blades_of_grade(dim, k)
        if len(values) != len(blades):
            raise DimensionError(f"expected {len(blades)} grade-{k} coefficients, got {len(values)}")
        return cls(dim, dict(zip(blades, values)), exact)

    # -- arithmetic -----------------------------------------------------
    def _check(self, other: "Multivector"):
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if other.exact != self.exact:
            raise ModeError("cannot mix exact and float multivectors")

    def _scalar(self, c):
        if isinstance(c, Multivector):
            raise TypeError("expected a scalar")
        if not isinstance(c, numbers.Real):
            return None
        return _coerce(c, self.exact)

    def __add__(self, other):
        if not isinstance(other, Multivector):
            c = self._scalar(other)
            if c is None:
                return NotImplemented
            other = Multivector._raw(self.dim, {0: c} if c != 0 else {}, self.exact)
        self._check(other)
        out = dict(self._coeffs)
        for b, v in other._coeffs.items():
            s = out.get(b, 0) + v
            if s != 0:
                out[b] = s
            else:
                out.pop(b, None)
        return Multivector._raw(self.dim, out, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return Multivector._raw(self.dim, {b: -v for b, v in self._coeffs.items()}, self.exact)

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            c = self._scalar(other)
            if c is None:
                return NotImplemented
            return self + (-c)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Multivector":
        c = _coerce(c, self.exact)
        if c == 0:
            return self.zero()
        return Multivector._raw(self.dim, {b: v * c for b, v in self._coeffs.items()}, self.exact)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return clifford_euclidean(self, other)
        if not isinstance(other, numbers.Real):
            return NotImplemented
        return self.scale(other)

    def __rmul__(self, other):
        if not isinstance(other, numbers.Real):
            return NotImplemented
        return self.scale(other)

    def __truediv__(self, other):
        if not isinstance(other, numbers.Real):
            return NotImplemented
        if self.exact:
            return self.scale(Fraction(1) / _coerce(other, True))
        return self.scale(1.0 / float(other))

    def __xor__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return wedge(self, other)

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Multivector):
            return self.dim == other.dim and self._coeffs == other._coeffs
        if isinstance(other, numbers.Real):
            return self._coeffs == ({0: other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.dim, frozenset(self._coeffs.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def allclose(self, other: "Multivector", rtol: float = 1e-9, atol: float = 0.0) -> bool:
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        keys = set(self._coeffs) | set(other._coeffs)
        scale = max([abs(float(v)) for v in self._coeffs.values()]
                    + [abs(float(v)) for v in other._coeffs.values()] + [0.0])
        tol = atol + rtol * scale
        return all(abs(float(self[b]) - float(other[b])) <= tol for b in keys)

    def __repr__(self):
        mode = "" if self.exact else ", float"
        return f"Multivector({self.dim}{mode}: {format_multivector(self)})"

    def __str__(self):
        return format_multivector(self)


# -- constructors --------------------------------------------------------

def blade(dim: int, *indices: int, coeff=1) -> Multivector:
    """``coeff * e_{i1} ^ e_{i2} ^ ...`` in any index order (sign is applied)."""
    bits = 0
    sign = 1
    for i in indices:
        if not 1 <= i <= dim:
            raise DimensionError(f"index {i} out of range 1..{dim}")
        m = 1 << (i - 1)
        if bits & m:
            return Multivector(dim, {}, None if not _is_float_scalar(coeff) else False)
        sign *= reorder_sign(bits, m)
        bits |= m
    return Multivector(dim, {bits: coeff * sign})


def scalar(dim: int, c=1) -> Multivector:
    return Multivector(dim, {0: c})


def pseudoscalar(dim: int) -> Multivector:
    return Multivector(dim, {(1 << dim) - 1: 1})


# -- products --------------------------------------------------------------

def _check_pair(a: Multivector, b: Multivector):
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise TypeError("expected Multivector operands")
    a._check(b)


def wedge(a: Multivector, b: Multivector) -> Multivector:
    _check_pair(a, b)
    out: dict[int, object] = {}
    for ba, va in a._coeffs.items():
        for bb, vb in b._coeffs.items():
            if ba & bb:
                continue
            bits = ba | bb
            term = va * vb if reorder_sign(ba, bb) > 0 else -(va * vb)
            out[bits] = out.get(bits, 0) + term
    return Multivector._raw(a.dim, {k: v for k, v in out.items() if v != 0}, a.exact)


def clifford_euclidean(a: Multivector, b: Multivector) -> Multivector:
    """Clifford product for the standard inner product (all generators square to +1)."""
    _check_pair(a, b)
    out: dict[int, object] = {}
    for ba, va in a._coeffs.items():
        for bb, vb in b._coeffs.items():
            bits = ba ^ bb
            term = va * vb if reorder_sign(ba, bb) > 0 else -(va * vb)
            out[bits] = out.get(bits, 0) + term
    return Multivector._raw(a.dim, {k: v for k, v in out.items() if v != 0}, a.exact)


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= a.dim:
        raise GradeError(f"grade {k} out of range 0..{a.dim}")
    return Multivector._raw(a.dim, {b: v for b, v in a._coeffs.items() if b.bit_count() == k}, a.exact)


def euclidean_inner(a: Multivector, b: Multivector):
    _check_pair(a, b)
    if len(b._coeffs) < len(a._coeffs):
        a, b = b, a
    total = Fraction(0) if a.exact else 0.0
    for bits, v in a._coeffs.items():
        w = b._coeffs.get(bits)
        if w is not None:
            total += v * w
    return total


def norm_squared(a: Multivector):
    return euclidean_inner(a, a)


def hodge_star(a: Multivector) -> Multivector:
    full = (1 << a.dim) - 1
    out = {}
    for bits, v in a._coeffs.items():
        comp = full ^ bits
        out[comp] = v if reorder_sign(bits, comp) > 0 else -v
    return Multivector._raw(a.dim, out, a.exact)


def clifford_grade_bound_check(a: Multivector, b: Multivector, k: int) -> bool:
    """Whether ``|<a b>_k| <= 2^n |a| |b|`` holds (compared after squaring)."""
    _check_pair(a, b)
    part = grade_project(clifford_euclidean(a, b), k)
    return norm_squared(part) <= 4 ** a.dim * norm_squared(a) * norm_squared(b)


# -- text format -----------------------------------------------------------

def _blade_sort_key(bits: int):
    return (bits.bit_count(), bits_to_indices(bits))


def format_blade(bits: int) -> str:
    idx = bits_to_indices(bits)
    if any(i >= 10 for i in idx):
        return "e{" + ",".join(map(str, idx)) + "}"
    return "e" + "".join(map(str, idx))


def _format_scalar(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def format_multivector(a: Multivector) -> str:
    """Render as e.g. ``3 + 2*e1 - 1/2*e13``."""
    parts = []
    for bits, v in a:
        neg = v < 0
        mag = -v if neg else v
        if bits == 0:
            body = _format_scalar(mag)
        elif mag == 1:
            body = format_blade(bits)
        else:
            body = f"{_format_scalar(mag)}*{format_blade(bits)}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"


_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?|inf"
_BLADE = r"e(?:\{\s*\d+(?:\s*,\s*\d+)*\s*\}|\d+)"
_TERM = re.compile(
    rf"\s*(?P<sign>[+-])?\s*(?:(?P<num>{_NUMBER})\s*(?P<star>\*)?\s*)?(?P<blade>{_BLADE})?\s*"
)


def parse_multivector(text: str, dim: int, exact: bool = True) -> Multivector:
    """Inverse of :func:`format_multivector`."""
    pos = 0
    coeffs: dict[int, object] = {}
    first = True
    text = text.strip()
    if text == "0":
        return Multivector(dim, {}, exact)
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or (m.group("num") is None and m.group("blade") is None):
            raise ValueError(f"cannot parse multivector at position {pos}: {text!r}")
        if m.group("sign") is None and not first:
            raise ValueError(f"missing operator at position {pos}: {text!r}")
        if m.group("star") and m.group("blade") is None:
            raise ValueError(f"dangling '*' at position {pos}: {text!r}")
        if m.group("num") and m.group("blade") and not m.group("star"):
            raise ValueError(f"expected '*' between coefficient and blade at position {pos}: {text!r}")
        num = m.group("num")
        if num is None:
            value = Fraction(1) if exact else 1.0
        elif exact:
            value = Fraction(num)
        else:
            value = float(Fraction(num)) if "/" in num else float(num)
        if m.group("sign") == "-":
            value = -value
        bits = 0
        if m.group("blade"):
            raw = m.group("blade")[1:].strip("{}")
            indices = [int(s) for s in raw.split(",")] if "," in raw or "{" in m.group("blade") else [int(c) for c in raw]
            if len(set(indices)) != len(indices) or list(indices) != sorted(indices):
                raise ValueError(f"blade indices must be strictly increasing: {m.group('blade')}")
            if any(not 1 <= i <= dim for i in indices):
                raise DimensionError(f"blade {m.group('blade')} out of range for dimension {dim}")
            bits = indices_to_bits(indices)
        coeffs[bits] = coeffs.get(bits, 0) + value
        pos = m.end()
        first = False
    return Multivector(dim, coeffs, exact)


def grade_dims(dim: int) -> list[int]:
    return [comb(dim, k) for k in range(dim + 1)]
