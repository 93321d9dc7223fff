"""Small exact linear algebra over :class:`fractions.Fraction`.

Matrices are lists of rows.  Everything here is generic over the scalar type,
so the same routines run on floats, but pivots are chosen as "first nonzero",
which is only numerically sensible for exact input.
"""
from fractions import Fraction


def to_fraction_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def det(rows):
    m = [list(r) for r in rows]
    size = len(m)
    if size == 0:
        return Fraction(1)
    result = 1
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return m[0][0] * 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            result = -result
        p = m[col][col]
        result *= p
        for r in range(col + 1, size):
            f = m[r][col]
            if f != 0:
                f = f / p
                row_r, row_c = m[r], m[col]
                for c in range(col + 1, size):
                    row_r[c] -= f * row_c[c]
    return result


def rank(rows):
    m = [list(r) for r in rows if any(x != 0 for x in r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][col]
        for i in range(r + 1, len(m)):
            f = m[i][col]
            if f != 0:
                f = f / p
                for c in range(col, ncols):
                    m[i][c] -= f * m[r][c]
        r += 1
        if r == len(m):
            break
    return r


def inverse(rows):
    size = len(rows)
    m = [list(r) + [Fraction(int(i == j)) for j in range(size)] for i, r in enumerate(rows)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(size):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[size:] for row in m]


def matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def leading_minors(rows):
    return [det([r[:k] for r in rows[:k]]) for k in range(1, len(rows) + 1)]


def submatrix(rows, row_idx, col_idx):
    return [[rows[i][j] for j in col_idx] for i in row_idx]
