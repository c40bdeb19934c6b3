"""Exact rational linear algebra on small dense matrices.

Matrices are immutable tuples of tuples of ``fractions.Fraction``.  Floats
are dyadic rationals, so conversion through :func:`as_fraction` is lossless
and every computation here (rank, null space, determinant, inverse) is
exact.  Sizes stay at desk scale, so no attempt is made to be fast beyond
avoiding gratuitous copies.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

Rat = Fraction
Row = tuple[Fraction, ...]
Mat = tuple[Row, ...]


def as_fraction(x) -> Fraction:
    """Convert int/float/str/Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def mat(rows: Iterable[Iterable]) -> Mat:
    m = tuple(tuple(as_fraction(x) for x in row) for row in rows)
    if m and any(len(row) != len(m[0]) for row in m):
        raise ValueError("ragged matrix")
    return m


def vec(entries: Iterable) -> Row:
    return tuple(as_fraction(x) for x in entries)


def shape(m: Mat) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def identity(n: int) -> Mat:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def zeros(r: int, c: int) -> Mat:
    zero = Fraction(0)
    return tuple(tuple(zero for _ in range(c)) for _ in range(r))


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m)) if m else ()


def matmul(a: Mat, b: Mat) -> Mat:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch: {ra}x{ca} @ {rb}x{cb}")
    bt = transpose(b)
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def matvec(a: Mat, v: Sequence[Fraction]) -> Row:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def hstack(a: Mat, b: Mat) -> Mat:
    if len(a) != len(b):
        raise ValueError("row count mismatch in hstack")
    return tuple(ra + rb for ra, rb in zip(a, b))


def scale(m: Mat, c) -> Mat:
    c = as_fraction(c)
    return tuple(tuple(c * x for x in row) for row in m)


def add(a: Mat, b: Mat) -> Mat:
    if shape(a) != shape(b):
        raise ValueError("shape mismatch in add")
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Mat, b: Mat) -> Mat:
    return add(a, scale(b, -1))


def is_zero(m: Mat) -> bool:
    return all(x == 0 for row in m for x in row)


def rref(m: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form with the list of pivot columns."""
    rows = [list(row) for row in m]
    nr, nc = shape(m)
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        pivot = next((i for i in range(r, nr) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(nr):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return tuple(tuple(row) for row in rows), tuple(pivots)


def rank(m: Mat) -> int:
    return len(rref(m)[1])


def nullspace(m: Mat) -> Mat:
    """Columns spanning ker(m), as an nc x (nc - rank) matrix.

    Free variables are set to 1 one at a time, in column order."""
    red, pivots = rref(m)
    nr, nc = shape(m)
    free = [c for c in range(nc) if c not in pivots]
    cols: list[list[Fraction]] = []
    for f in free:
        col = [Fraction(0)] * nc
        col[f] = Fraction(1)
        for r, p in enumerate(pivots):
            col[p] = -red[r][f]
        cols.append(col)
    return tuple(tuple(col[i] for col in cols) for i in range(nc))


def det(m: Mat) -> Fraction:
    nr, nc = shape(m)
    if nr != nc:
        raise ValueError("determinant of a non-square matrix")
    rows = [list(row) for row in m]
    result = Fraction(1)
    for c in range(nc):
        pivot = next((i for i in range(c, nr) if rows[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            result = -result
        result *= rows[c][c]
        inv_pv = 1 / rows[c][c]
        for i in range(c + 1, nr):
            if rows[i][c] != 0:
                f = rows[i][c] * inv_pv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return result


def inv(m: Mat) -> Mat:
    nr, nc = shape(m)
    if nr != nc:
        raise ValueError("inverse of a non-square matrix")
    red, pivots = rref(hstack(m, identity(nr)))
    if len(pivots) != nr or any(p >= nr for p in pivots):
        raise ValueError("matrix is singular")
    return tuple(row[nr:] for row in red)


def solve(a: Mat, b: Mat) -> Mat:
    """Exact solution X of a @ X = b for square invertible a."""
    return matmul(inv(a), b)


def from_sparse(rows: Sequence[Mapping[str, Fraction]], keys: Sequence[str]) -> Mat:
    zero = Fraction(0)
    return tuple(tuple(row.get(k, zero) for k in keys) for row in rows)


def to_float(m: Mat) -> np.ndarray:
    a = np.array([[float(x) for x in row] for row in m], dtype=np.float64)
    a.flags.writeable = False
    return a


def vec_to_float(v: Sequence[Fraction]) -> np.ndarray:
    a = np.array([float(x) for x in v], dtype=np.float64)
    a.flags.writeable = False
    return a
