"""Exact rational linear algebra on dense matrices.

Matrices are lists of rows; entries are ints or fractions.Fraction.  Rank
and echelon computations clear denominators row-wise and then run
fraction-free (Bareiss-style) integer elimination, so no rounding can occur
anywhere.  Kernels and solves back-substitute exactly over the rationals.

The matrices this engine sees are small (hundreds of rows at most), so the
cubic cost of dense elimination with big integers is perfectly acceptable.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Vector = list[Fraction]
Matrix = list[list[Fraction]]


def _int_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Copy, clearing denominators row by row (kernel and rank invariant)."""
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        denom = 1
        for x in fr:
            denom = denom * x.denominator // gcd(denom, x.denominator)
        out.append([int(x * denom) for x in fr])
    return out


def _echelon_int(m: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form in place; returns (m, pivot columns).

    One-step Bareiss: every row below the pivot is updated as
    (p*row - f*pivot_row) / prev, where prev is the previous pivot.  The
    division is exact (entries stay minors of the original matrix); rows
    with f = 0 still get the p/prev rescaling, which the divisibility
    invariant of later steps depends on.
    """
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        pr = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pr is None:
            continue
        if pr != r:
            m[r], m[pr] = m[pr], m[r]
        p = m[r][c]
        for i in range(r + 1, nrows):
            mi, mr = m[i], m[r]
            f = mi[c]
            for j in range(c, ncols):
                mi[j] = (p * mi[j] - f * mr[j]) // prev
        pivots.append(c)
        prev = p
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows or not rows[0]:
        return 0
    _, pivots = _echelon_int(_int_rows(rows))
    return len(pivots)


def kernel_basis(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of the right null space {x : A x = 0}, as Fraction vectors.

    An empty constraint list leaves the whole space free.
    """
    if ncols == 0:
        return []
    if not rows:
        return [_unit(ncols, j) for j in range(ncols)]
    ech, pivots = _echelon_int(_int_rows(rows))
    pivot_set = set(pivots)
    free = [j for j in range(ncols) if j not in pivot_set]
    basis = []
    for f in free:
        x: list[Fraction] = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        # rows are in echelon order; solve pivot variables bottom-up
        for i in range(len(pivots) - 1, -1, -1):
            c = pivots[i]
            s = sum((ech[i][j] * x[j] for j in range(c + 1, ncols)), Fraction(0))
            x[c] = -s / ech[i][c]
        basis.append(x)
    return basis


def _unit(n: int, j: int) -> Vector:
    v = [Fraction(0)] * n
    v[j] = Fraction(1)
    return v


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    if not a:
        return []
    inner = len(b)
    out = []
    for row in a:
        assert len(row) == inner
        out.append(
            [
                sum((Fraction(row[k]) * Fraction(b[k][j]) for k in range(inner)), Fraction(0))
                for j in range(len(b[0]) if b else 0)
            ]
        )
    return out


def mat_vec(a: Sequence[Sequence], v: Sequence) -> Vector:
    return [
        sum((Fraction(row[k]) * Fraction(v[k]) for k in range(len(v))), Fraction(0))
        for row in a
    ]


def transpose(a: Sequence[Sequence]) -> Matrix:
    if not a:
        return []
    return [[Fraction(a[i][j]) for i in range(len(a))] for j in range(len(a[0]))]


def is_zero(rows: Sequence[Sequence]) -> bool:
    return all(x == 0 for row in rows for x in row)


def identity(n: int) -> Matrix:
    return [_unit(n, i) for i in range(n)]


def solve_columns(a_cols: Sequence[Vector], b_cols: Sequence[Vector]) -> Matrix:
    """Solve A X = B column-wise where A is given by columns of full rank.

    Returns X with columns expressing each column of B in terms of A's.
    Raises ValueError if some column of B lies outside the span.
    """
    n = len(a_cols[0]) if a_cols else (len(b_cols[0]) if b_cols else 0)
    na, nb = len(a_cols), len(b_cols)
    # augmented rows [A | B]
    aug = [
        [Fraction(a_cols[j][i]) for j in range(na)]
        + [Fraction(b_cols[j][i]) for j in range(nb)]
        for i in range(n)
    ]
    ech, pivots = _echelon_int(_int_rows(aug))
    if any(p >= na for p in pivots):
        raise ValueError("solve_columns: right-hand side not in column span")
    x = [[Fraction(0)] * nb for _ in range(na)]
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        for b in range(nb):
            s = sum(
                (Fraction(ech[i][j]) * x[j][b] for j in range(c + 1, na)), Fraction(0)
            )
            x[c][b] = (Fraction(ech[i][na + b]) - s) / ech[i][c]
    return x


def column_stack(vectors: Sequence[Vector]) -> Matrix:
    """Rows-from-columns helper: returns the matrix whose columns are `vectors`."""
    if not vectors:
        return []
    n = len(vectors[0])
    return [[Fraction(v[i]) for v in vectors] for i in range(n)]
