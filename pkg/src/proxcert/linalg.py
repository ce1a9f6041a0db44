"""Exact integer and rational linear algebra.

Matrices are plain lists of rows. Integer entries are Python ``int`` (unbounded);
rational results are :class:`fractions.Fraction`. Nothing here touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence

from .errors import DimensionError, RankError, SingularMatrixError

IntMatrix = List[List[int]]


def shape(M: Sequence[Sequence], ncols: int | None = None) -> tuple[int, int]:
    rows = len(M)
    if rows == 0:
        return 0, (ncols or 0)
    cols = len(M[0])
    if any(len(r) != cols for r in M):
        raise DimensionError("ragged matrix")
    return rows, cols


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(X: Sequence[Sequence], Y: Sequence[Sequence]) -> list:
    if X and Y and len(X[0]) != len(Y):
        raise DimensionError(f"cannot multiply {len(X)}x{len(X[0])} by {len(Y)}x{len(Y[0])}")
    cols = len(Y[0]) if Y else 0
    return [[sum(r[k] * Y[k][j] for k in range(len(Y))) for j in range(cols)] for r in X]


def matvec(M: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * x for a, x in zip(row, v)) for row in M]


def transpose(M: Sequence[Sequence]) -> list:
    return [list(col) for col in zip(*M)]


def columns(M: Sequence[Sequence], idx: Sequence[int]) -> list:
    return [[row[j] for j in idx] for row in M]


def det(M: Sequence[Sequence[int]]) -> int:
    """Determinant by Bareiss fraction-free elimination.

    Every intermediate division is exact, so integer input stays integer.
    """
    n, cols = shape(M)
    if n != cols:
        raise DimensionError(f"determinant of non-square {n}x{cols} matrix")
    if n == 0:
        return 1
    a = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def rank(M: Sequence[Sequence[int]]) -> int:
    """Exact rank over the rationals (fraction-free elimination)."""
    rows, cols = shape(M)
    if rows == 0 or cols == 0:
        return 0
    a = [list(r) for r in M]
    r = 0
    prev = 1
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, rows):
            f = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c + 1, cols):
                row_i[j] = (row_i[j] * p - f * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r


def solve_square(M: Sequence[Sequence[int]], v: Sequence[int]) -> List[Fraction]:
    """Return the exact rational solution of ``M x = v``."""
    n, cols = shape(M)
    if n != cols:
        raise DimensionError("solve_square needs a square matrix")
    if len(v) != n:
        raise DimensionError("right-hand side length mismatch")
    a = [[Fraction(x) for x in row] + [Fraction(rhs)] for row, rhs in zip(M, v)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [a[i][n] for i in range(n)]


def rref(M: Sequence[Sequence], ncols: int | None = None) -> tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    rows, cols = shape(M, ncols)
    a = [[Fraction(x) for x in row] for row in M]
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a[:r], pivots


def primitive(v: Sequence) -> List[int]:
    """Scale a rational vector to coprime integers, first nonzero entry positive."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return ints


def nullspace_dir(M: Sequence[Sequence[int]], ncols: int | None = None) -> List[int]:
    """Primitive integer generator of a one-dimensional kernel.

    ``ncols`` is needed only when ``M`` has no rows. Sign convention: the first
    nonzero component is positive.
    """
    _, cols = shape(M, ncols)
    R, pivots = rref(M, cols)
    if len(pivots) != cols - 1:
        raise RankError(f"kernel is not one-dimensional: rank {len(pivots)}, {cols} columns")
    free = next(j for j in range(cols) if j not in pivots)
    u = [Fraction(0)] * cols
    u[free] = Fraction(1)
    for row, p in zip(R, pivots):
        u[p] = -row[free]
    return primitive(u)


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``a*x + b*y = g``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class HnfResult:
    unimodular: IntMatrix
    transformed: IntMatrix
    diagonal: List[int]


def hnf_row_style(B: Sequence[Sequence[int]]) -> HnfResult:
    """Row-style Hermite normal form ``U B`` of a nonsingular square matrix.

    ``U`` is unimodular and accumulated explicitly. The result is upper
    triangular with positive diagonal and each entry above the diagonal
    reduced into ``[0, d_j)``, which makes it canonical.
    """
    n, cols = shape(B)
    if n != cols:
        raise DimensionError("hnf_row_style needs a square matrix")
    if det(B) == 0:
        raise SingularMatrixError("hnf_row_style needs a nonsingular matrix")
    T = [list(r) for r in B]
    U = identity(n)

    def combine(j, i, p, q, r, s):
        # rows (j, i) <- (p*row_j + q*row_i, r*row_j + s*row_i)
        for mat in (T, U):
            rj, ri = mat[j], mat[i]
            mat[j] = [p * x + q * y for x, y in zip(rj, ri)]
            mat[i] = [r * x + s * y for x, y in zip(rj, ri)]

    for j in range(n):
        for i in range(j + 1, n):
            b = T[i][j]
            if b == 0:
                continue
            a = T[j][j]
            g, x, y = xgcd(a, b)
            combine(j, i, x, y, -b // g, a // g)
        if T[j][j] < 0:
            T[j] = [-x for x in T[j]]
            U[j] = [-x for x in U[j]]
        d = T[j][j]
        for i in range(j):
            q = T[i][j] // d
            if q:
                T[i] = [x - q * y for x, y in zip(T[i], T[j])]
                U[i] = [x - q * y for x, y in zip(U[i], U[j])]
    return HnfResult(unimodular=U, transformed=T, diagonal=[T[i][i] for i in range(n)])


@dataclass(frozen=True)
class IntegerSolutions:
    """All integer solutions of ``A z = b`` as ``particular + kernel · w``, ``w`` integer."""

    particular: Optional[List[int]]
    kernel: IntMatrix  # columns form a lattice basis of {z integer : A z = 0}

    @property
    def feasible(self) -> bool:
        return self.particular is not None


def integer_solutions(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int | None = None) -> IntegerSolutions:
    """Solve ``A z = b`` over the integers by unimodular column reduction."""
    m, n = shape(A, ncols)
    M = [list(map(int, r)) for r in A]
    V = identity(n)

    def combine(r, j, p, q, s, t):
        # columns (r, j) <- (p*col_r + q*col_j, s*col_r + t*col_j)
        for mat in (M, V):
            for row in mat:
                x, y = row[r], row[j]
                row[r], row[j] = p * x + q * y, s * x + t * y

    pivots = []
    r = 0
    for i in range(m):
        for j in range(r + 1, n):
            if M[i][j]:
                a, c = M[i][r], M[i][j]
                g, x, y = xgcd(a, c)
                combine(r, j, x, y, -c // g, a // g)
        if r < n and M[i][r]:
            pivots.append((i, r))
            r += 1
    y = [0] * r
    pivot_of = dict(pivots)
    for i in range(m):
        # echelon form: row i only touches columns up to its pivot, and y[pivot] is still 0
        acc = int(b[i]) - sum(M[i][k] * y[k] for k in range(r))
        if i in pivot_of:
            k = pivot_of[i]
            if acc % M[i][k]:
                return IntegerSolutions(None, [row[r:] for row in V])
            y[k] = acc // M[i][k]
        elif acc:
            return IntegerSolutions(None, [row[r:] for row in V])
    z = [sum(V[j][k] * y[k] for k in range(r)) for j in range(n)]
    return IntegerSolutions(z, [row[r:] for row in V])
