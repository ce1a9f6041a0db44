"""Subdeterminant analytics: Δ_k, the general-form δ, Cauchy–Binet, max-det search."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import List, Sequence, Tuple

from . import linalg
from ._config import enumeration_cap
from .errors import DimensionError, PreconditionError, RankError, ResourceLimitError

Witness = Tuple[Tuple[int, ...], Tuple[int, ...]]


def _guard(count: int, cap: int | None, what: str) -> None:
    limit = enumeration_cap(cap)
    if count > limit:
        raise ResourceLimitError(
            f"{what} needs {count} minors, above the cap {limit}; "
            "use maxdet_local_search or raise PROXCERT_CAP"
        )


def delta_k_exact(A: Sequence[Sequence[int]], k: int, cap: int | None = None) -> tuple[int, Witness]:
    """Largest ``|det|`` over all ``k x k`` submatrices, with the first achieving (rows, cols)."""
    rows, cols = linalg.shape(A)
    if not 1 <= k <= min(rows, cols):
        raise PreconditionError(f"k={k} outside 1..{min(rows, cols)}")
    _guard(comb(rows, k) * comb(cols, k), cap, f"delta_{k}")
    if k == 1:
        best, wit = -1, ((), ())
        for i in range(rows):
            for j in range(cols):
                if abs(A[i][j]) > best:
                    best, wit = abs(A[i][j]), ((i,), (j,))
        return best, wit
    best, wit = -1, ((), ())
    for R in combinations(range(rows), k):
        sub_rows = [A[i] for i in R]
        for C in combinations(range(cols), k):
            v = abs(linalg.det([[r[j] for j in C] for r in sub_rows]))
            if v > best:
                best, wit = v, (R, C)
    return best, wit


@dataclass(frozen=True)
class DeltaReport:
    delta_k: List[int]  # delta_k[k-1] = Δ_k
    witness: List[Witness]

    @property
    def delta(self) -> int:
        return self.delta_k[-1]

    @property
    def entry_norm(self) -> int:
        return self.delta_k[0]

    def as_dict(self) -> dict:
        return {
            "delta_k": {str(k + 1): v for k, v in enumerate(self.delta_k)},
            "delta": self.delta,
            "entry_norm": self.entry_norm,
            "witness": {
                str(k + 1): {"rows": list(w[0]), "cols": list(w[1])}
                for k, w in enumerate(self.witness)
            },
        }


def delta_report(A: Sequence[Sequence[int]], cap: int | None = None) -> DeltaReport:
    rows, cols = linalg.shape(A)
    vals, wits = [], []
    for k in range(1, min(rows, cols) + 1):
        v, w = delta_k_exact(A, k, cap)
        vals.append(v)
        wits.append(w)
    return DeltaReport(vals, wits)


def gram_det(A: Sequence[Sequence[int]]) -> int:
    return linalg.det(linalg.matmul(A, linalg.transpose(A)))


def cauchy_binet_check(A: Sequence[Sequence[int]], cap: int | None = None) -> tuple[int, int, bool]:
    """Compare ``det(A A^T)`` with the sum of squared maximal minors."""
    m, n = linalg.shape(A)
    if m > n:
        raise PreconditionError("cauchy_binet_check needs rows <= cols")
    _guard(comb(n, m), cap, "cauchy_binet_check")
    lhs = gram_det(A)
    rhs = sum(linalg.det(linalg.columns(A, C)) ** 2 for C in combinations(range(n), m))
    return lhs, rhs, lhs == rhs


def stacked_general(A, B, C, n: int, d: int) -> List[List[int]]:
    """The matrix ``[[A, B], [0, C]]``; any block may be empty (``m``, ``n``, ``t`` or ``d`` zero)."""
    m = max(len(A), len(B))
    A = list(A) or [[] for _ in range(m)]
    B = list(B) or [[] for _ in range(m)]
    top = [list(A[i]) + list(B[i]) for i in range(m)]
    bottom = [[0] * n + list(c) for c in C]
    M = top + bottom
    if any(len(r) != n + d for r in M):
        raise DimensionError("general-form blocks have inconsistent widths")
    return M


def delta_general(
    A: Sequence[Sequence[int]],
    B: Sequence[Sequence[int]],
    C: Sequence[Sequence[int]],
    n: int | None = None,
    d: int | None = None,
    cap: int | None = None,
) -> tuple[int, Witness]:
    """General-form δ: max ``|det(E)|`` over square E whose rows include all equality rows.

    The row set of E is every one of the first ``m`` rows plus any subset of the
    ``C`` rows; the column set is any subset of matching size. ``n`` and ``d``
    must be given when the blocks that would reveal them are empty.
    """
    m = max(len(A), len(B))
    t = len(C)
    if n is None:
        n = len(A[0]) if A else 0
    if d is None:
        d = len(B[0]) if B else (len(C[0]) if C else 0)
    M = stacked_general(A, B, C, n, d)
    width = n + d
    if m and linalg.rank(M[:m]) < m:
        raise RankError("rank([A, B]) < m")
    lo = max(m, 1)
    hi = min(m + t, width)
    total = sum(comb(t, s - m) * comb(width, s) for s in range(lo, hi + 1))
    _guard(total, cap, "delta_general")
    best, wit = 0, ((), ())
    first = tuple(range(m))
    for size in range(lo, hi + 1):
        for extra in combinations(range(m, m + t), size - m):
            R = first + extra
            sub_rows = [M[i] for i in R]
            for cols in combinations(range(width), size):
                v = abs(linalg.det([[r[j] for j in cols] for r in sub_rows]))
                if v > best:
                    best, wit = v, (R, cols)
    return best, wit


@dataclass(frozen=True)
class MaxDetResult:
    column_set: Tuple[int, ...]
    abs_det: int
    epsilon: Fraction
    swaps_performed: int
    history: List[int] = field(default_factory=list, compare=False)


def _greedy_columns(A: Sequence[Sequence[int]]) -> List[int]:
    # full pivoting: repeatedly take the largest remaining entry
    m, n = linalg.shape(A)
    a = [[Fraction(x) for x in row] for row in A]
    rows_left, chosen = list(range(m)), []
    for _ in range(m):
        best, bi, bj = Fraction(0), -1, -1
        for i in rows_left:
            for j in range(n):
                if j in chosen:
                    continue
                if abs(a[i][j]) > best:
                    best, bi, bj = abs(a[i][j]), i, j
        if bj < 0:
            raise RankError("rank(A) < m")
        chosen.append(bj)
        rows_left.remove(bi)
        p = a[bi][bj]
        for i in rows_left:
            f = a[i][bj] / p
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[bi])]
    return chosen


def maxdet_local_search(A: Sequence[Sequence[int]], epsilon: Fraction | int | str | None = None) -> MaxDetResult:
    """Approximate an ``m x m`` submatrix of maximum ``|det|``.

    Greedy pivoted selection, then first-improvement single-column swaps that
    are accepted only when ``|det|`` grows by a factor of at least
    ``1 + epsilon`` (default ``1/m``). Terminates because ``|det|`` is bounded.
    """
    m, n = linalg.shape(A)
    if linalg.rank(A) < m:
        raise RankError("rank(A) < m")
    eps = Fraction(1, m) if epsilon is None else Fraction(epsilon)
    if eps <= 0:
        raise PreconditionError("epsilon must be positive")
    factor = 1 + eps
    S = _greedy_columns(A)
    cur = abs(linalg.det(linalg.columns(A, S)))
    history = [cur]
    swaps = 0
    improved = True
    while improved:
        improved = False
        for j in range(n):
            if j in S:
                continue
            for pos in sorted(range(m), key=lambda p: S[p]):
                trial = S[:pos] + [j] + S[pos + 1:]
                v = abs(linalg.det(linalg.columns(A, trial)))
                if v >= factor * cur:
                    S, cur = trial, v
                    swaps += 1
                    history.append(cur)
                    improved = True
                    break
            if improved:
                break
    return MaxDetResult(tuple(sorted(S)), cur, eps, swaps, history)
