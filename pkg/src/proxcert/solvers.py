"""Exact desk-scale solvers for standard-form LP, IP and MIP.

Inputs and outputs are :class:`fractions.Fraction`; the simplex tableau uses
GMP rationals for speed. Bland's rule throughout keeps results deterministic
and rules out cycling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg
from ._config import enumeration_cap
from .errors import CertificationError, PreconditionError, RankError, ResourceLimitError, ValidationError


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    RESOURCE_LIMIT = "resource-limit"


@dataclass(frozen=True)
class StandardInstance:
    """``max c^T z  s.t.  A z = b, z >= 0``."""

    A: Tuple[Tuple[int, ...], ...]
    b: Tuple[int, ...]
    c: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(r) for r in self.A))
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", tuple(self.c))

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.c)

    def validate(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValidationError("instance needs m >= 1 and n >= 1")
        if any(len(r) != self.n for r in self.A):
            raise ValidationError("A has rows of the wrong length (expected n columns)")
        if len(self.b) != self.m:
            raise ValidationError("len(b) != m")
        if self.m > self.n:
            raise ValidationError("m > n")
        if linalg.rank(self.A) < self.m:
            raise ValidationError("rank(A) < m")


@dataclass(frozen=True)
class MipInstance:
    base: StandardInstance
    integral_indices: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "integral_indices", frozenset(self.integral_indices))

    def validate(self) -> None:
        self.base.validate()
        if not all(0 <= i < self.base.n for i in self.integral_indices):
            raise ValidationError("integral_indices not a subset of {0..n-1}")


@dataclass(frozen=True)
class LpVertex:
    x: Tuple[Fraction, ...]
    basis: Tuple[int, ...]
    objective: Fraction


@dataclass(frozen=True)
class IpSolution:
    z: Tuple[Fraction, ...]
    objective: Fraction

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.z) if v != 0)

    def as_ints(self) -> List[int]:
        return [int(v) for v in self.z]


@dataclass
class Limits:
    node_limit: int = 200_000
    subset_cap: Optional[int] = None


# ---------------------------------------------------------------------------
# simplex core


@dataclass
class _LpResult:
    status: SolveStatus
    x: Optional[List[Fraction]] = None
    basis: Optional[List[int]] = None
    objective: Optional[Fraction] = None


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _frac(q: mpq) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _pivot(T: List[List[Fraction]], obj: List[Fraction], r: int, c: int) -> None:
    row = T[r]
    inv = 1 / row[c]
    if inv != 1:
        row = [v * inv for v in row]
        T[r] = row
    nz = [(j, v) for j, v in enumerate(row) if v]
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                for j, v in nz:
                    other[j] -= f * v
    f = obj[c]
    if f:
        for j, v in nz:
            obj[j] -= f * v


def _bland(T, obj, basis, allowed: int) -> SolveStatus:
    # obj holds reduced costs for a maximisation; last entry is -objective
    while True:
        enter = next((j for j in range(allowed) if obj[j] > 0), None)
        if enter is None:
            return SolveStatus.OPTIMAL
        best, leave = None, None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return SolveStatus.UNBOUNDED
        _pivot(T, obj, leave, enter)
        basis[leave] = enter


def simplex(A: Sequence[Sequence], b: Sequence, c: Sequence) -> _LpResult:
    """Two-phase simplex for ``max c x, A x = b, x >= 0`` over the rationals.

    Redundant equality rows are tolerated (dropped after phase one), so the
    routine also serves restricted and auxiliary systems. The tableau runs on
    GMP rationals; results are returned as :class:`Fraction`.
    """
    m = len(A)
    n = len(c)
    T = []
    for row, rhs in zip(A, b):
        row = [_q(v) for v in row]
        rhs = _q(rhs)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        T.append(row + [mpq(int(i == len(T))) for i in range(m)] + [rhs])
    basis = [n + i for i in range(m)]
    # phase one: maximise -sum(artificials)
    obj = [mpq(0)] * (n + m + 1)
    for row in T:
        for j in range(n):
            obj[j] += row[j]
        obj[-1] += row[-1]
    _bland(T, obj, basis, n)
    if obj[-1] != 0:
        return _LpResult(SolveStatus.INFEASIBLE)
    # drive zero-level artificials out of the basis; drop rows that are redundant
    i = 0
    while i < len(T):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, obj, i, col)
            basis[i] = col
        i += 1
    T = [row[:n] + [row[-1]] for row in T]
    obj = [_q(v) for v in c] + [mpq(0)]
    for i, j in enumerate(basis):
        f = obj[j]
        if f:
            obj = [o - f * v for o, v in zip(obj, T[i])]
    status = _bland(T, obj, basis, n)
    if status is SolveStatus.UNBOUNDED:
        return _LpResult(status)
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = _frac(T[i][-1])
    value = sum((Fraction(cj) * xj for cj, xj in zip(c, x)), Fraction(0))
    return _LpResult(SolveStatus.OPTIMAL, x, list(basis), value)


def _bounded_lp(A, b, c, lower: Sequence[int], upper: Sequence[Optional[int]]) -> _LpResult:
    """LP with ``lower <= x <= upper`` via shift ``x = lower + y`` and slack rows."""
    n = len(c)
    if any(u is not None and u < l for l, u in zip(lower, upper)):
        return _LpResult(SolveStatus.INFEASIBLE)
    b2 = [Fraction(bi) - sum(Fraction(a) * l for a, l in zip(row, lower)) for row, bi in zip(A, b)]
    capped = [j for j in range(n) if upper[j] is not None]
    k = len(capped)
    rows = [list(row) + [0] * k for row in A]
    for s, j in enumerate(capped):
        r = [0] * (n + k)
        r[j] = 1
        r[n + s] = 1
        rows.append(r)
        b2.append(Fraction(upper[j] - lower[j]))
    res = simplex(rows, b2, list(c) + [0] * k)
    if res.status is not SolveStatus.OPTIMAL:
        return res
    x = [res.x[j] + lower[j] for j in range(n)]
    value = sum((Fraction(cj) * xj for cj, xj in zip(c, x)), Fraction(0))
    return _LpResult(SolveStatus.OPTIMAL, x, res.basis, value)


def _check_vertex(inst: StandardInstance, v: LpVertex) -> None:
    A = inst.A
    if linalg.matvec(A, v.x) != [Fraction(bi) for bi in inst.b]:
        raise CertificationError("LP vertex violates A x = b")
    if any(xi < 0 for xi in v.x):
        raise CertificationError("LP vertex has a negative component")
    if any(v.x[j] != 0 for j in range(inst.n) if j not in v.basis):
        raise CertificationError("LP vertex has a nonzero nonbasic component")
    if linalg.rank(linalg.columns(A, v.basis)) != len(v.basis):
        raise CertificationError("LP basis columns are dependent")


def lp_solve(inst: StandardInstance) -> tuple[SolveStatus, Optional[LpVertex]]:
    """Optimal basic feasible solution of the LP relaxation."""
    if linalg.rank(inst.A) < inst.m:
        raise RankError("rank(A) < m")
    res = simplex(inst.A, inst.b, inst.c)
    if res.status is not SolveStatus.OPTIMAL:
        return res.status, None
    v = LpVertex(tuple(res.x), tuple(res.basis), res.objective)
    _check_vertex(inst, v)
    return SolveStatus.OPTIMAL, v


# ---------------------------------------------------------------------------
# branch and bound


def _is_integral(v: Fraction) -> bool:
    return v.denominator == 1


EXACT_SUBDET_LIMIT = 20_000


def _subdet_bound(A) -> int:
    """Upper bound on every square minor of ``[A; I]``.

    Exact (largest minor of ``A``) when few enough minors exist, otherwise the
    Hadamard bound from the row norms.
    """
    rows = [list(map(int, r)) for r in A]
    m = len(rows)
    n = len(rows[0]) if rows else 0
    if sum(math.comb(m, k) * math.comb(n, k) for k in range(1, min(m, n) + 1)) <= EXACT_SUBDET_LIMIT:
        best = 1
        for k in range(1, min(m, n) + 1):
            for R in combinations(range(m), k):
                for C in combinations(range(n), k):
                    best = max(best, abs(linalg.det([[rows[i][j] for j in C] for i in R])))
        return best
    sq = 1
    for row in rows:
        sq *= max(1, sum(v * v for v in row))
    return math.isqrt(sq) + 1


def _branch_and_bound(A, b, c, integral: Sequence[int], limits: Limits,
                      lower=None, upper=None) -> tuple[SolveStatus, Optional[IpSolution], int]:
    n = len(c)
    integral = sorted(integral)
    int_set = set(integral)
    # with integral c and every variable integral, objective values are integers
    integer_objective = len(int_set) == n and all(Fraction(v).denominator == 1 for v in c)
    lower = list(lower) if lower is not None else [0] * n
    upper = list(upper) if upper is not None else [None] * n
    coset = None
    if integer_objective:
        # integer points are z0 + K w, so c z lies in c z0 + g Z
        lat = linalg.integer_solutions(A, b, n) if all(Fraction(v).denominator == 1 for v in b) else None
        if lat is not None and not lat.feasible:
            return SolveStatus.INFEASIBLE, None, 0
        if lat is not None:
            g = 0
            for k in range(len(lat.kernel[0]) if lat.kernel else 0):
                g = math.gcd(g, sum(int(cj) * row[k] for cj, row in zip(c, lat.kernel)))
            coset = (sum(int(cj) * v for cj, v in zip(c, lat.particular)), g)
    best: Optional[IpSolution] = None
    stack = [(lower, upper)]
    nodes = 0
    root = True
    while stack:
        lo, up = stack.pop()
        nodes += 1
        if nodes > limits.node_limit:
            return SolveStatus.RESOURCE_LIMIT, best, nodes
        res = _bounded_lp(A, b, c, lo, up)
        if res.status is SolveStatus.UNBOUNDED:
            if root:
                return SolveStatus.UNBOUNDED, None, nodes
            raise CertificationError("branch node unbounded although the root LP is bounded")
        if res.status is SolveStatus.INFEASIBLE:
            root = False
            continue
        if root:
            # some optimal solution lies within l_inf distance n * Δ of any
            # optimal LP solution (Cook et al.); children leaving that box are
            # clipped or dropped, which keeps the search finite
            radius = n * _subdet_bound(A)
            box_lo = [math.ceil(x - radius) for x in res.x]
            box_up = [math.floor(x + radius) for x in res.x]
            root = False
        bound = math.floor(res.objective) if integer_objective else res.objective
        if coset is not None:
            base, g = coset
            bound = base + g * math.floor((res.objective - base) / g) if g else base
        if best is not None and bound <= best.objective:
            continue
        frac = [(abs(res.x[j] - math.floor(res.x[j]) - Fraction(1, 2)), j)
                for j in integral if not _is_integral(res.x[j])]
        if not frac:
            best = IpSolution(tuple(res.x), res.objective)
            continue
        _, j = min(frac)  # most fractional, lowest index on ties
        fl = math.floor(res.x[j])
        ceil_lo = max(fl + 1, box_lo[j])
        if ceil_lo <= box_up[j] and (up[j] is None or ceil_lo <= up[j]):
            child = list(lo)
            child[j] = ceil_lo
            stack.append((child, up))
        floor_up = min(fl, box_up[j])
        if floor_up >= max(lo[j], box_lo[j]):
            child = list(up)
            child[j] = floor_up
            stack.append((lo, child))
    if best is None:
        return SolveStatus.INFEASIBLE, None, nodes
    return SolveStatus.OPTIMAL, best, nodes


def ip_solve(inst: StandardInstance, limits: Optional[Limits] = None) -> tuple[SolveStatus, Optional[IpSolution]]:
    """Exact branch-and-bound for the pure integer program.

    Depth-first, floor child first, branching on the most fractional variable.
    When the node limit is hit the best incumbent (if any) is returned with a
    ``RESOURCE_LIMIT`` status. An unbounded root relaxation is reported as
    unbounded; with rational data and a feasible IP the IP is then unbounded too.
    """
    if linalg.rank(inst.A) < inst.m:
        raise RankError("rank(A) < m")
    status, sol, _ = _branch_and_bound(inst.A, inst.b, inst.c, range(inst.n), limits or Limits())
    return status, sol


def mip_solve(inst: MipInstance, limits: Optional[Limits] = None) -> tuple[SolveStatus, Optional[IpSolution]]:
    base = inst.base
    if linalg.rank(base.A) < base.m:
        raise RankError("rank(A) < m")
    status, sol, _ = _branch_and_bound(base.A, base.b, base.c, inst.integral_indices, limits or Limits())
    return status, sol


# ---------------------------------------------------------------------------
# exhaustive oracle


@dataclass(frozen=True)
class OracleResult:
    objective: Optional[int]
    optimal: List[Tuple[int, ...]]


def ip_solve_oracle(inst: StandardInstance, box: Sequence[int], cap: Optional[int] = None) -> OracleResult:
    """Enumerate every ``0 <= z <= box`` with ``A z = b``; return all maximisers.

    Independent of the simplex and branch-and-bound code. Row-range pruning
    skips partial assignments that can no longer reach ``b``.
    """
    n = inst.n
    if len(box) != n or any(v < 0 for v in box):
        raise PreconditionError("box must be a nonnegative integer vector of length n")
    limit = enumeration_cap(cap)
    size = 1
    for v in box:
        size *= v + 1
    if size > limit:
        raise ResourceLimitError(f"oracle box has {size} points, above the cap {limit}")
    A, b, c = inst.A, inst.b, inst.c
    m = inst.m
    # remaining reach of columns j.. for each row
    lo_tail = [[0] * (n + 1) for _ in range(m)]
    hi_tail = [[0] * (n + 1) for _ in range(m)]
    for i in range(m):
        for j in range(n - 1, -1, -1):
            a = A[i][j] * box[j]
            lo_tail[i][j] = lo_tail[i][j + 1] + min(0, a)
            hi_tail[i][j] = hi_tail[i][j + 1] + max(0, a)
    best_val: Optional[int] = None
    best: List[Tuple[int, ...]] = []
    z = [0] * n

    def rec(j: int, resid: List[int], val: int) -> None:
        nonlocal best_val, best
        if j == n:
            if all(r == 0 for r in resid):
                if best_val is None or val > best_val:
                    best_val, best = val, [tuple(z)]
                elif val == best_val:
                    best.append(tuple(z))
            return
        for i in range(m):
            if not lo_tail[i][j] <= resid[i] <= hi_tail[i][j]:
                return
        col = [A[i][j] for i in range(m)]
        for v in range(box[j] + 1):
            z[j] = v
            rec(j + 1, [r - a * v for r, a in zip(resid, col)], val + c[j] * v)
        z[j] = 0

    rec(0, list(b), 0)
    return OracleResult(best_val, best)


# ---------------------------------------------------------------------------
# sparsity


@dataclass(frozen=True)
class MinSupportResult:
    solution: Optional[IpSolution]
    size: Optional[int]
    certified: bool


def _restricted_optimum(inst: StandardInstance, cols: Sequence[int], integral: Iterable[int],
                        limits: Limits, target: Fraction) -> tuple[SolveStatus, Optional[IpSolution]]:
    # the cut c_T z >= target keeps the search finite when the restricted
    # polyhedron is unbounded but holds no integer point
    if not cols:
        if all(v == 0 for v in inst.b) and target <= 0:
            return SolveStatus.OPTIMAL, IpSolution(tuple(Fraction(0) for _ in range(inst.n)), Fraction(0))
        return SolveStatus.INFEASIBLE, None
    c = [inst.c[j] for j in cols]
    A = [[row[j] for j in cols] + [0] for row in inst.A] + [c + [-1]]
    b = list(inst.b) + [target]
    pos = {j: k for k, j in enumerate(cols)}
    ints = [pos[j] for j in integral if j in pos]
    if len(ints) == len(cols):
        ints.append(len(cols))  # the cut's slack is integral too
    status, sol, _ = _branch_and_bound(A, b, c + [0], ints, limits)
    if sol is None:
        return status, None
    z = [Fraction(0)] * inst.n
    for k, j in enumerate(cols):
        z[j] = sol.z[k]
    return status, IpSolution(tuple(z), sol.objective)


def min_support(inst: StandardInstance | MipInstance, optimal_value, limits: Optional[Limits] = None) -> MinSupportResult:
    """Optimal solution of minimum support by exhaustive search over column subsets.

    Cardinalities are tried in increasing order and subsets lexicographically,
    so the first hit has minimum support and the lexicographically smallest
    support set among those. If the subset cap stops the search the best
    solution found so far is returned with ``certified=False``.
    """
    limits = limits or Limits()
    if isinstance(inst, MipInstance):
        base, integral = inst.base, sorted(inst.integral_indices)
    else:
        base, integral = inst, list(range(inst.n))
    target = Fraction(optimal_value)
    limit = enumeration_cap(limits.subset_cap)
    tried = 0
    for s in range(base.n + 1):
        for cols in combinations(range(base.n), s):
            tried += 1
            if tried > limit:
                return MinSupportResult(None, None, False)
            status, sol = _restricted_optimum(base, cols, integral, limits, target)
            if status is SolveStatus.RESOURCE_LIMIT:
                raise ResourceLimitError("branch-and-bound node limit hit inside min_support")
            if sol is not None and sol.objective == target:
                return MinSupportResult(sol, len(sol.support), True)
            if sol is not None and sol.objective > target:
                raise PreconditionError("supplied optimal value is not optimal")
    return MinSupportResult(None, None, True)


# ---------------------------------------------------------------------------
# standing assumptions


@dataclass
class AssumptionReport:
    full_row_rank: bool
    lp_feasible: Optional[bool] = None
    lp_bounded: Optional[bool] = None
    ip_feasible: Optional[bool] = None
    ip_status: Optional[str] = None
    lp_witness: Optional[List[str]] = None
    ip_witness: Optional[List[str]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.full_row_rank and self.lp_feasible and self.lp_bounded and self.ip_feasible)

    def as_dict(self) -> dict:
        return {
            "full_row_rank": self.full_row_rank,
            "lp_feasible": self.lp_feasible,
            "lp_bounded": self.lp_bounded,
            "ip_feasible": self.ip_feasible,
            "ip_status": self.ip_status,
            "lp_witness": self.lp_witness,
            "ip_witness": self.ip_witness,
            "all_hold": self.ok,
            "notes": self.notes,
        }


def check_assumptions(inst: StandardInstance, limits: Optional[Limits] = None) -> AssumptionReport:
    """Report rank, LP feasibility/boundedness and IP feasibility, with witnesses."""
    full = linalg.rank(inst.A) == inst.m
    rep = AssumptionReport(full_row_rank=full)
    if not full:
        rep.notes.append("rank(A) < m")
        return rep
    res = simplex(inst.A, inst.b, inst.c)
    rep.lp_feasible = res.status is not SolveStatus.INFEASIBLE
    rep.lp_bounded = res.status is SolveStatus.OPTIMAL if rep.lp_feasible else None
    if res.x is not None:
        rep.lp_witness = [str(v) for v in res.x]
    if not rep.lp_feasible:
        rep.ip_feasible = False
        rep.ip_status = SolveStatus.INFEASIBLE.value
        return rep
    if not rep.lp_bounded:
        rep.notes.append("LP relaxation unbounded")
        # feasibility alone: solve with a zero objective
        status, sol, _ = _branch_and_bound(inst.A, inst.b, [0] * inst.n, range(inst.n), limits or Limits())
        if sol is not None:
            rep.ip_feasible = True
        elif status is SolveStatus.INFEASIBLE:
            rep.ip_feasible = False
        rep.ip_status = SolveStatus.UNBOUNDED.value if sol is not None else status.value
        if sol is not None:
            rep.ip_witness = [str(v) for v in sol.z]
        return rep
    status, sol = ip_solve(inst, limits)
    rep.ip_status = status.value
    rep.ip_feasible = True if sol is not None else (False if status is SolveStatus.INFEASIBLE else None)
    if sol is not None:
        rep.ip_witness = [str(v) for v in sol.z]
    return rep
