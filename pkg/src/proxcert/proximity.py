"""Constructive proximity: cone, extreme rays, Carathéodory decomposition, repair.

Given an optimal LP vertex ``x*`` and an optimal integer solution ``z̄``, the
difference ``z̄_H - x*_H`` (``H`` the union of supports) lies in a pointed cone
whose extreme rays are short integer vectors. Writing the difference as a
nonnegative combination of rays and subtracting the integer parts of the
coefficients yields an optimal integer solution close to ``x*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from . import bounds, linalg, minors
from ._config import enumeration_cap
from .errors import (
    CertificationError,
    InfeasibleConeError,
    PreconditionError,
    RankError,
    ResourceLimitError,
)
from .instances import GeneralInstance
from .solvers import (
    IpSolution,
    Limits,
    LpVertex,
    MipInstance,
    SolveStatus,
    StandardInstance,
    _branch_and_bound,
    _subdet_bound,
    ip_solve,
    ip_solve_oracle,
    lp_solve,
    simplex,
)

Vector = Tuple[Fraction, ...]


def l1(u: Sequence, v: Sequence) -> Fraction:
    return sum((abs(Fraction(a) - Fraction(b)) for a, b in zip(u, v)), Fraction(0))


def linf(u: Sequence, v: Sequence) -> Fraction:
    return max((abs(Fraction(a) - Fraction(b)) for a, b in zip(u, v)), default=Fraction(0))


def support(v: Sequence) -> Tuple[int, ...]:
    return tuple(i for i, x in enumerate(v) if x != 0)


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class ConeSpec:
    """``K = {u : E u = 0, g·u <= 0 (g in D1), g·u >= 0 (g in D2)}`` on coordinates ``H``.

    ``sign_rows`` holds every inequality row; ``d1_rows``/``d2_rows`` index it.
    """

    H: Tuple[int, ...]
    eq_rows: Tuple[Tuple[int, ...], ...]
    sign_rows: Tuple[Tuple[int, ...], ...]
    d1_rows: Tuple[int, ...]
    d2_rows: Tuple[int, ...]
    trivial: bool = False

    @property
    def dim(self) -> int:
        return len(self.H)

    def contains(self, u: Sequence) -> bool:
        if any(sum(a * x for a, x in zip(row, u)) != 0 for row in self.eq_rows):
            return False
        for r in self.d1_rows:
            if sum(a * x for a, x in zip(self.sign_rows[r], u)) > 0:
                return False
        for r in self.d2_rows:
            if sum(a * x for a, x in zip(self.sign_rows[r], u)) < 0:
                return False
        return True


def _partition(G: Sequence[Sequence[int]], z: Sequence, x: Sequence) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    d1, d2 = [], []
    for r, g in enumerate(G):
        gz = sum(a * v for a, v in zip(g, z))
        gx = sum(a * v for a, v in zip(g, x))
        (d1 if gz < gx else d2).append(r)
    return tuple(d1), tuple(d2)


def _check_feasible(inst: StandardInstance, z: Sequence, what: str) -> None:
    if len(z) != inst.n:
        raise PreconditionError(f"{what} has the wrong length")
    if any(Fraction(v) < 0 for v in z):
        raise PreconditionError(f"{what} has a negative component")
    if linalg.matvec(inst.A, z) != [Fraction(v) for v in inst.b]:
        raise PreconditionError(f"{what} violates A z = b")


def build_cone(x_star: LpVertex, z_bar: IpSolution, inst: StandardInstance,
               lp_value=None, ip_value=None) -> ConeSpec:
    """Cone of the Lemma-3 style repair for a standard-form pair.

    Optional ``lp_value``/``ip_value`` are the known optima; when given the
    pair is checked against them.
    """
    _check_feasible(inst, x_star.x, "x_star")
    _check_feasible(inst, z_bar.z, "z_bar")
    cx = sum(Fraction(c) * v for c, v in zip(inst.c, x_star.x))
    cz = sum(Fraction(c) * v for c, v in zip(inst.c, z_bar.z))
    if lp_value is not None and cx != Fraction(lp_value):
        raise PreconditionError("x_star is not LP optimal")
    if ip_value is not None and cz != Fraction(ip_value):
        raise PreconditionError("z_bar is not optimal")
    if cz > cx:
        raise PreconditionError("z_bar beats the LP optimum; x_star cannot be optimal")
    H = tuple(sorted(set(support(x_star.x)) | set(support(z_bar.z))))
    E = tuple(tuple(row[j] for j in H) for row in inst.A)
    k = len(H)
    G = tuple(tuple(-int(i == j) for j in range(k)) for i in range(k))
    xH = [x_star.x[j] for j in H]
    zH = [z_bar.z[j] for j in H]
    d1, d2 = _partition(G, zH, xH)
    trivial = linalg.rank(E) == k if k else True
    return ConeSpec(H, E, G, d1, d2, trivial)


@dataclass(frozen=True)
class Ray:
    u: Tuple[int, ...]
    tight_set: Tuple[Tuple[str, int], ...]


def enumerate_rays(cone: ConeSpec, cap: Optional[int] = None) -> List[Ray]:
    """All extreme rays of a pointed cone, as primitive integer vectors.

    Brute force over every choice of ``dim - 1`` constraints: keep the choices
    of full rank, take the kernel direction, orient it into the cone (or
    discard), and deduplicate.
    """
    k = cone.dim
    if k == 0 or cone.trivial:
        return []
    if linalg.rank(list(cone.sign_rows) + list(cone.eq_rows)) < k:
        raise PreconditionError("cone is not pointed")
    constraints = [("eq", i, row) for i, row in enumerate(cone.eq_rows)]
    constraints += [("sign", r, row) for r, row in enumerate(cone.sign_rows)]
    total = comb(len(constraints), k - 1)
    limit = enumeration_cap(cap)
    if total > limit:
        raise ResourceLimitError(f"ray enumeration needs {total} subsets, above the cap {limit}")
    seen: Dict[Tuple[int, ...], Ray] = {}
    for subset in combinations(constraints, k - 1):
        rows = [row for _, _, row in subset]
        if linalg.rank(rows) != k - 1:
            continue
        u = linalg.nullspace_dir(rows, ncols=k)
        if cone.contains(u):
            pass
        elif cone.contains([-x for x in u]):
            u = [-x for x in u]
        else:
            continue
        key = tuple(u)
        if key not in seen:
            seen[key] = Ray(key, tuple((kind, idx) for kind, idx, _ in subset))
    return list(seen.values())


@dataclass(frozen=True)
class Claim1Check:
    support_size: int
    support_ok: bool
    cramer_vector: Tuple[int, ...]
    cramer_norm: int
    scaled_ok: bool
    primitive_norm: int


def claim1_check(ray: Ray, H: Sequence[int], A: Sequence[Sequence[int]], delta: int) -> Claim1Check:
    """Check the support bound and the Cramer-rule scaling of a standard-form ray.

    The ray's support ``T`` is extended to ``m + 1`` columns of rank ``m``;
    the vector of signed maximal minors of those columns spans the same line
    and has entries bounded by Δ.
    """
    m, n = linalg.shape(A)
    T = [H[i] for i, v in enumerate(ray.u) if v != 0]
    ok_support = len(T) <= m + 1
    cols = sorted(T)
    r = linalg.rank(linalg.columns(A, cols))
    if r != len(cols) - 1:
        raise CertificationError("ray support does not have a one-dimensional kernel")
    for j in range(n):
        if r == m:
            break
        if j in cols:
            continue
        r2 = linalg.rank(linalg.columns(A, sorted(cols + [j])))
        if r2 > r:
            cols = sorted(cols + [j])
            r = r2
    if len(cols) != m + 1:
        return Claim1Check(len(T), ok_support, (), 0, False, max(abs(x) for x in ray.u))
    cramer = [(-1) ** p * linalg.det(linalg.columns(A, cols[:p] + cols[p + 1:])) for p in range(m + 1)]
    full = [0] * n
    for j, v in zip(cols, cramer):
        full[j] = v
    if any(x != 0 for x in linalg.matvec(A, full)):
        raise CertificationError("Cramer vector is not in the kernel")
    ray_full = [0] * n
    for i, v in enumerate(ray.u):
        ray_full[H[i]] = v
    if sum(a * b for a, b in zip(full, ray_full)) < 0:
        # orient the representative along the ray
        full = [-v for v in full]
    if linalg.primitive(full) != linalg.primitive(ray_full):
        raise CertificationError("Cramer vector is not parallel to the ray")
    cnorm = max(abs(x) for x in cramer)
    pnorm = max(abs(x) for x in ray.u)
    return Claim1Check(len(T), ok_support, tuple(full), cnorm, cnorm <= delta and pnorm <= cnorm, pnorm)


@dataclass(frozen=True)
class Decomposition:
    rays: Tuple[Tuple[int, ...], ...]
    lambdas: Tuple[Fraction, ...]
    rounded: Tuple[int, ...]

    @property
    def positive(self) -> int:
        return sum(1 for v in self.lambdas if v > 0)


def decompose(target: Sequence, rays: Sequence[Ray | Sequence[int]]) -> Decomposition:
    """Conic Carathéodory decomposition via a phase-one basic feasible solution."""
    vecs = [tuple(r.u) if isinstance(r, Ray) else tuple(r) for r in rays]
    target = [Fraction(v) for v in target]
    k = len(target)
    if all(v == 0 for v in target):
        lam = tuple(Fraction(0) for _ in vecs)
        return Decomposition(tuple(vecs), lam, tuple([0] * k))
    if not vecs:
        raise InfeasibleConeError("nonzero target but no rays")
    A = [[u[i] for u in vecs] for i in range(k)]
    res = simplex(A, target, [0] * len(vecs))
    if res.status is not SolveStatus.OPTIMAL:
        raise InfeasibleConeError("target is outside the cone generated by the rays")
    lam = tuple(res.x)
    recon = [sum(l * u[i] for l, u in zip(lam, vecs)) for i in range(k)]
    if recon != target:
        raise CertificationError("decomposition does not reproduce the target")
    if sum(1 for v in lam if v > 0) > k:
        raise CertificationError("more than dim positive coefficients")
    w = [sum(math.floor(l) * u[i] for l, u in zip(lam, vecs)) for i in range(k)]
    return Decomposition(tuple(vecs), lam, tuple(w))


# ---------------------------------------------------------------------------
# repair


@dataclass
class RepairResult:
    """Output of the repair step (the constructive part of a certificate)."""

    z_star: IpSolution
    l1_distance: Fraction
    cone: ConeSpec
    rays: List[Ray]
    decomposition: Decomposition
    chain_bound: int
    chain_ok: bool
    claim1: List[Claim1Check] = field(default_factory=list)


def repair(inst: StandardInstance | MipInstance, x_star: LpVertex, z_bar: IpSolution,
           delta: Optional[int] = None, cap: Optional[int] = None) -> RepairResult:
    """Move an optimal (mixed-)integer solution toward ``x*`` without losing optimality.

    ``z* = lift(z̄_H - Σ floor(λ_i) u_i)``. Feasibility, integrality, objective
    equality and ``‖z* - x*‖₁ < (m+1)·|H|·Δ`` are verified; any failure raises
    :class:`CertificationError`.
    """
    if isinstance(inst, MipInstance):
        base, integral = inst.base, sorted(inst.integral_indices)
    else:
        base, integral = inst, list(range(inst.n))
    m, n = base.m, base.n
    if delta is None:
        delta, _ = minors.delta_k_exact(base.A, m)
    cone = build_cone(x_star, z_bar, base)
    H = cone.H
    xH = [x_star.x[j] for j in H]
    zH = [Fraction(z_bar.z[j]) for j in H]
    rays = enumerate_rays(cone, cap)
    checks = [claim1_check(r, H, base.A, delta) for r in rays]
    target = [a - b for a, b in zip(zH, xH)]
    dec = decompose(target, rays)
    z_tilde = [a - w for a, w in zip(zH, dec.rounded)]
    x_tilde = [a + w for a, w in zip(xH, dec.rounded)]
    AH = [list(r) for r in cone.eq_rows]
    b = [Fraction(v) for v in base.b]
    if linalg.matvec(AH, z_tilde) != b or any(v < 0 for v in z_tilde):
        raise CertificationError("repaired point is infeasible")
    if linalg.matvec(AH, x_tilde) != b or any(v < 0 for v in x_tilde):
        raise CertificationError("shifted LP point is infeasible")
    z_full = [Fraction(0)] * n
    for j, v in zip(H, z_tilde):
        z_full[j] = v
    if any(z_full[j].denominator != 1 for j in integral):
        raise CertificationError("repaired point lost integrality")
    obj = sum(Fraction(c) * v for c, v in zip(base.c, z_full))
    if obj != Fraction(z_bar.objective):
        raise CertificationError("repair changed the objective value")
    dist = l1(z_full, x_star.x)
    chain = (m + 1) * len(H) * delta
    chain_ok = dist == 0 or dist < chain
    if not chain_ok:
        raise CertificationError(f"distance {dist} not below (m+1)|H|Δ = {chain}")
    return RepairResult(IpSolution(tuple(z_full), obj), dist, cone, rays, dec, chain, chain_ok, checks)


# ---------------------------------------------------------------------------
# measuring proximity


@dataclass(frozen=True)
class Measurement:
    distance: Fraction
    point: Tuple[int, ...]
    objective: Fraction
    method: str
    nodes: int = 0

    @property
    def linf(self) -> Fraction:
        return self._linf

    def with_linf(self, x: Sequence) -> "Measurement":
        object.__setattr__(self, "_linf", linf(self.point, x))
        return self


def oracle_radius(m: int, n: int, delta: int, entry_norm: int) -> int:
    """Radius that provably contains a nearest optimal solution.

    Uses only previously published bounds (Cook et al.; Eisenbrand–Weismantel),
    never the bounds under test.
    """
    return min((m + 1) * n * delta, m * (2 * m + 1) ** m * delta, m * (2 * m * entry_norm + 1) ** m)


def nearest_optimal_enumeration(inst: StandardInstance, x_star: LpVertex, hint: Sequence[int],
                                radius: int, node_cap: int = 5_000_000) -> Measurement:
    """Exact nearest optimal integer solution by enumeration over nonbasic coordinates.

    Every feasible ``z`` is determined by its nonbasic part through
    ``z_B = x*_B - W z_N`` with ``W = B^-1 A_N``. The nonbasic parts with
    ``sum(z_N) <= radius`` are enumerated depth first, pruned by the reduced-cost
    loss against the incumbent and by ``z_B >= 0``. ``hint`` is any feasible
    integer point; it only seeds the incumbent and is checked first.
    """
    m, n = inst.m, inst.n
    basis = list(x_star.basis)
    if len(basis) != m:
        raise PreconditionError("x_star basis must have m columns")
    hint = [int(v) for v in hint]
    _check_feasible(inst, hint, "hint")
    Bm = linalg.columns(inst.A, basis)
    nonbasic = [j for j in range(n) if j not in basis]
    Wcols = {j: linalg.solve_square(Bm, [row[j] for row in inst.A]) for j in nonbasic}
    v = [x_star.x[j] for j in basis]
    cB = [inst.c[j] for j in basis]
    rc = {j: inst.c[j] - sum(cb * w for cb, w in zip(cB, Wcols[j])) for j in nonbasic}
    if any(r > 0 for r in rc.values()):
        raise PreconditionError("x_star basis is not dual feasible")
    cx = x_star.objective
    order = sorted(nonbasic, key=lambda j: (rc[j] == 0, rc[j], j))
    W = [Wcols[j] for j in order]
    loss_rate = [-rc[j] for j in order]
    K = len(order)

    best_loss = cx - sum(Fraction(c) * z for c, z in zip(inst.c, hint))
    best_dist = l1(hint, x_star.x)
    best_point = tuple(hint)
    nodes = 0
    zN = [0] * K

    def record(loss, dist, P):
        nonlocal best_loss, best_dist, best_point
        if (loss, dist) < (best_loss, best_dist):
            z = [0] * n
            for i, j in enumerate(basis):
                z[j] = int(v[i] - P[i])
            for k, j in enumerate(order):
                z[j] = zN[k]
            best_loss, best_dist, best_point = loss, dist, tuple(z)

    def caps(k, loss_p, sum_p):
        out = []
        for q in range(k, K):
            ub = radius - sum_p
            if loss_rate[q] > 0:
                ub = min(ub, math.floor((best_loss - loss_p) / loss_rate[q]))
            elif loss_p == best_loss:
                ub = min(ub, math.floor(best_dist) - sum_p)
            out.append(max(ub, -1))
        return out

    def rec(k, P, loss_p, sum_p):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise ResourceLimitError(f"proximity oracle exceeded {node_cap} nodes")
        if (loss_p, sum_p) > (best_loss, best_dist):
            return
        if k == K:
            if all((v[i] - P[i]).denominator == 1 and v[i] - P[i] >= 0 for i in range(m)):
                dist = sum((abs(p) for p in P), Fraction(0)) + sum_p
                record(loss_p, dist, P)
            return
        ubs = caps(k, loss_p, sum_p)
        if ubs[0] < 0:
            return
        # z_B >= 0 must stay reachable with the remaining variables
        for i in range(m):
            slack = v[i] - P[i]
            for q, ub in enumerate(ubs):
                w = W[k + q][i]
                if w < 0 and ub > 0:
                    slack -= w * ub
            if slack < 0:
                return
        col = W[k]
        if k == K - 1:
            _last(k, P, loss_p, sum_p, ubs[0])
            return
        for val in range(ubs[0] + 1):
            zN[k] = val
            rec(k + 1, [p + w * val for p, w in zip(P, col)], loss_p + loss_rate[k] * val, sum_p + val)
            if loss_p + loss_rate[k] * val > best_loss:
                break
        zN[k] = 0

    def _last(k, P, loss_p, sum_p, ub):
        nonlocal nodes
        col = W[k]
        lo, hi = 0, ub
        for i in range(m):
            rest = v[i] - P[i]
            w = col[i]
            if w > 0:
                hi = min(hi, math.floor(rest / w))
            elif w < 0:
                lo = max(lo, math.ceil(rest / w))
            elif rest < 0:
                return
        if lo > hi:
            return
        period = 1
        for w in col:
            period = period * w.denominator // math.gcd(period, w.denominator)
        start = None
        for val in range(lo, min(lo + period, hi + 1)):
            if all((v[i] - P[i] - col[i] * val).denominator == 1 for i in range(m)):
                start = val
                break
        if start is None:
            return
        for val in range(start, hi + 1, period):
            nodes += 1
            loss = loss_p + loss_rate[k] * val
            if loss > best_loss or (loss == best_loss and sum_p + val > best_dist):
                break
            Pn = [p + w * val for p, w in zip(P, col)]
            zN[k] = val
            dist = sum((abs(p) for p in Pn), Fraction(0)) + sum_p + val
            record(loss, dist, Pn)
        zN[k] = 0

    if K == 0:
        z = tuple(int(x) for x in x_star.x) if all(x.denominator == 1 for x in x_star.x) else None
        if z is not None:
            best_point, best_dist, best_loss = z, Fraction(0), Fraction(0)
    else:
        rec(0, [Fraction(0)] * m, Fraction(0), 0)
    obj = cx - best_loss
    return Measurement(best_dist, best_point, obj, "nonbasic-enumeration", nodes).with_linf(x_star.x)


def measure_true_proximity(inst: StandardInstance, x_star: LpVertex, box: Optional[Sequence[int]] = None,
                           hint: Optional[Sequence[int]] = None, cap: Optional[int] = None,
                           delta: Optional[int] = None, node_cap: int = 5_000_000) -> Measurement:
    """Exact ``min ‖z - x*‖₁`` over all optimal integer solutions.

    With ``box`` the literal box oracle is used (every optimum in the box).
    Otherwise the nonbasic enumeration runs inside the published-bound radius,
    seeded by ``hint`` (computed with :func:`ip_solve` when absent).
    """
    if box is not None:
        res = ip_solve_oracle(inst, box, cap)
        if res.objective is None:
            raise PreconditionError("no feasible integer point in the box")
        best = min(res.optimal, key=lambda z: (l1(z, x_star.x), z))
        return Measurement(l1(best, x_star.x), tuple(best), Fraction(res.objective), "box").with_linf(x_star.x)
    if hint is None:
        status, sol = ip_solve(inst)
        if sol is None or status is not SolveStatus.OPTIMAL:
            raise PreconditionError(f"cannot seed the oracle: IP status {status.value}")
        hint = sol.as_ints()
    rep = minors.delta_report(inst.A, cap)
    delta = rep.delta if delta is None else delta
    radius = oracle_radius(inst.m, inst.n, delta, rep.entry_norm)
    return nearest_optimal_enumeration(inst, x_star, hint, radius, node_cap)


def nearest_optimal_bnb(A, b, c, integral: Sequence[int], x_ref: Sequence, opt_value,
                        coord_map: Optional[List[List[Tuple[int, int]]]] = None,
                        limits: Optional[Limits] = None) -> Measurement:
    """Nearest optimal (mixed-)integer point via an auxiliary exact branch-and-bound.

    Adds ``c z = opt`` and ``coord_k(z) - p_k + q_k = x_ref_k`` with ``p, q >= 0``
    and minimises ``sum(p + q)``. ``coord_map`` expresses each measured
    coordinate as a signed combination of solver variables (identity by default).
    """
    nv = len(c)
    if coord_map is None:
        coord_map = [[(j, 1)] for j in range(nv)]
    k = len(coord_map)
    width = nv + 2 * k
    rows = [list(r) + [0] * (2 * k) for r in A]
    rhs = [Fraction(v) for v in b]
    rows.append(list(c) + [0] * (2 * k))
    rhs.append(Fraction(opt_value))
    for i, terms in enumerate(coord_map):
        row = [0] * width
        for j, coef in terms:
            row[j] += coef
        row[nv + i] = -1
        row[nv + k + i] = 1
        rows.append(row)
        rhs.append(Fraction(x_ref[i]))
    cost = [0] * nv + [-1] * (2 * k)
    status, sol, nodes = _branch_and_bound(rows, rhs, cost, integral, limits or Limits())
    if status is SolveStatus.RESOURCE_LIMIT:
        raise ResourceLimitError("auxiliary branch-and-bound hit its node limit")
    if sol is None:
        raise PreconditionError("no optimal point at the stated optimal value")
    point = tuple(sum(coef * sol.z[j] for j, coef in terms) for terms in coord_map)
    return Measurement(-sol.objective, point, Fraction(opt_value), "auxiliary-bnb", nodes).with_linf(x_ref)


# ---------------------------------------------------------------------------
# unimodular transformation


@dataclass
class UipResult:
    transformed: StandardInstance
    hnf: linalg.HnfResult
    maxdet: minors.MaxDetResult
    ub_norm: int
    delta: Optional[int]
    chain_ok: Optional[bool]
    approx_ok: Optional[bool]
    ip_value: Fraction
    transformed_ip_value: Fraction
    x_star: LpVertex
    measurement: Measurement
    thm2: bounds.Comparison
    hnf_known: Optional[bounds.Comparison] = None


def uip_pipeline(inst: StandardInstance, epsilon=None, cap: Optional[int] = None,
                 limits: Optional[Limits] = None) -> UipResult:
    """Approximate max-det basis, HNF, transform ``A``/``b`` and certify the ‖UB‖∞ bound."""
    m = inst.m
    if linalg.rank(inst.A) < m:
        raise RankError("rank(A) < m")
    md = minors.maxdet_local_search(inst.A, epsilon)
    B = linalg.columns(inst.A, md.column_set)
    h = linalg.hnf_row_style(B)
    U = h.unimodular
    if abs(linalg.det(U)) != 1:
        raise CertificationError("HNF multiplier is not unimodular")
    UB = h.transformed
    if UB != linalg.matmul(U, B):
        raise CertificationError("UB != U * B")
    if any(UB[i][j] != 0 for i in range(m) for j in range(i)):
        raise CertificationError("UB is not upper triangular")
    prod = 1
    for dgl in h.diagonal:
        prod *= dgl
    if prod != md.abs_det or any(dgl < 0 for dgl in h.diagonal):
        raise CertificationError("HNF diagonal does not multiply to |det B|")
    UA = linalg.matmul(U, inst.A)
    Ub = linalg.matvec(U, inst.b)
    tinst = StandardInstance(UA, Ub, inst.c)
    ub_norm = max(abs(x) for row in UB for x in row)
    try:
        delta, _ = minors.delta_k_exact(inst.A, m, cap)
    except ResourceLimitError:
        delta = None
    chain_ok = approx_ok = None
    if delta is not None:
        approx_ok = bounds.compare(Fraction(delta, md.abs_det), "det_factor", strict=False, m=m).passed
        chain_ok = bounds.compare(Fraction(delta, ub_norm ** m), "det_factor", strict=False, m=m).passed
    s1, z1 = ip_solve(inst, limits)
    s2, z2 = ip_solve(tinst, limits)
    if z1 is None or z2 is None or s1 is not SolveStatus.OPTIMAL or s2 is not SolveStatus.OPTIMAL:
        raise PreconditionError(f"IP not solved to optimality ({s1.value}, {s2.value})")
    if z1.objective != z2.objective:
        raise CertificationError("(U-IP) optimum differs from (IP) optimum")
    status, x_star = lp_solve(tinst)
    if x_star is None:
        raise PreconditionError(f"(U-LP) status {status.value}")
    meas = measure_true_proximity(tinst, x_star, hint=z2.as_ints(), cap=cap, delta=delta)
    thm2 = bounds.compare(meas.distance, "thm2", m=m, ub_norm=ub_norm)
    known = None
    if delta is not None and md.abs_det == delta:
        known = bounds.compare(meas.distance, "hnf_known", m=m, ub_norm=ub_norm)
    return UipResult(tinst, h, md, ub_norm, delta, chain_ok, approx_ok, z1.objective, z2.objective,
                     x_star, meas, thm2, known)


# ---------------------------------------------------------------------------
# general form


@dataclass(frozen=True)
class GeneralSolution:
    x: Tuple[Fraction, ...]
    objective: Fraction


def _tight_rows(g: GeneralInstance, x: Sequence) -> List[List[int]]:
    tight = [list(r) for r in g.eq_matrix()]
    for row, rhs in zip(g.C, g.b2):
        full = [0] * g.n + list(row)
        if sum(a * v for a, v in zip(full, x)) == rhs:
            tight.append(full)
    for j in range(g.n):
        if x[j] == 0:
            tight.append([int(i == j) for i in range(g.n + g.d)])
    return tight


def _step_limit(g: GeneralInstance, x: Sequence, u: Sequence) -> Optional[Fraction]:
    # largest t >= 0 keeping x + t u feasible; None if unlimited
    best = None
    for j in range(g.n):
        if u[j] < 0:
            t = x[j] / -u[j]
            best = t if best is None else min(best, t)
    for row, rhs in zip(g.C, g.b2):
        slope = sum(a * v for a, v in zip(row, u[g.n:]))
        if slope > 0:
            t = (rhs - sum(a * v for a, v in zip(row, x[g.n:]))) / slope
            best = t if best is None else min(best, t)
    return best


def _to_vertex(g: GeneralInstance, x: List[Fraction], c: Sequence) -> List[Fraction]:
    """Slide an optimal point along its optimal face until it is a vertex.

    The split form ``y = y+ - y-`` can return basic solutions whose image is
    not a vertex (a free coordinate sitting at zero).
    """
    N = g.n + g.d
    while True:
        tight = _tight_rows(g, x)
        R, piv = linalg.rref(tight, ncols=N)
        if len(piv) == N:
            return x
        free = next(j for j in range(N) if j not in piv)
        u = [Fraction(0)] * N
        u[free] = Fraction(1)
        for row, p in zip(R, piv):
            u[p] = -row[free]
        if sum(a * v for a, v in zip(c, u)) != 0:
            raise CertificationError("LP optimum has an improving feasible direction")
        t = _step_limit(g, x, u)
        if t is None:
            u = [-v for v in u]
            t = _step_limit(g, x, u)
        if t is None:
            raise PreconditionError("general-form polyhedron is not pointed")
        x = [a + t * v for a, v in zip(x, u)]


def solve_glp(g: GeneralInstance) -> Tuple[SolveStatus, Optional[GeneralSolution]]:
    """Optimal vertex of the general-form LP (via the split standard form)."""
    std, mp = g.to_standard()
    res = simplex(std.A, std.b, std.c)
    if res.status is not SolveStatus.OPTIMAL:
        return res.status, None
    x = _to_vertex(g, [Fraction(v) for v in mp.back(res.x)], g.c)
    if sum(a * v for a, v in zip(g.c, x)) != res.objective:
        raise CertificationError("vertex search changed the LP objective")
    return SolveStatus.OPTIMAL, GeneralSolution(tuple(x), res.objective)


def _boxed_form(g: GeneralInstance, low: Sequence[int], ux: Sequence[int], uy: Sequence[int]):
    """Standard form over ``(x, y', s, slack_x, slack_y)`` with ``y = y' + low``,
    ``0 <= x <= ux`` and ``0 <= y' <= uy``; returns ``(A, b, c, objective shift)``."""
    n, d, m, t = g.n, g.d, g.m, g.t
    width = n + d + t + n + d
    rows, rhs = [], []
    eq = g.eq_matrix()
    for i in range(m):
        rows.append(list(eq[i]) + [0] * (t + n + d))
        rhs.append(g.b1[i] - sum(g.B[i][k] * low[k] for k in range(d)))
    for k, row in enumerate(g.C):
        slack = [int(i == k) for i in range(t)]
        rows.append([0] * n + list(row) + slack + [0] * (n + d))
        rhs.append(g.b2[k] - sum(a * l for a, l in zip(row, low)))
    for j in range(n + d):
        row = [0] * width
        row[j] = 1
        row[n + d + t + j] = 1
        rows.append(row)
        rhs.append(ux[j] if j < n else uy[j - n])
    cost = list(g.c) + [0] * (t + n + d)
    shift = sum(g.c[n + k] * low[k] for k in range(d))
    return rows, rhs, cost, shift


def solve_gip(g: GeneralInstance, limits: Optional[Limits] = None) -> Tuple[SolveStatus, Optional[GeneralSolution]]:
    """Optimal integer point of a general-form instance.

    An optimal split-form solution lies within ℓ∞ distance ``R`` (Cook et al.)
    of the split LP vertex, so ``|y_k - y*_k| <= 2R``; boxing ``x`` and the
    shifted ``y`` gives each point a unique, bounded representation.
    """
    std, mp = g.to_standard()
    res = simplex(std.A, std.b, std.c)
    if res.status is not SolveStatus.OPTIMAL:
        status, sol, _ = _branch_and_bound(std.A, std.b, std.c, mp.integral, limits or Limits())
        if sol is None:
            return status, None
        return status, GeneralSolution(tuple(mp.back(sol.z)), sol.objective)
    n, d = g.n, g.d
    R = len(std.c) * _subdet_bound(std.A)
    xo = mp.back(res.x)
    low = [math.floor(xo[n + k]) - 2 * R for k in range(d)]
    ux = [math.floor(xo[j]) + R for j in range(n)]
    uy = [math.floor(xo[n + k]) + 2 * R + 1 - low[k] for k in range(d)]
    A, b, c, shift = _boxed_form(g, low, ux, uy)
    status, sol, _ = _branch_and_bound(A, b, c, list(range(n + d)), limits or Limits())
    if sol is None:
        return status, None
    z = tuple(sol.z[:n]) + tuple(sol.z[n + k] + low[k] for k in range(d))
    return status, GeneralSolution(z, sol.objective + shift)


def general_feasible(g: GeneralInstance, z: Sequence) -> bool:
    if any(Fraction(z[j]) < 0 for j in range(g.n)):
        return False
    if linalg.matvec(g.eq_matrix(), z) != [Fraction(v) for v in g.b1]:
        return False
    return all(sum(a * v for a, v in zip(row, z[g.n:])) <= rhs for row, rhs in zip(g.C, g.b2))


@dataclass
class GeneralRepairResult:
    z_star: Tuple[int, ...]
    l1_distance: Fraction
    support_union: int
    delta_gen: int
    ray_support_cap: int
    chain_bound: int
    chain_ok: bool
    rays: List[Ray]
    rays_ok: bool
    decomposition: Decomposition
    cone: ConeSpec
    padding: int


def repair_general(g: GeneralInstance, x_star: Sequence, z_star_in: Sequence[int],
                   delta_gen: Optional[int] = None, cap: Optional[int] = None) -> GeneralRepairResult:
    """General-form repair on the cone padded with ``b3``.

    The problem is projected onto ``H = supp(x*) ∪ supp(z*)``; the inequality
    system ``D = [[0, C], [-I_n, 0], [0, I_d]]`` (restricted to ``H``) makes the
    cone pointed.
    """
    n, d, m, t = g.n, g.d, g.m, g.t
    x_star = [Fraction(v) for v in x_star]
    z_in = [int(v) for v in z_star_in]
    if not general_feasible(g, x_star) or not general_feasible(g, z_in):
        raise PreconditionError("x_star / z_star infeasible for the general form")
    if delta_gen is None:
        delta_gen, _ = minors.delta_general(g.A, g.B, g.C, n=n, d=d, cap=cap)
    xmax = max((abs(v) for v in x_star), default=Fraction(0))
    zmax = max((abs(v) for v in z_in), default=0)
    pad = math.ceil(xmax) + zmax
    D = [[0] * n + list(row) for row in g.C]
    D += [[-int(i == j) for i in range(n + d)] for j in range(n)]
    D += [[int(i == n + j) for i in range(n + d)] for j in range(d)]
    f = list(g.b2) + [0] * n + [pad] * d
    if any(sum(a * v for a, v in zip(row, z)) > rhs for row, rhs in zip(D, f) for z in (x_star, z_in)):
        raise CertificationError("padding does not keep x* and z* feasible")
    H = tuple(sorted(set(support(x_star)) | set(support(z_in))))
    E = tuple(tuple(row[j] for j in H) for row in g.eq_matrix())
    DH = [tuple(row[j] for j in H) for row in D]
    DH = [row for row in DH if any(row)]
    xH = [x_star[j] for j in H]
    zH = [Fraction(z_in[j]) for j in H]
    d1, d2 = _partition(DH, zH, xH)
    k = len(H)
    trivial = (linalg.rank(E) == k) if k else True
    cone = ConeSpec(H, E, tuple(DH), d1, d2, trivial)
    rays = enumerate_rays(cone, cap)
    sup_cap = min(m + t + 1, n + d)
    rays_ok = all(len(support(r.u)) <= sup_cap and max(abs(x) for x in r.u) <= delta_gen for r in rays)
    target = [a - b for a, b in zip(zH, xH)]
    dec = decompose(target, rays)
    z_new = list(z_in)
    for j, w in zip(H, dec.rounded):
        z_new[j] -= w
    if not general_feasible(g, z_new):
        raise CertificationError("repaired general-form point is infeasible")
    if sum(c * v for c, v in zip(g.c, z_new)) != sum(c * v for c, v in zip(g.c, z_in)):
        raise CertificationError("general-form repair changed the objective")
    dist = l1(z_new, x_star)
    chain = sup_cap * k * delta_gen
    chain_ok = dist == 0 or dist < chain
    if not chain_ok:
        raise CertificationError(f"distance {dist} not below min(m+t+1, n+d)·S̄·δ = {chain}")
    return GeneralRepairResult(tuple(z_new), dist, k, delta_gen, sup_cap, chain, chain_ok,
                               rays, rays_ok, dec, cone, pad)


def nearest_optimal_general(g: GeneralInstance, x_star: Sequence, opt_value, radius=None,
                            limits: Optional[Limits] = None) -> Measurement:
    """Nearest optimal integer point of a general-form instance.

    With ``radius`` (any ℓ1 distance known to reach an optimal point, e.g. the
    repaired one) every coordinate is boxed and the free variables are shifted
    to be nonnegative, which keeps the search finite. Without it the split
    form ``y = y+ - y-`` is searched directly.
    """
    if radius is None:
        std, mp = g.to_standard()
        return nearest_optimal_bnb(std.A, std.b, std.c, mp.integral, x_star, opt_value,
                                   coord_map=mp.coord_map(), limits=limits)
    n, d = g.n, g.d
    x_star = [Fraction(v) for v in x_star]
    r = Fraction(radius)
    low = [math.floor(x_star[n + k] - r) for k in range(d)]  # y = y' + low, y' >= 0
    ux = [math.floor(x_star[j] + r) for j in range(n)]
    uy = [math.floor(x_star[n + k] + r) - low[k] for k in range(d)]
    rows, rhs, cost, shift = _boxed_form(g, low, ux, uy)
    ref = x_star[:n] + [x_star[n + k] - low[k] for k in range(d)]
    coord_map = [[(j, 1)] for j in range(n + d)]
    meas = nearest_optimal_bnb(rows, rhs, cost, list(range(n + d)), ref, Fraction(opt_value) - shift,
                               coord_map=coord_map, limits=limits)
    point = tuple(meas.point[:n]) + tuple(v + l for v, l in zip(meas.point[n:], low))
    return Measurement(meas.distance, point, Fraction(opt_value), meas.method, meas.nodes).with_linf(x_star)
