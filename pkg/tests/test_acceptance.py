"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

Criteria 1-4 and 8 share one seeded sweep of 500 standard-form instances,
built once per session.
"""

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import pytest

from oracles import det_cofactor, matvec, max_minor, rank_gauss
from proxcert import bounds, linalg, minors
from proxcert.errors import ResourceLimitError
from proxcert.generators import gen_general, gen_mip, gen_random
from proxcert.pipeline import Certificate, certify_general, certify_instance, certify_mip
from proxcert.proximity import uip_pipeline
from proxcert.solvers import ip_solve, ip_solve_oracle, lp_solve

SWEEP_SIZE = 500
ENTRY_BOUND = 5
ORACLE_CAP = 10 ** 7
NEAR = 1e-9

# ledger names of the proximity bounds in criterion 1
PROXIMITY = ("cook_l1", "ew_entry", "ew_delta", "thm1", "lemma3", "cor6")


def sweep_shape(i):
    m = 1 + i % 3
    return m, m + (i // 3) % (8 - m)


@dataclass
class Record:
    idx: int
    inst: object
    cert: Optional[Certificate]
    error: Optional[str]


@pytest.fixture(scope="session")
def sweep():
    t0 = time.perf_counter()
    out = []
    for i in range(SWEEP_SIZE):
        m, n = sweep_shape(i)
        inst = gen_random(i, m, n, ENTRY_BOUND)
        try:
            out.append(Record(i, inst, certify_instance(inst), None))
        except Exception as exc:  # recorded; every criterion counts these as failures
            out.append(Record(i, inst, None, f"{type(exc).__name__}: {exc}"))
    print(f"sweep: {len(out)} instances in {time.perf_counter() - t0:.1f}s")
    return out


# every comparison made anywhere in this module, for criterion 10
COMPARISONS = []


def _track(cmp, strict=True):
    COMPARISONS.append((cmp, strict))
    return cmp


def test_criterion_1_bound_validity(sweep, report_line):
    bad = []
    for rec in sweep:
        if rec.cert is None:
            bad.append((rec.idx, rec.error))
            continue
        v = rec.cert.primary
        subject = {"measured": v.measurement.distance, "certified": v.l1_distance}
        for name in PROXIMITY:
            entry = v.ledger[name]
            cmp = _track(bounds.compare(subject[entry.subject], name, **entry.inputs))
            if entry.passed is not True or cmp.passed is not True:
                bad.append((rec.idx, name))
    report_line(1, not bad, f"{SWEEP_SIZE - len({b[0] for b in bad})}/{SWEEP_SIZE} instances strictly below "
                             f"{', '.join(PROXIMITY)}")
    assert not bad


def _sparsity(sweep, name):
    return [(rec, rec.cert.sparsity[name]) for rec in sweep if rec.cert is not None]


def test_criterion_2_gram_form(sweep):
    results = _sparsity(sweep, "sparsity_eq7_gram")
    assert len(results) == SWEEP_SIZE
    assert all(c.passed is True for _, c in results)
    # the exact decision agrees with the logarithmic form on every instance
    for rec, c in results:
        assert (4 ** rec.cert.S <= 4 ** rec.inst.m * rec.cert.gram) is True


@pytest.mark.xfail(strict=True, raises=AssertionError,
                   reason="m=1, delta=1 gives a bound of exactly 1 and S=1 is attained (see the decisions ledger)")
def test_criterion_2_sparsity(sweep, report_line):
    gram = _sparsity(sweep, "sparsity_eq7_gram")
    thm4 = _sparsity(sweep, "sparsity_thm4")
    gram_ok = sum(c.passed is True for _, c in gram)
    thm4_fail = [rec.idx for rec, c in thm4 if c.passed is not True]
    ok = gram_ok == SWEEP_SIZE and not thm4_fail and len(thm4) == SWEEP_SIZE
    report_line(2, ok, f"gram form {gram_ok}/{SWEEP_SIZE}; sparsity_thm4 {len(thm4) - len(thm4_fail)}/{SWEEP_SIZE}, "
                       f"failing ids {thm4_fail} (expected failure, boundary case)")
    assert ok


def test_criterion_2_failures_are_the_boundary_case(sweep):
    """Every sparsity_thm4 failure is the exact-equality case m=1, delta=1, S=1."""
    for rec, c in _sparsity(sweep, "sparsity_thm4"):
        if c.passed is not True:
            assert (rec.inst.m, rec.cert.delta.delta, rec.cert.S) == (1, 1, 1)
            # bound = 2m log2(sqrt(2m) delta^(1/m)) = 2 log2(sqrt 2) = 1 exactly
            assert 2 ** rec.cert.S == (2 * rec.inst.m) ** rec.inst.m * rec.cert.delta.delta ** 2


def test_criterion_3_claim1_rays(sweep, report_line):
    total, bad = 0, []
    for rec in sweep:
        if rec.cert is None:
            bad.append(rec.idx)
            continue
        A, m, delta = rec.inst.A, rec.inst.m, rec.cert.delta.delta
        rep = rec.cert.primary.repair
        H = rep.cone.H
        for ray, chk in zip(rep.rays, rep.claim1):
            total += 1
            support = [H[i] for i, v in enumerate(ray.u) if v]
            scaled = chk.cramer_vector
            full = [0] * rec.inst.n
            for j, v in zip(H, ray.u):
                full[j] = v
            # parallel: every 2x2 minor of (scaled, full) vanishes, and same orientation
            parallel = all(a * d == b * c for (a, b), (c, d) in itertools.combinations(zip(scaled, full), 2))
            same_dir = sum(a * b for a, b in zip(scaled, full)) > 0
            if not (len(support) <= m + 1 and chk.support_ok and chk.scaled_ok
                    and matvec(A, scaled) == [0] * m and parallel and same_dir
                    and max(abs(v) for v in scaled) <= delta):
                bad.append(rec.idx)
        assert len(rep.rays) == len(rep.claim1)
    report_line(3, not bad, f"{total} extreme rays, {len(bad)} violations")
    assert not bad and total > 0


def test_criterion_4_repair(sweep, report_line):
    bad, empty_h = [], 0
    for rec in sweep:
        if rec.cert is None:
            bad.append(rec.idx)
            continue
        inst, v = rec.inst, rec.cert.primary
        z = v.repair.z_star.z
        dist = sum(abs(a - b) for a, b in zip(z, v.x_star.x))
        chain = (inst.m + 1) * len(v.repair.cone.H) * rec.cert.delta.delta
        ok = (matvec(inst.A, z) == list(inst.b) and all(x >= 0 and Fraction(x).denominator == 1 for x in z)
              and sum(c * x for c, x in zip(inst.c, z)) == rec.cert.ip_value
              and dist == v.l1_distance)
        if chain == 0:
            # H empty means x* = z* = 0 and both sides are 0
            empty_h += 1
            ok = ok and dist == 0
        else:
            ok = ok and dist < chain
        if not ok:
            bad.append(rec.idx)
    report_line(4, not bad, f"{SWEEP_SIZE - len(bad)}/{SWEEP_SIZE} repaired points feasible, integral, optimal "
                            f"and below (m+1)|H|delta ({empty_h} with empty H)")
    assert not bad


def test_criterion_5_cauchy_binet(report_line):
    rng = random.Random(5)
    bad = 0
    for _ in range(200):
        m = rng.randint(1, 3)
        n = rng.randint(m, 7)
        A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        AAt = [[sum(a * b for a, b in zip(r, s)) for s in A] for r in A]
        rhs = sum(det_cofactor([[A[i][j] for j in c] for i in range(m)]) ** 2
                  for c in itertools.combinations(range(n), m))
        lhs, rhs2, ok = minors.cauchy_binet_check(A)
        if not (ok and lhs == det_cofactor(AAt) == rhs == rhs2):
            bad += 1
    report_line(5, bad == 0, f"{200 - bad}/200 exact")
    assert bad == 0


def test_criterion_6_hnf_pipeline(report_line):
    bad = []
    for i in range(200):
        m = 1 + i % 3
        n = m + 1 + (i // 3) % (6 - m)
        inst = gen_random(10_000 + i, m, n, ENTRY_BOUND)
        r = uip_pipeline(inst)
        _track(r.thm2)
        U, UB = r.hnf.unimodular, r.hnf.transformed
        B = linalg.columns(inst.A, r.maxdet.column_set)
        delta = max_minor(inst.A, m)
        chain = bounds.compare(Fraction(delta, r.ub_norm ** m), "det_factor", strict=False, m=m)
        _track(chain, strict=False)
        ok = (abs(det_cofactor(U)) == 1
              and UB == [[sum(U[i][k] * B[k][j] for k in range(m)) for j in range(m)] for i in range(m)]
              and all(UB[a][b] == 0 for a in range(m) for b in range(a))
              and all(UB[a][a] > 0 for a in range(m))
              and math.prod(UB[a][a] for a in range(m)) == abs(det_cofactor(B))
              and r.maxdet.epsilon == Fraction(1, m)
              and r.delta == delta and chain.passed is True and r.chain_ok is True
              and r.transformed_ip_value == r.ip_value
              and r.thm2.passed is True and r.thm2.lhs == r.measurement.distance)
        if not ok:
            bad.append(i)
    report_line(6, not bad, f"{200 - len(bad)}/200 unimodular, triangular, chain and measured < thm2")
    assert not bad


GENERAL_CELLS = [(m, n, d, t) for m in range(3) for n in range(4) for d in range(3) for t in range(3)
                 if m + t >= max(1, d) and n + d >= 1 and not (t and not d)
                 and (m == 0 or n + d >= m) and (m > 0 or n == 0)]


def test_criterion_7_mip_and_general(report_line):
    mip_bad = []
    for i in range(100):
        m = 1 + i % 3
        n = m + (i // 3) % (7 - m)
        c = certify_mip(gen_mip(20_000 + i, m, n, ENTRY_BOUND))
        _track(c.cor6)
        if not (c.cor6.passed is True and c.cor5.passed is True and c.measurement.distance <= c.repair.l1_distance):
            mip_bad.append(i)
    gen_bad = []
    for i in range(50):
        m, n, d, t = GENERAL_CELLS[i % len(GENERAL_CELLS)]
        g = gen_general(30_000 + i, m, n, d, t, 3)
        c = certify_general(g)
        _track(c.cor7)
        dg, _ = minors.delta_general(g.A, g.B, g.C, n=g.n, d=g.d)
        if not (c.certified and c.repair.delta_gen == dg and t <= 2 and d <= 2):
            gen_bad.append(i)
    ok = not mip_bad and not gen_bad
    report_line(7, ok, f"MIP {100 - len(mip_bad)}/100 (cor5, cor6); general {50 - len(gen_bad)}/50 (cor7)")
    assert ok


def test_criterion_8_solver_oracle(sweep, report_line):
    completed, skipped, mismatch = 0, 0, []
    for rec in sweep:
        inst = rec.inst
        _, x = lp_solve(inst)
        dk = minors.delta_report(inst.A).delta_k
        # some optimal integer point lies within l_inf distance n * max_k delta_k of x*
        radius = inst.n * max(dk)
        box = [math.floor(v) + radius for v in x.x]
        try:
            res = ip_solve_oracle(inst, box, cap=ORACLE_CAP)
        except ResourceLimitError:
            skipped += 1
            continue
        status, z = ip_solve(inst)
        completed += 1
        if z is None or res.objective != z.objective:
            mismatch.append(rec.idx)
    report_line(8, not mismatch and completed > 0,
                f"{completed - len(mismatch)}/{completed} agree where both complete; "
                f"{skipped} exceed the oracle cap of {ORACLE_CAP:.0e} points")
    assert completed > 0 and not mismatch


def test_criterion_9_degenerate_reductions(report_line):
    rng = random.Random(9)
    bad, standard, inequality = 0, 0, 0
    while standard < 50:
        m = rng.randint(1, 3)
        n = rng.randint(m, 5)
        A = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(m)]
        if rank_gauss(A) < m:
            continue
        standard += 1
        if minors.delta_general(A, [[] for _ in A], [], n=n, d=0)[0] != max_minor(A, m):
            bad += 1
    while inequality < 50:
        t = rng.randint(1, 4)
        d = rng.randint(1, 3)
        C = [[rng.randint(-5, 5) for _ in range(d)] for _ in range(t)]
        if rank_gauss(C) == 0:
            continue
        inequality += 1
        expected = max(max_minor(C, k) for k in range(1, min(t, d) + 1))
        if minors.delta_general([], [], C, n=0, d=d)[0] != expected:
            bad += 1
    report_line(9, bad == 0, f"{100 - bad}/100 exact (50 with t=d=0, 50 with m=n=0)")
    assert bad == 0


def test_criterion_10_tolerance_policy(sweep, report_line):
    # the sweep ledgers: re-decide every recorded comparison
    for rec in sweep:
        if rec.cert is None:
            continue
        v = rec.cert.primary
        subject = {"measured": v.measurement.distance, "certified": v.l1_distance,
                   "measured_linf": v.measurement.linf}
        for name, e in v.ledger.entries.items():
            if e.subject:
                strict = name != "cook_inf"
                _track(bounds.compare(subject[e.subject], name, strict=strict, **e.inputs), strict)
    near, unverified, unresolved = 0, 0, 0
    for cmp, _ in COMPARISONS:
        if cmp.passed is None:
            unresolved += 1
        if abs(float(cmp.lhs) - cmp.value) <= NEAR * abs(cmp.value):
            near += 1
            if not (cmp.escalated and cmp.precision >= 256):
                unverified += 1
    ok = unresolved == 0 and unverified == 0
    report_line(10, ok, f"{len(COMPARISONS)} comparisons, {near} within 1e-9 of the boundary, "
                        f"{unverified} not re-verified at >= 256 bits, {unresolved} unresolved")
    assert ok
