from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import basic_solutions, brute_ip, matvec, rank_gauss
from proxcert import linalg
from proxcert.errors import ResourceLimitError
from proxcert.solvers import (
    Limits,
    MipInstance,
    SolveStatus,
    StandardInstance,
    check_assumptions,
    ip_solve,
    ip_solve_oracle,
    lp_solve,
    min_support,
    mip_solve,
)

KNAPSACK = StandardInstance([[2, 3]], [5], [1, 1])


@st.composite
def boxed_instances(draw, max_m=2, max_n=4):
    """Feasible instances whose first row is strictly positive, so 0 <= z_j <= b_1 / a_1j."""
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(m, max_n))
    first = draw(st.lists(st.integers(1, 4), min_size=n, max_size=n))
    rest = draw(st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m - 1, max_size=m - 1))
    A = [first] + rest
    assume(rank_gauss(A) == m)
    z0 = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    c = draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n))
    b = matvec(A, z0)
    box = [b[0] // a for a in first]
    return StandardInstance(A, b, c), box


# -- lp_solve --------------------------------------------------------------------

def test_lp_identity():
    status, x = lp_solve(StandardInstance(linalg.identity(2), [1, 2], [3, -1]))
    assert status is SolveStatus.OPTIMAL and list(x.x) == [1, 2]


def test_lp_knapsack():
    status, x = lp_solve(KNAPSACK)
    assert list(x.x) == [Fraction(5, 2), 0] and x.objective == Fraction(5, 2)
    assert x.basis == (0,)


def test_lp_unbounded():
    assert lp_solve(StandardInstance([[1, -1]], [0], [1, 1]))[0] is SolveStatus.UNBOUNDED


def test_lp_infeasible():
    assert lp_solve(StandardInstance([[1, 1]], [-1], [1, 1]))[0] is SolveStatus.INFEASIBLE


@given(boxed_instances(max_m=3, max_n=5))
def test_lp_vertex_invariants_and_optimality(case):
    inst, _ = case
    status, x = lp_solve(inst)
    assert status is SolveStatus.OPTIMAL
    assert matvec(inst.A, x.x) == list(inst.b)
    assert all(v >= 0 for v in x.x)
    assert len(x.basis) == inst.m
    assert linalg.det(linalg.columns(inst.A, x.basis)) != 0
    assert all(x.x[j] == 0 for j in range(inst.n) if j not in x.basis)
    # bounded polytope: the optimum is attained at some basic solution
    best = max(sum(c * v for c, v in zip(inst.c, p)) for p in basic_solutions(inst.A, inst.b))
    assert x.objective == best


# -- ip_solve --------------------------------------------------------------------

def test_ip_identity():
    _, z = ip_solve(StandardInstance(linalg.identity(2), [1, 2], [0, 0]))
    assert list(z.z) == [1, 2]


def test_ip_knapsack():
    status, z = ip_solve(KNAPSACK)
    assert status is SolveStatus.OPTIMAL and list(z.z) == [1, 1] and z.objective == 2


def test_ip_parity_infeasible():
    assert ip_solve(StandardInstance([[2]], [1], [1]))[0] is SolveStatus.INFEASIBLE


def test_ip_node_limit_reports_resource_limit():
    inst = StandardInstance([[3, 5, 7, 11]], [1000], [3, 5, 7, 11 - 1])
    status, _ = ip_solve(inst, Limits(node_limit=2))
    assert status is SolveStatus.RESOURCE_LIMIT


def test_ip_unbounded_zero_cost_face_terminates():
    # optimal face is unbounded and only every other lattice layer is feasible
    inst = StandardInstance([[-1, -4, 2]], [-9], [0, -1, 0])
    status, z = ip_solve(inst)
    assert status is SolveStatus.OPTIMAL and z.objective == 0


@given(boxed_instances())
def test_ip_matches_brute_force(case):
    inst, box = case
    status, z = ip_solve(inst)
    best, _ = brute_ip(inst.A, inst.b, inst.c, box)
    assert status is SolveStatus.OPTIMAL
    assert z.objective == best
    assert matvec(inst.A, z.z) == list(inst.b) and all(v >= 0 and v.denominator == 1 for v in z.z)


# -- ip_solve_oracle -------------------------------------------------------------

def test_oracle_knapsack():
    res = ip_solve_oracle(KNAPSACK, [3, 2])
    assert res.objective == 2 and res.optimal == [(1, 1)]


def test_oracle_zero_rhs():
    res = ip_solve_oracle(StandardInstance([[1, -1]], [0], [-1, -1]), [3, 3])
    assert res.optimal == [(0, 0)]


def test_oracle_infeasible():
    res = ip_solve_oracle(StandardInstance([[2]], [1], [1]), [5])
    assert res.objective is None and res.optimal == []


def test_oracle_cap():
    with pytest.raises(ResourceLimitError):
        ip_solve_oracle(KNAPSACK, [1000, 1000], cap=100)


@given(boxed_instances())
def test_oracle_matches_product_enumeration(case):
    inst, box = case
    best, arg = brute_ip(inst.A, inst.b, inst.c, box)
    res = ip_solve_oracle(inst, box)
    assert res.objective == best and sorted(res.optimal) == sorted(arg)


# -- mip_solve -------------------------------------------------------------------

def test_mip_knapsack_one_integral():
    status, z = mip_solve(MipInstance(KNAPSACK, [0]))
    assert list(z.z) == [2, Fraction(1, 3)] and z.objective == Fraction(7, 3)


@given(boxed_instances())
def test_mip_reductions(case):
    inst, _ = case
    _, z_all = mip_solve(MipInstance(inst, list(range(inst.n))))
    assert z_all.objective == ip_solve(inst)[1].objective
    _, z_none = mip_solve(MipInstance(inst, []))
    assert z_none.objective == lp_solve(inst)[1].objective


@given(boxed_instances(), st.data())
def test_mip_respects_integrality_and_sits_between(case, data):
    inst, _ = case
    idx = sorted(data.draw(st.sets(st.integers(0, inst.n - 1))))
    _, z = mip_solve(MipInstance(inst, idx))
    assert all(z.z[j].denominator == 1 for j in idx)
    assert matvec(inst.A, z.z) == list(inst.b)
    assert ip_solve(inst)[1].objective <= z.objective <= lp_solve(inst)[1].objective


# -- min_support -----------------------------------------------------------------

def test_min_support_example():
    inst = StandardInstance([[1, 1, 1]], [2], [1, 1, 1])
    res = min_support(inst, 2)
    assert res.size == 1 and list(res.solution.z) == [2, 0, 0] and res.certified


def test_min_support_zero():
    res = min_support(StandardInstance([[1, -1]], [0], [-1, 0]), 0)
    assert res.size == 0 and list(res.solution.z) == [0, 0]


def test_min_support_identity():
    assert min_support(StandardInstance(linalg.identity(2), [1, 2], [0, 0]), 0).size == 2


def test_min_support_subset_cap_is_not_certified():
    inst = StandardInstance([[1, 1, 1]], [2], [1, 1, 1])
    res = min_support(inst, 2, Limits(subset_cap=1))
    assert res.solution is None and not res.certified


@given(boxed_instances())
def test_min_support_matches_oracle(case):
    inst, box = case
    best, arg = brute_ip(inst.A, inst.b, inst.c, box)
    res = min_support(inst, best)
    assert res.size == min(sum(1 for v in z if v) for z in arg)
    assert res.solution.objective == best


# -- check_assumptions -----------------------------------------------------------

def test_assumptions_parity():
    rep = check_assumptions(StandardInstance([[2]], [1], [1]))
    assert rep.lp_feasible and rep.ip_feasible is False and not rep.ok


def test_assumptions_unbounded():
    rep = check_assumptions(StandardInstance([[1, -1]], [0], [1, 1]))
    assert rep.lp_bounded is False and not rep.ok


def test_assumptions_knapsack():
    rep = check_assumptions(KNAPSACK)
    assert rep.ok and rep.ip_witness == ["1", "1"]


def test_assumptions_rank():
    rep = check_assumptions(StandardInstance([[1, 1], [2, 2]], [1, 2], [1, 1]))
    assert not rep.full_row_rank and "rank(A) < m" in rep.notes
