import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_ip, general_nearest, l1, matvec, rank_gauss
from proxcert import linalg, minors
from proxcert.errors import InfeasibleConeError, PreconditionError
from proxcert.generators import gen_general, gen_random
from proxcert.instances import GeneralInstance
from proxcert.proximity import (
    ConeSpec,
    Ray,
    build_cone,
    claim1_check,
    decompose,
    enumerate_rays,
    measure_true_proximity,
    nearest_optimal_bnb,
    repair,
    repair_general,
    solve_gip,
    solve_glp,
    uip_pipeline,
)
from proxcert.solvers import IpSolution, StandardInstance, ip_solve, lp_solve, min_support

KNAPSACK = StandardInstance([[2, 3]], [5], [1, 1])


def _pair(inst):
    _, x = lp_solve(inst)
    _, z = ip_solve(inst)
    return x, z


# -- build_cone ------------------------------------------------------------------

def test_cone_knapsack_partition():
    x, z = _pair(KNAPSACK)
    cone = build_cone(x, z, KNAPSACK, lp_value=Fraction(5, 2), ip_value=2)
    assert cone.H == (0, 1)
    assert [cone.sign_rows[r] for r in cone.d1_rows] == [(0, -1)]
    assert [cone.sign_rows[r] for r in cone.d2_rows] == [(-1, 0)]
    xH, zH = [x.x[j] for j in cone.H], [z.z[j] for j in cone.H]
    for r in cone.d1_rows:
        g = cone.sign_rows[r]
        assert sum(a * v for a, v in zip(g, zH)) < sum(a * v for a, v in zip(g, xH))
    for r in cone.d2_rows:
        g = cone.sign_rows[r]
        assert sum(a * v for a, v in zip(g, zH)) >= sum(a * v for a, v in zip(g, xH))


def test_cone_square_is_trivial():
    inst = StandardInstance(linalg.identity(2), [1, 2], [1, 1])
    x, z = _pair(inst)
    assert build_cone(x, z, inst).trivial


def test_cone_integral_vertex():
    inst = StandardInstance([[1, 2]], [4], [1, 0])
    x, z = _pair(inst)
    r = repair(inst, x, z)
    assert r.l1_distance == 0 and list(r.z_star.z) == [4, 0]


def test_cone_rejects_infeasible_point():
    x, _ = _pair(KNAPSACK)
    with pytest.raises(PreconditionError):
        build_cone(x, IpSolution((Fraction(2), Fraction(0)), Fraction(2)), KNAPSACK)


def test_cone_rejects_suboptimal_point():
    x, _ = _pair(KNAPSACK)
    with pytest.raises(PreconditionError):
        build_cone(x, IpSolution((Fraction(1), Fraction(1)), Fraction(2)), KNAPSACK, ip_value=3)


# -- enumerate_rays --------------------------------------------------------------

def test_rays_knapsack_cone():
    cone = ConeSpec((0, 1), ((2, 3),), ((-1, 0), (0, -1)), (1,), (0,))
    assert [r.u for r in enumerate_rays(cone)] == [(-3, 2)]


def test_rays_trivial_cone():
    cone = ConeSpec((0, 1), ((1, 0), (0, 1)), ((-1, 0), (0, -1)), (), (0, 1), trivial=True)
    assert enumerate_rays(cone) == []


def test_rays_sign_filtering():
    signs = ((-1, 0), (0, -1))
    # both sign rows in D2 forces u <= 0, so u1 + u2 = 0 leaves only the origin
    assert enumerate_rays(ConeSpec((0, 1), ((1, 1),), signs, (), (0, 1))) == []
    # u1 >= 0, u2 <= 0 keeps the single direction (1, -1)
    assert [r.u for r in enumerate_rays(ConeSpec((0, 1), ((1, 1),), signs, (0,), (1,)))] == [(1, -1)]


def test_rays_not_pointed():
    with pytest.raises(PreconditionError):
        enumerate_rays(ConeSpec((0, 1, 2), ((1, 1, 0),), ((1, 0, 0),), (0,), ()))


def _tight_rank(cone, u):
    rows = list(cone.eq_rows)
    rows += [g for g in cone.sign_rows if sum(a * x for a, x in zip(g, u)) == 0]
    return rank_gauss(rows) if rows else 0


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(0, 3))
def test_rays_are_extreme_and_generate_cone(seed, m, extra):
    inst = gen_random(seed, m, m + extra, 4)
    x, z = _pair(inst)
    cone = build_cone(x, z, inst)
    rays = enumerate_rays(cone)
    k = cone.dim
    for r in rays:
        assert any(r.u) and cone.contains(r.u)
        assert _tight_rank(cone, r.u) == k - 1
    # every small lattice point of the cone is a nonnegative combination of the rays
    if k <= 4 and not cone.trivial:
        for u in itertools.product(range(-3, 4), repeat=k):
            if any(u) and cone.contains(u):
                decompose(u, rays)


# -- Claim 1 ---------------------------------------------------------------------

def test_claim1_knapsack():
    H = (0, 1)
    chk = claim1_check(Ray((-3, 2), ()), H, [[2, 3]], 3)
    assert chk.support_ok and chk.scaled_ok and chk.cramer_norm == 3


@pytest.mark.parametrize("u", [(-3, 2), (3, -2)])
def test_claim1_representative_follows_ray_orientation(u):
    chk = claim1_check(Ray(u, ()), (0, 1), [[2, 3]], 3)
    assert chk.cramer_vector == u


# -- decompose -------------------------------------------------------------------

def test_decompose_zero():
    d = decompose([0, 0], [(-3, 2)])
    assert d.lambdas == (0,) and d.rounded == (0, 0)


def test_decompose_half_ray():
    d = decompose([Fraction(-3, 2), 1], [(-3, 2)])
    assert d.lambdas == (Fraction(1, 2),) and d.rounded == (0, 0)


def test_decompose_single_ray_hit():
    d = decompose([1, -1], [(1, -1), (0, -1)])
    assert d.lambdas == (1, 0) and d.rounded == (1, -1)


def test_decompose_outside_cone():
    with pytest.raises(InfeasibleConeError):
        decompose([1, 1], [(1, -1)])


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=5),
       st.lists(st.fractions(min_value=0, max_value=5, max_denominator=7), min_size=5, max_size=5))
def test_decompose_reconstructs_with_few_positive(rays, lam):
    target = [sum(l * r[i] for l, r in zip(lam, rays)) for i in range(3)]
    d = decompose(target, rays)
    assert [sum(l * r[i] for l, r in zip(d.lambdas, rays)) for i in range(3)] == target
    assert all(v >= 0 for v in d.lambdas)
    assert d.positive <= 3
    assert list(d.rounded) == [sum(math.floor(l) * r[i] for l, r in zip(d.lambdas, rays)) for i in range(3)]


# -- repair ----------------------------------------------------------------------

def test_repair_knapsack():
    x, z = _pair(KNAPSACK)
    r = repair(KNAPSACK, x, z)
    assert r.decomposition.lambdas == (Fraction(1, 2),)
    assert r.decomposition.rounded == (0, 0)
    assert list(r.z_star.z) == [1, 1]
    assert r.l1_distance == Fraction(5, 2)
    assert r.chain_bound == 12


def test_repair_fractional_lambdas_leave_z_unchanged():
    x, z = _pair(KNAPSACK)
    r = repair(KNAPSACK, x, z)
    assert all(v < 1 for v in r.decomposition.lambdas)
    assert r.z_star.z == z.z


def test_repair_moves_far_solution_closer():
    # z̄ = (0, 0, 5) is optimal but far from x*; repair must pull it in
    inst = StandardInstance([[1, 1, 1]], [5], [1, 1, 1])
    _, x = lp_solve(inst)
    far = IpSolution(tuple(Fraction(v) for v in (0, 0, 5)) if x.x[2] == 0 else
                     tuple(Fraction(v) for v in (5, 0, 0)), Fraction(5))
    r = repair(inst, x, far)
    assert r.l1_distance < l1(far.z, x.x) or r.l1_distance == 0
    assert r.z_star.objective == 5


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(0, 3))
def test_repair_certificate_properties(seed, m, extra):
    inst = gen_random(seed, m, m + extra, 4)
    x, z_opt = _pair(inst)
    ms = min_support(inst, z_opt.objective)
    delta = minors.delta_k_exact(inst.A, m)[0]
    r = repair(inst, x, ms.solution, delta=delta)
    zs = r.z_star.z
    assert matvec(inst.A, zs) == list(inst.b)
    assert all(v >= 0 and v.denominator == 1 for v in zs)
    assert r.z_star.objective == z_opt.objective
    assert r.l1_distance == l1(zs, x.x)
    assert r.l1_distance == 0 or r.l1_distance < (m + 1) * len(r.cone.H) * delta
    assert len(r.cone.H) <= m + ms.size
    for chk in r.claim1:
        assert chk.support_ok and chk.scaled_ok


# -- measurement -----------------------------------------------------------------

def test_measure_knapsack():
    x, z = _pair(KNAPSACK)
    assert measure_true_proximity(KNAPSACK, x, hint=z.as_ints()).distance == Fraction(5, 2)
    assert measure_true_proximity(KNAPSACK, x, box=[3, 2]).distance == Fraction(5, 2)


def test_measure_integral_vertex():
    inst = StandardInstance(linalg.identity(2), [1, 2], [1, 1])
    x, z = _pair(inst)
    assert measure_true_proximity(inst, x, hint=z.as_ints()).distance == 0


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(0, 2))
def test_measure_matches_brute_force(seed, m, extra):
    inst = gen_random(seed, m, m + extra, 3, z0_range=3)
    x, z = _pair(inst)
    meas = measure_true_proximity(inst, x, hint=z.as_ints())
    # every optimum nearer than the certified one lies in this box
    r = repair(inst, x, z)
    box = [math.floor(v + r.l1_distance) for v in x.x]
    best, arg = brute_ip(inst.A, inst.b, inst.c, box)
    assert best == z.objective
    assert meas.distance == min(l1(p, x.x) for p in arg)
    aux = nearest_optimal_bnb(inst.A, inst.b, inst.c, list(range(inst.n)), x.x, z.objective)
    assert aux.distance == meas.distance


# -- U-IP pipeline ---------------------------------------------------------------

def test_uip_square():
    inst = StandardInstance([[2, 4], [1, 3]], [6, 4], [1, 1])
    res = uip_pipeline(inst)
    assert res.hnf.transformed == [[1, 1], [0, 2]]
    assert res.ub_norm == 2 and res.delta == 2
    assert res.chain_ok and res.approx_ok
    assert res.ip_value == res.transformed_ip_value
    assert res.measurement.distance == 0


def test_uip_identity_block():
    inst = StandardInstance([[1, 0, 1], [0, 1, 1]], [3, 2], [1, 1, 1])
    res = uip_pipeline(inst)
    assert res.maxdet.abs_det == 1 and res.ub_norm == 1
    assert res.thm2.passed


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6))
def test_uip_random_two_by_four(seed):
    inst = gen_random(seed, 2, 4, 4)
    res = uip_pipeline(inst)
    assert abs(linalg.det(res.hnf.unimodular)) == 1
    assert res.chain_ok and res.approx_ok and res.thm2.passed
    _, x = lp_solve(res.transformed)
    assert res.measurement.distance <= l1(ip_solve(res.transformed)[1].z, x.x)


def test_uip_epsilon_one_still_certified():
    res = uip_pipeline(gen_random(7, 2, 5, 4), epsilon=1)
    assert res.maxdet.epsilon == 1 and res.thm2.passed and res.approx_ok


# -- general form ----------------------------------------------------------------

def _gsolve(g):
    _, x = solve_glp(g)
    _, z = solve_gip(g)
    return x, z


def test_general_reduces_to_standard():
    g = GeneralInstance([[2, 3]], [[]], [], [5], [], [1, 1], 2, 0)
    x, z = _gsolve(g)
    r = repair_general(g, x.x, z.x)
    std = repair(KNAPSACK, *_pair(KNAPSACK))
    assert r.l1_distance == std.l1_distance
    assert tuple(r.z_star) == tuple(int(v) for v in std.z_star.z)


def test_general_integral_vertex():
    g = GeneralInstance([[1]], [[1]], [[1]], [3], [1], [1, 1], 1, 1)
    x, z = _gsolve(g)
    r = repair_general(g, x.x, z.x)
    assert r.l1_distance == 0


@pytest.mark.parametrize("seed", range(8))
def test_general_inequality_only_instance(seed):
    g = gen_general(seed, 1, 2, 0, 1, 3)
    x, z = _gsolve(g)
    r = repair_general(g, x.x, z.x)
    best, dist = general_nearest(g, x.x, r.l1_distance)
    assert best == z.objective
    assert dist <= r.l1_distance < r.chain_bound or r.l1_distance == 0


@pytest.mark.parametrize("seed, dims", [(s, dims) for s in range(4)
                                        for dims in ((1, 1, 1, 1), (0, 0, 2, 2), (1, 2, 1, 1), (2, 2, 1, 1))])
def test_general_repair_against_brute_force(seed, dims):
    m, n, d, t = dims
    g = gen_general(seed, m, n, d, t, 3)
    x, z = _gsolve(g)
    r = repair_general(g, x.x, z.x)
    assert r.rays_ok
    best, dist = general_nearest(g, x.x, r.l1_distance)
    assert best == z.objective
    assert dist <= r.l1_distance


def test_glp_returns_vertex_of_original_polyhedron():
    # free variable at zero can make the split-form basis map to a non-vertex
    for seed in range(30):
        g = gen_general(30_000 + seed, 1, 2, 1, 0, 3)
        _, x = solve_glp(g)
        tight = [list(a) + list(b) for a, b in zip(g.A, g.B)]
        tight += [[int(i == j) for i in range(g.n + g.d)] for j in range(g.n) if x.x[j] == 0]
        assert rank_gauss(tight) == g.n + g.d
