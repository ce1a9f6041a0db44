from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_ip, general_nearest, l1, matvec
from proxcert import generators, instances, pipeline
from proxcert.errors import PreconditionError, ValidationError
from proxcert.solvers import StandardInstance

GOLDEN = Path(__file__).resolve().parent.parent / "instances"
KNAPSACK = StandardInstance([[2, 3]], [5], [1, 1])


def test_knapsack_certificate():
    cert = pipeline.certify_instance(KNAPSACK)
    v = cert.primary
    assert list(v.x_star.x) == [Fraction(5, 2), 0]
    assert list(v.repair.z_star.z) == [1, 1]
    assert v.l1_distance == Fraction(5, 2) == v.measurement.distance
    assert v.measurement.linf == Fraction(3, 2)
    assert [list(r.u) for r in v.repair.rays] == [[-3, 2]]
    assert list(v.repair.decomposition.lambdas) == [Fraction(1, 2)]
    assert cert.delta.delta == 3 and cert.gram == 13 and cert.S == 2
    assert cert.certified and not v.failures()
    assert all(e.passed for e in v.ledger.entries.values() if e.subject)
    assert cert.sparsity_failures() == []


def test_knapsack_as_dict_is_exact_text():
    d = pipeline.certify_instance(KNAPSACK).as_dict()
    assert d["vertices"][0]["certified_distance"] == "5/2"
    assert d["ip_value"] == "2" and d["certified"] is True


def test_mip_certificate():
    mip, _ = instances.load(GOLDEN / "knapsack_mip.json")
    cert = pipeline.certify_mip(mip)
    assert list(cert.repair.z_star.z) == [2, Fraction(1, 3)]
    assert cert.measurement.distance == Fraction(5, 6) == cert.repair.l1_distance
    assert cert.certified and cert.cor5.passed


def test_general_certificate():
    g, _ = instances.load(GOLDEN / "general_small.json")
    cert = pipeline.certify_general(g)
    assert list(cert.x_star.x) == [Fraction(7, 2), 0, -1]
    assert list(cert.repair.z_star) == [2, 1, -1]
    assert cert.measurement.distance == Fraction(5, 2)
    assert cert.repair.delta_gen == 3 and cert.certified


def test_vertex_all_covers_every_optimal_vertex():
    # c is constant on the feasible segment, so both vertices are optimal
    inst = StandardInstance([[1, 1]], [3], [1, 1])
    cert = pipeline.certify_instance(inst, vertex_all=True)
    assert sorted(tuple(v.x_star.x) for v in cert.vertices) == [(0, 3), (3, 0)]
    assert all(v.measurement.distance == 0 for v in cert.vertices)
    assert cert.certified


@pytest.mark.parametrize("inst, exc, message", [
    (StandardInstance([[1, 1], [2, 2]], [1, 2], [1, 1]), ValidationError, r"rank\(A\) < m"),
    (StandardInstance([[2]], [1], [1]), PreconditionError, "IP infeasible"),
    (StandardInstance([[1, -1]], [0], [1, 1]), PreconditionError, "LP unbounded"),
])
def test_certify_rejects(inst, exc, message):
    with pytest.raises(exc, match=message):
        pipeline.certify_instance(inst)


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(0, 2))
def test_measured_distance_matches_brute_force(seed, m, extra):
    inst = generators.gen_random(seed, m, m + extra, 3, z0_range=3)
    cert = pipeline.certify_instance(inst)
    v = cert.primary
    # the certified distance bounds every coordinate of the nearest optimum
    radius = int(v.l1_distance) + 1
    box = [int(x) + radius for x in v.x_star.x]
    best, arg = brute_ip(inst.A, inst.b, inst.c, box)
    assert best == cert.ip_value
    assert v.measurement.distance == min(l1(z, v.x_star.x) for z in arg)
    assert v.measurement.distance <= v.l1_distance
    z = v.repair.z_star.z
    assert matvec(inst.A, z) == list(inst.b) and sum(c * x for c, x in zip(inst.c, z)) == best


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.sampled_from([(1, 2, 1, 0), (1, 1, 1, 1), (0, 0, 1, 2), (1, 2, 0, 0)]))
def test_general_measurement_matches_brute_force(seed, dims):
    g = generators.gen_general(seed, *dims, 2)
    cert = pipeline.certify_general(g)
    best, dist = general_nearest(g, cert.x_star.x, cert.repair.l1_distance)
    assert best == cert.z_in.objective
    assert dist == cert.measurement.distance
