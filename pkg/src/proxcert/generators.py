"""Seeded instance generators.

Every generator is a pure function of its arguments: the same seed and
parameters always produce the same instance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from . import linalg
from .errors import PreconditionError, ResourceLimitError
from .instances import GeneralInstance
from .solvers import MipInstance, SolveStatus, StandardInstance, lp_solve, simplex

MAX_ATTEMPTS = 1000
Z0_RANGE = 5


def _rng(seed, *tag) -> random.Random:
    return random.Random(repr((seed,) + tag))


def _matrix(rng: random.Random, rows: int, cols: int, bound: int) -> List[List[int]]:
    return [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def gen_random(seed, m: int, n: int, entry_bound: int, z0_range: int = Z0_RANGE) -> StandardInstance:
    """Random feasible, bounded standard-form instance with ``rank(A) = m``.

    ``b = A z0`` for a random ``z0`` in ``[0, z0_range]^n``; ``c`` is resampled
    until the LP relaxation is bounded.
    """
    if not 1 <= m <= n or entry_bound < 1:
        raise PreconditionError("need 1 <= m <= n and entry_bound >= 1")
    rng = _rng(seed, "standard", m, n, entry_bound)
    for _ in range(MAX_ATTEMPTS):
        A = _matrix(rng, m, n, entry_bound)
        if linalg.rank(A) == m:
            break
    else:
        raise ResourceLimitError("could not draw a full-row-rank matrix")
    z0 = [rng.randint(0, z0_range) for _ in range(n)]
    b = linalg.matvec(A, z0)
    for _ in range(MAX_ATTEMPTS):
        c = [rng.randint(-entry_bound, entry_bound) for _ in range(n)]
        inst = StandardInstance(A, b, c)
        status, _ = lp_solve(inst)
        if status is SolveStatus.OPTIMAL:
            return inst
    raise ResourceLimitError("could not draw a bounded objective")


def gen_mip(seed, m: int, n: int, entry_bound: int) -> MipInstance:
    """:func:`gen_random` plus a random nonempty integrality set."""
    base = gen_random(seed, m, n, entry_bound)
    rng = _rng(seed, "mip", m, n, entry_bound)
    k = rng.randint(1, n)
    return MipInstance(base, sorted(rng.sample(range(n), k)))


def gen_general(seed, m: int, n: int, d: int, t: int, entry_bound: int) -> GeneralInstance:
    """Random general-form instance with a pointed, bounded, feasible relaxation.

    ``rank([B; C]) = d`` keeps the polyhedron pointed; the right-hand sides are
    built from a random integer point so the integer program is feasible.
    """
    if m + t == 0 or n + d == 0:
        raise PreconditionError("need at least one constraint and one variable")
    if m + t < d:
        raise PreconditionError("need m + t >= d so that [B; C] can have rank d")
    if not m and not d:
        raise PreconditionError("need an equality row or a free variable")
    rng = _rng(seed, "general", m, n, d, t, entry_bound)
    for _ in range(MAX_ATTEMPTS):
        A = _matrix(rng, m, n, entry_bound)
        B = _matrix(rng, m, d, entry_bound)
        C = _matrix(rng, t, d, entry_bound)
        eq = [a + b for a, b in zip(A, B)]
        if m and linalg.rank(eq) < m:
            continue
        if d and linalg.rank(B + C) < d:
            continue
        x0 = [rng.randint(0, Z0_RANGE) for _ in range(n)]
        y0 = [rng.randint(-Z0_RANGE, Z0_RANGE) for _ in range(d)]
        z0 = x0 + y0
        b1 = linalg.matvec(eq, z0) if m else []
        b2 = [sum(c * y for c, y in zip(row, y0)) + rng.randint(0, 3) for row in C]
        for _ in range(20):
            c = [rng.randint(-entry_bound, entry_bound) for _ in range(n + d)]
            g = GeneralInstance(A, B, C, b1, b2, c, n, d)
            std, _ = g.to_standard()
            if simplex(std.A, std.b, std.c).status is SolveStatus.OPTIMAL:
                return g
    raise ResourceLimitError("could not draw a bounded general-form instance")


def gen_nonvertex_demo(n: int) -> Tuple[StandardInstance, Tuple[Fraction, ...]]:
    """Zero-objective instance with a feasible half-integral point far from every integer point.

    ``A = [1, -1, 1, -1, ...]`` (last entry 0 when ``n`` is odd), ``b = 0``; the
    point with every coordinate 1/2 lies at ℓ1 distance at least ``n/2`` from
    every integer point, so non-vertex optima admit no proximity bound in ``m``.
    """
    if n < 2:
        raise PreconditionError("n >= 2 required")
    row = [1 if j % 2 == 0 else -1 for j in range(n)]
    if n % 2:
        row[-1] = 0
    inst = StandardInstance([row], [0], [0] * n)
    return inst, tuple(Fraction(1, 2) for _ in range(n))


@dataclass(frozen=True)
class FrontierEntry:
    seed: int
    instance: StandardInstance
    distance: Fraction
    delta: int
    entry_norm: int
    ratio_delta: Fraction
    ratio_entry: Fraction


def frontier_search(seed, m: int, n: int, entry_bound: int, budget: int) -> List[FrontierEntry]:
    """Random search for instances with large ``measured proximity / Δ``.

    Tries ``budget`` instances and returns them ranked by the exact ratio
    (descending), ties broken by seed.
    """
    from .pipeline import certify_instance

    rng = _rng(seed, "frontier", m, n, entry_bound)
    out = []
    for _ in range(budget):
        s = rng.randrange(2 ** 32)
        inst = gen_random(s, m, n, entry_bound)
        cert = certify_instance(inst)
        dist = cert.measurement.distance
        delta = cert.delta.delta
        norm = cert.delta.entry_norm
        out.append(FrontierEntry(s, inst, dist, delta, norm,
                                 Fraction(dist) / delta, Fraction(dist) / norm ** m))
    out.sort(key=lambda e: (-e.ratio_delta, e.seed))
    return out
