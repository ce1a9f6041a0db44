"""End-to-end certification: solve, sparsify, repair, measure, compare against every bound."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from . import bounds, linalg, minors
from .bounds import BoundLedger, Comparison
from .errors import CertificationError, PreconditionError, ResourceLimitError, ValidationError
from .instances import GeneralInstance, fraction_str
from .proximity import (
    GeneralRepairResult,
    GeneralSolution,
    Measurement,
    RepairResult,
    measure_true_proximity,
    nearest_optimal_bnb,
    nearest_optimal_general,
    repair,
    repair_general,
    solve_gip,
    solve_glp,
)
from .solvers import (
    IpSolution,
    Limits,
    LpVertex,
    MipInstance,
    SolveStatus,
    StandardInstance,
    check_assumptions,
    lp_solve,
    min_support,
    mip_solve,
)

# proximity bounds checked against the measured nearest optimal solution
EXISTENCE_BOUNDS = ("cook_l1", "ew_entry", "ew_delta", "thm1", "cor6")


def _fmt(v) -> str:
    return fraction_str(v)


def _cmp_dict(c: Comparison) -> dict:
    return {"passed": c.passed, "lhs": _fmt(c.lhs), "bound": c.value, "escalated": c.escalated}


@dataclass
class VertexCertificate:
    """Certificate for one optimal LP vertex of a standard-form instance."""

    x_star: LpVertex
    z_star: IpSolution
    repair: RepairResult
    measurement: Measurement
    ledger: BoundLedger

    @property
    def l1_distance(self) -> Fraction:
        return self.repair.l1_distance

    def failures(self) -> List[str]:
        return [k for k, e in self.ledger.entries.items() if e.subject and e.passed is not True]

    def as_dict(self) -> dict:
        return {
            "x_star": [_fmt(v) for v in self.x_star.x],
            "basis": list(self.x_star.basis),
            "z_star": [_fmt(v) for v in self.z_star.z],
            "certified_distance": _fmt(self.l1_distance),
            "measured_distance": _fmt(self.measurement.distance),
            "measured_linf": _fmt(self.measurement.linf),
            "nearest_point": [_fmt(v) for v in self.measurement.point],
            "chain_bound": self.repair.chain_bound,
            "rays": [list(r.u) for r in self.repair.rays],
            "lambdas": [_fmt(v) for v in self.repair.decomposition.lambdas],
            "H": list(self.repair.cone.H),
            "bounds": self.ledger.as_dict(),
        }


@dataclass
class Certificate:
    """Full proximity certificate for a standard-form instance."""

    instance: StandardInstance
    delta: minors.DeltaReport
    gram: int
    ip_value: Fraction
    z_bar: IpSolution
    S: int
    vertices: List[VertexCertificate]
    sparsity: Dict[str, Comparison] = field(default_factory=dict)

    @property
    def primary(self) -> VertexCertificate:
        return self.vertices[0]

    @property
    def measurement(self) -> Measurement:
        return self.primary.measurement

    @property
    def ledger(self) -> BoundLedger:
        return self.primary.ledger

    @property
    def certified(self) -> bool:
        return all(not v.failures() for v in self.vertices)

    def sparsity_failures(self) -> List[str]:
        return [k for k, c in self.sparsity.items() if c.passed is not True]

    def as_dict(self) -> dict:
        return {
            "form": "standard",
            "m": self.instance.m,
            "n": self.instance.n,
            "delta": self.delta.as_dict(),
            "gram_det": str(self.gram),
            "ip_value": _fmt(self.ip_value),
            "min_support_solution": [_fmt(v) for v in self.z_bar.z],
            "S": self.S,
            "sparsity": {k: _cmp_dict(c) for k, c in self.sparsity.items()},
            "vertices": [v.as_dict() for v in self.vertices],
            "certified": self.certified,
            "failures": sorted({f for v in self.vertices for f in v.failures()}),
            "sparsity_failures": self.sparsity_failures(),
        }


def _require(inst: StandardInstance, limits: Optional[Limits]) -> Tuple[LpVertex, IpSolution]:
    rep = check_assumptions(inst, limits)
    if not rep.full_row_rank:
        raise ValidationError("rank(A) < m")
    if not rep.lp_feasible or rep.ip_feasible is False:
        raise PreconditionError("IP infeasible")
    if not rep.lp_bounded:
        raise PreconditionError("LP unbounded")
    if rep.ip_status != SolveStatus.OPTIMAL.value:
        raise ResourceLimitError(f"IP not solved ({rep.ip_status})")
    _, x_star = lp_solve(inst)
    z = [Fraction(v) for v in rep.ip_witness]
    return x_star, IpSolution(tuple(z), sum(c * v for c, v in zip(inst.c, z)))


def optimal_vertices(inst: StandardInstance, lp_value) -> List[LpVertex]:
    """Every optimal vertex, each with a dual-feasible basis when one exists (desk scale)."""
    m, n = inst.m, inst.n
    found: Dict[Tuple[Fraction, ...], LpVertex] = {}
    dual_ok: Dict[Tuple[Fraction, ...], bool] = {}
    for cols in combinations(range(n), m):
        B = linalg.columns(inst.A, cols)
        if linalg.det(B) == 0:
            continue
        xb = linalg.solve_square(B, inst.b)
        if any(v < 0 for v in xb):
            continue
        x = [Fraction(0)] * n
        for j, v in zip(cols, xb):
            x[j] = v
        if sum(c * v for c, v in zip(inst.c, x)) != lp_value:
            continue
        y = linalg.solve_square(linalg.transpose(B), [inst.c[j] for j in cols])
        feasible = all(inst.c[j] - sum(a * yy for a, yy in zip([r[j] for r in inst.A], y)) <= 0 for j in range(n))
        key = tuple(x)
        if key not in found or (feasible and not dual_ok[key]):
            found[key] = LpVertex(key, tuple(cols), Fraction(lp_value))
            dual_ok[key] = feasible
    return [found[k] for k in sorted(found)]


def _certify_vertex(inst: StandardInstance, x_star: LpVertex, z_bar: IpSolution, z_opt: IpSolution,
                    rep: minors.DeltaReport, S: int, gram: int, cap, limits) -> VertexCertificate:
    m, n = inst.m, inst.n
    r = repair(inst, x_star, z_bar, delta=rep.delta, cap=cap)
    try:
        meas = measure_true_proximity(inst, x_star, hint=z_opt.as_ints(), cap=cap, delta=rep.delta)
    except PreconditionError:
        # basis not dual feasible: fall back to the exact auxiliary search
        meas = nearest_optimal_bnb(inst.A, inst.b, inst.c, list(range(n)), x_star.x, z_opt.objective,
                                   limits=limits)
    if meas.distance > r.l1_distance:
        raise CertificationError("measured nearest distance exceeds the repaired distance")
    if meas.objective != z_opt.objective:
        raise CertificationError("oracle optimum differs from the solver optimum")
    led = bounds.standard_ledger(m, n, rep.delta_k, S=S, gram=gram)
    led.check("cook_inf", meas.linf, "measured_linf", strict=False)
    for name in EXISTENCE_BOUNDS:
        led.check(name, meas.distance, "measured")
    led.check("lemma3", r.l1_distance, "certified")
    return VertexCertificate(x_star, r.z_star, r, meas, led)


def sparsity_report(m: int, S: int, rep: minors.DeltaReport, gram: int) -> Dict[str, Comparison]:
    return {
        "sparsity_thm4": bounds.sparsity_check("sparsity_thm4", S, m=m, delta=rep.delta),
        "sparsity_cor5": bounds.sparsity_check("sparsity_cor5", S, m=m, delta=rep.delta),
        "sparsity_eq7_gram": bounds.sparsity_check("sparsity_eq7_gram", S, strict=False, m=m, gram_det=gram),
        "sparsity_eq7_entry": bounds.sparsity_check("sparsity_eq7_entry", S, strict=False, m=m,
                                                    entry_norm=rep.entry_norm),
    }


def certify_instance(inst: StandardInstance, vertex_all: bool = False, cap: Optional[int] = None,
                     limits: Optional[Limits] = None) -> Certificate:
    """Run the whole chain on a standard-form instance.

    Bound violations are recorded in the ledger rather than raised; failed
    internal checks (feasibility, objective, repair chain) raise
    :class:`CertificationError`.
    """
    inst.validate()
    x_star, z_opt = _require(inst, limits)
    ms = min_support(inst, z_opt.objective, limits)
    if ms.solution is None:
        raise ResourceLimitError("min_support did not finish within its cap")
    rep = minors.delta_report(inst.A, cap)
    gram = minors.gram_det(inst.A)
    vertices = optimal_vertices(inst, x_star.objective) if vertex_all else [x_star]
    certs = [_certify_vertex(inst, v, ms.solution, z_opt, rep, ms.size, gram, cap, limits) for v in vertices]
    return Certificate(inst, rep, gram, z_opt.objective, ms.solution, ms.size, certs,
                       sparsity_report(inst.m, ms.size, rep, gram))


@dataclass
class MipCertificate:
    instance: MipInstance
    x_star: LpVertex
    z_bar: IpSolution
    S: int
    delta: int
    repair: RepairResult
    measurement: Measurement
    cor6: Comparison
    cor5: Comparison

    @property
    def certified(self) -> bool:
        return self.cor6.passed is True

    def as_dict(self) -> dict:
        return {
            "form": "mip",
            "integral_indices": list(self.instance.integral_indices),
            "x_star": [_fmt(v) for v in self.x_star.x],
            "z_star": [_fmt(v) for v in self.repair.z_star.z],
            "S": self.S,
            "delta": self.delta,
            "certified_distance": _fmt(self.repair.l1_distance),
            "measured_distance": _fmt(self.measurement.distance),
            "cor6": _cmp_dict(self.cor6),
            "cor5": _cmp_dict(self.cor5),
            "certified": self.certified,
        }


def certify_mip(inst: MipInstance, cap: Optional[int] = None, limits: Optional[Limits] = None) -> MipCertificate:
    inst.validate()
    base = inst.base
    status, x_star = lp_solve(base)
    if x_star is None:
        raise PreconditionError(f"LP relaxation {status.value}")
    status, z = mip_solve(inst, limits)
    if status is SolveStatus.INFEASIBLE:
        raise PreconditionError("MIP infeasible")
    if status is not SolveStatus.OPTIMAL or z is None:
        raise ResourceLimitError(f"MIP not solved ({status.value})")
    ms = min_support(inst, z.objective, limits)
    if ms.solution is None:
        raise ResourceLimitError("min_support did not finish within its cap")
    delta, _ = minors.delta_k_exact(base.A, base.m, cap)
    r = repair(inst, x_star, ms.solution, delta=delta, cap=cap)
    meas = nearest_optimal_bnb(base.A, base.b, base.c, sorted(inst.integral_indices), x_star.x, z.objective,
                               limits=limits)
    if meas.distance > r.l1_distance:
        raise CertificationError("measured nearest distance exceeds the repaired distance")
    m = base.m
    return MipCertificate(inst, x_star, ms.solution, ms.size, delta, r, meas,
                          bounds.compare(meas.distance, "cor6", m=m, delta=delta),
                          bounds.sparsity_check("sparsity_cor5", ms.size, m=m, delta=delta))


@dataclass
class GeneralCertificate:
    instance: GeneralInstance
    x_star: GeneralSolution
    z_in: GeneralSolution
    repair: GeneralRepairResult
    measurement: Measurement
    cor7: Comparison

    @property
    def certified(self) -> bool:
        return self.cor7.passed is True and self.repair.rays_ok

    def as_dict(self) -> dict:
        g = self.instance
        return {
            "form": "general",
            "m": g.m, "n": g.n, "d": g.d, "t": g.t,
            "delta_general": self.repair.delta_gen,
            "x_star": [_fmt(v) for v in self.x_star.x],
            "z_star": [str(v) for v in self.repair.z_star],
            "certified_distance": _fmt(self.repair.l1_distance),
            "chain_bound": self.repair.chain_bound,
            "measured_distance": _fmt(self.measurement.distance),
            "cor7": _cmp_dict(self.cor7),
            "rays_ok": self.repair.rays_ok,
            "certified": self.certified,
        }


def certify_general(g: GeneralInstance, cap: Optional[int] = None, limits: Optional[Limits] = None) -> GeneralCertificate:
    g.validate()
    status, x_star = solve_glp(g)
    if x_star is None:
        raise PreconditionError(f"general-form LP {status.value}")
    status, z = solve_gip(g, limits)
    if status is SolveStatus.INFEASIBLE:
        raise PreconditionError("IP infeasible")
    if status is not SolveStatus.OPTIMAL or z is None:
        raise ResourceLimitError(f"general-form IP not solved ({status.value})")
    dg, _ = minors.delta_general(g.A, g.B, g.C, n=g.n, d=g.d, cap=cap)
    r = repair_general(g, x_star.x, [int(v) for v in z.x], delta_gen=dg, cap=cap)
    meas = nearest_optimal_general(g, x_star.x, z.objective, radius=r.l1_distance, limits=limits)
    if meas.distance > r.l1_distance:
        raise CertificationError("measured nearest distance exceeds the repaired distance")
    cor7 = bounds.compare(meas.distance, "cor7", m=g.m, n=g.n, t=g.t, d=g.d, delta_gen=dg)
    return GeneralCertificate(g, x_star, z, r, meas, cor7)
