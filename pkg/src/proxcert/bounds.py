"""Proximity and sparsity bound formulas.

Every formula is written once against a small arithmetic backend so the same
expression can be evaluated in double precision (for reporting) or as a
rigorous mpmath interval (for deciding comparisons near the boundary).
All logarithms are base two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional

from mpmath import iv, libmp

NEAR_MISS_RTOL = 1e-9
BASE_PRECISION = 256
MAX_PRECISION = 4096


class _Float:
    @staticmethod
    def num(x):
        return float(x)

    @staticmethod
    def log2(x):
        return math.log2(x)

    @staticmethod
    def sqrt(x):
        return math.sqrt(x)

    @staticmethod
    def root(x, k):
        return float(x) ** (1.0 / k)

    @staticmethod
    def min(a, b):
        return min(a, b)


class _Interval:
    """mpmath interval backend; set ``iv.prec`` before use."""

    @staticmethod
    def num(x):
        x = Fraction(x)
        return iv.mpf(x.numerator) / x.denominator

    @staticmethod
    def log2(x):
        return iv.log(x) / iv.log(iv.mpf(2))

    @staticmethod
    def sqrt(x):
        return iv.sqrt(x)

    @staticmethod
    def root(x, k):
        return iv.exp(iv.log(iv.mpf(x)) / k)

    @staticmethod
    def min(a, b):
        a, b = iv.mpf(a), iv.mpf(b)
        return iv.mpf([min(a.a, b.a), min(a.b, b.b)])


# -- formulas ---------------------------------------------------------------


def _cook_inf(o, n, delta_max):
    return o.num(n * delta_max)


def _cook_l1(o, m, n, delta):
    return o.num((m + 1) * n * delta)


def _ew_entry(o, m, entry_norm):
    return o.num(m * (2 * m * entry_norm + 1) ** m)


def _ew_delta(o, m, delta):
    return o.num(m * (2 * m + 1) ** m * delta)


def _thm1(o, m, delta):
    return 3 * m * m * o.log2(2 * o.sqrt(m) * o.root(delta, m)) * delta


def _lemma3(o, m, S, delta):
    return o.num((m + 1) * (m + S) * delta)


def _hnf_known(o, m, ub_norm):
    return 3 * m * m * o.log2(2 * o.sqrt(m) * ub_norm) * o.num(ub_norm ** m)


def _det_factor(o, m):
    # (2 log(m+1))^{m/2}
    return o.sqrt(2 * o.log2(m + 1)) ** m


def _thm2(o, m, ub_norm):
    lg = o.log2(m + 1)
    return (3 * m * m * o.log2(2 * o.sqrt(2 * m * lg) * ub_norm)
            * _det_factor(o, m) * o.num(ub_norm ** m))


def _cor6(o, m, delta):
    return 3 * m * m * o.log2(2 * o.sqrt(2 * m) * o.root(delta, m)) * delta


def _sparsity_term(o, m, delta):
    # 2m log(2 sqrt(m) delta^{1/m}); the m -> 0 limit is 2 log(delta)
    if m == 0:
        return 2 * o.log2(delta) if delta > 1 else o.num(0)
    return 2 * m * o.log2(2 * o.sqrt(m) * o.root(delta, m))


def _cor7(o, m, n, t, d, delta_gen):
    if delta_gen == 0:
        return o.num(0)
    rows = min(m + t + 1, n + d)
    spars = o.min(o.num(n), _sparsity_term(o, m, delta_gen)) if n else o.num(0)
    return rows * (spars + d) * delta_gen


def _eq7_gram(o, m, gram_det):
    return m + o.log2(o.sqrt(gram_det))


def _eq7_entry(o, m, entry_norm):
    return 2 * m * o.log2(2 * o.sqrt(m) * entry_norm)


def _thm4(o, m, delta):
    return 2 * m * o.log2(o.sqrt(2 * m) * o.root(delta, m))


def _cor5(o, m, delta):
    return _sparsity_term(o, m, delta)


FORMULAS: Dict[str, Callable] = {
    "cook_inf": _cook_inf,
    "cook_l1": _cook_l1,
    "ew_entry": _ew_entry,
    "ew_delta": _ew_delta,
    "thm1": _thm1,
    "lemma3": _lemma3,
    "hnf_known": _hnf_known,
    "thm2": _thm2,
    "cor6": _cor6,
    "cor7": _cor7,
    "sparsity_eq7_gram": _eq7_gram,
    "sparsity_eq7_entry": _eq7_entry,
    "sparsity_thm4": _thm4,
    "sparsity_cor5": _cor5,
    "det_factor": _det_factor,
}

# which distance each proximity bound constrains
NORMS = {"cook_inf": "linf"}


def evaluate(name: str, **args) -> float:
    return float(FORMULAS[name](_Float, **args))


def evaluate_interval(name: str, prec: int = BASE_PRECISION, **args) -> tuple[Fraction, Fraction]:
    """Rigorous enclosure ``[lo, hi]`` of a bound at ``prec`` bits, as exact rationals."""
    old = iv.prec
    iv.prec = prec
    try:
        val = iv.mpf(FORMULAS[name](_Interval, **args))
        lo, hi = val._mpi_
        return Fraction(*libmp.to_rational(lo)), Fraction(*libmp.to_rational(hi))
    finally:
        iv.prec = old


# -- public formula API ---------------------------------------------------------


def bound_cook(m: int, n: int, delta_k, delta: int) -> tuple[float, float]:
    """Cook et al.: (ℓ∞ bound ``n max_k Δ_k``, ℓ1 bound ``(m+1) n Δ``)."""
    return evaluate("cook_inf", n=n, delta_max=max(delta_k)), evaluate("cook_l1", m=m, n=n, delta=delta)


def bound_ew(m: int, entry_norm: int, delta: int) -> tuple[float, float]:
    """Eisenbrand–Weismantel: entry form and Δ form."""
    return evaluate("ew_entry", m=m, entry_norm=entry_norm), evaluate("ew_delta", m=m, delta=delta)


def bound_thm1(m: int, delta: int) -> float:
    return evaluate("thm1", m=m, delta=delta)


def bound_lemma3(m: int, S: int, delta: int) -> float:
    return evaluate("lemma3", m=m, S=S, delta=delta)


def bound_hnf_known(m: int, ub_norm: int) -> float:
    return evaluate("hnf_known", m=m, ub_norm=ub_norm)


def bound_thm2(m: int, ub_norm: int) -> float:
    return evaluate("thm2", m=m, ub_norm=ub_norm)


def bound_cor6(m: int, delta: int) -> float:
    return evaluate("cor6", m=m, delta=delta)


def bound_cor7(m: int, n: int, t: int, d: int, delta_gen: int) -> float:
    return evaluate("cor7", m=m, n=n, t=t, d=d, delta_gen=delta_gen)


def det_approx_factor(m: int) -> float:
    return evaluate("det_factor", m=m)


def sparsity_bounds(m: int, entry_norm: int, delta: int, gram_det: Optional[int] = None):
    """Return ``((eq7_gram or None, eq7_entry), thm4, cor5)``."""
    gram = evaluate("sparsity_eq7_gram", m=m, gram_det=gram_det) if gram_det is not None else None
    return (
        (gram, evaluate("sparsity_eq7_entry", m=m, entry_norm=entry_norm)),
        evaluate("sparsity_thm4", m=m, delta=delta),
        evaluate("sparsity_cor5", m=m, delta=delta),
    )


# -- comparison policy --------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    """Outcome of ``lhs < bound`` (or ``<=``) with the precision actually needed.

    ``passed`` is ``None`` when even the highest precision could not separate
    the two sides (an unresolved near-miss).
    """

    passed: Optional[bool]
    lhs: Fraction
    value: float
    escalated: bool = False
    precision: int = 53


def compare(lhs, name: str, strict: bool = True, **args) -> Comparison:
    """Decide ``lhs < bound`` exactly enough.

    Double precision settles clear passes. Anything within relative
    ``NEAR_MISS_RTOL`` of the boundary, and anything that looks like a
    failure, is re-decided with interval arithmetic starting at 256 bits and
    doubling until the enclosure separates from ``lhs``.
    """
    lhs = Fraction(lhs)
    value = evaluate(name, **args)
    if math.isfinite(value) and float(lhs) < value - NEAR_MISS_RTOL * abs(value):
        return Comparison(True, lhs, value)
    prec = BASE_PRECISION
    while prec <= MAX_PRECISION:
        lo, hi = evaluate_interval(name, prec=prec, **args)
        if lhs < lo or (not strict and lhs <= lo):
            return Comparison(True, lhs, value, True, prec)
        if lhs > hi or (strict and lhs >= hi):
            return Comparison(False, lhs, value, True, prec)
        prec *= 2
    return Comparison(None, lhs, value, True, prec // 2)


# -- ledger -------------------------------------------------------------------


@dataclass
class BoundEntry:
    value: float
    inputs: dict
    norm: str = "l1"
    passed: Optional[bool] = None
    subject: Optional[str] = None
    escalated: bool = False

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "inputs": self.inputs,
            "norm": self.norm,
            "passed": self.passed,
            "subject": self.subject,
            "escalated": self.escalated,
        }


@dataclass
class BoundLedger:
    entries: Dict[str, BoundEntry] = field(default_factory=dict)

    def add(self, name: str, **inputs) -> BoundEntry:
        entry = BoundEntry(evaluate(name, **inputs), inputs, NORMS.get(name, "l1"))
        self.entries[name] = entry
        return entry

    def check(self, name: str, lhs, subject: str, strict: bool = True) -> Comparison:
        entry = self.entries[name]
        cmp = compare(lhs, name, strict=strict, **entry.inputs)
        entry.passed, entry.subject, entry.escalated = cmp.passed, subject, cmp.escalated
        return cmp

    def __getitem__(self, name: str) -> BoundEntry:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def as_dict(self) -> dict:
        return {k: v.as_dict() for k, v in self.entries.items()}


def standard_ledger(m: int, n: int, delta_k, S: Optional[int] = None, gram: Optional[int] = None) -> BoundLedger:
    """Every standard-form bound computable from the given data."""
    delta = delta_k[-1] if len(delta_k) >= m else None
    led = BoundLedger()
    led.add("cook_inf", n=n, delta_max=max(delta_k))
    led.add("cook_l1", m=m, n=n, delta=delta)
    led.add("ew_entry", m=m, entry_norm=delta_k[0])
    led.add("ew_delta", m=m, delta=delta)
    led.add("thm1", m=m, delta=delta)
    led.add("cor6", m=m, delta=delta)
    if S is not None:
        led.add("lemma3", m=m, S=S, delta=delta)
    if gram is not None:
        led.add("sparsity_eq7_gram", m=m, gram_det=gram)
    led.add("sparsity_eq7_entry", m=m, entry_norm=delta_k[0])
    led.add("sparsity_thm4", m=m, delta=delta)
    led.add("sparsity_cor5", m=m, delta=delta)
    return led


# -- exact sparsity comparisons -------------------------------------------------
#
# Each sparsity bound is log2 of an integer expression, so ``S < bound`` (or
# ``<=``) can be decided with integer arithmetic alone.


def _sparsity_rhs(name: str, m: int, **args) -> int:
    # S <op> bound  <=>  2**S <op> rhs  (4**S for the Gram form)
    if name == "sparsity_thm4":
        return (2 * m) ** m * args["delta"] ** 2
    if name == "sparsity_cor5":
        return (4 * m) ** m * args["delta"] ** 2
    if name == "sparsity_eq7_entry":
        return (4 * m) ** m * args["entry_norm"] ** (2 * m)
    if name == "sparsity_eq7_gram":
        return 4 ** m * args["gram_det"]
    raise KeyError(name)


def sparsity_check(name: str, S: int, strict: bool = True, **args) -> Comparison:
    """Exact ``S < bound`` (``<=`` when ``strict`` is false) for a sparsity bound."""
    m = args["m"]
    value = evaluate(name, **args)
    if m == 0:
        return compare(S, name, strict=strict, **args)
    rhs = _sparsity_rhs(name, **args)
    lhs = 4 ** S if name == "sparsity_eq7_gram" else 2 ** S
    passed = lhs < rhs if strict else lhs <= rhs
    return Comparison(passed, Fraction(S), value, False, 0)
