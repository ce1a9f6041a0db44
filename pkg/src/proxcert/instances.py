"""Instance data model and the JSON instance-file format.

Files are UTF-8 JSON. Every integer is written as a decimal string so values
of any size survive the round trip. ``schema_version`` is mandatory.

Standard form::

    {"schema_version": 1, "form": "standard", "m": 1, "n": 2,
     "A": [["2", "3"]], "b": ["5"], "c": ["1", "1"]}

MIP adds ``"integral_indices": [0, ...]`` (0-based). General form carries
``m, n, d, t`` and the blocks ``A`` (m×n), ``B`` (m×d), ``C`` (t×d), ``b1``,
``b2`` and ``c`` (length n+d). An optional ``metadata`` object is preserved
verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

from . import linalg
from .errors import InstanceParseError, ValidationError
from .minors import stacked_general
from .solvers import MipInstance, StandardInstance

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GeneralInstance:
    """``max c z : [A, B] z = b1, [0, C] z <= b2, z integer, z_1..z_n >= 0``."""

    A: Tuple[Tuple[int, ...], ...]
    B: Tuple[Tuple[int, ...], ...]
    C: Tuple[Tuple[int, ...], ...]
    b1: Tuple[int, ...]
    b2: Tuple[int, ...]
    c: Tuple[int, ...]
    n: int
    d: int

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, tuple(tuple(r) for r in getattr(self, name)))
        for name in ("b1", "b2", "c"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        # an empty block with m > 0 means m empty rows
        for name in ("A", "B"):
            if not getattr(self, name) and self.b1:
                object.__setattr__(self, name, ((),) * len(self.b1))

    @property
    def m(self) -> int:
        return len(self.b1)

    @property
    def t(self) -> int:
        return len(self.b2)

    def eq_matrix(self) -> List[List[int]]:
        return [list(self.A[i]) + list(self.B[i]) for i in range(self.m)]

    def stacked(self) -> List[List[int]]:
        return stacked_general(self.A, self.B, self.C, self.n, self.d)

    def validate(self) -> None:
        m, n, d, t = self.m, self.n, self.d, self.t
        if len(self.A) != m or any(len(r) != n for r in self.A):
            raise ValidationError("A must be m x n")
        if len(self.B) != m or any(len(r) != d for r in self.B):
            raise ValidationError("B must be m x d")
        if len(self.C) != t or any(len(r) != d for r in self.C):
            raise ValidationError("C must be t x d")
        if len(self.c) != n + d:
            raise ValidationError("len(c) != n + d")
        if m and linalg.rank(self.eq_matrix()) < m:
            raise ValidationError("rank([A, B]) < m")

    def to_standard(self) -> Tuple[StandardInstance, "StandardMap"]:
        """Equivalent standard form over ``(x, y+, y-, s)`` with ``y = y+ - y-``."""
        m, n, d, t = self.m, self.n, self.d, self.t
        width = n + 2 * d + t
        rows, rhs = [], []
        for i in range(m):
            a, bb = list(self.A[i]), list(self.B[i])
            rows.append(a + bb + [-v for v in bb] + [0] * t)
            rhs.append(self.b1[i])
        for k in range(t):
            cc = list(self.C[k])
            slack = [0] * t
            slack[k] = 1
            rows.append([0] * n + cc + [-v for v in cc] + slack)
            rhs.append(self.b2[k])
        cost = list(self.c[:n]) + list(self.c[n:]) + [-v for v in self.c[n:]] + [0] * t
        if not rows:
            rows = [[0] * width]
            rhs = [0]
        return StandardInstance(rows, rhs, cost), StandardMap(n, d, t)


@dataclass(frozen=True)
class StandardMap:
    """Maps standard-form variables ``(x, y+, y-, s)`` back to ``(x, y)``."""

    n: int
    d: int
    t: int

    def back(self, v: Sequence) -> Tuple:
        n, d = self.n, self.d
        return tuple(v[:n]) + tuple(v[n + k] - v[n + d + k] for k in range(d))

    def coord_map(self) -> List[List[Tuple[int, int]]]:
        n, d = self.n, self.d
        return [[(j, 1)] for j in range(n)] + [[(n + k, 1), (n + d + k, -1)] for k in range(d)]

    @property
    def integral(self) -> List[int]:
        return list(range(self.n + 2 * self.d))


Instance = Union[StandardInstance, MipInstance, GeneralInstance]


# -- serialisation -------------------------------------------------------------


def _ints(v: Sequence[int]) -> List[str]:
    return [str(int(x)) for x in v]


def _mat(M: Sequence[Sequence[int]]) -> List[List[str]]:
    return [_ints(r) for r in M]


def to_dict(inst: Instance, metadata: Optional[dict] = None) -> dict:
    if isinstance(inst, GeneralInstance):
        out = {
            "schema_version": SCHEMA_VERSION,
            "form": "general",
            "m": inst.m, "n": inst.n, "d": inst.d, "t": inst.t,
            "A": _mat(inst.A), "B": _mat(inst.B), "C": _mat(inst.C),
            "b1": _ints(inst.b1), "b2": _ints(inst.b2), "c": _ints(inst.c),
        }
    else:
        base = inst.base if isinstance(inst, MipInstance) else inst
        out = {
            "schema_version": SCHEMA_VERSION,
            "form": "mip" if isinstance(inst, MipInstance) else "standard",
            "m": base.m, "n": base.n,
            "A": _mat(base.A), "b": _ints(base.b), "c": _ints(base.c),
        }
        if isinstance(inst, MipInstance):
            out["integral_indices"] = sorted(inst.integral_indices)
    if metadata:
        out["metadata"] = metadata
    return out


def serialize(inst: Instance, metadata: Optional[dict] = None) -> str:
    return json.dumps(to_dict(inst, metadata), indent=2) + "\n"


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool):
        raise InstanceParseError(f"{where}: expected an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value.strip(), 10)
        except ValueError:
            raise InstanceParseError(f"{where}: {value!r} is not a decimal integer") from None
    raise InstanceParseError(f"{where}: expected an integer or decimal string, got {type(value).__name__}")


def _vec(obj: dict, key: str) -> List[int]:
    if key not in obj:
        raise InstanceParseError(f"missing field '{key}'")
    v = obj[key]
    if not isinstance(v, list):
        raise InstanceParseError(f"field '{key}' must be a list")
    return [_int(x, f"{key}[{i}]") for i, x in enumerate(v)]


def _matrix(obj: dict, key: str) -> List[List[int]]:
    if key not in obj:
        raise InstanceParseError(f"missing field '{key}'")
    M = obj[key]
    if not isinstance(M, list) or not all(isinstance(r, list) for r in M):
        raise InstanceParseError(f"field '{key}' must be a list of rows")
    return [[_int(x, f"{key}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(M)]


def from_dict(obj: dict, validate: bool = True) -> Tuple[Instance, dict]:
    """Build an instance from a decoded file; returns ``(instance, metadata)``."""
    if not isinstance(obj, dict):
        raise InstanceParseError("top level must be an object")
    if "schema_version" not in obj:
        raise InstanceParseError("missing field 'schema_version'")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise InstanceParseError(f"unsupported schema_version {obj['schema_version']!r}")
    form = obj.get("form", "standard")
    meta = obj.get("metadata") or {}
    if form in ("standard", "mip"):
        A, b, c = _matrix(obj, "A"), _vec(obj, "b"), _vec(obj, "c")
        for key, actual in (("m", len(A)), ("n", len(c))):
            if key in obj and _int(obj[key], key) != actual:
                raise ValidationError(f"declared {key}={obj[key]} does not match the data ({actual})")
        inst: Instance = StandardInstance(A, b, c)
        if form == "mip":
            idx = obj.get("integral_indices")
            if not isinstance(idx, list):
                raise InstanceParseError("mip form needs an 'integral_indices' list")
            inst = MipInstance(inst, [_int(i, f"integral_indices[{k}]") for k, i in enumerate(idx)])
    elif form == "general":
        dims = {k: _int(obj.get(k), k) for k in ("m", "n", "d", "t")}
        inst = GeneralInstance(
            _matrix(obj, "A"), _matrix(obj, "B"), _matrix(obj, "C"),
            _vec(obj, "b1"), _vec(obj, "b2"), _vec(obj, "c"), dims["n"], dims["d"],
        )
        if inst.m != dims["m"] or inst.t != dims["t"]:
            raise ValidationError("declared m/t do not match b1/b2")
    else:
        raise InstanceParseError(f"unknown form {form!r}")
    if validate:
        inst.validate()
    return inst, meta


def parse(text: str, validate: bool = True) -> Tuple[Instance, dict]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(obj, validate)


def load(path: Union[str, Path], validate: bool = True) -> Tuple[Instance, dict]:
    return parse(Path(path).read_text(encoding="utf-8"), validate)


def dump(inst: Instance, path: Union[str, Path], metadata: Optional[dict] = None) -> None:
    Path(path).write_text(serialize(inst, metadata), encoding="utf-8")


def fraction_str(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
