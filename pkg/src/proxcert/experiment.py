"""Batch experiments: seeded grids of instances, one CSV row each, plus a Markdown summary."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

from .errors import CertificationError, ProxcertError, ValidationError
from .generators import gen_general, gen_mip, gen_random
from .instances import fraction_str
from .pipeline import certify_general, certify_instance, certify_mip
from .solvers import Limits

FORM_BOUNDS = {
    "standard": ["cook_inf", "cook_l1", "ew_entry", "ew_delta", "thm1", "cor6", "lemma3",
                 "sparsity_thm4", "sparsity_cor5", "sparsity_eq7_gram", "sparsity_eq7_entry"],
    "mip": ["cor6", "sparsity_cor5"],
    "general": ["cor7"],
}
GRID_KEYS = {
    "standard": ("m", "n", "entry_bound"),
    "mip": ("m", "n", "entry_bound"),
    "general": ("m", "n", "d", "t", "entry_bound"),
}
# what each bound is compared with
SUBJECT = {"cook_inf": "measured_linf", "lemma3": "certified"}


@dataclass
class ExperimentConfig:
    seed: int
    form: str = "standard"
    count: int = 10
    grid: Dict[str, List[int]] = field(default_factory=dict)
    bounds: Optional[List[str]] = None
    cap: Optional[int] = None
    node_limit: int = 200_000
    record_runtime: bool = False
    csv_path: Optional[str] = None
    summary_path: Optional[str] = None

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ValidationError("config must be a JSON object")
        known = {"seed", "form", "count", "grid", "bounds", "cap", "node_limit", "record_runtime", "output"}
        extra = set(obj) - known
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        if "seed" not in obj:
            raise ValidationError("config needs a 'seed'")
        out = obj.get("output") or {}
        cfg = cls(
            seed=obj["seed"],
            form=obj.get("form", "standard"),
            count=obj.get("count", 10),
            grid=obj.get("grid", {}),
            bounds=obj.get("bounds"),
            cap=obj.get("cap"),
            node_limit=obj.get("node_limit", 200_000),
            record_runtime=bool(obj.get("record_runtime", False)),
            csv_path=out.get("csv"),
            summary_path=out.get("summary"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.form not in FORM_BOUNDS:
            raise ValidationError(f"form must be one of {sorted(FORM_BOUNDS)}")
        if not isinstance(self.seed, int):
            raise ValidationError("seed must be an integer")
        if not isinstance(self.count, int) or self.count < 0:
            raise ValidationError("count must be a nonnegative integer")
        for key in self.grid:
            if key not in GRID_KEYS[self.form]:
                raise ValidationError(f"grid key {key!r} not valid for form {self.form}")
        for key in GRID_KEYS[self.form]:
            vals = self.grid.get(key)
            if vals is None:
                raise ValidationError(f"grid needs {key!r}")
            if not isinstance(vals, list) or not all(isinstance(v, int) and v >= 0 for v in vals):
                raise ValidationError(f"grid[{key!r}] must be a list of nonnegative integers")
        if any(v > 6 for v in self.grid.get("m", [])) or any(v > 12 for v in self.grid.get("n", [])):
            raise ValidationError("grid outside desk scale (m <= 6, n <= 12)")
        if any(v < 1 for v in self.grid.get("entry_bound", [])):
            raise ValidationError("entry_bound must be >= 1")
        for key in ("cap", "node_limit"):
            v = getattr(self, key)
            if v is not None and (not isinstance(v, int) or v <= 0):
                raise ValidationError(f"{key} must be a positive integer")
        if self.bounds is not None:
            bad = set(self.bounds) - set(FORM_BOUNDS[self.form])
            if bad:
                raise ValidationError(f"unknown bounds for form {self.form}: {sorted(bad)}")

    @property
    def bound_names(self) -> List[str]:
        if self.bounds is None:
            return list(FORM_BOUNDS[self.form])
        return [b for b in FORM_BOUNDS[self.form] if b in self.bounds]

    def cells(self) -> List[Dict[str, int]]:
        keys = GRID_KEYS[self.form]
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


def load_config(path) -> ExperimentConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(obj)


def columns(cfg: ExperimentConfig) -> List[str]:
    cols = ["id", "seed", *GRID_KEYS[cfg.form], "status", "error", "delta", "entry_norm", "S",
            "measured", "measured_decimal", "measured_linf", "certified", "certified_decimal"]
    for b in cfg.bound_names:
        cols += [b, f"{b}_pass"]
    if cfg.record_runtime:
        cols.append("runtime_s")
    return cols


def _decimal(v: Fraction) -> str:
    return f"{float(v):.6f}"


def _valid_cell(form: str, p: Dict[str, int]) -> bool:
    if form == "general":
        return (p["m"] + p["t"] >= max(1, p["d"]) and p["n"] + p["d"] >= 1
                and (p["m"] or p["d"]))
    return 1 <= p["m"] <= p["n"]


def _run_one(task) -> dict:
    idx, seed, form, params, bound_names, cap, node_limit, record_runtime = task
    row = {"id": idx, "seed": seed, **params, "status": "ok", "error": ""}
    limits = Limits(node_limit=node_limit)
    t0 = time.perf_counter()
    try:
        if not _valid_cell(form, params):
            raise ValidationError(f"invalid grid cell {params}")
        if form == "standard":
            inst = gen_random(seed, params["m"], params["n"], params["entry_bound"])
            cert = certify_instance(inst, cap=cap, limits=limits)
            vc = cert.primary
            meas_linf = vc.measurement.linf
            row.update(delta=cert.delta.delta, entry_norm=cert.delta.entry_norm, S=cert.S,
                       measured=vc.measurement.distance, certified=vc.l1_distance)
            flags = {k: (e.value, e.passed) for k, e in vc.ledger.entries.items()}
            flags.update({k: (c.value, c.passed) for k, c in cert.sparsity.items()})
        elif form == "mip":
            inst = gen_mip(seed, params["m"], params["n"], params["entry_bound"])
            cert = certify_mip(inst, cap=cap, limits=limits)
            meas_linf = cert.measurement.linf
            row.update(delta=cert.delta, entry_norm=max(abs(v) for r in inst.base.A for v in r), S=cert.S,
                       measured=cert.measurement.distance, certified=cert.repair.l1_distance)
            flags = {"cor6": (cert.cor6.value, cert.cor6.passed),
                     "sparsity_cor5": (cert.cor5.value, cert.cor5.passed)}
        else:
            g = gen_general(seed, params["m"], params["n"], params["d"], params["t"], params["entry_bound"])
            cert = certify_general(g, cap=cap, limits=limits)
            norm = max((abs(v) for blk in (g.A, g.B, g.C) for r in blk for v in r), default=0)
            meas_linf = cert.measurement.linf
            row.update(delta=cert.repair.delta_gen, entry_norm=norm, S=cert.repair.support_union,
                       measured=cert.measurement.distance, certified=cert.repair.l1_distance)
            flags = {"cor7": (cert.cor7.value, cert.cor7.passed)}
        for b in bound_names:
            value, passed = flags.get(b, (None, None))
            row[b] = "" if value is None else repr(value)
            row[f"{b}_pass"] = "" if passed is None and value is None else str(passed)
        row["measured_decimal"] = _decimal(row["measured"])
        row["certified_decimal"] = _decimal(row["certified"])
        row["measured_linf"] = fraction_str(meas_linf)
        row["measured"] = fraction_str(row["measured"])
        row["certified"] = fraction_str(row["certified"])
    except CertificationError as exc:
        row.update(status="certification-failure", error=str(exc))
    except ProxcertError as exc:
        row.update(status=type(exc).__name__, error=str(exc))
    if record_runtime:
        row["runtime_s"] = f"{time.perf_counter() - t0:.3f}"
    return row


def tasks(cfg: ExperimentConfig) -> list:
    out, idx = [], 0
    for cell in cfg.cells():
        for k in range(cfg.count):
            seed = cfg.seed * 1_000_003 + idx
            out.append((idx, seed, cfg.form, cell, cfg.bound_names, cfg.cap, cfg.node_limit, cfg.record_runtime))
            idx += 1
    return out


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> List[dict]:
    """Run every grid cell; rows come back in input order whatever ``jobs`` is."""
    work = tasks(cfg)
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, work, chunksize=4))
    return [_run_one(t) for t in work]


def to_csv(cfg: ExperimentConfig, rows: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns(cfg), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in columns(cfg)})
    return buf.getvalue()


def _percentile(sorted_vals: List[Fraction], q: float) -> Fraction:
    # nearest-rank
    k = max(0, math.ceil(q * len(sorted_vals)) - 1)
    return sorted_vals[k]


def summarize(cfg: ExperimentConfig, rows: List[dict]) -> str:
    lines = [f"# Experiment summary (form: {cfg.form}, seed: {cfg.seed})", ""]
    ok = [r for r in rows if r["status"] == "ok"]
    lines.append(f"Instances: {len(rows)}; completed: {len(ok)}; failed: {len(rows) - len(ok)}.")
    violations = sum(1 for r in ok for b in cfg.bound_names if r.get(f"{b}_pass") == "False")
    unresolved = sum(1 for r in ok for b in cfg.bound_names if r.get(f"{b}_pass") == "None")
    lines += [f"Bound violations: {violations}; unresolved comparisons: {unresolved}.", ""]
    keys = GRID_KEYS[cfg.form]
    for cell in cfg.cells():
        group = [r for r in ok if all(r[k] == cell[k] for k in keys)]
        title = ", ".join(f"{k}={cell[k]}" for k in keys)
        lines += [f"## {title}", ""]
        if not group:
            lines += ["No completed instances.", ""]
            continue
        meas = sorted(Fraction(r["measured"]) for r in group)
        lines.append("Measured l1 proximity: p50 {}, p90 {}, max {}.".format(
            *(fraction_str(_percentile(meas, q)) for q in (0.5, 0.9, 1.0))))
        lines += ["", "| bound | violations | bound p50 | max measured/bound |", "|---|---|---|---|"]
        for b in cfg.bound_names:
            vals = [(r, float(r[b])) for r in group if r.get(b)]
            if not vals:
                continue
            fails = sum(1 for r, _ in vals if r[f"{b}_pass"] == "False")
            bvals = sorted(v for _, v in vals)
            if b.startswith("sparsity"):
                ratio = max(r["S"] / v if v > 0 else float("inf") for r, v in vals)
            else:
                subj = SUBJECT.get(b, "measured")
                ratio = max(float(Fraction(r[subj])) / v if v > 0 else float("inf") for r, v in vals)
            lines.append(f"| {b} | {fails} | {bvals[len(bvals) // 2]:.4g} | {ratio:.4f} |")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
