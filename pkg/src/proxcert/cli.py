"""``proxcert`` command line: analyze, certify, transform, experiment.

Exit codes: 0 success, 2 validation or assumption failure, 3 resource limit,
4 certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import bounds, minors
from .errors import CertificationError, ProxcertError, ResourceLimitError, ValidationError
from .experiment import load_config, run_experiment, summarize, to_csv
from .instances import GeneralInstance, dump, fraction_str, load
from .pipeline import certify_general, certify_instance, certify_mip
from .proximity import uip_pipeline
from .solvers import MipInstance, check_assumptions

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_CERT = 0, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code: int, report: dict):
        super().__init__(report.get("error", ""))
        self.code = code
        self.report = report


# -- rendering ------------------------------------------------------------------


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return "\n".join(lines)


def _flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


def _emit(report: dict, fmt: str, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2) + "\n" if fmt == "json" else _text(report) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------


def _analyze(args) -> dict:
    inst, meta = load(args.file)
    report: dict = {"file": str(args.file)}
    if meta:
        report["metadata"] = meta
    if isinstance(inst, GeneralInstance):
        dg, wit = minors.delta_general(inst.A, inst.B, inst.C, n=inst.n, d=inst.d)
        report.update(form="general", m=inst.m, n=inst.n, d=inst.d, t=inst.t,
                      delta_general=dg, witness={"rows": list(wit[0]), "cols": list(wit[1])},
                      bounds={"cor7": bounds.bound_cor7(inst.m, inst.n, inst.t, inst.d, dg)})
        return report
    base = inst.base if isinstance(inst, MipInstance) else inst
    m, n = base.m, base.n
    rep = minors.delta_report(base.A)
    gram = minors.gram_det(base.A)
    led = bounds.standard_ledger(m, n, rep.delta_k, gram=gram)
    if isinstance(inst, MipInstance):
        report["integral_indices"] = list(inst.integral_indices)
    report.update(form="mip" if isinstance(inst, MipInstance) else "standard", m=m, n=n,
                  delta=rep.as_dict(), gram_det=str(gram),
                  bounds={k: e.value for k, e in led.entries.items()},
                  assumptions=check_assumptions(base).as_dict())
    return report


def _certify(args) -> dict:
    inst, _ = load(args.file)
    if isinstance(inst, GeneralInstance):
        cert = certify_general(inst)
        report = cert.as_dict()
        failed = [] if cert.certified else ["cor7" if cert.cor7.passed is not True else "ray_bounds"]
    elif isinstance(inst, MipInstance):
        cert = certify_mip(inst)
        report = cert.as_dict()
        failed = [] if cert.certified else ["cor6"]
    else:
        cert = certify_instance(inst, vertex_all=args.vertex_all)
        report = cert.as_dict()
        failed = report["failures"]
    if failed:
        report["error"] = "bound violated: " + ", ".join(failed)
        raise _Exit(EXIT_CERT, report)
    return report


def _transform(args) -> dict:
    inst, meta = load(args.file)
    if not hasattr(inst, "A") or isinstance(inst, GeneralInstance):
        raise ValidationError("transform needs a standard-form instance")
    eps = Fraction(args.epsilon) if args.epsilon is not None else None
    res = uip_pipeline(inst, eps)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.file).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.file).stem
    inst_path = out_dir / f"{stem}.uip.json"
    dump(res.transformed, inst_path, metadata={**meta, "derived_from": Path(args.file).name, "transform": "hnf"})
    report = {
        "transformed_instance": str(inst_path),
        "maxdet": {"columns": list(res.maxdet.column_set), "abs_det": res.maxdet.abs_det,
                   "epsilon": fraction_str(res.maxdet.epsilon), "swaps": res.maxdet.swaps_performed},
        "U": res.hnf.unimodular,
        "UB": res.hnf.transformed,
        "hnf_diagonal": res.hnf.diagonal,
        "ub_norm": res.ub_norm,
        "delta": res.delta,
        "chain_holds": res.chain_ok,
        "approximation_holds": res.approx_ok,
        "ip_value": fraction_str(res.ip_value),
        "transformed_ip_value": fraction_str(res.transformed_ip_value),
        "measured_distance": fraction_str(res.measurement.distance),
        "thm2": {"bound": res.thm2.value, "passed": res.thm2.passed},
    }
    if res.hnf_known is not None:
        report["hnf_known"] = {"bound": res.hnf_known.value, "passed": res.hnf_known.passed}
    art = out_dir / f"{stem}.uip.certificate.json"
    art.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    report["certificate"] = str(art)
    if res.thm2.passed is not True or res.chain_ok is False:
        report["error"] = "bound violated: thm2" if res.thm2.passed is not True else "chain inequality violated"
        raise _Exit(EXIT_CERT, report)
    return report


def _experiment(args) -> dict:
    cfg = load_config(args.config)
    rows = run_experiment(cfg, jobs=args.jobs)
    csv_text = to_csv(cfg, rows)
    summary = summarize(cfg, rows)
    base = Path(args.config).with_suffix("")
    csv_path = Path(cfg.csv_path) if cfg.csv_path else base.with_name(base.name + ".csv")
    md_path = Path(cfg.summary_path) if cfg.summary_path else base.with_name(base.name + ".summary.md")
    csv_path.write_text(csv_text, encoding="utf-8")
    md_path.write_text(summary, encoding="utf-8")
    failed = sum(1 for r in rows if r["status"] != "ok")
    return {"rows": len(rows), "failed_rows": failed, "csv": str(csv_path), "summary": str(md_path)}


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxcert", description="Exact proximity certificates for integer programs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="subdeterminants, bounds and assumptions")
    a.add_argument("file")
    a.set_defaults(func=_analyze)

    c = sub.add_parser("certify", parents=[common], help="full proximity certificate")
    c.add_argument("file")
    c.add_argument("--vertex-all", action="store_true", help="certify every optimal LP vertex")
    c.set_defaults(func=_certify)

    t = sub.add_parser("transform", parents=[common], help="unimodular (U-IP) transformation")
    t.add_argument("file")
    t.add_argument("--epsilon", help="local-search improvement factor, e.g. 1/2 (default 1/m)")
    t.add_argument("--out-dir", help="directory for the transformed instance and artifacts")
    t.set_defaults(func=_transform)

    e = sub.add_parser("experiment", parents=[common], help="batch experiment from a JSON config")
    e.add_argument("config")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=_experiment)
    return p


def _code_for(exc: Exception) -> int:
    if isinstance(exc, CertificationError):
        return EXIT_CERT
    if isinstance(exc, ResourceLimitError):
        return EXIT_RESOURCE
    return EXIT_INVALID


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    func: Callable = args.func
    try:
        report = func(args)
        code = EXIT_OK
    except _Exit as exc:
        report, code = exc.report, exc.code
    except (ProxcertError, ValueError, OSError) as exc:
        code = _code_for(exc)
        report = {"error": str(exc), "certified": False} if code == EXIT_RESOURCE else {"error": str(exc)}
    _emit(report, args.format, args.out)
    if code:
        print(f"proxcert: {report.get('error', 'failed')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
