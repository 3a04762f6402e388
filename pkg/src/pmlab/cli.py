"""Command-line front end.

Exit codes: 0 success, 2 unreadable or malformed config, 3 dimension or
domain error, 4 a per-certificate assertion failed (report still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .banach import (Couple, NormEstimate, NormSpec, complex_reference_norm,
                     intersection_norm, norm_eval, sum_norm)
from .continuous import StepFunction, j_seminorm_continuous, pm_norm_continuous
from .discrete import ThetaR, j_norm_discrete, pm_norm_discrete
from .errors import BoundViolation, PmlabError
from .solver import SolverCfg
from .uc import FiniteSeq, SignPattern, uc_norm

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_ASSERT = 0, 2, 3, 4


class ConfigError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (FiniteSeq, StepFunction, SignPattern, NormSpec, Couple, SolverCfg)):
        return _jsonable(obj.to_dict())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


def estimate_dict(est: NormEstimate) -> dict:
    out = {"value": est.value, "kind": est.kind, "certificate": est.certificate}
    if est.lower is not None:
        out["lower"] = est.lower
    if est.details:
        out["details"] = est.details
    return out


def load_config(args) -> dict:
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    elif getattr(args, "json", None):
        text = args.json
    else:
        raise ConfigError("no configuration given (use --config PATH or --json TEXT)")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    return cfg


def _threads(args) -> int:
    if args.threads:
        return args.threads
    try:
        return max(1, int(os.environ.get("PMLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_norm(cfg: dict) -> dict:
    """Dispatch one norm computation on the ``kind`` field."""
    kind = cfg.get("kind")
    try:
        if kind in ("norm", "uc"):
            spec = NormSpec.from_dict(cfg["norm"])
        else:
            couple = Couple.from_dict(cfg["couple"])
    except KeyError as exc:
        raise ConfigError(f"missing field {exc}") from exc
    solver = SolverCfg.from_dict(cfg.get("solver", {}))
    if kind == "norm":
        return {"value": norm_eval(spec, cfg["vector"]), "kind": "exact"}
    if kind == "uc":
        seq = FiniteSeq.from_dict(cfg["sequence"], spec.dim)
        return estimate_dict(uc_norm(spec, seq, cfg.get("subset")))
    if kind == "sum":
        return estimate_dict(sum_norm(couple, cfg["vector"]))
    if kind == "intersection":
        return {"value": intersection_norm(couple, cfg["vector"]), "kind": "exact"}
    if kind == "reference":
        return {"value": complex_reference_norm(couple, float(cfg["theta"]), cfg["vector"]),
                "kind": "exact"}
    if kind == "j_discrete":
        tr = ThetaR(float(cfg["theta"]), float(cfg["r"]))
        seq = FiniteSeq.from_dict(cfg["sequence"], couple.dim)
        return estimate_dict(j_norm_discrete(couple, tr, seq))
    if kind == "j_continuous":
        u = StepFunction.from_dict(cfg["function"], couple.dim)
        return estimate_dict(j_seminorm_continuous(couple, float(cfg["theta"]), u))
    if kind == "pm_discrete":
        tr = ThetaR(float(cfg["theta"]), float(cfg["r"]))
        up, lo = pm_norm_discrete(couple, tr, cfg["vector"], solver=solver)
        return {"upper": estimate_dict(up), "lower": estimate_dict(lo)}
    if kind == "pm_continuous":
        up, lo = pm_norm_continuous(couple, float(cfg["theta"]), cfg["vector"],
                                    float(cfg.get("support_R", 2.0)),
                                    int(cfg.get("cells_per_unit", 2)), solver)
        return {"upper": estimate_dict(up), "lower": estimate_dict(lo)}
    raise ConfigError(f"unknown kind {kind!r}")


def write_report(report: dict, out: Path) -> tuple[Path, Path]:
    out.mkdir(parents=True, exist_ok=True)
    suite = report["config"]["suite"]
    jpath = out / f"{suite}_report.json"
    cpath = out / f"{suite}_report.csv"
    jpath.write_text(dumps(report) + "\n")
    cpath.write_text(to_csv(report))
    return jpath, cpath


def to_csv(report: dict) -> str:
    suite = report["config"]["suite"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=experiments.CSV_COLUMNS[suite], lineterminator="\n")
    writer.writeheader()
    for row in experiments.csv_rows(report):
        writer.writerow({k: _jsonable(v) for k, v in row.items()})
    return buf.getvalue()


def cmd_norm(args) -> int:
    result = run_norm(load_config(args))
    print(dumps(result))
    return EXIT_OK


def cmd_verify(args, suite: str | None = None) -> int:
    cfg = load_config(args)
    if suite is not None:
        cfg["suite"] = suite
    cfg = experiments.resolve_config(cfg, args.seed)
    report = experiments.run_suite(cfg, threads=_threads(args))
    jpath, cpath = write_report(report, Path(args.out))
    s = report["summary"]
    print(f"passed {s['passed']}/{s['total']}")
    print(f"wrote {jpath} and {cpath}", file=sys.stderr)
    return EXIT_OK if s["passed"] == s["total"] else EXIT_ASSERT


def cmd_report(args) -> int:
    path = Path(args.path)
    try:
        report = json.loads(path.read_text())
        suite = report["config"]["suite"]
        summary = report["summary"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read report: {exc}") from exc
    if args.format == "csv":
        sys.stdout.write(to_csv(report))
    else:
        print(dumps({"suite": suite, "summary": summary,
                     "failed": [r["index"] for r in report["instances"] if not r["pass"]]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--json", help="inline JSON configuration")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $PMLAB_THREADS or 1)")
        if out:
            p.add_argument("--out", default="reports", help="output directory")

    common(sub.add_parser("norm", help="evaluate one norm and print it as JSON"), out=False)
    for name in ("verify", "limit-scan", "embed"):
        common(sub.add_parser(name, help=f"run the {name} suite" if name != "verify"
                              else "run the suite named in the config"))
    rp = sub.add_parser("report", help="summarise a written report")
    rp.add_argument("path")
    rp.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "norm":
            return cmd_norm(args)
        if args.command == "report":
            return cmd_report(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_verify(args, suite=args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BoundViolation as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (PmlabError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
