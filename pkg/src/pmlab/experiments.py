"""Seeded batch suites behind ``pmlab verify``.

Every instance draws from its own Philox stream spawned from the run seed,
so results depend only on (config, seed), never on thread scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .banach import Couple, NormSpec
from .errors import DomainError, UnsupportedError
from .harness import embedding_trend, limit_scan, verify_equivalence
from .solver import SolverCfg

SUITES = ("equivalence", "limit-scan", "embed")

DEFAULTS = {
    "equivalence": {"theta": [0.3, 0.5, 0.7], "r": [1.0, 0.5, 0.25], "instances": 100},
    "limit-scan": {"theta": [0.5], "r": [1.0, 0.5, 0.25, 0.125], "instances": 1},
    "embed": {"theta": [0.5], "r": [0.5], "instances": 10, "windows": [2, 4, 8]},
}


def instance_rngs(seed: int, n: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.Philox(s)) for s in children]


def _parse_p(p):
    return math.inf if isinstance(p, str) and p.lower() in ("inf", "infinity") else float(p)


def random_couple(rng: np.random.Generator, dim: int, ps, equal_p: bool = False) -> Couple:
    ps = [_parse_p(p) for p in ps]
    p0 = ps[rng.integers(len(ps))]
    p1 = p0 if equal_p else ps[rng.integers(len(ps))]
    w0 = np.exp(rng.uniform(-1.0, 1.0, dim))
    w1 = np.exp(rng.uniform(-1.0, 1.0, dim))
    return Couple(NormSpec(dim, p0, tuple(w0)), NormSpec(dim, p1, tuple(w1)))


def resolve_config(cfg: dict, seed: int | None = None) -> dict:
    """Fill defaults; the result is embedded in the report for provenance."""
    suite = cfg.get("suite")
    if suite not in SUITES:
        raise DomainError(f"suite must be one of {SUITES}, got {suite!r}")
    out = dict(DEFAULTS[suite])
    out.update({k: v for k, v in cfg.items() if v is not None})
    if seed is not None:
        out["seed"] = int(seed)
    out.setdefault("seed", 0)
    out.setdefault("dim", 2)
    out.setdefault("p", [1, 2, "inf"])
    out.setdefault("support_R", 2.0 if suite == "equivalence" else 1.0)
    out.setdefault("cells_per_unit", 8 if suite == "limit-scan" else 2)
    out["solver"] = SolverCfg.from_dict(out.get("solver", {})).to_dict()
    for key in ("theta", "r"):
        if not isinstance(out[key], list):
            out[key] = [out[key]]
    if "couple" in out:
        c = Couple.from_dict(out["couple"])
        out["couple"] = c.to_dict()
        out["dim"] = c.dim
        if suite == "embed" and not c.equal_p:
            raise UnsupportedError("embed suite needs an equal-p couple")
    return out


def _instance(cfg: dict, i: int, rng: np.random.Generator):
    suite = cfg["suite"]
    if "couple" in cfg:
        c = Couple.from_dict(cfg["couple"])
    else:
        c = random_couple(rng, int(cfg["dim"]), cfg["p"], equal_p=(suite == "embed"))
    if "vector" in cfg:
        a = np.asarray(cfg["vector"], dtype=np.float64)
    else:
        a = rng.standard_normal(c.dim)
    return c, a


def run_one(cfg: dict, i: int, rng: np.random.Generator) -> dict:
    suite = cfg["suite"]
    solver = SolverCfg.from_dict(cfg["solver"])
    c, a = _instance(cfg, i, rng)
    base = {"index": i, "couple": c.to_dict(), "vector": [float(x) for x in a]}
    if suite == "equivalence":
        grid = [(t, r) for t in cfg["theta"] for r in cfg["r"]]
        theta, r = grid[i % len(grid)]
        rep = verify_equivalence(c, float(theta), float(r), a, solver,
                                 cfg["support_R"], cfg["cells_per_unit"])
        return {**base, **rep.to_dict()}
    if suite == "limit-scan":
        theta = float(cfg["theta"][i % len(cfg["theta"])])
        rows = limit_scan(c, theta, a, cfg["r"], solver, cfg["support_R"], cfg["cells_per_unit"])
        return {**base, "theta": theta, "rows": rows, "pass": all(r["contains"] for r in rows)}
    theta = float(cfg["theta"][i % len(cfg["theta"])])
    r = float(cfg["r"][(i // len(cfg["theta"])) % len(cfg["r"])])
    trend = embedding_trend(c, theta, r, a, cfg["windows"], solver, cfg["support_R"])
    monotone = all(b["ratio"] <= a_["ratio"] + 1e-6 for a_, b in zip(trend, trend[1:]))
    return {**base, "theta": theta, "r": r, "trend": trend, "monotone": monotone,
            "pass": monotone and all(t["holds"] for t in trend)}


def run_suite(cfg: dict, threads: int = 1) -> dict:
    """Run a resolved config; returns the full report dictionary."""
    n = int(cfg["instances"])
    rngs = instance_rngs(cfg["seed"], n)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda i: run_one(cfg, i, rngs[i]), range(n)))
    else:
        records = [run_one(cfg, i, rngs[i]) for i in range(n)]
    passed = sum(bool(r["pass"]) for r in records)
    return {"config": cfg, "instances": records,
            "summary": {"passed": passed, "total": n}}


CSV_COLUMNS = {
    "equivalence": ["index", "theta", "r", "U_r", "U_0", "ratio_U0_Ur", "ratio_discretize",
                    "ratio_continuize", "const_lower", "const_upper", "lower_discrete",
                    "lower_continuous", "pass"],
    "limit-scan": ["index", "theta", "r", "window", "U_r", "U_0", "bracket_lo", "bracket_hi",
                   "width", "contains"],
    "embed": ["index", "theta", "r", "window", "reference", "upper", "ratio", "holds",
              "provable"],
}


def csv_rows(report: dict) -> list[dict]:
    suite = report["config"]["suite"]
    out = []
    for rec in report["instances"]:
        if suite == "equivalence":
            out.append({"index": rec["index"], "theta": rec["theta"], "r": rec["r"],
                        "U_r": rec["U_r"], "U_0": rec["U_0"],
                        "ratio_U0_Ur": rec["ratios"]["U0_over_Ur"],
                        "ratio_discretize": rec["ratios"]["discretize"],
                        "ratio_continuize": rec["ratios"]["continuize"],
                        "const_lower": rec["constants"]["lower"],
                        "const_upper": rec["constants"]["upper"],
                        "lower_discrete": rec["lower"]["discrete"],
                        "lower_continuous": rec["lower"]["continuous"],
                        "pass": rec["pass"]})
        elif suite == "limit-scan":
            for row in rec["rows"]:
                out.append({"index": rec["index"], **{k: row[k] for k in CSV_COLUMNS[suite][1:]}})
        else:
            for row in rec["trend"]:
                out.append({"index": rec["index"], **{k: row[k] for k in CSV_COLUMNS[suite][1:]}})
    return out
