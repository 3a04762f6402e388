"""Transfer maps between discrete and continuous representations, and the
per-certificate checks built on them.

``discretize`` turns ``{a_n}`` into ``u = (1/r) sum_n a_n 1_[rn, r(n+1))`` and
costs at most a factor ``e^{(1-theta) r}`` in J-norm; ``continuize`` takes cell
integrals ``a_n = int_{rn}^{r(n+1)} u`` and costs at most ``e^{r theta}``. The
true plus-minus norms are infima and cannot be computed, but both
inequalities hold for every concrete certificate, which is what is checked.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .banach import Couple, as_vector, complex_reference_norm
from .continuous import StepFunction, j_seminorm_continuous, pm_norm_continuous
from .discrete import (ThetaR, j_norm_discrete, pm_norm_discrete,
                       reference_is_lower_bound, within)
from .errors import BoundViolation, DomainError, EnumerationCapError, UnsupportedError
from .solver import SolverCfg
from .uc import FiniteSeq

MASS_ATOL = 1e-12


def discretize_to_continuous(tr: ThetaR, s: FiniteSeq) -> StepFunction:
    N = s.window
    n = np.arange(-N, N + 2, dtype=np.float64)
    return StepFunction(tr.r * n, s.to_array() / tr.r)


def continuize_to_discrete(tr: ThetaR, u: StepFunction) -> FiniteSeq:
    if u.ncells == 0:
        return FiniteSeq.zeros(0, u.dim)
    r = tr.r
    lo = math.floor(u.breakpoints[0] / r)
    hi = math.ceil(u.breakpoints[-1] / r)
    v = u.split_at(r * np.arange(lo, hi + 1, dtype=np.float64))
    # cell k lies in [r n, r (n+1)) with n = floor(left end / r), guarded against rounding
    mids = 0.5 * (v.breakpoints[:-1] + v.breakpoints[1:])
    owner = np.floor(mids / r).astype(int)
    terms: dict[int, np.ndarray] = {}
    for k, n in enumerate(owner):
        terms[int(n)] = terms.get(int(n), 0.0) + v.lengths[k] * v.values[k]
    window = max(abs(lo), abs(hi - 1))
    return FiniteSeq(window, u.dim, terms)


def _rel_err(x: np.ndarray, y: np.ndarray) -> float:
    scale = max(float(np.abs(y).max(initial=0.0)), 1.0)
    return float(np.abs(x - y).max(initial=0.0)) / scale


@dataclass(frozen=True)
class Transfer:
    """Outcome of one transfer: the image, both norms, the ratio and its ceiling."""

    image: object
    source_norm: float
    image_norm: float
    constant: float
    mass_error: float

    @property
    def ratio(self) -> float:
        return self.image_norm / self.source_norm if self.source_norm > 0 else 0.0


def transfer_discrete(c: Couple, tr: ThetaR, s: FiniteSeq, check: bool = True) -> Transfer:
    """Discretize ``s`` and check ``||u||_J <= e^{(1-theta) r} ||s||_J`` and mass."""
    u = discretize_to_continuous(tr, s)
    src = j_norm_discrete(c, tr, s).value
    img = j_seminorm_continuous(c, tr.theta, u).value
    const = math.exp((1.0 - tr.theta) * tr.r)
    t = Transfer(u, src, img, const, _rel_err(u.integral(), s.total()))
    if check:
        _check_transfer(t, "discretize")
    return t


def transfer_continuous(c: Couple, tr: ThetaR, u: StepFunction, check: bool = True) -> Transfer:
    """Continuize ``u`` and check ``||{a_n}||_J <= e^{r theta} ||u||_J`` and mass."""
    s = continuize_to_discrete(tr, u)
    src = j_seminorm_continuous(c, tr.theta, u).value
    img = j_norm_discrete(c, tr, s).value
    const = math.exp(tr.r * tr.theta)
    t = Transfer(s, src, img, const, _rel_err(s.total(), u.integral()))
    if check:
        _check_transfer(t, "continuize")
    return t


def _check_transfer(t: Transfer, name: str):
    if not within(t.image_norm, t.constant * t.source_norm):
        raise BoundViolation(f"{name}: {t.image_norm} > {t.constant} * {t.source_norm}")
    if t.mass_error > MASS_ATOL:
        raise BoundViolation(f"{name}: mass not preserved (error {t.mass_error})")


@dataclass
class EquivalenceReport:
    theta: float
    r: float
    U_r: float
    U_0: float
    ratios: dict
    constants: dict
    lower: dict
    checks: dict
    pass_: bool = field(default=True)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        return d


def verify_equivalence(c: Couple, theta: float, r: float, a, cfg: SolverCfg | None = None,
                       support_R: float = 2.0, cells_per_unit: int = 2,
                       threads: int | None = None) -> EquivalenceReport:
    """Solve both plus-minus problems and cross-transfer their certificates.

    ``U_r`` and ``U_0`` are the best certified upper bounds after transfer,
    so they satisfy ``e^{-r theta} U_r <= U_0 <= e^{(1-theta) r} U_r``
    per certificate; each individual transfer inequality is also checked.
    """
    cfg = cfg or SolverCfg()
    tr = ThetaR(theta, r)
    a = as_vector(a, c.dim)
    up_r, low_r = pm_norm_discrete(c, tr, a, solver=cfg, threads=threads)
    up_0, low_0 = pm_norm_continuous(c, theta, a, support_R, cells_per_unit, cfg,
                                     threads=threads)
    checks = {}
    fails = []

    def attempt(name, fn):
        try:
            t = fn()
        except BoundViolation as exc:
            fails.append(f"{name}: {exc}")
            return None
        except EnumerationCapError:
            checks.setdefault("skipped", []).append(name)
            return None
        checks[name] = {"ratio": t.ratio, "constant": t.constant, "mass_error": t.mass_error}
        return t

    seq_cert, U_r = up_r.certificate, up_r.value
    fun_cert, U_0 = up_0.certificate, up_0.value
    for _ in range(8):
        changed = False
        t = attempt("discretize", lambda: transfer_discrete(c, tr, seq_cert))
        if t is not None and t.image_norm < U_0:
            fun_cert, U_0, changed = t.image, t.image_norm, True
        t = attempt("continuize", lambda: transfer_continuous(c, tr, fun_cert))
        if t is not None and t.image_norm < U_r:
            seq_cert, U_r, changed = t.image, t.image_norm, True
        if not changed:
            break

    lo_c, hi_c = math.exp(-r * theta), math.exp((1.0 - theta) * r)
    sandwich = within(lo_c * U_r, U_0) and within(U_0, hi_c * U_r)
    if not sandwich:
        fails.append("sandwich")
    lower = {"discrete": low_r.value, "continuous": low_0.value}
    for key, upper in (("discrete", U_r), ("continuous", U_0)):
        if not within(lower[key], upper):
            fails.append(f"lower>{key} upper")
    return EquivalenceReport(
        theta=theta, r=r, U_r=U_r, U_0=U_0,
        ratios={"U0_over_Ur": U_0 / U_r if U_r > 0 else 0.0,
                "discretize": checks.get("discretize", {}).get("ratio"),
                "continuize": checks.get("continuize", {}).get("ratio")},
        constants={"lower": lo_c, "upper": hi_c},
        lower=lower, checks={"transfers": checks, "failures": fails},
        pass_=not fails,
    )


def bracket_width(theta: float, r: float) -> float:
    return math.exp((1.0 - theta) * r) - math.exp(-r * theta)


def scan_window(r: float, support_R: float) -> int:
    """Largest window whose cells ``[rn, r(n+1))`` stay inside ``[-support_R, support_R)``."""
    return max(0, math.ceil(support_R / r - 1e-9) - 1)


def limit_scan(c: Couple, theta: float, a, r_values, cfg: SolverCfg | None = None,
               support_R: float = 1.0, cells_per_unit: int = 8,
               threads: int | None = None) -> list[dict]:
    """Per ``r``: ``U_r``, the bracket ``[e^{-r theta} U_r, e^{(1-theta) r} U_r]`` and its width.

    Every certificate lives on ``[-support_R, support_R)``: the discrete
    window for each ``r`` is ``scan_window(r, support_R)``. All certificates
    are pooled and cross-transferred until no bound improves, so the single
    continuous estimate ``U_0`` sits inside every row's bracket. A transfer
    whose image is too large to enumerate is skipped and counted.
    """
    cfg = cfg or SolverCfg()
    a = as_vector(a, c.dim)
    r_values = [float(r) for r in r_values]
    if any(not r > 0 for r in r_values):
        raise DomainError("limit_scan needs r > 0")
    trs = [ThetaR(theta, r) for r in r_values]
    seqs, U = [], []
    for tr in trs:
        up, _ = pm_norm_discrete(c, tr, a, window=scan_window(tr.r, support_R),
                                 solver=cfg, threads=threads)
        seqs.append(up.certificate)
        U.append(up.value)
    up0, _ = pm_norm_continuous(c, theta, a, support_R, cells_per_unit, cfg, threads=threads)
    fun, U0 = up0.certificate, up0.value
    skipped = [0] * len(trs)
    for _ in range(16):
        changed = False
        for i, tr in enumerate(trs):
            try:
                t = transfer_discrete(c, tr, seqs[i])
            except EnumerationCapError:
                skipped[i] += 1
                continue
            if t.image_norm < U0:
                fun, U0, changed = t.image, t.image_norm, True
        for i, tr in enumerate(trs):
            try:
                t = transfer_continuous(c, tr, fun)
            except EnumerationCapError:
                skipped[i] += 1
                continue
            if t.image_norm < U[i]:
                seqs[i], U[i], changed = t.image, t.image_norm, True
        if not changed:
            break
    rows = []
    for i, (tr, Ur) in enumerate(zip(trs, U)):
        lo, hi = math.exp(-tr.r * theta) * Ur, math.exp((1.0 - theta) * tr.r) * Ur
        rows.append({"r": tr.r, "theta": theta, "window": scan_window(tr.r, support_R),
                     "U_r": Ur, "U_0": U0, "bracket_lo": lo, "bracket_hi": hi,
                     "width": bracket_width(theta, tr.r),
                     "contains": within(lo, U0) and within(U0, hi),
                     "skipped_transfers": skipped[i]})
    return rows


def embedding_check(c: Couple, theta: float, r: float, a, cfg: SolverCfg | None = None,
                    support_R: float = 2.0, cells_per_unit: int = 2,
                    init=None, threads: int | None = None) -> dict:
    """Compare the complex reference norm with the plus-minus upper bound.

    ``r = 0`` uses the continuous norm. ``holds`` records whether
    ``reference <= upper``; ``provable`` says whether that inequality is a
    theorem for real scalars (see ``reference_is_lower_bound``). The ratio
    upper / reference is reported as evidence only.
    """
    if not c.equal_p:
        raise UnsupportedError("embedding check needs an equal-p couple")
    cfg = cfg or SolverCfg()
    a = as_vector(a, c.dim)
    ref = complex_reference_norm(c, theta, a)
    if r == 0:
        up, _ = pm_norm_continuous(c, theta, a, support_R, cells_per_unit, cfg,
                                   init=init, threads=threads)
    elif r > 0:
        up, _ = pm_norm_discrete(c, ThetaR(theta, r), a, solver=cfg, init=init,
                                 threads=threads)
    else:
        raise DomainError(f"r must be non-negative, got {r}")
    return {"theta": theta, "r": r, "reference": ref, "upper": up.value,
            "ratio": up.value / ref if ref > 0 else 1.0,
            "holds": within(ref, up.value), "provable": reference_is_lower_bound(c),
            "certificate": up.certificate}


def embedding_trend(c: Couple, theta: float, r: float, a, windows=(2, 4, 8),
                    cfg: SolverCfg | None = None, support_R: float = 1.0,
                    threads: int | None = None) -> list[dict]:
    """Embedding ratios as the window (or, for ``r = 0``, cells per unit) doubles.

    For ``r = 0`` the support stays ``[-support_R, support_R)`` and only the
    grid is refined. Each solve is seeded with the previous certificate, so
    the upper bound and the ratio are nonincreasing.
    """
    cfg = cfg or SolverCfg()
    out, init = [], None
    for w in windows:
        if r == 0:
            rec = embedding_check(c, theta, 0, a, cfg, support_R=support_R,
                                  cells_per_unit=w, init=init, threads=threads)
        else:
            rec = embedding_check(c, theta, r, a, SolverCfg(**{**cfg.to_dict(), "window": w}),
                                  init=init, threads=threads)
        init = rec.pop("certificate")
        rec["window"] = w
        out.append(rec)
    return out
