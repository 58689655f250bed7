"""Checkers for convergence-theorem hypotheses and conclusions on concrete orbits.

Each checker reports whether the hypotheses hold for the given system and
trace and, when they do, whether the promised conclusion is observed. All
checks are finite-horizon evidence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, MapFamily, SystemSpec, ThresholdFamily, eval_threshold
from .sim import DEFAULT_TOL, DEFAULT_WINDOW, Trace, VisitKind, detect_limit, transitions, visitation

MONOTONE_TOL = 1e-12
MONOTONE_GRID = 1000
FIXED_EQ_TOL = 1e-8
TAIL_FRACTION = 0.1


@dataclass(frozen=True)
class ContractionReport:
    """Global Lipschitz constants; None marks a discontinuous (mod-1) map."""

    L_f: float | None
    L_g: float | None
    L_h_a: float
    L_h_c: float
    combined: float
    satisfied: bool
    note: str = "convergence additionally needs the orbit to stay in one regime eventually"


def _lipschitz(m) -> float | None:
    if m.family is MapFamily.AFFINE_MOD1:
        return None
    return abs(m.slope)


def check_contraction(sys: SystemSpec) -> ContractionReport:
    L_f, L_g = _lipschitz(sys.f), _lipschitz(sys.g)
    h = sys.h
    if h.family is ThresholdFamily.SINE:
        L_ha = 2.0 * math.pi * abs(h.amp)
    else:
        L_ha = abs(h.gamma)
    L_hc = abs(h.delta)
    if L_f is None or L_g is None:
        return ContractionReport(L_f, L_g, L_ha, L_hc, math.inf, False)
    combined = max(L_f, L_g, L_ha + L_hc)
    return ContractionReport(L_f, L_g, L_ha, L_hc, combined, combined < 1.0)


class TheoremId(str, enum.Enum):
    CONTRACTION = "Contraction51"
    MONOTONE = "Monotone515"
    AVERAGING = "Averaging516"
    COMMON_LIMIT = "CommonLimit518"


@dataclass(frozen=True)
class TheoremVerdict:
    theorem_id: TheoremId
    hypotheses_met: bool
    conclusion_observed: bool | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id.value,
            "hypotheses_met": self.hypotheses_met,
            "conclusion_observed": self.conclusion_observed,
            "details": _jsonable(self.details),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _check_trace(sys: SystemSpec, trace: Trace) -> None:
    if trace.system is not None and trace.system is not sys and trace.system != sys:
        raise DomainError("trace was not produced by this system")


def contraction_verdict(sys: SystemSpec, trace: Trace) -> TheoremVerdict:
    """Contraction constants plus eventual single-regime confinement; conclusion
    is convergence of the trace."""
    _check_trace(sys, trace)
    rep = check_contraction(sys)
    visit = visitation(trace, TAIL_FRACTION)
    confined = visit.kind is not VisitKind.PERSISTENT_SWITCHING
    met = rep.satisfied and confined
    limit = detect_limit(trace, DEFAULT_TOL, DEFAULT_WINDOW)
    details = {
        "L_f": rep.L_f, "L_g": rep.L_g, "L_h_a": rep.L_h_a, "L_h_c": rep.L_h_c,
        "combined": rep.combined, "visitation": visit.kind, "limit": limit.kind,
    }
    return TheoremVerdict(TheoremId.CONTRACTION, met, limit.converged if met else None, details)


def check_monotone(sys: SystemSpec, trace: Trace) -> TheoremVerdict:
    """Monotone-threshold hypotheses (c non-decreasing, f a contraction,
    h(a_f*, c) >= c for c >= a_f*) and the resulting regime-1 convergence.

    The third hypothesis quantifies over an unbounded set; it is tested on a
    grid of 1000 points and reported as ``sampled``.
    """
    _check_trace(sys, trace)
    details: dict = {"sampled": True}
    dc = np.diff(trace.c)
    monotone = bool(np.all(dc >= -MONOTONE_TOL))
    details["monotone_threshold"] = monotone
    details["max_decrease"] = float(max(0.0, -dc.min())) if len(dc) else 0.0

    f = sys.f
    contraction = f.family is MapFamily.AFFINE and abs(f.slope) < 1.0
    details["f_contraction"] = contraction
    a_f = f.fixed_point if contraction else None
    details["a_f_star"] = a_f

    h_dominates = False
    if a_f is not None:
        hi = max(float(trace.c.max()), a_f)
        span = max(hi - a_f, 1.0)
        grid = np.linspace(a_f, hi + 10.0 * span, MONOTONE_GRID)
        worst = min(eval_threshold(sys.h, a_f, float(c)) - float(c) for c in grid)
        h_dominates = worst >= -MONOTONE_TOL
        details["h_margin_min"] = worst
    details["h_dominates"] = h_dominates

    met = monotone and contraction and h_dominates
    if not met:
        return TheoremVerdict(TheoremId.MONOTONE, False, None, details)

    r = trace.regimes
    ones = np.flatnonzero(r == 1)
    entered = len(ones) > 0
    stayed = entered and bool(np.all(r[ones[0]:] == 1))
    details["entered_regime1"] = entered
    details["stayed_in_regime1"] = stayed
    limit = detect_limit(trace, DEFAULT_TOL, DEFAULT_WINDOW)
    details["limit"] = limit.kind
    converged_ok = False
    if limit.converged:
        c_star = limit.limit_c
        details["c_star"] = c_star
        converged_ok = (
            abs(limit.limit_a - a_f) <= FIXED_EQ_TOL * max(1.0, abs(a_f))
            and abs(eval_threshold(sys.h, a_f, c_star) - c_star) <= FIXED_EQ_TOL
        )
    details["unbounded_threshold"] = limit.diverged or (
        not limit.converged and bool(np.all(np.diff(trace.c[-DEFAULT_WINDOW:]) > 0))
    )
    return TheoremVerdict(TheoremId.MONOTONE, True, stayed and converged_ok, details)


def _averaging_form(h) -> bool:
    if h.family is ThresholdFamily.AVERAGING:
        return True
    if h.family is not ThresholdFamily.AFFINE:
        return False
    return 0.0 < h.gamma < 1.0 and abs(h.gamma + h.delta - 1.0) <= 1e-12 and h.epsilon == 0.0


def check_averaging(sys: SystemSpec, trace: Trace, tol: float = 1e-6) -> TheoremVerdict:
    """Averaging threshold plus a convergent sequence implies the threshold
    converges to the same limit."""
    _check_trace(sys, trace)
    form = _averaging_form(sys.h)
    window = min(DEFAULT_WINDOW, len(trace))
    a_w = trace.a[-window:]
    a_converged = trace.overflow_at is None and float(np.ptp(a_w)) < DEFAULT_TOL
    details = {"averaging_form": form, "a_converged": a_converged}
    if not (form and a_converged):
        return TheoremVerdict(TheoremId.AVERAGING, False, None, details)
    limit_a, limit_c = float(a_w[-1]), float(trace.c[-1])
    details.update(limit_a=limit_a, limit_c=limit_c)
    return TheoremVerdict(TheoremId.AVERAGING, True, abs(limit_c - limit_a) <= tol, details)


def _late_mean(values: np.ndarray) -> tuple[float | None, float | None]:
    if len(values) == 0:
        return None, None
    k = max(1, math.ceil(TAIL_FRACTION * len(values)))
    tail = values[-k:]
    return float(tail.mean()), float(tail.std())


def common_limit_verdict(trace: Trace, tol: float = 1e-6) -> TheoremVerdict:
    """Persistent switching plus convergence of both sequences should force a
    common limit.

    The sub-sequence limits over regime-1 and regime-2 steps use
    ``f(a_n) = a_{n+1}`` for regime-1 steps (likewise ``g``), so they come
    straight from the trace. At finite horizon, convergence of these
    sub-sequences cannot be told apart from convergence of the full sequence.
    """
    if len(trace) < 100:
        raise DomainError("common-limit check needs at least 100 states")
    visit = visitation(trace, TAIL_FRACTION)
    limit = detect_limit(trace, DEFAULT_TOL, DEFAULT_WINDOW)
    ts = transitions(trace)
    r = trace.regimes
    nxt = trace.a[1 : len(r) + 1]
    L_f, sd_f = _late_mean(nxt[r == 1])
    L_g, sd_g = _late_mean(nxt[r == 2])
    L_c, sd_c = _late_mean(trace.c)
    details = {
        "visitation": visit.kind,
        "limit": limit.kind,
        "t12_count": len(ts.t12),
        "t21_count": len(ts.t21),
        "i1_count": ts.i1_count,
        "i2_count": ts.i2_count,
        "L_f": L_f, "L_f_std": sd_f,
        "L_g": L_g, "L_g_std": sd_g,
        "L_c": L_c, "L_c_std": sd_c,
        "tail_liminf_gap": visit.tail_liminf_gap,
        "tail_limsup_gap": visit.tail_limsup_gap,
        "finite_horizon_note": "sub-sequence convergence is not distinguished from full-sequence convergence",
    }
    met = visit.kind is VisitKind.PERSISTENT_SWITCHING and limit.converged
    if not met:
        return TheoremVerdict(TheoremId.COMMON_LIMIT, False, None, details)
    details.update(limit_a=limit.limit_a, limit_c=limit.limit_c)
    return TheoremVerdict(TheoremId.COMMON_LIMIT, True, abs(limit.limit_a - limit.limit_c) <= tol, details)


def tail_contraction_ratio(trace: Trace, a_star: float, c_star: float, floor: float = 1e-11) -> float | None:
    """Geometric-mean ratio e_{n+1}/e_n of the sup-norm error, over steps where e_n > floor."""
    e = np.maximum(np.abs(trace.a - a_star), np.abs(trace.c - c_star))
    ok = np.flatnonzero(e[:-1] > floor * max(1.0, abs(a_star), abs(c_star)))
    if len(ok) < 2:
        return None
    ok = ok[len(ok) // 2 :]
    ratios = e[ok + 1] / e[ok]
    ratios = ratios[ratios > 0]
    if len(ratios) == 0:
        return 0.0
    return float(np.exp(np.mean(np.log(ratios))))
