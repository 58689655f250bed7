"""Fixed points, stability and dynamical-type classification for affine systems.

The affine system is

    a' = alpha1*a + beta1   if a <= c
    a' = alpha2*a + beta2   otherwise
    c' = gamma*a + delta*c + epsilon
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .core import (
    DomainError,
    MapFamily,
    Regime,
    ScalarMapSpec,
    State,
    SystemSpec,
    ThresholdFamily,
    ThresholdMapSpec,
    step,
)
from .metrics import DEFAULT_SEED, LyapunovOverflowError, _cluster, lyapunov
from .sim import LimitKind, Trace, detect_limit

FD_STEP = 1e-6
FD_AGREEMENT = 1e-5


@dataclass(frozen=True)
class AffineParams:
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    gamma: float
    delta: float
    epsilon: float

    NAMES = ("alpha1", "beta1", "alpha2", "beta2", "gamma", "delta", "epsilon")

    def to_system(self) -> SystemSpec:
        return SystemSpec(
            ScalarMapSpec.affine(self.alpha1, self.beta1),
            ScalarMapSpec.affine(self.alpha2, self.beta2),
            ThresholdMapSpec.affine(self.gamma, self.delta, self.epsilon),
        )

    @classmethod
    def from_system(cls, sys: SystemSpec) -> AffineParams:
        if sys.f.family is not MapFamily.AFFINE or sys.g.family is not MapFamily.AFFINE:
            raise DomainError("regime maps must both be affine")
        if sys.h.family is ThresholdFamily.SINE:
            raise DomainError("sine threshold is not affine")
        return cls(sys.f.slope, sys.f.intercept, sys.g.slope, sys.g.intercept,
                   sys.h.gamma, sys.h.delta, sys.h.epsilon)

    def replace(self, **changes) -> AffineParams:
        return AffineParams(**{**asdict(self), **changes})

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in self.NAMES)


class FixedPointType(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TYPE_III = "TypeIII"


@dataclass(frozen=True)
class ClassifiedFixedPoint:
    a_star: float
    c_star: float
    fp_type: FixedPointType
    exists: bool
    eigenvalues: tuple[float, float]
    stable: bool
    degenerate: bool = False
    # boundary points only
    one_sided: tuple[float, float, float] | None = None
    boundary_case: int | None = None
    shortcut_c: float | None = None
    shortcut_agrees: bool | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fp_type"] = self.fp_type.value
        return {k: _json_float(v) for k, v in d.items()}


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_json_float(x) for x in v]
    return v


def _near_boundary(a: float, c: float, rel: float = 1e-9) -> bool:
    return abs(a - c) <= rel * max(1.0, abs(a), abs(c))


def _interior(fp_type, alpha, beta, p: AffineParams) -> ClassifiedFixedPoint:
    eig = (alpha, p.delta)
    if alpha == 1.0 or p.delta == 1.0:
        return ClassifiedFixedPoint(math.nan, math.nan, fp_type, False, eig, False, degenerate=True)
    a = beta / (1.0 - alpha)
    c = (p.gamma * a + p.epsilon) / (1.0 - p.delta)
    if _near_boundary(a, c):
        # rounding can't decide the side; leave it to boundary_fixed_point
        exists = False
    elif fp_type is FixedPointType.TYPE_I:
        exists = a < c
    else:
        exists = a > c
    stable = abs(alpha) < 1.0 and abs(p.delta) < 1.0
    return ClassifiedFixedPoint(a, c, fp_type, exists, eig, stable)


def affine_fixed_points(p: AffineParams) -> list[ClassifiedFixedPoint]:
    """Type I and Type II candidates with existence flags and eigenvalues.

    Candidates within a relative 1e-9 of the diagonal are marked as not
    existing as interior points; see :func:`boundary_fixed_point`.
    """
    return [
        _interior(FixedPointType.TYPE_I, p.alpha1, p.beta1, p),
        _interior(FixedPointType.TYPE_II, p.alpha2, p.beta2, p),
    ]


def boundary_fixed_point(p: AffineParams, tol: float = 1e-9) -> ClassifiedFixedPoint | None:
    """Solve f(c) = c and check h(c, c) = c within ``tol`` (relative to max(1, |c|)).

    The two equations over-determine c, so a boundary point exists only on a
    codimension-one parameter set. ``shortcut_c`` is (beta1 + epsilon) /
    (1 - alpha1 - gamma), a closed form that generally does not satisfy both
    equations; it is reported for comparison only.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    one_sided = (p.alpha1, p.alpha2, p.delta)
    if p.alpha1 == 1.0:
        return ClassifiedFixedPoint(math.nan, math.nan, FixedPointType.TYPE_III, False,
                                    (p.alpha1, p.delta), False, degenerate=True, one_sided=one_sided)
    c = p.beta1 / (1.0 - p.alpha1)
    h_cc = p.gamma * c + p.delta * c + p.epsilon
    scale = max(1.0, abs(c))
    if abs(h_cc - c) > tol * scale:
        return None

    denom = 1.0 - p.alpha1 - p.gamma
    shortcut = (p.beta1 + p.epsilon) / denom if denom != 0.0 else math.nan
    agrees = math.isfinite(shortcut) and abs(shortcut - c) <= tol * scale

    am, ap, b = one_sided
    continuous = abs((p.alpha2 * c + p.beta2) - c) <= tol * scale
    if max(abs(am), abs(ap)) > 1.0 or abs(b) > 1.0:
        case, stable = 1, False
    elif continuous and am == ap:
        case, stable = 2, abs(am) < 1.0 and abs(b) < 1.0
    else:
        # one-sided contraction only suggests attraction
        case, stable = 3, False
    return ClassifiedFixedPoint(c, c, FixedPointType.TYPE_III, True, (am, b), stable,
                                one_sided=one_sided, boundary_case=case,
                                shortcut_c=shortcut, shortcut_agrees=agrees)


def all_fixed_points(p: AffineParams, tol: float = 1e-9) -> list[ClassifiedFixedPoint]:
    pts = affine_fixed_points(p)
    b = boundary_fixed_point(p, tol)
    if b is not None:
        pts.append(b)
    return pts


def finite_difference_jacobian(sys: SystemSpec, point: State, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the map at ``point``."""
    J = np.empty((2, 2))
    for col, (da, dc) in enumerate(((h, 0.0), (0.0, h))):
        plus, _ = step(sys, State(point.a + da, point.c + dc))
        minus, _ = step(sys, State(point.a - da, point.c - dc))
        J[0, col] = (plus.a - minus.a) / (2 * h)
        J[1, col] = (plus.c - minus.c) / (2 * h)
    return J


def jacobian_check(p: AffineParams, point: State, side: Regime, tol: float = 1e-9) -> np.ndarray:
    """Analytic Jacobian [[alpha_side, 0], [gamma, delta]] at an interior point.

    Raises DomainError on the boundary, or when a central-difference estimate
    disagrees with the analytic matrix by more than 1e-5 in any entry.
    """
    if abs(point.a - point.c) <= 10 * tol:
        raise DomainError("map is not differentiable on the switching boundary")
    alpha = p.alpha1 if Regime(side) is Regime.ONE else p.alpha2
    J = np.array([[alpha, 0.0], [p.gamma, p.delta]])
    fd = finite_difference_jacobian(p.to_system(), point)
    if np.max(np.abs(fd - J)) > FD_AGREEMENT:
        raise DomainError(f"finite differences disagree with analytic Jacobian: {fd.tolist()}")
    return J


class TypeLabel(str, enum.Enum):
    A_CONVERGENCE = "A_Convergence"
    B_BISTABILITY = "B_Bistability"
    C_PERIODIC = "C_Periodic"
    D_DIVERGENT_SPIRAL = "D_DivergentSpiral"
    E_CHAOS = "E_Chaos"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class ClassifyBudget:
    grid: tuple[int, int] = (20, 20)
    box: tuple[float, float, float, float] = (-10.0, 10.0, -10.0, 10.0)
    n_steps: int = 2000
    tol: float = 1e-9
    window: int = 100
    period_tol: float = 1e-6
    max_period: int = 50
    merge_radius: float = 1e-4
    lyapunov_iters: int = 10**4
    lyapunov_transient: int = 1000
    chaos_threshold: float = 0.05
    seed: int = DEFAULT_SEED


@dataclass
class Evidence:
    fixed_points: list[ClassifiedFixedPoint]
    attractors: list[tuple[float, float]]
    n_orbits: int
    converged_fraction: float
    diverged_fraction: float
    periodic_fraction: float
    undecided_fraction: float
    period: int | None = None
    lyapunov: float | None = None
    bounded: bool = False
    seed: int = DEFAULT_SEED
    notes: list[str] = field(default_factory=list)


@dataclass
class DynamicalType:
    label: TypeLabel
    evidence: Evidence

    def to_dict(self) -> dict:
        ev = self.evidence
        return {
            "label": self.label.value,
            "fixed_points": [fp.to_dict() for fp in ev.fixed_points],
            "attractors": [list(a) for a in ev.attractors],
            "lyapunov": ev.lyapunov,
            "period": ev.period,
            "diverged_fraction": ev.diverged_fraction,
            "converged_fraction": ev.converged_fraction,
            "periodic_fraction": ev.periodic_fraction,
            "undecided_fraction": ev.undecided_fraction,
            "bounded": ev.bounded,
            "n_orbits": ev.n_orbits,
            "seed": ev.seed,
            "notes": list(ev.notes),
        }


def _grid_states(budget: ClassifyBudget):
    rows, cols = budget.grid
    a0, a1, c0, c1 = budget.box
    a = np.linspace(a0, a1, cols)
    c = np.linspace(c0, c1, rows)
    A, C = np.meshgrid(a, c)
    return A.ravel(), C.ravel()


def classify(p: AffineParams, budget: ClassifyBudget | None = None) -> DynamicalType:
    """Label the system's dynamics from fixed-point analysis plus grid simulation.

    Orbits are started from a grid over ``budget.box`` and each receives a
    finite-horizon verdict. D: a majority diverge. Otherwise the label
    describes the bounded orbits: A when they all converge to one point, B
    when they reach two or more points. C: bounded
    orbits are periodic, or aperiodic with Lyapunov estimate <= 0. E: bounded
    aperiodic orbits with Lyapunov estimate above ``chaos_threshold``.
    Anything else is Unclassified.
    """
    budget = budget or ClassifyBudget()
    sys = p.to_system()
    fps = all_fixed_points(p)

    a0, c0 = _grid_states(budget)
    A, C, R, over = _kernels.orbit_batch(_kernels.encode(sys), a0, c0, budget.n_steps)
    traces = [Trace.from_arrays(A[k], C[k], R[k], int(over[k]), sys) for k in range(len(a0))]
    verdicts = [detect_limit(t, budget.tol, budget.window) for t in traces]
    kinds = Counter(v.kind for v in verdicts)
    n = len(verdicts)
    frac = {k: kinds.get(k, 0) / n for k in LimitKind}

    limits = [(v.limit_a, v.limit_c) for v in verdicts if v.converged]
    attractors = _cluster(limits, budget.merge_radius)
    periods = Counter(v.period for v in verdicts if v.kind is LimitKind.PERIODIC)
    ev = Evidence(
        fixed_points=fps,
        attractors=attractors,
        n_orbits=n,
        converged_fraction=frac[LimitKind.CONVERGED],
        diverged_fraction=frac[LimitKind.DIVERGED],
        periodic_fraction=frac[LimitKind.PERIODIC],
        undecided_fraction=frac[LimitKind.UNDECIDED],
        period=periods.most_common(1)[0][0] if periods else None,
        bounded=kinds.get(LimitKind.DIVERGED, 0) == 0,
        seed=budget.seed,
    )

    if ev.diverged_fraction > 0.5:
        return DynamicalType(TypeLabel.D_DIVERGENT_SPIRAL, ev)

    n_conv = kinds.get(LimitKind.CONVERGED, 0)
    n_per = kinds.get(LimitKind.PERIODIC, 0)
    n_und = kinds.get(LimitKind.UNDECIDED, 0)

    if n_und and n_und >= max(n_conv, n_per):
        first = next(k for k, v in enumerate(verdicts) if v.kind is LimitKind.UNDECIDED)
        try:
            est = lyapunov(sys, traces[first].final, budget.lyapunov_iters,
                           budget.lyapunov_transient, budget.seed)
        except LyapunovOverflowError as exc:
            ev.notes.append(f"representative orbit overflowed during Lyapunov run: {exc}")
            return DynamicalType(TypeLabel.UNCLASSIFIED, ev)
        ev.lyapunov = est.lambda_max
        if est.lambda_max > budget.chaos_threshold:
            return DynamicalType(TypeLabel.E_CHAOS, ev)
        if est.lambda_max <= 0.0:
            return DynamicalType(TypeLabel.C_PERIODIC, ev)
        ev.notes.append("Lyapunov estimate between 0 and the chaos threshold")
        return DynamicalType(TypeLabel.UNCLASSIFIED, ev)

    if n_per and not n_conv and not n_und:
        return DynamicalType(TypeLabel.C_PERIODIC, ev)

    if n_conv and not n_per and not n_und:
        if n_conv < n:
            ev.notes.append(f"{n - n_conv} of {n} sampled orbits diverge; label reflects the bounded majority")
        if len(attractors) >= 2:
            return DynamicalType(TypeLabel.B_BISTABILITY, ev)
        return DynamicalType(TypeLabel.A_CONVERGENCE, ev)

    ev.notes.append("mixed evidence: " + ", ".join(f"{k.value}={v}" for k, v in sorted(kinds.items())))
    return DynamicalType(TypeLabel.UNCLASSIFIED, ev)
