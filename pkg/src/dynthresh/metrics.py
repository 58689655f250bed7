"""Orbit diagnostics: Lyapunov exponents, period detection, basin sampling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import DomainError, State, SystemSpec
from .sim import Trace, detect_limit

DEFAULT_SEED = 42
MIN_ITERATIONS = 10**4


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_max: float
    n_iterations: int
    transient_discarded: int
    seed: int
    regime_fraction: float
    exponents: tuple[float, float] | None = None


class LyapunovOverflowError(ArithmeticError):
    """The orbit left the overflow guard before ``n`` iterations."""

    def __init__(self, partial: LyapunovEstimate):
        super().__init__(f"orbit overflowed after {partial.n_iterations} counted iterations")
        self.partial = partial


def _random_init(rng: np.random.Generator, box) -> State:
    a0, a1, c0, c1 = box
    return State(float(rng.uniform(a0, a1)), float(rng.uniform(c0, c1)))


def lyapunov(
    sys: SystemSpec,
    init: State | None,
    n: int,
    transient: int = 1000,
    seed: int = DEFAULT_SEED,
    spectrum: bool = False,
    box=(0.0, 1.0, 0.0, 1.0),
) -> LyapunovEstimate:
    """Estimate the leading Lyapunov exponent along one orbit.

    The tangent vector is pushed through the regime-selected Jacobian
    ``[[f' or g', 0], [dh/da, dh/dc]]`` and renormalised every step. The seed
    fixes the initial tangent direction and, when ``init`` is None, the
    initial state (uniform over ``box``). With ``spectrum=True`` a two-vector
    Gram-Schmidt run also yields the second exponent.
    """
    if n < MIN_ITERATIONS:
        raise DomainError(f"need n >= {MIN_ITERATIONS}, got {n}")
    if transient < 0:
        raise DomainError("transient must be >= 0")
    rng = np.random.default_rng(seed)
    if init is None:
        init = _random_init(rng, box)
    p = _kernels.encode(sys)
    if spectrum:
        s1, s2, counted, ones, over = _kernels.lyapunov_spectrum(p, init.a, init.c, n, transient)
        exps = (s1 / max(counted, 1), s2 / max(counted, 1))
        total = s1
    else:
        theta = rng.uniform(0.0, 2.0 * math.pi)
        total, counted, ones, over = _kernels.lyapunov_single(
            p, init.a, init.c, n, transient, math.cos(theta), math.sin(theta)
        )
        exps = None
    est = LyapunovEstimate(
        lambda_max=total / max(counted, 1),
        n_iterations=int(counted),
        transient_discarded=transient,
        seed=seed,
        regime_fraction=ones / max(counted, 1),
        exponents=exps,
    )
    if over:
        raise LyapunovOverflowError(est)
    return est


@dataclass(frozen=True)
class EnsembleEstimate:
    mean: float
    estimates: list[LyapunovEstimate]
    overflowed: int
    seed: int

    @property
    def spread(self) -> float:
        vals = [e.lambda_max for e in self.estimates]
        return float(np.std(vals)) if vals else math.nan


def lyapunov_ensemble(
    sys: SystemSpec,
    n_inits: int,
    n: int,
    transient: int = 1000,
    seed: int = DEFAULT_SEED,
    box=(0.0, 1.0, 0.0, 1.0),
) -> EnsembleEstimate:
    """Average ``lyapunov`` over ``n_inits`` seeded initial conditions from ``box``.

    Overflowing orbits are counted and left out of the mean.
    """
    children = np.random.SeedSequence(seed).generate_state(n_inits, dtype=np.uint32)
    estimates, overflowed = [], 0
    for child in children:
        try:
            estimates.append(lyapunov(sys, None, n, transient, int(child), box=box))
        except LyapunovOverflowError:
            overflowed += 1
    mean = float(np.mean([e.lambda_max for e in estimates])) if estimates else math.nan
    return EnsembleEstimate(mean, estimates, overflowed, seed)


@dataclass(frozen=True)
class PeriodReport:
    period: int | None
    cycle_points: list[State] | None
    residual: float


def _period_residual(a: np.ndarray, c: np.ndarray, p: int) -> float:
    L = len(a)
    lo = L - 3 * p
    da = a[lo : L - p] - a[lo + p :]
    dc = c[lo : L - p] - c[lo + p :]
    return float(np.max(np.hypot(da, dc)))


def detect_period(trace: Trace, max_period: int, tol: float = 1e-6) -> PeriodReport:
    """Smallest p <= max_period with |x_n - x_{n+p}| < tol over the final 2p steps.

    A period-1 hit means the orbit has settled on a fixed point; that is
    reported as no period.
    """
    if max_period < 1 or len(trace) < 4 * max_period:
        raise DomainError("trace length must be >= 4 * max_period")
    best = math.inf
    for p in range(1, max_period + 1):
        res = _period_residual(trace.a, trace.c, p)
        if res < tol:
            if p == 1:
                return PeriodReport(None, None, res)
            pts = [State(float(x), float(y)) for x, y in zip(trace.a[-p:], trace.c[-p:])]
            return PeriodReport(p, pts, res)
        best = min(best, res)
    return PeriodReport(None, None, best)


DIVERGED = -1
UNDECIDED = -2


@dataclass(frozen=True, eq=False)
class BasinGrid:
    """Attractor labels on a grid; rows index c, columns index a.

    ``labels[i, j]`` is an index into ``attractors`` or DIVERGED / UNDECIDED.
    """

    labels: np.ndarray
    attractors: list[tuple[float, float]]
    box: tuple[float, float, float, float]
    a_centers: np.ndarray
    c_centers: np.ndarray
    n_steps: int
    tol: float
    extra: dict = field(default_factory=dict)

    def name(self, label: int) -> str:
        if label == DIVERGED:
            return "Diverged"
        if label == UNDECIDED:
            return "Undecided"
        return f"A{label}"

    def counts(self) -> dict[str, int]:
        vals, cnt = np.unique(self.labels, return_counts=True)
        return {self.name(int(v)): int(k) for v, k in zip(vals, cnt)}

    def to_csv(self, comments=()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "a0", "c0", "label"])
        for i, c0 in enumerate(self.c_centers):
            for j, a0 in enumerate(self.a_centers):
                w.writerow([i, j, f"{a0:.17g}", f"{c0:.17g}", self.name(int(self.labels[i, j]))])
        return buf.getvalue()


def _cluster(points: list[tuple[float, float]], radius: float) -> list[tuple[float, float]]:
    reps: list[tuple[float, float]] = []
    for pt in sorted(points):
        if not any(math.hypot(pt[0] - r[0], pt[1] - r[1]) <= radius for r in reps):
            reps.append(pt)
    return sorted(reps)


def basin_sample(
    sys: SystemSpec,
    box: tuple[float, float, float, float],
    grid: tuple[int, int],
    n_steps: int = 2000,
    tol: float = 1e-6,
    window: int = 100,
) -> BasinGrid:
    rows, cols = grid
    if rows < 2 or cols < 2:
        raise DomainError("grid dimensions must be >= 2")
    a0, a1, c0, c1 = box
    a_centers = a0 + (np.arange(cols) + 0.5) * (a1 - a0) / cols
    c_centers = c0 + (np.arange(rows) + 0.5) * (c1 - c0) / rows
    A0, C0 = np.meshgrid(a_centers, c_centers)
    A, C, R, over = _kernels.orbit_batch(_kernels.encode(sys), A0.ravel(), C0.ravel(), n_steps)

    verdicts = []
    for k in range(A.shape[0]):
        tr = Trace.from_arrays(A[k], C[k], R[k], int(over[k]), sys)
        verdicts.append(detect_limit(tr, tol, window))
    limits = [(v.limit_a, v.limit_c) for v in verdicts if v.converged]
    attractors = _cluster(limits, tol)

    labels = np.full(len(verdicts), UNDECIDED, dtype=np.int64)
    for k, v in enumerate(verdicts):
        if v.diverged:
            labels[k] = DIVERGED
        elif v.converged:
            d = [math.hypot(v.limit_a - x, v.limit_c - y) for x, y in attractors]
            labels[k] = int(np.argmin(d))
    return BasinGrid(
        labels.reshape(rows, cols), attractors, tuple(box), a_centers, c_centers, n_steps, tol
    )
