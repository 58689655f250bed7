"""Orbit simulation, regime bookkeeping and finite-horizon detectors."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .core import DomainError, Regime, State, SystemSpec, step

DEFAULT_TOL = 1e-9
DEFAULT_WINDOW = 100
MAX_STATES = 10**7

SystemLike = Union[SystemSpec, Callable[[int], SystemSpec]]


@dataclass(frozen=True, eq=False)
class Trace:
    """A simulated orbit.

    ``regimes[n]`` is the label produced when stepping from state ``n``, so
    there is one label fewer than there are states.
    """

    a: np.ndarray
    c: np.ndarray
    regimes: np.ndarray
    overflow_at: int | None = None
    system: SystemLike | None = None

    def __len__(self) -> int:
        return len(self.a)

    @property
    def gap(self) -> np.ndarray:
        return self.a - self.c

    @property
    def states(self) -> list[State]:
        return [State(float(a), float(c)) for a, c in zip(self.a, self.c)]

    @property
    def labels(self) -> list[Regime]:
        return [Regime(int(r)) for r in self.regimes]

    @property
    def final(self) -> State:
        return State(float(self.a[-1]), float(self.c[-1]))

    def system_at(self, n: int) -> SystemSpec:
        if isinstance(self.system, SystemSpec):
            return self.system
        if self.system is None:
            raise DomainError("trace carries no system")
        return self.system(n)

    @classmethod
    def from_arrays(cls, a, c, regimes, overflow_at=None, system=None) -> Trace:
        a = np.asarray(a, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64)
        regimes = np.asarray(regimes, dtype=np.int8)
        if overflow_at is not None and overflow_at >= 0:
            a, c, regimes = a[:overflow_at], c[:overflow_at], regimes[: overflow_at - 1]
        else:
            overflow_at = None
        if len(regimes) != len(a) - 1:
            raise DomainError("need exactly one regime label per step")
        return cls(a, c, regimes, overflow_at, system)

    def to_csv(self, out=None, comments: Iterable[str] = ()) -> str | None:
        """Write ``step,a,c,regime,gap`` rows; the final state has an empty regime.

        Returns the text when ``out`` is None, else writes to the file object.
        """
        buf = out if out is not None else io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "a", "c", "regime", "gap"])
        gap = self.gap
        for n in range(len(self.a)):
            regime = str(int(self.regimes[n])) if n < len(self.regimes) else ""
            w.writerow([n, f"{self.a[n]:.17g}", f"{self.c[n]:.17g}", regime, f"{gap[n]:.17g}"])
        return buf.getvalue() if out is None else None


def read_trace_csv(text: str) -> Trace:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    body = rows[1:]
    a = [float(r[1]) for r in body]
    c = [float(r[2]) for r in body]
    regimes = [int(r[3]) for r in body if r[3]]
    return Trace.from_arrays(a, c, regimes)


def simulate(sys: SystemLike, init: State, n_steps: int, max_states: int = MAX_STATES) -> Trace:
    """Iterate the map ``n_steps`` times from ``init``.

    ``sys`` may be a callable ``n -> SystemSpec``; the system returned for
    ``n`` is applied on the step leaving state ``n``. Stops early and sets
    ``overflow_at`` when a component leaves [-1e300, 1e300].
    """
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    if n_steps + 1 > max_states:
        raise DomainError(f"trace of {n_steps + 1} states exceeds cap {max_states}")
    if not (math.isfinite(init.a) and math.isfinite(init.c)):
        raise DomainError("initial state must be finite")
    fixed = sys if isinstance(sys, SystemSpec) else None
    a = np.empty(n_steps + 1)
    c = np.empty(n_steps + 1)
    regimes = np.empty(n_steps, dtype=np.int8)
    a[0], c[0] = init.a, init.c
    s = State(float(init.a), float(init.c))
    overflow_at = None
    for n in range(n_steps):
        s, label = step(fixed or sys(n), s)
        if s.overflowed:
            overflow_at = n + 1
            break
        regimes[n] = label
        a[n + 1], c[n + 1] = s.a, s.c
    end = n_steps + 1 if overflow_at is None else overflow_at
    return Trace(a[:end], c[:end], regimes[: end - 1], overflow_at, sys)


@dataclass(frozen=True)
class TransitionSets:
    t12: list[int]
    t21: list[int]
    i1_count: int
    i2_count: int


def transitions(trace: Trace) -> TransitionSets:
    if len(trace) < 2:
        raise DomainError("trace needs at least 2 states")
    r = trace.regimes
    idx = np.arange(len(r) - 1)
    t12 = idx[(r[:-1] == 1) & (r[1:] == 2)]
    t21 = idx[(r[:-1] == 2) & (r[1:] == 1)]
    ones = int(np.count_nonzero(r == 1))
    return TransitionSets(t12.tolist(), t21.tolist(), ones, len(r) - ones)


class LimitKind(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    PERIODIC = "Periodic"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class LimitVerdict:
    kind: LimitKind
    limit_a: float | None = None
    limit_c: float | None = None
    growth_rate: float | None = None
    period: int | None = None

    @property
    def converged(self) -> bool:
        return self.kind is LimitKind.CONVERGED

    @property
    def diverged(self) -> bool:
        return self.kind is LimitKind.DIVERGED


def _growth_rate(x: np.ndarray) -> float | None:
    """Mean log ratio of |x| when |x| > 1 grows strictly and without stalling.

    A monotone sequence creeping up to a limit also has positive log ratios;
    its increments shrink geometrically, so growth only counts when the last
    increment is at least half the first. The rate is averaged over the
    second half of the window so an additive transient does not bias it.
    """
    ax = np.abs(x)
    if len(ax) < 3 or ax.min() <= 1.0:
        return None
    inc = np.diff(ax)
    if not np.all(inc > 0) or inc[-1] < 0.5 * inc[0]:
        return None
    half = ax[len(ax) // 2 :]
    return float(np.mean(np.log(half[1:] / half[:-1])))


def detect_limit(trace: Trace, tol: float = DEFAULT_TOL, window: int = DEFAULT_WINDOW) -> LimitVerdict:
    """Finite-horizon verdict on the orbit's fate over the final ``window`` states."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    window = max(2, min(window, len(trace)))
    a_w, c_w = trace.a[-window:], trace.c[-window:]

    if trace.overflow_at is not None:
        rates = [r for r in (_growth_rate(c_w), _growth_rate(a_w)) if r is not None]
        if not rates:
            norm = np.maximum(np.abs(a_w), np.abs(c_w))
            with np.errstate(divide="ignore"):
                rates = [float(np.mean(np.diff(np.log(norm))))] if len(norm) > 1 else [math.inf]
        return LimitVerdict(LimitKind.DIVERGED, growth_rate=max(rates))

    if np.ptp(a_w) < tol and np.ptp(c_w) < tol:
        return LimitVerdict(LimitKind.CONVERGED, float(a_w[-1]), float(c_w[-1]))

    for x in (c_w, a_w):
        rate = _growth_rate(x)
        if rate is not None and rate > 0:
            return LimitVerdict(LimitKind.DIVERGED, growth_rate=rate)

    from .metrics import detect_period

    max_period = min(window // 2, len(trace) // 4)
    if max_period >= 2:
        report = detect_period(trace, max_period, max(tol, 1e-12))
        if report.period is not None:
            return LimitVerdict(LimitKind.PERIODIC, period=report.period)
    return LimitVerdict(LimitKind.UNDECIDED)


class VisitKind(str, enum.Enum):
    EVENTUALLY_REGIME1 = "EventuallyRegime1"
    EVENTUALLY_REGIME2 = "EventuallyRegime2"
    PERSISTENT_SWITCHING = "PersistentSwitching"


@dataclass(frozen=True)
class VisitationVerdict:
    kind: VisitKind
    last_switch_index: int | None
    tail_liminf_gap: float
    tail_limsup_gap: float


def visitation(trace: Trace, tail_fraction: float = 0.1) -> VisitationVerdict:
    """Evidence for infinite regime visitation over the trailing part of the trace.

    Persistent switching at finite horizon means at least one transition
    inside the tail window; this is evidence, not proof.
    """
    if len(trace) < 10:
        raise DomainError("visitation needs at least 10 states")
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError("tail_fraction must lie in (0, 1]")
    n_states = len(trace)
    tail = max(2, math.ceil(tail_fraction * n_states))
    start = n_states - tail
    gap = trace.gap[start:]
    r = trace.regimes
    switches = np.flatnonzero(r[:-1] != r[1:])
    last = int(switches[-1]) if len(switches) else None
    # a transition n compares labels n and n+1; both must lie in the tail
    in_tail = last is not None and last >= start
    if in_tail:
        kind = VisitKind.PERSISTENT_SWITCHING
    elif len(r) and r[-1] == 2:
        kind = VisitKind.EVENTUALLY_REGIME2
    else:
        kind = VisitKind.EVENTUALLY_REGIME1
    return VisitationVerdict(kind, last, float(gap.min()), float(gap.max()))


def sync_gap(trace: Trace, window: int = DEFAULT_WINDOW) -> float:
    """Largest |a - c| over the final ``window`` states."""
    if window < 1 or window > len(trace):
        raise DomainError("window must lie in [1, len(trace)]")
    return float(np.max(np.abs(trace.gap[-window:])))
