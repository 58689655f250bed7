"""Domain types and the single-step evolution operator.

The system evolves a sequence value ``a`` and a switching threshold ``c``::

    a' = f(a) if a <= c else g(a)
    c' = h(a, c)

The boundary ``a == c`` always selects ``f`` (regime 1). The comparison is
exact; no tolerance is applied.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

OVERFLOW_GUARD = 1e300


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


class Regime(enum.IntEnum):
    ONE = 1
    TWO = 2


class MapFamily(str, enum.Enum):
    AFFINE = "affine"
    AFFINE_MOD1 = "affine_mod1"


class ThresholdFamily(str, enum.Enum):
    AFFINE = "affine"
    SINE = "sine"
    AVERAGING = "averaging"


def mod1(y: float) -> float:
    """Map ``y`` into [0, 1) as ``y - floor(y)``."""
    if not math.isfinite(y):
        return math.nan
    r = y - math.floor(y)
    # tiny negative y rounds up to exactly 1.0, which is 0 on the circle
    return 0.0 if r >= 1.0 else r


@dataclass(frozen=True)
class ScalarMapSpec:
    family: MapFamily
    slope: float
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "family", MapFamily(self.family))
        object.__setattr__(self, "slope", float(self.slope))
        object.__setattr__(self, "intercept", float(self.intercept))

    @classmethod
    def affine(cls, slope, intercept):
        return cls(MapFamily.AFFINE, slope, intercept)

    @classmethod
    def affine_mod1(cls, slope, intercept):
        return cls(MapFamily.AFFINE_MOD1, slope, intercept)

    def __call__(self, x: float) -> float:
        return eval_map(self, x)

    def derivative(self, x: float) -> float:
        # mod-1 maps: slope almost everywhere
        return self.slope

    @property
    def fixed_point(self) -> float | None:
        """Closed-form fixed point of an affine map with slope != 1."""
        if self.family is not MapFamily.AFFINE or self.slope == 1.0:
            return None
        return self.intercept / (1.0 - self.slope)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class ThresholdMapSpec:
    """Threshold update ``h(a, c)``.

    ``AFFINE`` uses ``(gamma, delta, epsilon)``: gamma*a + delta*c + epsilon.
    ``SINE`` uses ``(amp, delta, offset)``: amp*sin(2*pi*a) + delta*c + offset.
    ``AVERAGING`` uses ``weight``: weight*a + (1 - weight)*c, 0 < weight < 1.
    """

    family: ThresholdFamily
    gamma: float = 0.0
    delta: float = 0.0
    epsilon: float = 0.0
    amp: float = 0.0
    offset: float = 0.0
    weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", ThresholdFamily(self.family))
        for name in ("gamma", "delta", "epsilon", "amp", "offset", "weight"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.family is ThresholdFamily.AVERAGING:
            if not 0.0 < self.weight < 1.0:
                raise DomainError(f"averaging weight must lie in (0, 1), got {self.weight}")
            # keep the affine view consistent
            object.__setattr__(self, "gamma", self.weight)
            object.__setattr__(self, "delta", 1.0 - self.weight)
            object.__setattr__(self, "epsilon", 0.0)

    @classmethod
    def affine(cls, gamma, delta, epsilon):
        return cls(ThresholdFamily.AFFINE, gamma=gamma, delta=delta, epsilon=epsilon)

    @classmethod
    def sine(cls, amp, delta, offset):
        return cls(ThresholdFamily.SINE, amp=amp, delta=delta, offset=offset)

    @classmethod
    def averaging(cls, weight):
        return cls(ThresholdFamily.AVERAGING, weight=weight)

    def as_affine(self) -> ThresholdMapSpec:
        """Equivalent ``AFFINE`` spec; only defined for affine and averaging families."""
        if self.family is ThresholdFamily.SINE:
            raise DomainError("sine threshold has no affine form")
        return ThresholdMapSpec.affine(self.gamma, self.delta, self.epsilon)

    def __call__(self, a: float, c: float) -> float:
        return eval_threshold(self, a, c)

    def partials(self, a: float, c: float) -> tuple[float, float]:
        """Return (dh/da, dh/dc) at (a, c)."""
        if self.family is ThresholdFamily.SINE:
            return self.amp * 2.0 * math.pi * math.cos(2.0 * math.pi * a), self.delta
        return self.gamma, self.delta

    def to_dict(self) -> dict:
        if self.family is ThresholdFamily.AFFINE:
            return {"family": "affine", "gamma": self.gamma, "delta": self.delta, "epsilon": self.epsilon}
        if self.family is ThresholdFamily.SINE:
            return {"family": "sine", "amp": self.amp, "delta": self.delta, "offset": self.offset}
        return {"family": "averaging", "weight": self.weight}


@dataclass(frozen=True)
class SystemSpec:
    f: ScalarMapSpec
    g: ScalarMapSpec
    h: ThresholdMapSpec

    def __call__(self, state: State) -> tuple[State, Regime]:
        return step(self, state)

    def to_dict(self) -> dict:
        return {"f": self.f.to_dict(), "g": self.g.to_dict(), "h": self.h.to_dict()}


@dataclass(frozen=True)
class State:
    a: float
    c: float

    @property
    def overflowed(self) -> bool:
        return not (abs(self.a) <= OVERFLOW_GUARD and abs(self.c) <= OVERFLOW_GUARD)

    def __iter__(self):
        return iter((self.a, self.c))


def _check_finite(*xs: float) -> None:
    for x in xs:
        if not math.isfinite(x):
            raise DomainError(f"non-finite input {x!r}")


def eval_map(m: ScalarMapSpec, x: float) -> float:
    _check_finite(x)
    y = m.slope * x + m.intercept
    if m.family is MapFamily.AFFINE_MOD1:
        return mod1(y)
    return y


def eval_threshold(h: ThresholdMapSpec, a: float, c: float) -> float:
    _check_finite(a, c)
    if h.family is ThresholdFamily.SINE:
        return h.amp * math.sin(2.0 * math.pi * a) + h.delta * c + h.offset
    if h.family is ThresholdFamily.AVERAGING:
        y = h.weight * a + (1.0 - h.weight) * c
        # rounding may step one ulp outside [min, max]
        return min(max(y, min(a, c)), max(a, c))
    return h.gamma * a + h.delta * c + h.epsilon


def regime_of(a: float, c: float) -> Regime:
    return Regime.ONE if a <= c else Regime.TWO


def step(sys: SystemSpec, s: State) -> tuple[State, Regime]:
    """Apply the map once.

    Overflow is not an error here: the returned state may be non-finite or
    exceed the guard, which ``State.overflowed`` reports.
    """
    a, c = s.a, s.c
    _check_finite(a, c)
    label = regime_of(a, c)
    if label is Regime.ONE:
        a_next = eval_map(sys.f, a)
    else:
        a_next = eval_map(sys.g, a)
    return State(a_next, eval_threshold(sys.h, a, c)), label
