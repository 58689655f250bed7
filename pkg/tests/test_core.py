import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynthresh.core import (
    DomainError, Regime, ScalarMapSpec, State, SystemSpec, ThresholdMapSpec,
    eval_map, eval_threshold, mod1, step,
)
from dynthresh.scenarios import builtin

from conftest import affine_system

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12)


def test_eval_map_examples():
    assert eval_map(ScalarMapSpec.affine(0.9, 0.2), 1.5) == 1.55
    assert eval_map(ScalarMapSpec.affine_mod1(3, 0), 0.0) == 0.0
    assert eval_map(ScalarMapSpec.affine_mod1(3, 0.5), 0.9) == pytest.approx(0.2, abs=1e-15)


def test_eval_threshold_examples():
    h = ThresholdMapSpec.affine(0.3, 0.7, 1)
    assert eval_threshold(h, 4.0, 22 / 3) == pytest.approx(22 / 3, rel=1e-15)
    assert eval_threshold(ThresholdMapSpec.sine(0.4, 0.5, 0.3), 0.0, 0.0) == 0.3
    assert eval_threshold(ThresholdMapSpec.averaging(0.5), 1.0, 3.0) == 2.0


def test_step_examples(divergent):
    fed = builtin("fed_policy").system
    assert step(fed, State(1.5, 2.5)) == (State(1.55, 2.315), Regime.ONE)
    sys = SystemSpec(ScalarMapSpec.affine(0.5, 1), ScalarMapSpec.affine(3, -7), ThresholdMapSpec.averaging(0.5))
    assert step(sys, State(2.0, 2.0)) == (State(2.0, 2.0), Regime.ONE)
    s, r = step(divergent, State(1.0, 2.5))
    assert r is Regime.ONE
    # exact rational evaluation of the same step
    assert Fraction(s.a) == Fraction(3, 2)
    assert abs(Fraction(s.c) - (Fraction(12, 10) * Fraction(5, 2) - Fraction(1, 10) + Fraction(1, 2))) < Fraction(1, 10**15)


def test_non_finite_inputs_rejected():
    with pytest.raises(DomainError):
        eval_map(ScalarMapSpec.affine(1, 0), math.nan)
    with pytest.raises(DomainError):
        eval_threshold(ThresholdMapSpec.averaging(0.5), math.inf, 0.0)
    with pytest.raises(DomainError):
        ThresholdMapSpec.averaging(1.5)


def test_step_overflow_is_marked_not_raised():
    sys = affine_system(1e200, 0, 1e200, 0, 0, 1e200, 0)
    s, _ = step(sys, State(1e200, 1e200))
    assert s.overflowed


def test_mod1_edges():
    assert mod1(-0.25) == 0.75
    assert mod1(-1e-20) == 0.0  # 1 - 1e-20 rounds to 1.0, folded back to 0
    assert math.isnan(mod1(math.inf))


def test_mod1_closure_million_draws():
    rng = np.random.default_rng(42)
    m = ScalarMapSpec.affine_mod1(3.0, 0.5)
    ys = np.fromiter((m(x) for x in rng.uniform(-1e6, 1e6, 10**6).tolist()), float, 10**6)
    assert np.all((ys >= 0) & (ys < 1))


@given(finite, finite)
def test_regime_consistency(a, c):
    sys = affine_system(0.5, 1, 0.7, -1, 0.2, 0.3, 0.1)
    _, r = step(sys, State(a, c))
    assert (r is Regime.ONE) == (a <= c)


@given(finite, finite, st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_averaging_betweenness(a, c, w):
    v = eval_threshold(ThresholdMapSpec.averaging(w), a, c)
    assert min(a, c) <= v <= max(a, c)


@given(finite, finite)
def test_step_deterministic(a, c):
    sys = SystemSpec(ScalarMapSpec.affine_mod1(3, 0), ScalarMapSpec.affine_mod1(3, 0.5),
                     ThresholdMapSpec.sine(0.4, 0.5, 0.3))
    x = step(sys, State(a, c))
    y = step(sys, State(a, c))
    assert x[0].a.hex() == y[0].a.hex() and x[0].c.hex() == y[0].c.hex() and x[1] == y[1]
