"""Compiled inner loops for bulk simulation and Lyapunov estimation.

Systems are flattened to a float64 parameter vector by :func:`encode` so the
kernels stay monomorphic. Arithmetic mirrors ``core`` operation for operation;
``tests/test_kernels.py`` checks the two paths agree bit for bit.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .core import OVERFLOW_GUARD, MapFamily, SystemSpec, ThresholdFamily

_MAP_CODES = {MapFamily.AFFINE: 0.0, MapFamily.AFFINE_MOD1: 1.0}
_H_CODES = {ThresholdFamily.AFFINE: 0.0, ThresholdFamily.SINE: 1.0, ThresholdFamily.AVERAGING: 2.0}


def encode(sys: SystemSpec) -> np.ndarray:
    h = sys.h
    if h.family is ThresholdFamily.SINE:
        hp = (h.amp, h.delta, h.offset)
    elif h.family is ThresholdFamily.AVERAGING:
        hp = (h.weight, 0.0, 0.0)
    else:
        hp = (h.gamma, h.delta, h.epsilon)
    return np.array(
        [
            _MAP_CODES[sys.f.family], sys.f.slope, sys.f.intercept,
            _MAP_CODES[sys.g.family], sys.g.slope, sys.g.intercept,
            _H_CODES[h.family], *hp,
        ],
        dtype=np.float64,
    )


@numba.njit(cache=True)
def _map(code, slope, intercept, x):
    y = slope * x + intercept
    if code == 1.0:
        if not math.isfinite(y):
            return math.nan
        r = y - math.floor(y)
        if r >= 1.0:
            r = 0.0
        return r
    return y


@numba.njit(cache=True)
def _thresh(p, a, c):
    code = p[6]
    if code == 1.0:
        return p[7] * math.sin(2.0 * math.pi * a) + p[8] * c + p[9]
    if code == 2.0:
        w = p[7]
        y = w * a + (1.0 - w) * c
        lo = min(a, c)
        hi = max(a, c)
        return min(max(y, lo), hi)
    return p[7] * a + p[8] * c + p[9]


@numba.njit(cache=True)
def _dh_da(p, a):
    if p[6] == 1.0:
        return p[7] * 2.0 * math.pi * math.cos(2.0 * math.pi * a)
    return p[7]


@numba.njit(cache=True)
def _dh_dc(p):
    if p[6] == 2.0:
        return 1.0 - p[7]
    return p[8]


@numba.njit(cache=True)
def _step(p, a, c):
    if a <= c:
        return _map(p[0], p[1], p[2], a), _thresh(p, a, c), 1
    return _map(p[3], p[4], p[5], a), _thresh(p, a, c), 2


@numba.njit(cache=True)
def _bad(x):
    return not (abs(x) <= OVERFLOW_GUARD)


@numba.njit(cache=True)
def orbit_batch(p, a0, c0, n_steps):
    """Simulate ``len(a0)`` orbits for ``n_steps`` steps each.

    Returns (A, C, R, overflow_at). Entries past an overflow are NaN / 0 and
    ``overflow_at`` holds the first unrecorded state index, or -1.
    """
    k = a0.shape[0]
    A = np.full((k, n_steps + 1), np.nan)
    C = np.full((k, n_steps + 1), np.nan)
    R = np.zeros((k, n_steps), dtype=np.int8)
    over = np.full(k, -1, dtype=np.int64)
    for i in range(k):
        a = a0[i]
        c = c0[i]
        A[i, 0] = a
        C[i, 0] = c
        for n in range(n_steps):
            an, cn, r = _step(p, a, c)
            if _bad(an) or _bad(cn):
                over[i] = n + 1
                break
            R[i, n] = r
            a = an
            c = cn
            A[i, n + 1] = a
            C[i, n + 1] = c
    return A, C, R, over


@numba.njit(cache=True)
def lyapunov_single(p, a, c, n, transient, va, vc):
    """Leading exponent from one renormalised tangent vector.

    Returns (sum_log, counted_steps, regime1_steps, overflowed).
    """
    norm = math.sqrt(va * va + vc * vc)
    va /= norm
    vc /= norm
    total = 0.0
    counted = 0
    ones = 0
    for i in range(transient + n):
        if a <= c:
            ja = p[1]
            if i >= transient:
                ones += 1
        else:
            ja = p[4]
        ha = _dh_da(p, a)
        hc = _dh_dc(p)
        wa = ja * va
        wc = ha * va + hc * vc
        an, cn, r = _step(p, a, c)
        if _bad(an) or _bad(cn):
            return total, counted, ones, True
        a = an
        c = cn
        norm = math.sqrt(wa * wa + wc * wc)
        if norm == 0.0:
            # tangent annihilated: exponent is -inf along this direction
            return -math.inf, max(counted, 1), ones, False
        va = wa / norm
        vc = wc / norm
        if i >= transient:
            total += math.log(norm)
            counted += 1
    return total, counted, ones, False


@numba.njit(cache=True)
def lyapunov_spectrum(p, a, c, n, transient):
    """Both exponents via Gram-Schmidt on a 2x2 tangent basis.

    Returns (sum_log1, sum_log2, counted_steps, regime1_steps, overflowed).
    """
    u0, u1 = 1.0, 0.0
    w0, w1 = 0.0, 1.0
    s1 = 0.0
    s2 = 0.0
    counted = 0
    ones = 0
    for i in range(transient + n):
        if a <= c:
            ja = p[1]
            if i >= transient:
                ones += 1
        else:
            ja = p[4]
        ha = _dh_da(p, a)
        hc = _dh_dc(p)
        x0 = ja * u0
        x1 = ha * u0 + hc * u1
        y0 = ja * w0
        y1 = ha * w0 + hc * w1
        an, cn, r = _step(p, a, c)
        if _bad(an) or _bad(cn):
            return s1, s2, counted, ones, True
        a = an
        c = cn
        r11 = math.sqrt(x0 * x0 + x1 * x1)
        if r11 == 0.0:
            return -math.inf, -math.inf, max(counted, 1), ones, False
        u0 = x0 / r11
        u1 = x1 / r11
        r12 = u0 * y0 + u1 * y1
        y0 -= r12 * u0
        y1 -= r12 * u1
        r22 = math.sqrt(y0 * y0 + y1 * y1)
        if r22 == 0.0:
            return s1, -math.inf, max(counted, 1), ones, False
        w0 = y0 / r22
        w1 = y1 / r22
        if i >= transient:
            s1 += math.log(r11)
            s2 += math.log(r22)
            counted += 1
    return s1, s2, counted, ones, False
