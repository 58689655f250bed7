"""Independent reference evaluators used to produce and check frozen values.

These deliberately share no code with the package: exact rational arithmetic
(fractions) for affine systems, mpmath for anything transcendental.
"""

from fractions import Fraction

import mpmath


def q(x) -> Fraction:
    """Exact rational from a decimal literal (string or int)."""
    return Fraction(str(x))


def exact_affine_orbit(params, init, n_steps, escape=10**20):
    """Iterate the affine system exactly; params are decimal strings.

    Returns (states, regimes) with regimes[n] in {1, 2}; stops once |a| or |c|
    exceeds ``escape``.
    """
    a1, b1, a2, b2, g, d, e = (q(p) for p in params)
    a, c = q(init[0]), q(init[1])
    states, regimes = [(a, c)], []
    for _ in range(n_steps):
        if a <= c:
            regimes.append(1)
            a_next = a1 * a + b1
        else:
            regimes.append(2)
            a_next = a2 * a + b2
        c = g * a + d * c + e
        a = a_next
        states.append((a, c))
        if abs(a) > escape or abs(c) > escape:
            break
    return states, regimes


def mp_affine_orbit(params, init, n_steps, dps=60):
    """Same as exact_affine_orbit but in mpmath at ``dps`` digits (for long runs)."""
    with mpmath.workdps(dps):
        a1, b1, a2, b2, g, d, e = (mpmath.mpf(str(p)) for p in params)
        a, c = mpmath.mpf(str(init[0])), mpmath.mpf(str(init[1]))
        states, regimes = [(a, c)], []
        for _ in range(n_steps):
            if a <= c:
                regimes.append(1)
                a_next = a1 * a + b1
            else:
                regimes.append(2)
                a_next = a2 * a + b2
            c = g * a + d * c + e
            a = a_next
            states.append((a, c))
        return states, regimes


def switch_indices(regimes):
    return [n for n in range(len(regimes) - 1) if regimes[n] != regimes[n + 1]]
