"""Bracketed, safeguarded Newton iteration for increasing scalar functions."""

import math

_EPS = 2.220446049250313e-16


def expand_bracket(f, lo, hi, max_doublings=200):
    """Double ``hi`` (relative to ``lo``) until ``f(hi) >= 0``.

    ``f`` must be increasing with ``f(lo) < 0``.  Returns the new ``(lo, hi)``
    where ``lo`` is the last point known to give a negative value.
    """
    width = hi - lo
    for _ in range(max_doublings):
        if f(hi) >= 0.0:
            return lo, hi
        lo = hi
        width *= 2.0
        hi = lo + width
    raise ArithmeticError("could not bracket root: function stays negative")


def newton_increasing(fdf, lo, hi, x0=None, ftol=0.0, maxiter=200):
    """Root of an increasing function bracketed in ``[lo, hi]``.

    ``fdf(x)`` returns ``(f(x), f'(x))``.  Newton steps that leave the current
    bracket (or stall) are replaced by bisection.  Iteration continues past
    ``|f| <= ftol`` until the step size reaches machine resolution, so the
    result does not depend on the starting point beyond rounding.
    """
    if not lo < hi:
        raise ValueError("empty bracket")
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else float(x0)
    last_step = hi - lo
    for _ in range(maxiter):
        fx, dfx = fdf(x)
        if fx == 0.0:
            return x
        if fx < 0.0:
            lo = x
        else:
            hi = x
        newton_ok = dfx > 0.0 and math.isfinite(dfx)
        if newton_ok:
            x_new = x - fx / dfx
            # bisect when Newton leaves the bracket or converges too slowly
            if not lo <= x_new <= hi or abs(2.0 * fx) > abs(last_step * dfx) * 4.0:
                newton_ok = False
        if not newton_ok:
            x_new = 0.5 * (lo + hi)
        step = x_new - x
        last_step = step
        x = x_new
        resolution = 4.0 * _EPS * max(abs(x), 1e-300)
        if abs(step) <= resolution or hi - lo <= resolution:
            if abs(fx) <= ftol or ftol == 0.0:
                return x
        if abs(fx) <= ftol and abs(step) <= 1e-13 * max(abs(x), 1.0):
            return x
    fx, _ = fdf(x)
    if abs(fx) <= ftol:
        return x
    raise ArithmeticError(f"Newton iteration did not converge (last |f|={abs(fx):.3e})")
