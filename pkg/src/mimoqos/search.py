"""1-D solvers: bisection for monotone root finding, golden section for unimodal minima."""

import math


class ConvergenceError(RuntimeError):
    """A solver hit its iteration cap without reaching the requested tolerance."""


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_root(f, lo, hi, rtol=1e-10, max_iter=200):
    """Root of a nondecreasing ``f`` on ``[lo, hi]`` with ``f(lo) <= 0 <= f(hi)``.

    Returns the bracket midpoint once the bracket width drops below
    ``rtol * max(|lo|, |hi|)``.  For a decreasing function pass ``lambda x: -f(x)``.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise ValueError(f"root not bracketed: f({lo})={flo}, f({hi})={fhi}")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            return mid
        fm = f(mid)
        if fm <= 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not reach rtol={rtol} within {max_iter} iterations"
    )


def golden_section_min(f, lo, hi, xtol=1e-4, max_iter=500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x_best, f_best)``.

    ``f`` may return ``inf`` on infeasible points; the best *evaluated* point is
    returned, so the result is always finite whenever any probe was.
    """
    if hi < lo:
        raise ValueError("empty interval")
    best_x, best_f = lo, f(lo)
    fhi = f(hi)
    if fhi < best_f:
        best_x, best_f = hi, fhi
    if hi - lo <= xtol:
        return best_x, best_f

    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for pt, val in ((c, fc), (d, fd)):
        if val < best_f:
            best_x, best_f = pt, val
    it = 0
    while hi - lo > xtol and it < max_iter:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
            if fd < best_f:
                best_x, best_f = d, fd
        it += 1
    return best_x, best_f
