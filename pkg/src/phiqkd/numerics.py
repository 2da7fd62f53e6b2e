"""Derivative-free scalar root finding and maximization."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(ValueError):
    """The function does not change sign over the bracket."""


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-15,
    ftol: float = 1e-13,
    maxiter: int = 200,
) -> float:
    """Root of ``f`` in ``[lo, hi]`` by bisection.

    Stops when ``|f(mid)| <= ftol`` or the bracket is narrower than ``xtol``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:.3g}, {fhi:.3g}")
    mid = 0.5 * (lo + hi)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= ftol or (hi - lo) < xtol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return mid


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-7,
    maxiter: int = 200,
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    The endpoints are compared against the interior estimate so a maximum
    sitting on the boundary is returned exactly.
    """
    fa, fb = f(a), f(b)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    lo, hi = a, b
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    best = (x, f(x))
    for cand in ((x1, f1), (x2, f2), (a, fa), (b, fb)):
        if cand[1] > best[1]:
            best = cand
    return best
