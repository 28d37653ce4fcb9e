"""Bracketed root finding for monotone scalar functions.

Every equation solved in this package has an increasing left-hand side, so a
bracket can always be grown geometrically and then refined. Values of ``inf``
are tolerated on the right end of a bracket (costs defined on a bounded
domain report ``inf`` outside it).
"""

from __future__ import annotations

import math
from typing import Callable

from scipy.optimize import brentq

from .errors import NumericFailure

RTOL = 1e-14
_MAX_EXPAND = 2000


def solve_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float = 0.0,
    start: float = 1.0,
    upper: float = math.inf,
    rtol: float = RTOL,
    what: str = "root",
) -> float:
    """Return ``x >= lo`` with ``f(x) = target`` for increasing ``f``.

    ``upper`` is an exclusive bound on the domain (``f`` may be ``inf`` close
    to it). Raises :class:`NumericFailure` when no bracket spans ``target``.
    """
    flo = f(lo)
    if flo >= target:
        return lo
    hi = lo + start if math.isinf(upper) else min(lo + start, 0.5 * (lo + upper))
    fhi = f(hi)
    n = 0
    while not fhi > target:
        if not math.isfinite(fhi) and not math.isinf(fhi):
            raise NumericFailure(f"{what}: non-finite value during bracketing", {"x": hi})
        lo, flo = hi, fhi
        hi = 2.0 * hi if math.isinf(upper) else 0.5 * (hi + upper)
        if hi == lo or n > _MAX_EXPAND:
            raise NumericFailure(
                f"{what}: could not bracket target",
                {"target": target, "last_x": lo, "last_value": flo},
            )
        fhi = f(hi)
        n += 1
    # pull an infinite right end inwards until brentq can use it
    while math.isinf(fhi):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if mid in (lo, hi):
            return lo
        if fmid > target:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    if flo == target:
        return lo
    return brentq(lambda x: f(x) - target, lo, hi, xtol=1e-300, rtol=max(rtol, 4.5e-16), maxiter=500)
