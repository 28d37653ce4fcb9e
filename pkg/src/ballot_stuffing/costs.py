"""Per-booth stuffing cost functions.

A cost is an evaluator triple: the value ``g(z)``, the marginal ``g'(z)`` and
the inverse marginal ``(g')^{-1}(s)``. Every solver in the package touches
costs only through these three queries (plus ``value_inverse`` for
bracketing). Evaluators accept floats or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._roots import solve_increasing
from .errors import InvalidArgument


def _scalar_or_array(fn, x):
    if np.ndim(x) == 0:
        return fn(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([fn(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)


class CostFunction:
    """Strictly convex, increasing cost with ``g(0) = 0``.

    Subclasses override ``value`` and ``marginal``; ``inv_marginal`` falls
    back to a bracketed root solve, which is valid because ``g'`` is strictly
    increasing. ``inv_marginal(s)`` returns 0 for ``s <= g'(0)``: that is the
    level at which a booth stops being worth stuffing.
    """

    kind = "table-defined-strictly-convex"
    #: exclusive upper end of the domain; costs are ``inf`` beyond it
    domain_max = math.inf

    def value(self, z):
        raise NotImplementedError

    def marginal(self, z):
        raise NotImplementedError

    def inv_marginal(self, s):
        return _scalar_or_array(self._inv_marginal_scalar, s)

    def value_inverse(self, c):
        """Solve ``g(z) = c`` for ``z >= 0``."""
        return _scalar_or_array(self._value_inverse_scalar, c)

    def _inv_marginal_scalar(self, s: float) -> float:
        if s <= self.marginal(0.0):
            return 0.0
        return solve_increasing(self.marginal, s, upper=self.domain_max, what="inverse marginal")

    def _value_inverse_scalar(self, c: float) -> float:
        if c <= 0.0:
            return 0.0
        return solve_increasing(self.value, c, upper=self.domain_max, what="inverse cost")

    def describe(self) -> dict:
        return {"type": self.kind}


@dataclass(frozen=True)
class PowerCost(CostFunction):
    """``coef * z**exp`` with ``coef > 0`` and ``exp > 1``."""

    coef: float
    exp: float
    kind = "power"

    def __post_init__(self):
        if not (self.coef > 0 and math.isfinite(self.coef)):
            raise InvalidArgument(f"power cost coefficient must be positive, got {self.coef}")
        if not (self.exp > 1 and math.isfinite(self.exp)):
            raise InvalidArgument(f"power cost exponent must exceed 1, got {self.exp}")

    def value(self, z):
        return self.coef * np.power(z, self.exp) if np.ndim(z) else self.coef * float(z) ** self.exp

    def marginal(self, z):
        c = self.coef * self.exp
        e = self.exp - 1.0
        return c * np.power(z, e) if np.ndim(z) else c * float(z) ** e

    def inv_marginal(self, s):
        c = self.coef * self.exp
        e = 1.0 / (self.exp - 1.0)
        if np.ndim(s):
            return np.power(np.maximum(np.asarray(s, dtype=float), 0.0) / c, e)
        return (max(float(s), 0.0) / c) ** e

    def value_inverse(self, c):
        if np.ndim(c):
            return np.power(np.maximum(np.asarray(c, dtype=float), 0.0) / self.coef, 1.0 / self.exp)
        return (max(float(c), 0.0) / self.coef) ** (1.0 / self.exp)

    def describe(self) -> dict:
        return {"type": "power", "coef": self.coef, "exp": self.exp}


@dataclass(frozen=True)
class QuadraticCost(CostFunction):
    """Scaled quadratic ``coef * z**2 + linear * z``.

    ``linear > 0`` gives a booth with a positive entry slope, which can end up
    unstuffed at the optimum.
    """

    coef: float
    linear: float = 0.0
    kind = "scaled-quadratic"

    def __post_init__(self):
        if not (self.coef > 0 and math.isfinite(self.coef)):
            raise InvalidArgument(f"quadratic coefficient must be positive, got {self.coef}")
        if not (self.linear >= 0 and math.isfinite(self.linear)):
            raise InvalidArgument(f"linear coefficient must be nonnegative, got {self.linear}")

    def value(self, z):
        return self.coef * z * z + self.linear * z

    def marginal(self, z):
        return 2.0 * self.coef * z + self.linear

    def inv_marginal(self, s):
        if np.ndim(s):
            return np.maximum(np.asarray(s, dtype=float) - self.linear, 0.0) / (2.0 * self.coef)
        return max(float(s) - self.linear, 0.0) / (2.0 * self.coef)

    def value_inverse(self, c):
        a, b = self.coef, self.linear
        if np.ndim(c):
            c = np.maximum(np.asarray(c, dtype=float), 0.0)
            return (-b + np.sqrt(b * b + 4.0 * a * c)) / (2.0 * a)
        return (-b + math.sqrt(b * b + 4.0 * a * max(float(c), 0.0))) / (2.0 * a)

    def describe(self) -> dict:
        return {"type": "quadratic", "coef": self.coef, "linear": self.linear}


@dataclass(frozen=True)
class TabulatedCost(CostFunction):
    """Cost whose marginal is piecewise linear through tabulated points.

    ``knots`` start at 0 and increase; ``slopes`` are ``g'`` at the knots and
    must increase strictly. Past the last knot the final segment's slope of
    ``g'`` continues linearly. ``g`` is the exact integral, so all three
    evaluators are closed form.
    """

    knots: tuple
    slopes: tuple
    kind = "table-defined-strictly-convex"
    _curv: tuple = field(init=False, repr=False, compare=False)
    _base: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        s = np.asarray(self.slopes, dtype=float)
        if k.ndim != 1 or k.size < 2 or k.size != s.size:
            raise InvalidArgument("tabulated cost needs at least two matching knots and slopes")
        if k[0] != 0.0 or np.any(np.diff(k) <= 0):
            raise InvalidArgument("knots must start at 0 and increase strictly")
        if s[0] < 0 or np.any(np.diff(s) <= 0):
            raise InvalidArgument("tabulated marginals must be nonnegative and strictly increasing")
        curv = np.diff(s) / np.diff(k)
        base = np.concatenate([[0.0], np.cumsum(np.diff(k) * (s[:-1] + s[1:]) / 2.0)])
        object.__setattr__(self, "knots", tuple(k))
        object.__setattr__(self, "slopes", tuple(s))
        object.__setattr__(self, "_curv", tuple(curv))
        object.__setattr__(self, "_base", tuple(base))

    def _segment(self, z):
        k = np.asarray(self.knots)
        return np.clip(np.searchsorted(k, z, side="right") - 1, 0, len(k) - 2)

    def value(self, z):
        zz = np.asarray(z, dtype=float)
        i = self._segment(zz)
        d = zz - np.asarray(self.knots)[i]
        out = np.asarray(self._base)[i] + np.asarray(self.slopes)[i] * d + 0.5 * np.asarray(self._curv)[i] * d * d
        return float(out) if np.ndim(z) == 0 else out

    def marginal(self, z):
        zz = np.asarray(z, dtype=float)
        i = self._segment(zz)
        out = np.asarray(self.slopes)[i] + np.asarray(self._curv)[i] * (zz - np.asarray(self.knots)[i])
        return float(out) if np.ndim(z) == 0 else out

    def inv_marginal(self, s):
        ss = np.asarray(s, dtype=float)
        sl = np.asarray(self.slopes)
        i = np.clip(np.searchsorted(sl, ss, side="right") - 1, 0, len(sl) - 2)
        out = np.asarray(self.knots)[i] + (ss - sl[i]) / np.asarray(self._curv)[i]
        out = np.where(ss <= sl[0], 0.0, out)
        return float(out) if np.ndim(s) == 0 else out

    def describe(self) -> dict:
        return {"type": "table", "knots": list(self.knots), "slopes": list(self.slopes)}


class ConvexCost(CostFunction):
    """Cost given by user callables; the inverse marginal is solved numerically."""

    kind = "table-defined-strictly-convex"

    def __init__(self, value: Callable[[float], float], marginal: Callable[[float], float], name: str = "custom"):
        self._value = value
        self._marginal = marginal
        self.name = name

    def value(self, z):
        return _scalar_or_array(self._value, z)

    def marginal(self, z):
        return _scalar_or_array(self._marginal, z)

    def __repr__(self):
        return f"ConvexCost({self.name!r})"

    def describe(self) -> dict:
        return {"type": self.name}


def costs_share_power(costs: Sequence[CostFunction]) -> float | None:
    """Common exponent if every cost is a :class:`PowerCost` with the same exponent."""
    if costs and all(isinstance(c, PowerCost) for c in costs):
        exps = {c.exp for c in costs}
        if len(exps) == 1:
            return exps.pop()
    return None
