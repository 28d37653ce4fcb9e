"""Booth-count elections reduced to the total-vote game.

Maximizing the expected number of booths won, each booth contributes a
concave increasing gain ``f_j(z_j)`` with ``f_j(0) = 0``. Substituting
``w_j = f_j(z_j)`` turns the problem into the total-vote game with costs
``g_j(f_j^{-1}(w))``; solve that and map back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from ._roots import solve_increasing
from .api import compute_equilibrium
from .costs import CostFunction
from .errors import InvalidArgument, NumericFailure
from .model import BoothStatistics, GameInstance


class WinCurve:
    """Concave increasing gain curve with ``f(0) = 0``.

    ``sup`` is the least upper bound of ``f`` (``inf`` if unbounded).
    ``approximate`` marks curves that were altered to make them concave.
    """

    kind = ""
    sup = math.inf
    approximate = False

    def value(self, z: float) -> float:
        raise NotImplementedError

    def derivative(self, z: float) -> float:
        raise NotImplementedError

    def inverse(self, w: float) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"type": self.kind}


class IdentityCurve(WinCurve):
    kind = "identity"

    def value(self, z):
        return float(z)

    def derivative(self, z):
        return 1.0

    def inverse(self, w):
        return float(w)


@dataclass(frozen=True)
class ExpSaturationCurve(WinCurve):
    """``cap * (1 - exp(-z / scale))``."""

    cap: float
    scale: float
    kind = "exp_saturation"

    def __post_init__(self):
        if not (self.cap > 0 and self.scale > 0):
            raise InvalidArgument("exp_saturation needs positive cap and scale")

    @property
    def sup(self):
        return self.cap

    def value(self, z):
        return self.cap * -math.expm1(-z / self.scale)

    def derivative(self, z):
        return self.cap / self.scale * math.exp(-z / self.scale)

    def inverse(self, w):
        if w >= self.cap:
            return math.inf
        return -self.scale * math.log1p(-w / self.cap)

    def describe(self):
        return {"type": self.kind, "cap": self.cap, "scale": self.scale}


class GaussianGainCurve(WinCurve):
    """Gain in ``P(X + z > 0)`` for ``X ~ N(mu, sigma^2)``.

    The raw gain ``Phi((mu + z) / sigma) - Phi(mu / sigma)`` is convex while
    ``mu + z < 0``. For ``mu < 0`` it is replaced below the tangent point
    ``t`` by the line through the origin that touches the curve at ``t``,
    which is the smallest concave majorant; such curves are flagged
    ``approximate``.
    """

    kind = "gaussian_gain"

    def __init__(self, mu: float, sigma: float):
        if not sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {sigma}")
        self.mu, self.sigma = float(mu), float(sigma)
        self._tail0 = float(ndtr(-self.mu / self.sigma))
        self.sup = self._tail0
        self.tangent = 0.0
        self.slope = self._raw_derivative(0.0)
        if self.mu < 0:
            def gap(t):
                return t * self._raw_derivative(t) - self._raw(t)

            lo, hi = -self.mu, -self.mu + self.sigma
            while gap(hi) > 0:
                hi += 2 * (hi - lo)
            self.tangent = brentq(gap, lo, hi, xtol=1e-300, rtol=1e-15)
            self.slope = self._raw_derivative(self.tangent)
            self.approximate = True

    def _raw(self, z):
        return self._tail0 - float(ndtr(-(self.mu + z) / self.sigma))

    def _raw_derivative(self, z):
        x = (self.mu + z) / self.sigma
        return math.exp(-0.5 * x * x) / (self.sigma * math.sqrt(2 * math.pi))

    def value(self, z):
        return self.slope * z if z <= self.tangent else self._raw(z)

    def derivative(self, z):
        return self.slope if z <= self.tangent else self._raw_derivative(z)

    def inverse(self, w):
        if w <= self.slope * self.tangent:
            return w / self.slope
        if w >= self.sup:
            return math.inf
        return -self.sigma * float(ndtri(self._tail0 - w)) - self.mu

    def describe(self):
        return {"type": self.kind, "mu": self.mu, "sigma": self.sigma}


def check_curve(curve: WinCurve, probe_grid: Sequence[float] | None = None) -> None:
    """Raise :class:`InvalidArgument` unless ``curve`` is concave increasing from 0."""
    grid = np.geomspace(1e-6, 1e6, 64) if probe_grid is None else np.asarray(probe_grid, dtype=float)
    if abs(curve.value(0.0)) > 1e-15:
        raise InvalidArgument(f"{curve.kind} curve: f(0) = {curve.value(0.0)} != 0")
    vals = [curve.value(float(z)) for z in grid]
    ders = [curve.derivative(float(z)) for z in grid]
    for (z0, v0, d0), (z1, v1, d1) in zip(zip(grid, vals, ders), zip(grid[1:], vals[1:], ders[1:])):
        if v1 < v0 or d0 < 0:
            raise InvalidArgument(f"{curve.kind} curve is not increasing near z={z1:g}")
        if d1 > d0 * (1 + 1e-12) + 1e-300:
            raise InvalidArgument(f"{curve.kind} curve is not concave near z={z1:g}")


class ComposedCost(CostFunction):
    """Cost of reaching gain ``w``: ``g(f^{-1}(w))``.

    The marginal is ``g'(z) / f'(z)`` at ``z = f^{-1}(w)``, increasing because
    ``g'`` increases and ``f'`` does not. Its inverse is solved in vote space.
    """

    kind = "composed"

    def __init__(self, cost: CostFunction, curve: WinCurve):
        self.cost = cost
        self.curve = curve
        self.domain_max = curve.sup

    def _vote_slope(self, z):
        d = self.curve.derivative(z)
        return self.cost.marginal(z) / d if d > 0 else math.inf

    def _value(self, w):
        if w >= self.domain_max:
            return math.inf
        return float(self.cost.value(self.curve.inverse(w)))

    def _marginal(self, w):
        if w >= self.domain_max:
            return math.inf
        return self._vote_slope(self.curve.inverse(w))

    def value(self, w):
        if np.ndim(w) == 0:
            return self._value(float(w))
        return np.array([self._value(float(v)) for v in np.ravel(w)]).reshape(np.shape(w))

    def marginal(self, w):
        if np.ndim(w) == 0:
            return self._marginal(float(w))
        return np.array([self._marginal(float(v)) for v in np.ravel(w)]).reshape(np.shape(w))

    def _inv_marginal_scalar(self, s):
        if s <= self._vote_slope(0.0):
            return 0.0
        z = solve_increasing(self._vote_slope, s, start=1.0, what="composed inverse marginal")
        return self.curve.value(z)

    def _value_inverse_scalar(self, c):
        return self.curve.value(float(self.cost.value_inverse(c)))

    def describe(self):
        return {"type": self.kind, "cost": self.cost.describe(), "curve": self.curve.describe()}


@dataclass(frozen=True, eq=False)
class TransformedInstance:
    instance: GameInstance
    curves: tuple
    costs: tuple

    def to_votes(self, w: Sequence[float]) -> np.ndarray:
        return np.array([c.inverse(float(v)) for c, v in zip(self.curves, w)])

    def to_gains(self, z: Sequence[float]) -> np.ndarray:
        return np.array([c.value(float(v)) for c, v in zip(self.curves, z)])


def transform_parliamentary(costs, curves, G: float, K: int, probe_grid=None) -> TransformedInstance:
    costs, curves = tuple(costs), tuple(curves)
    if len(costs) != len(curves):
        raise InvalidArgument("need one win curve per booth")
    for c in curves:
        check_curve(c, probe_grid)
    wcosts = [g if isinstance(f, IdentityCurve) else ComposedCost(g, f) for g, f in zip(costs, curves)]
    return TransformedInstance(GameInstance(wcosts, G, K), curves, costs)


def poisson_binomial_pmf(probs: Iterable) -> list:
    """Distribution of the number of successes among independent trials.

    Plain Python arithmetic, so :class:`~fractions.Fraction` inputs give
    exact results.
    """
    pmf = [1]
    for p in probs:
        nxt = [0] * (len(pmf) + 1)
        for k, mass in enumerate(pmf):
            nxt[k] += mass * (1 - p)
            nxt[k + 1] += mass * p
        pmf = nxt
    return pmf


def majority_probability(probs: Sequence) -> object:
    """``P(count > J / 2)`` for independent booth wins."""
    pmf = poisson_binomial_pmf(probs)
    J = len(pmf) - 1
    return sum(pmf[k] for k in range(J + 1) if 2 * k > J)


@dataclass(frozen=True)
class WinProbability:
    value: float
    stderr: float = 0.0
    exact: bool = True


def booth_win_probabilities(booths: Sequence[BoothStatistics], z, inspected=()) -> np.ndarray:
    y = set(inspected)
    zz = np.asarray(z, dtype=float)
    return np.array(
        [float(ndtr((b.mu + (0.0 if j in y else zz[j])) / b.sigma)) for j, b in enumerate(booths)]
    )


def win_probability_parliamentary(
    booths: Sequence[BoothStatistics],
    z: Sequence[float],
    inspected: Iterable[int] = (),
    n_samples: int = 10**6,
    seed: int = 0,
    chunk: int = 100_000,
) -> WinProbability:
    """Probability of winning a weighted majority of booths.

    Unit weights use the exact Poisson-binomial tail. Other weights are
    estimated by Monte Carlo over independent booth outcomes; chunks draw
    from child streams of ``seed`` so the estimate is reproducible.
    """
    if len(booths) != len(z):
        raise InvalidArgument("need one stuffing entry per booth")
    r = booth_win_probabilities(booths, z, inspected)
    weights = np.array([b.weight for b in booths], dtype=float)
    if np.all(weights == 1.0):
        return WinProbability(float(majority_probability(list(r))))
    half = weights.sum() / 2.0
    n_chunks = math.ceil(n_samples / chunk)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    done = 0
    for ss in streams:
        n = min(chunk, n_samples - done)
        wins = np.random.default_rng(ss).random((n, r.size)) < r
        hits += int(np.count_nonzero(wins @ weights > half))
        done += n
    p = hits / n_samples
    return WinProbability(p, math.sqrt(p * (1 - p) / n_samples), exact=False)


@dataclass(frozen=True, eq=False)
class ParliamentaryPlan:
    gains: np.ndarray
    z: np.ndarray
    transformed: TransformedInstance
    equilibrium: object
    relaxed_objective: float
    expected_booths_won: float
    prior_win_probability: WinProbability
    win_probability: WinProbability
    approximate_curves: tuple

    def to_dict(self) -> dict:
        eq = self.equilibrium
        return {
            "w": [float(v) for v in self.gains],
            "z": [float(v) for v in self.z],
            "partition": eq.solution.partition.as_dict(),
            "theta": float(eq.solution.theta),
            "relaxed_objective": self.relaxed_objective,
            "expected_booths_won": self.expected_booths_won,
            "prior_win_probability": self.prior_win_probability.value,
            "win_probability": self.win_probability.value,
            "win_probability_stderr": self.win_probability.stderr,
            "win_probability_exact": self.win_probability.exact,
            "approximate_curves": list(self.approximate_curves),
            "certificate": eq.certificate.to_dict(),
            "nash_certificate": eq.nash.to_dict(),
        }


def solve_parliamentary(
    costs,
    curves,
    booths: Sequence[BoothStatistics],
    G: float,
    K: int,
    n_samples: int = 10**6,
    seed: int = 0,
) -> ParliamentaryPlan:
    """Solve the relaxed booth-count game and score the plan.

    The reported win probability averages the exact (or Monte Carlo) majority
    probability over the inspector's equilibrium subsets.
    """
    tr = transform_parliamentary(costs, curves, G, K)
    eq = compute_equilibrium(tr.instance, method="general")
    w = eq.solution.z
    z = tr.to_votes(w)
    spent = sum(float(g.value(v)) for g, v in zip(tr.costs, z))
    if abs(spent - G) > 1e-8 * G:
        raise NumericFailure("mapping gains back to votes broke the budget", {"spent": spent, "budget": G})
    zero = np.zeros(len(booths))
    prior = win_probability_parliamentary(booths, zero, (), n_samples, seed)
    value = 0.0
    var = 0.0
    exact = True
    for subset, q in eq.distribution.support:
        wp = win_probability_parliamentary(booths, z, subset, n_samples, seed)
        value += float(q) * wp.value
        var += (float(q) * wp.stderr) ** 2
        exact = exact and wp.exact
    base = float(sum(ndtr(b.mu / b.sigma) for b in booths))
    return ParliamentaryPlan(
        gains=w,
        z=z,
        transformed=tr,
        equilibrium=eq,
        relaxed_objective=float(eq.solution.payoff),
        expected_booths_won=base + float(eq.solution.payoff),
        prior_win_probability=prior,
        win_probability=WinProbability(value, math.sqrt(var), exact),
        approximate_curves=tuple(j for j, c in enumerate(curves) if c.approximate),
    )
