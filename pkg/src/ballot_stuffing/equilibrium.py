"""The inspector's mixed strategy and the Nash check for a certified optimum."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from ._roots import solve_increasing
from .errors import InternalError, InvalidArgument
from .model import CERT_TOLERANCE, EquilibriumSolution, GameInstance, payoff

_MARGINAL_SLACK = 1e-9


@dataclass(frozen=True)
class InspectionMarginals:
    """Inspection probability for each booth of the top set."""

    booths: tuple
    probs: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.booths, self.probs))

    def full(self, n_booths: int) -> np.ndarray:
        p = np.zeros(n_booths)
        p[list(self.booths)] = [float(v) for v in self.probs]
        return p


@dataclass(frozen=True)
class SubsetDistribution:
    """Finite-support distribution over inspected subsets.

    ``support`` is a tuple of ``(subset, probability)`` pairs with subsets as
    sorted tuples of booth indices.
    """

    support: tuple
    iterations: int = 0

    def as_dict(self) -> dict:
        return dict(self.support)

    def induced_marginals(self) -> dict:
        out: dict = {}
        for subset, q in self.support:
            for a in subset:
                out[a] = out.get(a, 0) + q
        return out


def marginals(solution: EquilibriumSolution, instance: GameInstance) -> InspectionMarginals:
    """Inspection probabilities ``1 - g'_a(z_a) / theta`` on the top set.

    Empty when there are no inspectors.
    """
    if instance.inspectors == 0:
        return InspectionMarginals((), ())
    theta = solution.theta
    if not theta > 0:
        raise InternalError(f"structure slope must be positive at a certified optimum, got {theta}")
    A = solution.partition.A
    probs = []
    for a in A:
        p = 1.0 - instance.costs[a].marginal(float(solution.z[a])) / theta
        if not -_MARGINAL_SLACK <= p <= 1 + _MARGINAL_SLACK:
            raise InternalError(f"booth {a}: inspection probability {p} outside [0, 1]")
        probs.append(min(max(p, 0.0), 1.0))
    K = instance.inspectors
    if abs(sum(probs) - K) > _MARGINAL_SLACK * max(1, K):
        raise InternalError(f"inspection probabilities sum to {sum(probs)}, expected {K}")
    return InspectionMarginals(tuple(A), tuple(probs))


def _as_pairs(p):
    if isinstance(p, InspectionMarginals):
        return list(p.booths), list(p.probs)
    if isinstance(p, Mapping):
        keys = sorted(p)
        return keys, [p[k] for k in keys]
    vals = list(p)
    return list(range(len(vals))), vals


def decompose(p, K: int, atol: float = 1e-13) -> SubsetDistribution:
    """Write marginals ``p`` (summing to ``K``) as a mixture of ``K``-subsets.

    Greedy residual peeling: repeatedly take the ``K`` booths with the largest
    residual and put as much mass on that subset as keeps every residual at
    most the remaining mass. Each round either exhausts a residual or pins an
    outside residual to the remaining mass, so there are at most ``len(p)``
    rounds. Works in exact arithmetic when given :class:`~fractions.Fraction`
    inputs (pass ``atol=0``).

    ``p`` may be an :class:`InspectionMarginals`, a mapping booth -> prob, or
    a sequence (booths numbered from 0).
    """
    booths, r = _as_pairs(p)
    n = len(r)
    if K < 0 or K > n:
        raise InvalidArgument(f"need 0 <= K <= {n}, got {K}")
    if any(not (-_MARGINAL_SLACK <= v <= 1 + _MARGINAL_SLACK) for v in r):
        raise InvalidArgument("marginals must lie in [0, 1]")
    if abs(sum(r) - K) > _MARGINAL_SLACK * max(1, K):
        raise InvalidArgument(f"marginals sum to {sum(r)}, expected {K}")
    if K == 0:
        return SubsetDistribution(((tuple(), 1),), 0)
    exact = all(isinstance(v, (Fraction, int)) for v in r)
    r = [Fraction(v) if exact else min(max(float(v), 0.0), 1.0) for v in r]
    rho = Fraction(1) if exact else 1.0
    mass: dict = {}
    rounds = 0
    while rho > atol:
        if rounds > n:
            raise InternalError("decomposition did not terminate within |A| rounds")
        order = sorted(range(n), key=lambda i: (-r[i], i))
        chosen, rest = order[:K], order[K:]
        gamma = min(r[i] for i in chosen)
        if rest and r[rest[0]] > 0:
            gamma = min(gamma, rho - r[rest[0]])
        if gamma <= atol:
            break
        key = tuple(sorted(booths[i] for i in chosen))
        mass[key] = mass.get(key, 0) + gamma
        for i in chosen:
            r[i] -= gamma
        rho -= gamma
        rounds += 1
        if not exact:
            for i in range(n):
                if r[i] <= atol:
                    r[i] = 0.0
                elif abs(r[i] - rho) <= atol:
                    r[i] = rho
    return SubsetDistribution(tuple(sorted(mass.items())), rounds)


def sample_inspection(dist: SubsetDistribution, rng_seed: int, size: int | None = None):
    """Draw inspected subset(s); the same seed always gives the same draw."""
    if not dist.support:
        raise InvalidArgument("cannot sample from an empty support")
    probs = np.array([float(q) for _, q in dist.support])
    probs = probs / probs.sum()
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(len(probs), p=probs, size=size)
    if size is None:
        return dist.support[int(idx)][0]
    return [dist.support[int(i)][0] for i in idx]


@dataclass(frozen=True)
class NashCertificate:
    passed: bool
    violations: tuple = ()
    expected_payoff: float = math.nan

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "violations": [{"side": s, "message": m, "deviation": d} for s, m, d in self.violations],
            "expected_payoff": self.expected_payoff,
        }


def expected_surviving(z, p_full) -> float:
    """Expected stuffed votes left after inspection with per-booth probabilities."""
    return float(np.dot(1.0 - np.asarray(p_full), np.asarray(z, dtype=float)))


def verify_nash(
    instance: GameInstance,
    solution: EquilibriumSolution,
    marginals: InspectionMarginals,
    tol: float = CERT_TOLERANCE,
    distribution: SubsetDistribution | None = None,
) -> NashCertificate:
    """Check that neither player gains by deviating unilaterally.

    Inspector side: every ``K``-subset of the top set removes the same amount
    and any subset touching a lower booth removes no more; the optional
    ``distribution`` must live on top-set subsets and reproduce ``marginals``.
    Stuffer side: after the rescaling ``z_a -> (1 - p_a) z_a`` the problem is
    a plain waterfill, so the rescaled marginals ``g'_a(z_a) / (1 - p_a)``
    must all equal ``theta``, the B marginals too, and C entry slopes may not
    fall below it.
    """
    z = np.asarray(solution.z, dtype=float)
    K = instance.inspectors
    A = solution.partition.A
    theta = solution.theta
    U = payoff(z, K)
    scale = max(1.0, abs(U))
    bad = []

    # inspector side
    if K > 0 and tuple(marginals.booths) != tuple(A):
        bad.append(("a", f"marginals cover booths {marginals.booths}, top set is {A}", math.nan))
    if abs(sum(marginals.probs) - K) > _MARGINAL_SLACK * max(1, K):
        bad.append(("a", f"marginals sum to {sum(marginals.probs)}, expected {K}", sum(marginals.probs) - K))
    total = float(z.sum())
    if K > 0:
        zA = z[list(A)]
        if len(A) <= 20:
            removed = [float(zA[list(I)].sum()) for I in itertools.combinations(range(len(A)), K)]
        else:
            removed = [float(np.sort(zA)[-K:].sum()), float(np.sort(zA)[:K].sum())]
        best = total - max(removed)
        spread = max(removed) - min(removed)
        if spread > tol * scale:
            bad.append(("a", "top-set subsets do not remove equal amounts", spread))
        others = [j for j in range(instance.n_booths) if j not in set(A)]
        if others:
            touching = total - (float(np.sort(zA)[len(A) - K + 1:].sum()) + float(z[others].max()))
            if touching < best - tol * scale:
                bad.append(("a", "a subset touching B or C beats the top set", best - touching))
    if distribution is not None:
        induced = distribution.induced_marginals()
        for subset, q in distribution.support:
            if len(subset) != K or not set(subset) <= set(A):
                bad.append(("a", f"support subset {subset} is not a {K}-subset of the top set", float(q)))
        for a, pa in zip(marginals.booths, marginals.probs):
            dev = abs(float(induced.get(a, 0)) - float(pa))
            if dev > 1e-11:
                bad.append(("a", f"distribution marginal at booth {a} differs from p", dev))

    # stuffer side
    slack = tol * abs(theta)
    given = marginals.as_dict()
    for a in A:
        pa = float(given.get(a, 0.0))
        if pa >= 1.0:
            bad.append(("b", f"booth {a} inspected with certainty", float(pa)))
            continue
        hat = instance.costs[a].marginal(float(z[a])) / (1.0 - pa)
        if abs(hat - theta) > slack:
            bad.append(("b", f"rescaled marginal at booth {a} is {hat!r}, theta {theta!r}", hat - theta))
    for b in solution.partition.B:
        s = instance.costs[b].marginal(float(z[b]))
        if abs(s - theta) > slack:
            bad.append(("b", f"marginal at booth {b} is {s!r}, theta {theta!r}", s - theta))
    for c in solution.partition.C:
        s = instance.costs[c].marginal(float(z[c]))
        if s < theta - slack:
            bad.append(("b", f"entry slope at booth {c} is {s!r} < theta {theta!r}", theta - s))
    expected = expected_surviving(z, marginals.full(instance.n_booths))
    if abs(expected - U) > tol * scale:
        bad.append(("b", f"expected payoff {expected!r} != U {U!r}", expected - U))
    return NashCertificate(not bad, tuple(bad), expected)


def probe_deviations(
    instance: GameInstance,
    solution: EquilibriumSolution,
    marginals: InspectionMarginals,
    n: int = 100,
    seed: int = 0,
) -> float:
    """Largest expected-payoff gain over ``n`` random budget-exhausting deviations.

    Half the probes are small perturbations of the optimum, half are spread
    over the whole simplex; each is rescaled to spend exactly the budget.
    A non-positive return value means no probe beat the equilibrium.
    """
    rng = np.random.default_rng(seed)
    z = np.asarray(solution.z, dtype=float)
    p = marginals.full(instance.n_booths)
    base = expected_surviving(z, p)
    J = instance.n_booths
    top = max(float(z.max()), 1e-300)
    best = -math.inf
    for t in range(n):
        if t % 2 == 0:
            eps = 10.0 ** rng.uniform(-6, -1)
            cand = np.maximum(z + eps * top * rng.standard_normal(J), 0.0)
        else:
            cand = rng.dirichlet(np.ones(J)) * top * J * rng.uniform(0.1, 1.0)
        if not cand.any():
            continue
        lam = solve_increasing(lambda s: instance.total_cost(s * cand), instance.budget, what="deviation scale")
        best = max(best, expected_surviving(lam * cand, p) - base)
    return best
