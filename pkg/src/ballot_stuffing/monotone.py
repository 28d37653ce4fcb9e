"""Binary-search waterfilling for cost families with ordered marginals.

When ``g'_1(z) <= g'_2(z) <= ... <= g'_J(z)`` for all ``z`` and every marginal
starts at zero, the optimal top set is a prefix ``{1, ..., l}``. ``calc_z``
builds the unique candidate for a guessed ``l`` and reports which way the
guess is off; ``solve_monotone`` binary-searches ``l`` on those tags.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._roots import solve_increasing
from .costs import CostFunction, costs_share_power
from .errors import InternalError, InvalidArgument
from .model import CERT_TOLERANCE, EquilibriumSolution, GameInstance, make_solution, verify_structure

# relative band for the two Calc_Z conditions; exact ties count as satisfied
_TIE = 1e-12


class Status(enum.Enum):
    CORRECT = "correct"
    ERROR_P = "error_p"
    ERROR_Q = "error_q"


@dataclass(frozen=True, eq=False)
class CalcZResult:
    z: np.ndarray
    status: Status
    z_a: float
    theta: float
    card_a: int
    p_violated: bool
    q_violated: bool


@dataclass(frozen=True)
class MonotoneCheck:
    passed: bool
    violations: tuple = ()

    def __bool__(self):
        return self.passed


def default_probe_grid(instance: GameInstance, n: int = 64) -> np.ndarray:
    """Log-spaced points up to the largest stuffing any single booth can afford."""
    top = max(float(c.value_inverse(instance.budget)) for c in instance.costs)
    return np.geomspace(top * 1e-6, top, n)


def assert_monotone_family(
    costs: Sequence[CostFunction], probe_grid: Sequence[float] | None = None
) -> MonotoneCheck:
    """Check ordered marginals and zero entry slopes.

    Power costs sharing one exponent are checked on their coefficients, which
    decides the ordering for every ``z`` at once. Anything else is probed on
    ``probe_grid`` (default: 64 log-spaced points over ``[1e-6, 1e6]``).
    Violations are ``(i, i + 1, z)`` triples, with ``z = 0.0`` and ``i + 1``
    replaced by ``i`` for a nonzero entry slope.
    """
    bad = []
    for i, c in enumerate(costs):
        if c.marginal(0.0) != 0.0:
            bad.append((i, i, 0.0))
    if costs_share_power(costs) is not None:
        for i in range(len(costs) - 1):
            if costs[i].coef > costs[i + 1].coef:
                bad.append((i, i + 1, math.nan))
        return MonotoneCheck(not bad, tuple(bad))
    grid = np.geomspace(1e-6, 1e6, 64) if probe_grid is None else np.asarray(probe_grid, dtype=float)
    slopes = np.array([[c.marginal(float(z)) for z in grid] for c in costs])
    for i in range(len(costs) - 1):
        worse = slopes[i] > slopes[i + 1] * (1 + _TIE)
        for z in grid[worse]:
            bad.append((i, i + 1, float(z)))
    return MonotoneCheck(not bad, tuple(bad))


def monotone_order(instance: GameInstance, probe_grid=None) -> list[int] | None:
    """Booth permutation under which the family is ordered, or ``None``."""
    grid = default_probe_grid(instance) if probe_grid is None else np.asarray(probe_grid)
    ref = float(np.median(grid))
    order = sorted(range(instance.n_booths), key=lambda j: (instance.costs[j].marginal(ref), j))
    if assert_monotone_family([instance.costs[j] for j in order], grid):
        return order
    return None


def calc_z(instance: GameInstance, card_a: int) -> CalcZResult:
    """Candidate stuffing vector for a top set of size ``card_a``.

    The top ``card_a`` booths (in instance order) share the level ``z_a``; the
    rest sit where their marginal equals the structure slope. ``z_a`` solves
    the budget equation, whose left side increases in ``z_a``.
    """
    J, K, G = instance.n_booths, instance.inspectors, instance.budget
    if not K + 1 <= card_a <= J:
        raise InvalidArgument(f"card_a must lie in [{K + 1}, {J}], got {card_a}")
    top = instance.costs[:card_a]
    rest = instance.costs[card_a:]

    def slope(za):
        return sum(c.marginal(za) for c in top) / (card_a - K)

    def spent(za):
        th = slope(za)
        return sum(c.value(za) for c in top) + sum(c.value(c.inv_marginal(th)) for c in rest)

    za = solve_increasing(
        spent, G, start=float(top[0].value_inverse(G)), what=f"calc_z(|A|={card_a}) level"
    )
    theta = slope(za)
    z = np.empty(J)
    z[:card_a] = za
    for i, c in enumerate(rest, start=card_a):
        z[i] = c.inv_marginal(theta)

    p_bad = card_a < J and z[card_a] > za * (1 + _TIE)
    q_bad = card_a > K + 1 and top[-1].marginal(za) > theta * (1 + _TIE)
    if p_bad:
        status = Status.ERROR_P
    elif q_bad:
        status = Status.ERROR_Q
    else:
        status = Status.CORRECT
    return CalcZResult(z, status, za, theta, card_a, bool(p_bad), bool(q_bad))


def _binary_search(instance: GameInstance) -> tuple[CalcZResult, int]:
    x, y = instance.inspectors + 1, instance.n_booths
    calls = 0
    while True:
        if abs(x - y) <= 1:
            res = calc_z(instance, y)
            calls += 1
            if res.status is Status.CORRECT:
                return res, calls
            res = calc_z(instance, x)
            calls += 1
            return res, calls
        mid = math.ceil((x + y) / 2)
        res = calc_z(instance, mid)
        calls += 1
        if res.status is Status.CORRECT:
            return res, calls
        if res.status is Status.ERROR_P:
            x = mid
        else:
            y = mid


def solve_monotone(instance: GameInstance, probe_grid=None, tol: float = CERT_TOLERANCE) -> EquilibriumSolution:
    """Solve an instance whose booths can be ordered by marginal cost.

    Booths are reordered internally when the input order is not already the
    cost order; the returned vector is in input order. Raises
    :class:`InvalidArgument` when no ordering exists.
    """
    grid = default_probe_grid(instance) if probe_grid is None else probe_grid
    if assert_monotone_family(instance.costs, grid):
        order = list(range(instance.n_booths))
    else:
        order = monotone_order(instance, grid)
        if order is None:
            raise InvalidArgument("cost family has intersecting marginals; use solve_general")
    ordered = GameInstance([instance.costs[j] for j in order], instance.budget, instance.inspectors)
    res, calls = _binary_search(ordered)
    z = np.empty(instance.n_booths)
    z[order] = res.z
    cert = verify_structure(instance, z, tol)
    if not cert:
        raise InternalError(
            f"binary search returned |A|={res.card_a} with status {res.status.value}, "
            f"certificate failed: {'; '.join(cert.violations)}"
        )
    return make_solution(instance, z, method="monotone", calls=calls)
