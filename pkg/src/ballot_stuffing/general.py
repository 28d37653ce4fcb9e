"""Solver for arbitrary strictly convex cost families, and a brute-force oracle.

The optimum is parameterized by two numbers: the common top level ``m`` and
the structure slope ``theta``. Booths whose marginal at ``m`` is at most
``theta`` sit at ``m``, the others at ``(g')^{-1}(theta)`` (or 0 when even the
entry slope exceeds ``theta``). For fixed ``m`` the structure-slope identity
pins ``theta`` down exactly; the budget is then increasing in ``m``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ._roots import solve_increasing
from .errors import InvalidArgument, NumericFailure, OracleInconsistency, PreconditionViolation
from .model import CERT_TOLERANCE, EquilibriumSolution, GameInstance, make_solution, verify_structure


def candidate_from_levels(instance: GameInstance, m: float, theta: float) -> np.ndarray:
    z = np.empty(instance.n_booths)
    for j, c in enumerate(instance.costs):
        if c.marginal(m) <= theta:
            z[j] = m
        else:
            z[j] = min(c.inv_marginal(theta), m)
    return z


def slope_at_level(instance: GameInstance, m: float) -> float:
    """Structure slope consistent with top level ``m``.

    Solves ``sum_j max(0, theta - g'_j(m)) = K * theta``, a convex piecewise
    linear equation in ``theta``; its positive root is found by scanning the
    sorted marginals. For ``K = 0`` this returns the smallest marginal, so the
    top set is never empty.
    """
    K = instance.inspectors
    s = np.sort([c.marginal(m) if m < c.domain_max else math.inf for c in instance.costs])
    total = 0.0
    for k in range(1, s.size + 1):
        total += s[k - 1]
        if k <= K:
            continue
        theta = total / (k - K)
        if k == s.size or theta <= s[k]:
            return float(theta)
    raise NumericFailure("no structure slope found", {"m": m})  # unreachable for finite marginals


def _budget_at_level(instance: GameInstance, m: float) -> float:
    if m <= 0:
        return 0.0
    theta = slope_at_level(instance, m)
    if not math.isfinite(theta):
        return math.inf
    return instance.total_cost(candidate_from_levels(instance, m, theta))


def solve_general(instance: GameInstance, tol: float = CERT_TOLERANCE) -> EquilibriumSolution:
    """Solve any valid instance; no ordering assumption on the marginals."""
    G = instance.budget
    start = min(float(c.value_inverse(G)) for c in instance.costs)
    upper = max(c.domain_max for c in instance.costs)
    m = solve_increasing(lambda v: _budget_at_level(instance, v), G, start=start, upper=upper, what="top level")
    theta = slope_at_level(instance, m)
    z = candidate_from_levels(instance, m, theta)
    try:
        cert = verify_structure(instance, z, tol)
    except PreconditionViolation as exc:
        raise NumericFailure(str(exc), {"m": m, "theta": theta}) from exc
    if not cert:
        raise NumericFailure(
            "general solver output failed certification: " + "; ".join(cert.violations),
            {"m": m, "theta": theta, "z": z.tolist()},
        )
    return make_solution(instance, z, method="general")


def _vector_budget(instance, masks, sizes, m):
    """Budget and candidate vectors for every enumerated top set at levels ``m``."""
    K = instance.inspectors
    S = np.column_stack([c.marginal(m) for c in instance.costs])
    theta = np.where(masks, S, 0.0).sum(axis=1) / (sizes - K)
    Z = np.column_stack(
        [np.where(masks[:, j], m, c.inv_marginal(theta)) for j, c in enumerate(instance.costs)]
    )
    spent = np.column_stack([c.value(Z[:, j]) for j, c in enumerate(instance.costs)]).sum(axis=1)
    return spent, Z


def oracle_solve(instance: GameInstance, max_booths: int = 12, tol: float = CERT_TOLERANCE) -> EquilibriumSolution:
    """Enumerate every candidate top set and keep the certified vectors.

    For a fixed top set the budget is increasing in the top level and is at
    least ``G`` once any single top booth alone costs ``G``, which gives a
    closed bracket; all top sets are bisected together. Raises
    :class:`OracleInconsistency` unless exactly one distinct vector passes
    :func:`verify_structure`.
    """
    J, K, G = instance.n_booths, instance.inspectors, instance.budget
    if J > max_booths:
        raise InvalidArgument(f"oracle enumerates 2^J top sets; J={J} exceeds {max_booths}")
    subsets = [A for r in range(K + 1, J + 1) for A in itertools.combinations(range(J), r)]
    masks = np.zeros((len(subsets), J), dtype=bool)
    for i, A in enumerate(subsets):
        masks[i, list(A)] = True
    sizes = masks.sum(axis=1)
    single = np.array([float(c.value_inverse(G)) for c in instance.costs])
    hi = np.where(masks, single, np.inf).min(axis=1)
    lo = np.zeros_like(hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        spent, _ = _vector_budget(instance, masks, sizes, mid)
        over = spent >= G
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
    m = 0.5 * (lo + hi)
    _, Z = _vector_budget(instance, masks, sizes, m)
    plausible = np.all(np.where(masks, True, Z <= m[:, None] * (1 + 1e-9)), axis=1)

    found: list[np.ndarray] = []
    for i in np.flatnonzero(plausible):
        z = Z[i]
        try:
            ok = verify_structure(instance, z, tol)
        except PreconditionViolation:
            continue
        if ok and not any(np.max(np.abs(z - f)) <= 1e-6 * max(1.0, float(f.max())) for f in found):
            found.append(z)
    if len(found) != 1:
        raise OracleInconsistency(
            f"expected exactly one certified vector, found {len(found)}",
            {"candidates": [f.tolist() for f in found]},
        )
    return make_solution(instance, found[0], method="oracle")
