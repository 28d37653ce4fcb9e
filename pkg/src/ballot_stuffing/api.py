"""One-call entry points: pick a solver, build the full equilibrium."""

from __future__ import annotations

from dataclasses import dataclass

from .equilibrium import (
    InspectionMarginals,
    NashCertificate,
    SubsetDistribution,
    decompose,
    marginals,
    verify_nash,
)
from .errors import InvalidArgument
from .general import solve_general
from .model import CERT_TOLERANCE, Certificate, EquilibriumSolution, GameInstance, verify_structure
from .monotone import assert_monotone_family, default_probe_grid, monotone_order, solve_monotone

METHODS = ("auto", "monotone", "general")


def solve(instance: GameInstance, method: str = "auto", tol: float = CERT_TOLERANCE) -> EquilibriumSolution:
    """Optimal stuffing vector; ``auto`` uses the binary search when the costs allow it."""
    if method not in METHODS:
        raise InvalidArgument(f"unknown method {method!r}; choose from {METHODS}")
    if method == "auto":
        grid = default_probe_grid(instance)
        ordered = assert_monotone_family(instance.costs, grid) or monotone_order(instance, grid) is not None
        method = "monotone" if ordered else "general"
    if method == "monotone":
        return solve_monotone(instance, tol=tol)
    return solve_general(instance, tol=tol)


@dataclass(frozen=True, eq=False)
class Equilibrium:
    solution: EquilibriumSolution
    certificate: Certificate
    marginals: InspectionMarginals
    distribution: SubsetDistribution
    nash: NashCertificate


def compute_equilibrium(instance: GameInstance, method: str = "auto", tol: float = CERT_TOLERANCE) -> Equilibrium:
    sol = solve(instance, method, tol)
    cert = verify_structure(instance, sol.z, tol)
    p = marginals(sol, instance)
    q = decompose(p, instance.inspectors)
    nash = verify_nash(instance, sol, p, tol, distribution=q)
    return Equilibrium(sol, cert, p, q, nash)
