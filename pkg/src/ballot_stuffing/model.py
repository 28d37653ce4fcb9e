"""Game instances, the leader's payoff and the structural optimality certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .costs import CostFunction
from .errors import DegenerateInput, InvalidArgument, PreconditionViolation

TIE_TOLERANCE = 1e-9
CERT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class GameInstance:
    """Ballot stuffing game: per-booth costs, stuffing budget, inspector count."""

    costs: tuple
    budget: float
    inspectors: int

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if len(self.costs) < 2:
            raise InvalidArgument("a game needs at least two booths")
        if not all(isinstance(c, CostFunction) for c in self.costs):
            raise InvalidArgument("every booth needs a CostFunction")
        if not (self.budget > 0 and math.isfinite(self.budget)):
            raise InvalidArgument(f"budget must be positive, got {self.budget}")
        if int(self.inspectors) != self.inspectors or not 0 <= self.inspectors < len(self.costs):
            raise InvalidArgument(
                f"inspectors must be an integer in [0, {len(self.costs) - 1}], got {self.inspectors}"
            )
        object.__setattr__(self, "inspectors", int(self.inspectors))

    @property
    def n_booths(self) -> int:
        return len(self.costs)

    def with_budget(self, budget: float) -> "GameInstance":
        return GameInstance(self.costs, budget, self.inspectors)

    def with_inspectors(self, inspectors: int) -> "GameInstance":
        return GameInstance(self.costs, self.budget, inspectors)

    def total_cost(self, z) -> float:
        return float(sum(c.value(float(v)) for c, v in zip(self.costs, z)))

    def marginals(self, z) -> np.ndarray:
        return np.array([c.marginal(float(v)) for c, v in zip(self.costs, z)])


@dataclass(frozen=True)
class BoothStatistics:
    """Gaussian vote differential at one booth, plus weight and population."""

    mu: float
    sigma: float
    weight: float = 1.0
    population: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {self.sigma}")
        if not self.weight >= 0:
            raise InvalidArgument(f"weight must be nonnegative, got {self.weight}")
        if not self.population > 0:
            raise InvalidArgument(f"population must be positive, got {self.population}")


@dataclass(frozen=True)
class StructurePartition:
    """Booths at the maximum (A), strictly inside (B) and at zero (C)."""

    A: tuple
    B: tuple
    C: tuple

    def as_dict(self) -> dict:
        return {"A": list(self.A), "B": list(self.B), "C": list(self.C)}


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    z: np.ndarray
    partition: StructurePartition
    theta: float
    payoff: float
    method: str = ""
    solver_calls: int = 0

    @property
    def level(self) -> float:
        return float(np.max(self.z))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "z": [float(v) for v in self.z],
            "theta": float(self.theta),
            "partition": self.partition.as_dict(),
            "U": float(self.payoff),
        }


@dataclass(frozen=True)
class Certificate:
    passed: bool
    violations: tuple = ()
    theta: float = math.nan
    partition: StructurePartition | None = None

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"passed": self.passed, "violations": list(self.violations)}


def payoff(z: Sequence[float], K: int) -> float:
    """Sum of the ``J - K`` smallest entries of ``z``: the votes that survive inspection."""
    zz = np.asarray(z, dtype=float)
    if not 0 <= K < zz.size:
        raise InvalidArgument(f"need 0 <= K < J, got K={K}, J={zz.size}")
    return float(np.sort(zz)[: zz.size - K].sum())


def partition_of(z: Sequence[float], tie_tolerance: float = TIE_TOLERANCE) -> StructurePartition:
    zz = np.asarray(z, dtype=float)
    top = float(zz.max()) if zz.size else 0.0
    if top <= tie_tolerance:
        raise DegenerateInput("partition of an all-zero stuffing vector is undefined")
    band = tie_tolerance * max(1.0, top)
    A, B, C = [], [], []
    for j, v in enumerate(zz):
        if v >= top - band:
            A.append(j)
        elif v <= tie_tolerance:
            C.append(j)
        else:
            B.append(j)
    return StructurePartition(tuple(A), tuple(B), tuple(C))


def structure_slope(instance: GameInstance, z, partition: StructurePartition) -> float:
    K = instance.inspectors
    if len(partition.A) <= K:
        raise PreconditionViolation(
            f"|A| = {len(partition.A)} <= K = {K}: such a vector cannot be optimal"
        )
    total = sum(instance.costs[j].marginal(float(z[j])) for j in partition.A)
    return float(total / (len(partition.A) - K))


def verify_structure(
    instance: GameInstance,
    z: Sequence[float],
    tol: float = CERT_TOLERANCE,
    tie_tolerance: float = TIE_TOLERANCE,
) -> Certificate:
    """Check the three necessary-and-sufficient optimality conditions.

    Slope comparisons are relative to the structure slope (``tol * theta``),
    which keeps the check meaningful for cost families whose marginals are
    orders of magnitude away from 1. The budget check uses
    ``tol * max(1, G)``. C-booth slopes are evaluated at their actual value,
    which is 0 unless a positive entry fell inside the zero band.

    Raises :class:`PreconditionViolation` when fewer than ``K + 1`` booths
    share the maximum.
    """
    zz = np.asarray(z, dtype=float)
    if zz.size != instance.n_booths:
        raise InvalidArgument(f"z has {zz.size} entries, instance has {instance.n_booths} booths")
    if np.any(zz < 0):
        return Certificate(False, ("nonnegativity: negative entries",))
    part = partition_of(zz, tie_tolerance)
    theta = structure_slope(instance, zz, part)
    slack = tol * abs(theta)
    bad = []
    costs = instance.costs
    for j in part.A:
        s = costs[j].marginal(float(zz[j]))
        if s > theta + slack:
            bad.append(f"slope order: booth {j} in A has marginal {s!r} > theta {theta!r}")
    for j in part.C:
        s = costs[j].marginal(float(zz[j]))
        if s < theta - slack:
            bad.append(f"slope order: booth {j} in C has marginal {s!r} < theta {theta!r}")
    for j in part.B:
        s = costs[j].marginal(float(zz[j]))
        if abs(s - theta) > slack:
            bad.append(f"structure slope: booth {j} in B has marginal {s!r} != theta {theta!r}")
    spent = instance.total_cost(zz)
    if abs(spent - instance.budget) > tol * max(1.0, instance.budget):
        bad.append(f"sum: cost {spent!r} != budget {instance.budget!r}")
    return Certificate(not bad, tuple(bad), theta, part)


def make_solution(instance: GameInstance, z, method: str = "", calls: int = 0) -> EquilibriumSolution:
    zz = np.asarray(z, dtype=float)
    part = partition_of(zz)
    return EquilibriumSolution(
        z=zz,
        partition=part,
        theta=structure_slope(instance, zz, part),
        payoff=payoff(zz, instance.inspectors),
        method=method,
        solver_calls=calls,
    )


def win_probability_plebiscite(booths: Sequence[BoothStatistics], stuffed_total: float) -> float:
    """``P(sum_j X_j + stuffed_total > 0)`` for independent Gaussian ``X_j``."""
    if not booths:
        raise InvalidArgument("need at least one booth")
    mean = sum(b.mu for b in booths) + stuffed_total
    sd = math.sqrt(sum(b.sigma**2 for b in booths))
    return float(ndtr(mean / sd))
