"""Equilibria of the ballot stuffing game.

A stuffer spreads fraudulent votes over booths under a convex cost budget; an
inspector wipes out ``K`` booths. This package computes the stuffer's unique
optimal vector, certifies it, and builds the inspector's equilibrium mixed
strategy.
"""

__version__ = "0.1.0"

from .api import Equilibrium, compute_equilibrium, solve
from .costs import ConvexCost, CostFunction, PowerCost, QuadraticCost, TabulatedCost
from .equilibrium import (
    InspectionMarginals,
    SubsetDistribution,
    decompose,
    marginals,
    probe_deviations,
    sample_inspection,
    verify_nash,
)
from .errors import (
    BallotGameError,
    DegenerateInput,
    InfeasibleStructure,
    InternalError,
    InvalidArgument,
    NumericFailure,
    OracleInconsistency,
    PreconditionViolation,
)
from .general import candidate_from_levels, oracle_solve, solve_general
from .model import (
    BoothStatistics,
    Certificate,
    EquilibriumSolution,
    GameInstance,
    StructurePartition,
    partition_of,
    payoff,
    verify_structure,
    win_probability_plebiscite,
)
from .monotone import CalcZResult, Status, assert_monotone_family, calc_z, solve_monotone

__all__ = [
    "Equilibrium",
    "compute_equilibrium",
    "solve",
    "ConvexCost",
    "CostFunction",
    "PowerCost",
    "QuadraticCost",
    "TabulatedCost",
    "InspectionMarginals",
    "SubsetDistribution",
    "decompose",
    "marginals",
    "probe_deviations",
    "sample_inspection",
    "verify_nash",
    "BallotGameError",
    "DegenerateInput",
    "InfeasibleStructure",
    "InternalError",
    "InvalidArgument",
    "NumericFailure",
    "OracleInconsistency",
    "PreconditionViolation",
    "candidate_from_levels",
    "oracle_solve",
    "solve_general",
    "BoothStatistics",
    "Certificate",
    "EquilibriumSolution",
    "GameInstance",
    "StructurePartition",
    "partition_of",
    "payoff",
    "verify_structure",
    "win_probability_plebiscite",
    "CalcZResult",
    "Status",
    "assert_monotone_family",
    "calc_z",
    "solve_monotone",
]
