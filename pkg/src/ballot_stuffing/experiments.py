"""Budget/inspector sweeps, synthetic instances and the five-booth example."""

from __future__ import annotations

import csv
import io
from typing import Sequence

import numpy as np

from .api import solve
from .costs import PowerCost
from .errors import BallotGameError, InvalidArgument
from .instance_file import InstanceDocument, parse_instance
from .model import BoothStatistics, GameInstance, win_probability_plebiscite


def five_booth_example(budget: float, inspectors: int) -> GameInstance:
    """Booths costing ``z^4, z^4, 2z^4, 5z^2, 15z^2``; their marginals cross."""
    costs = [PowerCost(1, 4), PowerCost(1, 4), PowerCost(2, 4), PowerCost(5, 2), PowerCost(15, 2)]
    return GameInstance(costs, budget, inspectors)


def sweep_header(n_booths: int) -> list[str]:
    return ["G", "K"] + [f"z{j + 1}" for j in range(n_booths)] + ["theta", "U", "sizeA", "win_prob"]


def sweep(
    instance: GameInstance,
    budgets: Sequence[float],
    inspector_counts: Sequence[int],
    stats: Sequence[BoothStatistics] | None = None,
    method: str = "auto",
) -> list[dict]:
    """Solve on every (K, G) pair, ordered by K then G.

    ``win_prob`` is the plebiscite win probability after the surviving
    stuffed votes (``U``) are added; empty when no booth statistics are given.
    """
    rows = []
    for K in sorted(set(int(k) for k in inspector_counts)):
        for G in sorted(set(float(g) for g in budgets)):
            try:
                sol = solve(GameInstance(instance.costs, G, K), method)
            except BallotGameError as exc:
                raise type(exc)(f"sweep row G={G!r}, K={K}: {exc}") from exc
            row = {"G": G, "K": K}
            row.update({f"z{j + 1}": float(v) for j, v in enumerate(sol.z)})
            row["theta"] = float(sol.theta)
            row["U"] = float(sol.payoff)
            row["sizeA"] = len(sol.partition.A)
            row["win_prob"] = "" if stats is None else win_probability_plebiscite(stats, sol.payoff)
            rows.append(row)
    return rows


def sweep_csv(rows: list[dict], n_booths: int) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=sweep_header(n_booths), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def top_set_transition(
    instance: GameInstance, booth: int, lo: float, hi: float, rtol: float = 1e-10, method: str = "general"
) -> float:
    """Budget at which ``booth`` joins the top set, by bisection on ``G``.

    ``booth`` must be outside the top set at budget ``lo`` and inside at ``hi``.
    """
    def inside(G):
        return booth in solve(instance.with_budget(G), method).partition.A

    if inside(lo) or not inside(hi):
        raise ValueError(f"booth {booth} does not cross into the top set on [{lo}, {hi}]")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def generate_synthetic(
    n_booths: int,
    seed: int,
    budget: float = 1e4,
    inspectors: int = 2,
    sigma_range: tuple = (5.0, 60.0),
    population_range: tuple = (0.5, 40.0),
    mu_spread: float = 0.5,
) -> InstanceDocument:
    """Random instance with the variance-population cost ``z^2 / (sigma^2 N)``.

    ``N`` is drawn log-uniform from ``population_range`` (millions of people),
    ``sigma`` log-uniform from ``sigma_range`` and ``mu = sigma * u`` with
    ``u`` uniform on ``[-mu_spread, mu_spread]``; ``mu``, ``sigma`` and the
    stuffed votes share one unit (thousands of votes by default).
    """
    if n_booths < 2:
        raise InvalidArgument("need at least two booths")
    rng = np.random.default_rng(seed)
    pop = np.exp(rng.uniform(*np.log(population_range), size=n_booths))
    sigma = np.exp(rng.uniform(*np.log(sigma_range), size=n_booths))
    mu = sigma * rng.uniform(-mu_spread, mu_spread, size=n_booths)
    booths = [
        {
            "cost": {"type": "power", "coef": float(1.0 / (s * s * n)), "exp": 2.0},
            "stats": {"mu": float(m), "sigma": float(s), "weight": 1.0, "population": float(n)},
        }
        for m, s, n in zip(mu, sigma, pop)
    ]
    return parse_instance({"booths": booths, "budget": float(budget), "inspectors": int(inspectors)})
