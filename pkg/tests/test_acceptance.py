"""End-to-end exit criteria; each test records one PASS/FAIL line."""

import itertools
import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from ballot_stuffing import (
    BoothStatistics,
    GameInstance,
    PowerCost,
    Status,
    assert_monotone_family,
    calc_z,
    decompose,
    marginals,
    oracle_solve,
    probe_deviations,
    solve,
    solve_general,
    solve_monotone,
    verify_nash,
    verify_structure,
)
from ballot_stuffing.equilibrium import expected_surviving
from ballot_stuffing.experiments import five_booth_example, generate_synthetic, sweep, top_set_transition
from ballot_stuffing.monotone import monotone_order
from ballot_stuffing.parliamentary import (
    GaussianGainCurve,
    majority_probability,
    poisson_binomial_pmf,
    solve_parliamentary,
)
from conftest import random_monotone_instance

pytestmark = pytest.mark.acceptance


def test_worked_instance(criterion, worked):
    with criterion(1, "worked instance exact, < 10 ms") as c:
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            sol = solve(worked)
            p = marginals(sol, worked)
            times.append(time.perf_counter() - t0)
        np.testing.assert_allclose(sol.z, [1, 1, 0.5], atol=1e-9, rtol=0)
        assert abs(sol.theta - 4) <= 1e-9
        assert abs(sol.payoff - 1.5) <= 1e-9
        np.testing.assert_allclose(p.probs, [0.5, 0.5], atol=1e-9, rtol=0)
        np.testing.assert_allclose(oracle_solve(worked).z, [1, 1, 0.5], atol=1e-9, rtol=0)
        c.detail = f"best of 5: {1e3 * min(times):.2f} ms"
        assert min(times) < 0.010


def test_structural_certification(criterion, monotone_suite):
    with criterion(2, "200 monotone instances certify at 1e-8, < 5 s") as c:
        t0 = time.perf_counter()
        sols = [solve_monotone(game) for game in monotone_suite]
        elapsed = time.perf_counter() - t0
        for game, sol in zip(monotone_suite, sols):
            assert verify_structure(game, sol.z, 1e-8).passed
            assert abs(game.total_cost(sol.z) - game.budget) <= 1e-8 * game.budget
            assert len(sol.partition.A) >= game.inspectors + 1
        c.detail = f"{elapsed:.2f} s"
        assert elapsed < 5.0


def test_oracle_agreement(criterion, general_suite):
    with criterion(3, "200 general instances match the oracle to 1e-6 relative") as c:
        worst = 0.0
        for game in general_suite:
            grid = np.geomspace(1e-6, 1e6, 64)
            assert not assert_monotone_family(game.costs, grid) and monotone_order(game, grid) is None
            ref = oracle_solve(game)  # raises unless exactly one vector certifies
            got = solve_general(game)
            worst = max(worst, abs(got.payoff - ref.payoff) / ref.payoff)
        c.detail = f"worst relative gap {worst:.1e}"
        assert worst <= 1e-6


def test_error_blocks(criterion):
    with criterion(4, "ErrorP..Correct..ErrorQ blocks on 100 instances") as c:
        rng = np.random.default_rng(20240604)
        blocks = set()
        for _ in range(100):
            game = random_monotone_instance(rng, max_booths=10)
            K, J = game.inspectors, game.n_booths
            results = [calc_z(game, a) for a in range(K + 1, J + 1)]
            for r in results:
                assert not (r.p_violated and r.q_violated)
            assert results[0].status is not Status.ERROR_Q
            assert results[-1].status is not Status.ERROR_P
            tags = "".join({Status.ERROR_P: "P", Status.CORRECT: "C", Status.ERROR_Q: "Q"}[r.status] for r in results)
            rest = tags.lstrip("P")
            assert rest.startswith("C") and rest.lstrip("C").strip("Q") == ""
            blocks.add(("P" in tags, "Q" in tags))
        c.detail = f"block shapes seen {sorted(blocks)}"


def test_query_bound(criterion, monotone_suite):
    with criterion(5, "Calc_Z calls <= ceil(log2(J-K)) + 2") as c:
        worst = 0
        for game in monotone_suite:
            sol = solve_monotone(game)
            bound = math.ceil(math.log2(game.n_booths - game.inspectors)) + 2
            assert sol.solver_calls <= bound
            worst = max(worst, sol.solver_calls - bound)
        c.detail = f"max calls minus bound {worst}"


def test_nash_certification(criterion, monotone_suite, general_suite):
    with criterion(6, "Nash certificate, no deviation gains > 1e-8, payoff identity to 1e-10") as c:
        best_gain = -math.inf
        worst_identity = 0.0
        for i, game in enumerate(list(monotone_suite) + list(general_suite)):
            sol = solve(game)
            p = marginals(sol, game)
            q = decompose(p, game.inspectors)
            assert verify_nash(game, sol, p, distribution=q).passed
            gain = probe_deviations(game, sol, p, n=100, seed=i)
            best_gain = max(best_gain, gain)
            identity = abs(expected_surviving(sol.z, p.full(game.n_booths)) - sol.payoff)
            worst_identity = max(worst_identity, identity)
        c.detail = f"largest gain {best_gain:.1e}, identity gap {worst_identity:.1e}"
        assert best_gain <= 1e-8
        assert worst_identity <= 1e-10


def _random_marginals(rng, n, K):
    """Valid marginals: at least K positive weights, scaled and capped at 1."""
    x = np.zeros(n)
    support = rng.choice(n, size=int(rng.integers(K, n + 1)), replace=False)
    x[support] = rng.uniform(0.05, 1.0, support.size)
    lo, hi = 0.0, 1.0 / x.max()
    while np.minimum(1.0, hi * x).sum() < K:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if np.minimum(1.0, mid * x).sum() < K else (lo, mid)
    p = np.minimum(1.0, hi * x)
    return np.minimum(p * (K / p.sum()), 1.0)


def test_decomposition(criterion):
    with criterion(7, "decompose exact on 1000 marginal vectors and the (0.8,0.6,0.6) case") as c:
        expected = {(0, 1): Fraction(2, 5), (0, 2): Fraction(2, 5), (1, 2): Fraction(1, 5)}
        exact = decompose([Fraction(4, 5), Fraction(3, 5), Fraction(3, 5)], 2, atol=0).as_dict()
        assert exact == expected
        # binary 0.6 is slightly below 3/5, so the float run is exact only up to rounding
        got = decompose((0.8, 0.6, 0.6), 2).as_dict()
        assert got.keys() == expected.keys()
        assert all(abs(got[k] - float(v)) <= 1e-15 for k, v in expected.items())
        rng = np.random.default_rng(20240607)
        worst = 0.0
        done = 0
        while done < 1000:
            n = int(rng.integers(1, 31))
            K = int(rng.integers(1, n + 1))
            p = _random_marginals(rng, n, K)
            if abs(p.sum() - K) > 1e-13 * K:
                continue
            dist = decompose(list(p), K)
            induced = dist.induced_marginals()
            worst = max(worst, max(abs(induced.get(a, 0.0) - p[a]) for a in range(n)))
            assert dist.iterations <= n and len(dist.support) <= n
            assert all(len(s) == K for s, _ in dist.support)
            assert abs(sum(q for _, q in dist.support) - 1) <= 1e-12
            done += 1
        c.detail = f"worst marginal error {worst:.1e}"
        assert worst <= 1e-12


def test_sqrt_budget_scaling(criterion):
    with criterion(8, "U(100G)/U(G) = 10 within 0.1% for exponent-2 costs") as c:
        rng = np.random.default_rng(20240608)
        games = [generate_synthetic(51, seed=1, budget=1e4, inspectors=2).game()]
        for _ in range(20):
            J = int(rng.integers(2, 15))
            coefs = np.exp(rng.uniform(-3, 3, J))
            games.append(GameInstance([PowerCost(float(a), 2) for a in coefs], float(rng.uniform(1, 1e4)), int(rng.integers(0, J))))
        worst = 0.0
        for game in games:
            rows = sweep(game, [game.budget, 100 * game.budget], [game.inspectors])
            ratio = rows[1]["U"] / rows[0]["U"]
            worst = max(worst, abs(ratio - 10) / 10)
        c.detail = f"{len(games)} instances, worst deviation {worst:.1e}"
        assert worst <= 1e-3


def test_monotone_in_inspectors_and_transition(criterion):
    with criterion(9, "U nonincreasing in K; booth 4 crosses from B to A") as c:
        doc = generate_synthetic(51, seed=7, budget=1e4)
        rows = sweep(doc.game(), [1e4], range(0, 11), doc.booth_stats())
        U = [r["U"] for r in rows]
        win = [r["win_prob"] for r in rows]
        assert all(a >= b for a, b in zip(U, U[1:]))
        assert all(a >= b for a, b in zip(win, win[1:]))

        five = five_booth_example(1.0, 2)
        grid = np.geomspace(0.5, 50, 61)
        rows = sweep(five, grid, [2], method="general")
        inside = [r["z4"] >= r["z1"] * (1 - 1e-9) for r in rows]
        first = inside.index(True)
        assert not any(inside[:first]) and all(inside[first:])
        before = solve_general(five.with_budget(rows[first - 1]["G"]))
        assert 3 in before.partition.B
        crossing = top_set_transition(five, 3, rows[first - 1]["G"], rows[first]["G"])
        below = oracle_solve(five.with_budget(crossing * (1 - 1e-6)))
        above = oracle_solve(five.with_budget(crossing * (1 + 1e-6)))
        assert 3 in below.partition.B and 3 in above.partition.A
        # booth 4 reaches the top level at m^2 = 5/8, costing 25/16 + 25/8 + 25/24
        assert crossing == pytest.approx(275 / 48, rel=1e-7)
        c.detail = f"crossing budget {crossing:.9f}"


def _enumerate(probs):
    J = len(probs)
    total = Fraction(0)
    for outcome in itertools.product((0, 1), repeat=J):
        if 2 * sum(outcome) > J:
            term = Fraction(1)
            for o, p in zip(outcome, probs):
                term *= p if o else 1 - p
            total += term
    return total


def test_parliamentary(criterion):
    with criterion(10, "Poisson-binomial exact, budget round trip, 0.55 case") as c:
        assert majority_probability([Fraction(9, 10), Fraction(1, 2), Fraction(1, 5)]) == Fraction(11, 20)
        rng = np.random.default_rng(20240610)
        for J in range(1, 13):
            probs = [Fraction(int(k), 97) for k in rng.integers(0, 98, J)]
            assert majority_probability(probs) == _enumerate(probs)
            assert sum(poisson_binomial_pmf(probs)) == 1
        worst = 0.0
        for G in (0.05, 1.0, 20.0, 500.0):
            J = 6
            booths = [BoothStatistics(float(m), float(s)) for m, s in zip(rng.uniform(-1, 1, J), rng.uniform(0.5, 3, J))]
            costs = [PowerCost(float(a), float(e)) for a, e in zip(rng.uniform(0.2, 2, J), rng.uniform(1.5, 3, J))]
            plan = solve_parliamentary(costs, [GaussianGainCurve(b.mu, b.sigma) for b in booths], booths, G, 2)
            spent = sum(g.value(v) for g, v in zip(costs, plan.z))
            worst = max(worst, abs(spent - G) / G)
        c.detail = f"worst budget drift {worst:.1e} of G"
        assert worst <= 1e-8


def _run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "ballot_stuffing", *args], capture_output=True, check=False
    )
    return proc.returncode, proc.stdout


def test_cli_determinism(criterion, tmp_path):
    with criterion(11, "every CLI command is byte-reproducible") as c:
        doc = generate_synthetic(8, seed=5, budget=50.0, inspectors=2)
        data = json.loads(doc.to_json())
        data["booths"][0]["stats"]["weight"] = 3.0
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(data))
        commands = [
            ("solve", str(path)),
            ("equilibrium", str(path)),
            ("sample", str(path), "--seed", "3", "--draws", "20"),
            ("sweep", str(path), "--g-grid", "1:100:5:log", "--k-list", "0,1,2,3"),
            ("parliamentary", str(path), "--seed", "4", "--samples", "50000"),
            ("generate", "--booths", "12", "--seed", "9"),
        ]
        for cmd in commands:
            first, second = _run_cli(*cmd), _run_cli(*cmd)
            assert first[0] == 0, cmd
            assert first == second, cmd
        c.detail = f"{len(commands)} commands run twice"
