import math

import numpy as np
import pytest

from ballot_stuffing import (
    GameInstance,
    InvalidArgument,
    PowerCost,
    QuadraticCost,
    Status,
    assert_monotone_family,
    calc_z,
    solve_monotone,
    verify_structure,
)
from ballot_stuffing.costs import ConvexCost

from conftest import random_monotone_instance


def test_ordered_coefficients_pass():
    costs = [PowerCost(1, 2), PowerCost(2, 2), PowerCost(3, 2)]
    assert assert_monotone_family(costs, [0.5, 1, 2]).passed


def test_crossing_marginals_fail_at_probe_points():
    # 4z^3 <= 10z below sqrt(2.5), above it the order flips
    check = assert_monotone_family([PowerCost(1, 4), PowerCost(5, 2)], [0.5, 1, 2])
    assert not check.passed
    assert check.violations == ((0, 1, 2.0),)


def test_nonzero_entry_slope_fails():
    check = assert_monotone_family([QuadraticCost(1, linear=1), PowerCost(1, 2)], [1])
    assert not check.passed
    assert (0, 0, 0.0) in check.violations


def test_unordered_power_coefficients_fail_symbolically():
    check = assert_monotone_family([PowerCost(2, 3), PowerCost(1, 3)])
    assert not check.passed
    assert check.violations[0][:2] == (0, 1)


def test_calc_z_worked_instance(worked):
    res = calc_z(worked, 2)
    np.testing.assert_allclose(res.z, [1, 1, 0.5], rtol=1e-12)
    assert res.theta == pytest.approx(4.0, rel=1e-12)
    assert res.status is Status.CORRECT


def test_calc_z_top_set_too_large(worked):
    # theta = 6m while g'_3(m) = 8m
    res = calc_z(worked, 3)
    assert res.status is Status.ERROR_Q
    assert res.q_violated and not res.p_violated


def test_calc_z_top_set_too_small(four_booth):
    res = calc_z(four_booth, 2)
    assert res.status is Status.ERROR_P
    assert res.z[2] == pytest.approx(2 * res.z_a, rel=1e-12)
    good = calc_z(four_booth, 3)
    assert good.status is Status.CORRECT
    np.testing.assert_allclose(good.z, [1, 1, 1, 0.375], rtol=1e-12)


@pytest.mark.parametrize("card_a", [0, 1, 4])
def test_calc_z_rejects_out_of_range(worked, card_a):
    with pytest.raises(InvalidArgument):
        calc_z(worked, card_a)


def test_solve_monotone_examples(worked, four_booth):
    sol = solve_monotone(worked)
    np.testing.assert_allclose(sol.z, [1, 1, 0.5], rtol=1e-12)
    assert sol.payoff == pytest.approx(1.5)
    sol = solve_monotone(four_booth)
    np.testing.assert_allclose(sol.z, [1, 1, 1, 0.375], rtol=1e-12)
    assert sol.payoff == pytest.approx(2.375)
    assert sol.theta == pytest.approx(3.0)
    sol = solve_monotone(GameInstance([PowerCost(1, 2), PowerCost(1, 2)], 2.0, 0))
    np.testing.assert_allclose(sol.z, [1, 1], rtol=1e-12)
    assert sol.payoff == pytest.approx(2.0)


def test_solve_monotone_reorders_permuted_booths():
    game = GameInstance([PowerCost(4, 2), PowerCost(1, 2), PowerCost(1, 2)], 3.0, 1)
    sol = solve_monotone(game)
    np.testing.assert_allclose(sol.z, [0.5, 1, 1], rtol=1e-12)
    assert sol.partition.A == (1, 2)


def test_solve_monotone_refuses_crossing_marginals():
    game = GameInstance([PowerCost(1, 4), PowerCost(5, 2)], 50.0, 0)
    with pytest.raises(InvalidArgument):
        solve_monotone(game)


def test_non_power_monotone_family():
    costs = [ConvexCost(lambda z, a=a: a * (math.cosh(z) - 1), lambda z, a=a: a * math.sinh(z)) for a in (1, 2, 5)]
    game = GameInstance(costs, 4.0, 1)
    sol = solve_monotone(game)
    assert verify_structure(game, sol.z).passed
    assert sol.partition.A[0] == 0


def test_top_set_is_prefix():
    rng = np.random.default_rng(3)
    for _ in range(30):
        game = random_monotone_instance(rng)
        sol = solve_monotone(game)
        assert sol.partition.A == tuple(range(len(sol.partition.A)))


def test_error_blocks_on_small_sweep():
    rng = np.random.default_rng(4)
    for _ in range(20):
        game = random_monotone_instance(rng, max_booths=10)
        statuses = [calc_z(game, a).status for a in range(game.inspectors + 1, game.n_booths + 1)]
        tags = "".join({Status.ERROR_P: "P", Status.CORRECT: "C", Status.ERROR_Q: "Q"}[s] for s in statuses)
        assert tags.strip("P").strip("Q").strip("C") == ""
        assert tags.lstrip("P").startswith("C")
