"""Oracle access layer: query semantics, ledger accounting, budgets,
materialization, and thread safety of the counters."""

import random
import threading
from fractions import Fraction as F

import pytest

from revmax import (
    BudgetError,
    ExplicitDistribution,
    ExplicitOracle,
    InvalidInputError,
    UndefinedConditionalError,
    ValueGrid,
    default_budget,
    materialize,
    with_budget,
)
from support import random_distribution

PAIR = ExplicitDistribution.from_support({(1, 1): F(1, 2), (2, 2): F(1, 2)})


def test_marginal_supports_are_free():
    oracle = ExplicitOracle(PAIR)
    grid = oracle.marginal_supports()
    assert grid.values == ((F(1), F(2)), (F(1), F(2)))
    assert oracle.ledger.total == 0


def test_combined_support_size_of_pair_instance():
    grid = ExplicitOracle(PAIR).marginal_supports()
    assert sum(len(vi) for vi in grid.values) == 4


def test_point_queries_and_counting():
    oracle = ExplicitOracle(PAIR)
    assert oracle.query_point((1, 1)) == F(1, 2)
    assert oracle.query_point((1, 2)) == 0
    total = sum(oracle.query_point(v) for v in PAIR.grid.profiles())
    assert total == 1
    assert oracle.ledger.point_queries == 6
    assert oracle.ledger.conditional_queries == 0


def test_conditional_queries_on_perfect_correlation():
    oracle = ExplicitOracle(PAIR)
    assert oracle.query_conditional(0, F(2), {1: F(2)}) == 1
    assert oracle.query_conditional(0, F(1), {1: F(2)}) == 0
    assert oracle.ledger.conditional_queries == 2


def test_conditional_on_independent_uniform():
    dist = ExplicitDistribution.from_support(
        {(a, b): F(1, 4) for a in (1, 2) for b in (1, 2)}
    )
    oracle = ExplicitOracle(dist)
    assert oracle.query_conditional(0, F(1), {1: F(2)}) == F(1, 2)


def test_conditional_chain_rule():
    rng = random.Random(31)
    for _ in range(10):
        grid = ValueGrid(
            [sorted(rng.sample(range(1, 10), rng.randint(2, 3))) for _ in range(2)]
        )
        dist = random_distribution(rng, grid=grid)
        oracle = ExplicitOracle(dist)
        v0, v1 = grid.values[0][0], grid.values[1][-1]
        event = sum(
            dist.prob(v) for v in grid.profiles() if v[1] == v1
        )
        if event == 0:
            continue
        joint = dist.prob((v0, v1))
        assert oracle.query_conditional(0, v0, {1: v1}) * event == joint


def test_zero_probability_condition_is_an_error_but_counts():
    # a third bidder gives the grid a zero-mass joint condition
    dist = ExplicitDistribution.from_support(
        {(1, 1, 5): F(1, 2), (2, 2, 7): F(1, 2)}
    )
    oracle = ExplicitOracle(dist)
    with pytest.raises(UndefinedConditionalError):
        oracle.query_conditional(0, F(1), {1: F(1), 2: F(7)})
    assert oracle.ledger.conditional_queries == 1


def test_conditional_input_validation():
    oracle = ExplicitOracle(PAIR)
    with pytest.raises(InvalidInputError):
        oracle.query_conditional(0, F(1), {0: F(1)})
    with pytest.raises(InvalidInputError):
        oracle.query_conditional(0, F(3), {1: F(1)})


def test_materialize_round_trip_and_count():
    rng = random.Random(8)
    for _ in range(20):
        dist = random_distribution(rng)
        oracle = ExplicitOracle(dist)
        back = materialize(oracle)
        assert back.support == dist.support
        assert back.grid == dist.grid
        expected = 1
        for vi in dist.grid.values:
            expected *= len(vi)
        assert oracle.ledger.point_queries == expected


def test_budget_zero_blocks_first_query():
    oracle = with_budget(ExplicitOracle(PAIR), 0)
    with pytest.raises(BudgetError):
        oracle.query_point((1, 1))
    assert oracle.ledger.total == 0


def test_budget_cuts_off_materialize():
    oracle = with_budget(ExplicitOracle(PAIR), 3)
    with pytest.raises(BudgetError):
        materialize(oracle)
    assert oracle.ledger.point_queries == 3


def test_default_budget_formula():
    assert default_budget(PAIR.grid) == 16 * (2 + 4) ** 2
    oracle = with_budget(ExplicitOracle(PAIR))
    assert oracle.ledger.budget == 576
    materialize(oracle)  # 4 queries fit comfortably


def test_budget_wrapping_shares_ledger():
    inner = ExplicitOracle(PAIR)
    inner.query_point((1, 1))
    outer = with_budget(inner, 2)
    assert outer.ledger is inner.ledger
    outer.query_point((2, 2))
    with pytest.raises(BudgetError):
        outer.query_point((1, 2))


def test_concurrent_queries_never_lose_counts():
    oracle = ExplicitOracle(PAIR)
    per_thread = 500

    def worker():
        for _ in range(per_thread):
            oracle.query_point((1, 1))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert oracle.ledger.point_queries == 8 * per_thread


def test_concurrent_budget_enforcement_is_exact():
    oracle = with_budget(ExplicitOracle(PAIR), 100)
    errors = []

    def worker():
        for _ in range(50):
            try:
                oracle.query_point((1, 1))
            except BudgetError:
                errors.append(1)

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert oracle.ledger.total == 100
    assert len(errors) == 8 * 50 - 100
