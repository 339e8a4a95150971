"""Core model types: grids, distributions, feasibility systems, the three
mechanism representations, and the revenue/ratio/execution operations."""

import random
from fractions import Fraction as F

import pytest

from revmax import (
    DeterministicMechanism,
    DimensionMismatchError,
    ExPostMechanism,
    ExplicitDistribution,
    FeasibilitySystem,
    InterimMechanism,
    InvalidInputError,
    NonRepresentableError,
    UndefinedRatioError,
    ValueGrid,
    approximation_ratio,
    canonical_expost,
    execute,
    expected_revenue,
    interim_of,
    second_price,
    zero_mechanism,
)
from support import random_distribution, random_interim

PAIR = {(1, 1): F(1, 2), (2, 2): F(1, 2)}


def pair_dist():
    return ExplicitDistribution.from_support(PAIR)


def test_grid_basic_construction():
    grid = ValueGrid([[1, 2], [3]])
    assert grid.n == 2
    assert grid.cells() == 2
    assert grid.values == ((F(1), F(2)), (F(3),))


def test_grid_rejects_unsorted_duplicate_negative():
    with pytest.raises(InvalidInputError):
        ValueGrid([[2, 1]])
    with pytest.raises(InvalidInputError):
        ValueGrid([[1, 1]])
    with pytest.raises(InvalidInputError):
        ValueGrid([[-1, 1]])
    with pytest.raises(InvalidInputError):
        ValueGrid([])


def test_grid_profiles_lexicographic():
    grid = ValueGrid([[1, 2], [5, 7]])
    assert list(grid.profiles()) == [
        (F(1), F(5)),
        (F(1), F(7)),
        (F(2), F(5)),
        (F(2), F(7)),
    ]
    assert grid.index(0, F(2)) == 1
    assert grid.on_grid((F(2), F(5)))
    assert not grid.on_grid((F(2), F(6)))


def test_grid_rejects_float_in_exact_mode():
    with pytest.raises(InvalidInputError):
        ValueGrid([[0.5, 1.5]])


def test_distribution_requires_unit_total():
    grid = ValueGrid([[1, 2]])
    with pytest.raises(InvalidInputError):
        ExplicitDistribution(grid, {(1,): F(1, 2), (2,): F(1, 3)})


def test_distribution_rejects_off_grid_and_duplicates():
    grid = ValueGrid([[1, 2]])
    with pytest.raises(InvalidInputError):
        ExplicitDistribution(grid, {(3,): F(1)})
    with pytest.raises(InvalidInputError):
        ExplicitDistribution(grid, [((1,), F(1, 2)), ((1,), F(1, 2))])


def test_distribution_grid_is_marginal_support():
    grid = ValueGrid([[1, 2], [1, 2]])
    with pytest.raises(InvalidInputError):
        ExplicitDistribution(grid, {(1, 1): F(1, 2), (2, 1): F(1, 2)})
    padded = ExplicitDistribution(
        grid, {(1, 1): F(1, 2), (2, 1): F(1, 2)}, strict=False
    )
    assert padded.prob((1, 2)) == 0


def test_distribution_from_support_derives_grid():
    dist = pair_dist()
    assert dist.grid.values == ((F(1), F(2)), (F(1), F(2)))
    assert dist.prob((1, 1)) == F(1, 2)
    assert dist.prob((1, 2)) == 0


def test_distribution_support_in_canonical_order():
    dist = ExplicitDistribution.from_support(
        [((2, 2), F(1, 2)), ((1, 1), F(1, 2))]
    )
    assert list(dist.support) == [(F(1), F(1)), (F(2), F(2))]


def test_feasibility_single_item():
    fs = FeasibilitySystem.single_item(3)
    assert len(fs.vectors) == 4
    assert fs.is_single_item()
    assert fs.vectors[fs.zero_index] == (0, 0, 0)
    assert fs.vectors[fs.winner_index(1)] == (0, 1, 0)


def test_feasibility_rejects_bad_vectors():
    with pytest.raises(InvalidInputError):
        FeasibilitySystem(2, [(0, 0), (0, 2)])
    with pytest.raises(InvalidInputError):
        FeasibilitySystem(2, [(1, 0)])  # all-zero vector required
    with pytest.raises(InvalidInputError):
        FeasibilitySystem(2, [(0, 0), (1, 0), (1, 0)])
    with pytest.raises(DimensionMismatchError):
        FeasibilitySystem(2, [(0, 0), (1,)])


def test_interim_requires_full_grid():
    grid = ValueGrid([[1, 2]])
    with pytest.raises(InvalidInputError):
        InterimMechanism(grid, {(1,): (F(1),)}, {(1,): (F(0),)})


def test_interim_rejects_allocation_outside_unit_interval():
    grid = ValueGrid([[1]])
    with pytest.raises(InvalidInputError):
        InterimMechanism(grid, {(1,): (F(3, 2),)}, {(1,): (F(0),)})


def test_expost_outcome_probabilities_sum_to_one():
    grid = ValueGrid([[1]])
    fs = FeasibilitySystem.single_item(1)
    with pytest.raises(InvalidInputError):
        ExPostMechanism(grid, fs, {(1,): [(0, (F(0),), F(1, 2))]})
    with pytest.raises(InvalidInputError):
        ExPostMechanism(grid, fs, {(1,): [(7, (F(0),), F(1))]})


def test_deterministic_non_winner_pays_zero():
    grid = ValueGrid([[1], [1]])
    fs = FeasibilitySystem.single_item(2)
    with pytest.raises(InvalidInputError):
        DeterministicMechanism(
            grid,
            fs,
            {(1, 1): fs.winner_index(0)},
            {(1, 1): (F(1), F(1))},
        )


def test_deterministic_winner_and_conversions():
    grid = ValueGrid([[1, 2], [1, 2]])
    mech = second_price(grid)
    assert mech.winner((2, 1)) == 0
    interim = mech.as_interim()
    assert interim.x[(2, 1)] == (F(1), F(0))
    assert interim.p[(2, 1)] == (F(1), F(0))
    expost = mech.as_expost()
    assert expost.outcomes[(2, 1)] == (
        (mech.fs.winner_index(0), (F(1), F(0)), F(1)),
    )


def test_zero_mechanism_revenue_is_zero():
    dist = pair_dist()
    mech = zero_mechanism(dist.grid).as_interim()
    assert expected_revenue(mech, dist) == 0


def test_second_price_revenue_on_uniform_square():
    dist = ExplicitDistribution.from_support(
        {(a, b): F(1, 4) for a in (1, 2) for b in (1, 2)}
    )
    mech = second_price(dist.grid).as_interim()
    assert expected_revenue(mech, dist) == F(5, 4)


def test_sell_to_first_at_second_bid_revenue():
    dist = pair_dist()
    grid = dist.grid
    x = {v: (F(1), F(0)) for v in grid.profiles()}
    p = {v: (v[1], F(0)) for v in grid.profiles()}
    mech = InterimMechanism(grid, x, p)
    assert expected_revenue(mech, dist) == F(3, 2)


def test_expected_revenue_rejects_grid_mismatch():
    dist = pair_dist()
    other = ValueGrid([[1, 2], [1, 3]])
    mech = zero_mechanism(other).as_interim()
    with pytest.raises(DimensionMismatchError):
        expected_revenue(mech, dist)


def test_approximation_ratio_is_opt_over_mechanism():
    assert approximation_ratio(F(1), F(3, 2)) == F(3, 2)
    assert approximation_ratio(F(3, 2), F(3, 2)) == 1
    assert approximation_ratio(F(0), F(0)) == 1
    with pytest.raises(UndefinedRatioError):
        approximation_ratio(F(0), F(3, 2))


def test_canonical_expost_splits_mass_and_charges_conditionally():
    grid = ValueGrid([[2], [4]])
    mech = InterimMechanism(
        grid,
        {(2, 4): (F(1, 2), F(1, 4))},
        {(2, 4): (F(1, 2), F(1, 2))},
    )
    fs = FeasibilitySystem.single_item(2)
    ep = canonical_expost(mech, fs)
    rows = ep.outcomes[(F(2), F(4))]
    assert rows == (
        (fs.winner_index(0), (F(1), F(0)), F(1, 2)),
        (fs.winner_index(1), (F(0), F(2)), F(1, 4)),
        (fs.zero_index, (F(0), F(0)), F(1, 4)),
    )
    assert interim_of(ep) == mech


def test_canonical_expost_rejects_charging_non_winner():
    grid = ValueGrid([[2]])
    mech = InterimMechanism(grid, {(2,): (F(0),)}, {(2,): (F(1),)})
    with pytest.raises(NonRepresentableError):
        canonical_expost(mech, FeasibilitySystem.single_item(1))


def test_canonical_expost_round_trip_random():
    rng = random.Random(7)
    for _ in range(40):
        dist = random_distribution(rng)
        mech = random_interim(rng, dist.grid)
        ep = canonical_expost(mech, FeasibilitySystem.single_item(dist.grid.n))
        assert interim_of(ep) == mech


def test_execute_is_deterministic_and_rounds_down():
    grid = ValueGrid([[1, 2], [1, 2]])
    ep = second_price(grid).as_expost()
    first = execute(ep, [F(5, 2), F(3, 2)], seed=11)
    again = execute(ep, [F(5, 2), F(3, 2)], seed=11)
    assert first == again
    vec, pay = first
    # bids round down to (2, 1): bidder 0 wins at the competing value
    assert vec == (1, 0)
    assert pay == (F(1), F(0))


def test_execute_excludes_below_grid_bidders():
    grid = ValueGrid([[2, 3], [2, 3]])
    ep = second_price(grid).as_expost()
    # bidder 0 is below the grid; the profile reads (2, 2), where he would
    # win, so that outcome collapses to the zero vector with no charges
    vec, pay = execute(ep, [F(1), F(5, 2)], seed=3)
    assert vec == (0, 0)
    assert pay == (F(0), F(0))
    # at (2, 3) bidder 1 wins outright, so his outcome survives exclusion
    vec, pay = execute(ep, [F(1), F(3)], seed=3)
    assert vec == (0, 1)
    assert pay == (F(0), F(2))
    vec, pay = execute(ep, [F(1), F(1)], seed=3)
    assert vec == (0, 0)
    assert pay == (F(0), F(0))


def test_execute_rejects_negative_bids():
    grid = ValueGrid([[1]])
    ep = second_price(grid).as_expost()
    with pytest.raises(InvalidInputError):
        execute(ep, [F(-1)], seed=0)
