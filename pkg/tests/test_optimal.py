"""Revenue LP construction and solving, the ex-post extraction, and the
convex-hull decomposition with its certificates."""

import random
from fractions import Fraction as F

import pytest

from revmax import (
    ExplicitDistribution,
    FeasibilitySystem,
    SolveOptions,
    build_optimal_lp,
    check_feasible,
    check_ir,
    check_truthful,
    decompose_allocation,
    expected_revenue,
    interim_of,
    solve_optimal,
)
from revmax.lp import EQ
from support import (
    in_hull_by_enumeration,
    random_distribution,
    random_feasibility,
    random_hull_point,
)

PAIR = ExplicitDistribution.from_support({(1, 1): F(1, 2), (2, 2): F(1, 2)})


def test_lp_shape_for_two_by_two():
    fs = FeasibilitySystem.single_item(2)
    lp = build_optimal_lp(PAIR, fs)
    # 4 profiles x 3 vectors of lottery weight + 8 payments
    assert lp.num_vars == 20
    eqs = [c for c in lp.constraints if c[1] == EQ]
    assert len(eqs) == 4
    assert len(lp.constraints) - len(eqs) == 16


def test_pair_instance_extracts_full_surplus():
    result = solve_optimal(PAIR)
    assert result.revenue == F(3, 2)
    assert expected_revenue(result.interim, PAIR) == F(3, 2)


def test_single_bidder_uniform_two_values():
    dist = ExplicitDistribution.from_support({(1,): F(1, 2), (2,): F(1, 2)})
    assert solve_optimal(dist).revenue == F(1)


def test_solution_passes_its_own_constraints():
    result = solve_optimal(PAIR)
    fs = FeasibilitySystem.single_item(2)
    assert check_truthful(result.interim).passed
    assert check_ir(result.interim).passed
    assert check_feasible(result.interim, fs).passed


def test_expost_form_round_trips_to_interim():
    result = solve_optimal(PAIR)
    assert result.expost is not None
    assert interim_of(result.expost) == result.interim


def test_negative_payments_never_hurt():
    rng = random.Random(5)
    for _ in range(10):
        dist = random_distribution(rng, max_bidders=2)
        base = solve_optimal(dist).revenue
        signed = solve_optimal(
            dist, options=SolveOptions(allow_negative_payments=True)
        ).revenue
        assert signed >= base


def test_randomized_weakly_beats_posted_prices():
    # the optimum dominates selling to bidder 0 at either grid price
    dist = ExplicitDistribution.from_support(
        {(1, 1): F(1, 4), (1, 2): F(1, 4), (2, 1): F(1, 4), (2, 2): F(1, 4)}
    )
    opt = solve_optimal(dist).revenue
    assert opt >= F(5, 4)  # best posted price at 1 or 2 earns 1 or 5/4


def test_float_mode_close_to_exact():
    opts = SolveOptions(mode="float")
    dist = ExplicitDistribution.from_support(
        {(1.0, 1.0): 0.5, (2.0, 2.0): 0.5}, mode="float"
    )
    result = solve_optimal(dist, options=opts)
    assert abs(result.revenue - 1.5) < 1e-9


def test_decompose_point_inside_hull():
    fs = FeasibilitySystem.single_item(2)
    dec = decompose_allocation((F(1, 2), F(1, 4)), fs)
    assert dec.in_hull
    assert len(dec.terms) <= 3
    total = [F(0), F(0)]
    weight = F(0)
    for f, w in dec.terms:
        weight += w
        for i in range(2):
            total[i] += w * fs.vectors[f][i]
    assert weight == 1
    assert tuple(total) == (F(1, 2), F(1, 4))


def test_decompose_point_outside_hull_gives_certificate():
    fs = FeasibilitySystem.single_item(2)
    dec = decompose_allocation((F(4, 5), F(3, 5)), fs)
    assert not dec.in_hull
    a, b = dec.certificate
    value = sum(c * x for c, x in zip(a, (F(4, 5), F(3, 5))))
    assert value > b
    for vec in fs.vectors:
        assert sum(c * x for c, x in zip(a, vec)) <= b


def test_decompose_matches_subset_enumeration():
    rng = random.Random(9)
    for _ in range(25):
        fs = random_feasibility(rng)
        point = random_hull_point(rng, fs)
        dec = decompose_allocation(point, fs)
        assert dec.in_hull
        assert in_hull_by_enumeration(point, fs)


def test_decompose_dimension_mismatch():
    fs = FeasibilitySystem.single_item(2)
    with pytest.raises(Exception):
        decompose_allocation((F(1),), fs)


def test_solver_handles_padded_grids():
    # a zero-probability grid value changes nothing
    from revmax import ValueGrid

    grid = ValueGrid([[1, 2, 3], [1, 2]])
    dist = ExplicitDistribution(
        grid, {(1, 1): F(1, 2), (2, 2): F(1, 2)}, strict=False
    )
    assert solve_optimal(dist).revenue >= F(3, 2)
