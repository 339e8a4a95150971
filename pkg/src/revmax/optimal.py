"""Revenue-optimal truthful-in-expectation auctions as a linear program.

Per profile the mechanism is a convex lottery over feasible allocation
vectors plus one payment per bidder; truthfulness and individual
rationality are linear in those variables, so the exact optimum is an LP
solve away.  Also home to the Caratheodory decomposition used to express
interim allocations as ex-post lotteries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DimensionMismatchError, InvalidInputError
from .lp import EQ, LEQ, LinearProgram, LPSolution, solve
from .model import (
    EXACT,
    FLOAT,
    ExPostMechanism,
    ExplicitDistribution,
    FeasibilitySystem,
    InterimMechanism,
    convert,
)


@dataclass
class SolveOptions:
    """Knobs of the optimal solve: payment sign and arithmetic mode."""

    allow_negative_payments: bool = False
    mode: str = EXACT


@dataclass
class OptimalResult:
    """Optimal mechanism in both forms plus its exact revenue.

    expost is None only when negative payments were allowed and the
    optimum charges a bidder with zero allocation somewhere; no
    losers-pay-zero lottery can carry that."""

    interim: InterimMechanism
    expost: Optional[ExPostMechanism]
    revenue: object


@dataclass
class HullDecomposition:
    """Either a convex combination over feasible vectors or a separating
    certificate (a, b) with a.x > b >= a.F for every feasible F."""

    in_hull: bool
    terms: Optional[tuple] = None
    certificate: Optional[tuple] = None


def build_optimal_lp(
    dist: ExplicitDistribution,
    fs: FeasibilitySystem,
    options: Optional[SolveOptions] = None,
) -> LinearProgram:
    """Assemble the revenue LP: lottery weights per (profile, vector),
    payments per (profile, bidder); convexity equalities, truthfulness
    and rationality inequalities; expected revenue objective."""
    options = options or SolveOptions()
    grid = dist.grid
    if fs.n != grid.n:
        raise DimensionMismatchError("feasibility system and grid disagree on n")
    n = grid.n
    profiles = list(grid.profiles())
    pindex = {v: k for k, v in enumerate(profiles)}
    K = len(fs.vectors)
    nlam = len(profiles) * K

    def lam(v_idx: int, f_idx: int) -> int:
        return v_idx * K + f_idx

    def pay(v_idx: int, i: int) -> int:
        return nlam + v_idx * n + i

    num_vars = nlam + len(profiles) * n
    zero = 0.0 if options.mode == FLOAT else Fraction(0)
    objective = [zero] * num_vars
    for v, q in dist.support.items():
        for i in range(n):
            objective[pay(pindex[v], i)] = q
    names = [None] * num_vars
    for k in range(len(profiles)):
        for f in range(K):
            names[lam(k, f)] = f"lam_p{k}_f{f}"
        for i in range(n):
            names[pay(k, i)] = f"pay_p{k}_b{i}"

    lp = LinearProgram(num_vars, objective, maximize=True, names=names)
    if options.allow_negative_payments:
        for k in range(len(profiles)):
            for i in range(n):
                lp.set_bounds(pay(k, i), None, None)

    for k in range(len(profiles)):
        lp.add_constraint({lam(k, f): 1 for f in range(K)}, EQ, 1)

    def x_coeffs(v_idx: int, i: int, scale, into: dict) -> None:
        # contribution of scale * x_i(v) in lottery-weight variables
        for f, vec in enumerate(fs.vectors):
            if vec[i]:
                col = lam(v_idx, f)
                into[col] = into.get(col, 0) + scale

    for i in range(n):
        others = [grid.values[j] for j in range(n) if j != i]
        for rest in itertools.product(*others):
            def at(vi):
                return rest[:i] + (vi,) + rest[i:]

            for true_v in grid.values[i]:
                k_true = pindex[at(true_v)]
                for report_v in grid.values[i]:
                    if report_v == true_v:
                        continue
                    k_rep = pindex[at(report_v)]
                    # deviation utility minus truthful utility <= 0
                    row: dict = {pay(k_rep, i): -1, pay(k_true, i): 1}
                    x_coeffs(k_rep, i, true_v, row)
                    x_coeffs(k_true, i, -true_v, row)
                    lp.add_constraint(row, LEQ, 0)

    for i in range(n):
        for k in range(len(profiles)):
            v_i = profiles[k][i]
            row = {pay(k, i): 1}
            x_coeffs(k, i, -v_i, row)
            lp.add_constraint(row, LEQ, 0)

    return lp


def solve_optimal(
    dist: ExplicitDistribution,
    fs: Optional[FeasibilitySystem] = None,
    options: Optional[SolveOptions] = None,
) -> OptimalResult:
    """Solve the revenue LP and unpack the optimum into mechanism form."""
    options = options or SolveOptions()
    if fs is None:
        fs = FeasibilitySystem.single_item(dist.grid.n)
    lp = build_optimal_lp(dist, fs, options)
    sol = solve(lp, mode=options.mode)
    if sol.status != "optimal":
        # the LP admits the all-zero mechanism and revenue is IR-bounded
        raise RuntimeError(f"revenue LP reported {sol.status}; this cannot happen")
    grid = dist.grid
    n = grid.n
    profiles = list(grid.profiles())
    K = len(fs.vectors)
    nlam = len(profiles) * K
    zero = 0.0 if options.mode == FLOAT else Fraction(0)

    xs, ps, lotteries = {}, {}, {}
    for k, v in enumerate(profiles):
        weights = sol.x[k * K : (k + 1) * K]
        if options.mode == FLOAT:
            weights = [0.0 if w < 1e-12 else w for w in weights]
        xa = []
        for i in range(n):
            xi = sum(
                (w * vec[i] for w, vec in zip(weights, fs.vectors) if vec[i]), zero
            )
            if options.mode == FLOAT:
                xi = min(1.0, max(0.0, xi))
            xa.append(xi)
        xs[v] = tuple(xa)
        ps[v] = tuple(sol.x[nlam + k * n : nlam + (k + 1) * n])
        lotteries[v] = weights
    interim = InterimMechanism(grid, xs, ps, options.mode)

    representable = all(
        not (xs[v][i] == 0 and ps[v][i] != 0) for v in profiles for i in range(n)
    )
    expost = None
    if representable:
        rows = {}
        for v in profiles:
            entries = []
            for f, w in enumerate(lotteries[v]):
                if w == 0:
                    continue
                vec = fs.vectors[f]
                charge = tuple(
                    ps[v][i] / xs[v][i] if vec[i] else zero for i in range(n)
                )
                entries.append((f, charge, w))
            rows[v] = entries
        expost = ExPostMechanism(grid, fs, rows, options.mode)

    revenue = sum((q * sum(ps[v]) for v, q in dist.support.items()), zero)
    return OptimalResult(interim, expost, revenue)


def decompose_allocation(
    x: Sequence, fs: FeasibilitySystem, mode: str = EXACT
) -> HullDecomposition:
    """Write x as a convex combination of at most n+1 feasible vectors,
    or certify that x lies outside their convex hull."""
    point = tuple(convert(c, mode) for c in x)
    if len(point) != fs.n:
        raise DimensionMismatchError(f"point has {len(point)} coordinates, n={fs.n}")
    K = len(fs.vectors)
    zero = 0.0 if mode == FLOAT else Fraction(0)

    lp = LinearProgram(K, [zero] * K, names=[f"w{f}" for f in range(K)])
    for i in range(fs.n):
        row = {f: 1 for f, vec in enumerate(fs.vectors) if vec[i]}
        lp.add_constraint(row, EQ, point[i])
    lp.add_constraint({f: 1 for f in range(K)}, EQ, 1)
    sol = solve(lp, mode=mode)
    if sol.status == "optimal":
        eps = 1e-12 if mode == FLOAT else 0
        terms = tuple((f, w) for f, w in enumerate(sol.x) if w > eps)
        # a basic solution of n+1 equality rows carries at most n+1 weights
        return HullDecomposition(True, terms=terms)

    # separation: a.F - b <= 0 for all F, normalized so a.x - b = 1
    nv = fs.n + 1
    sep = LinearProgram(
        nv,
        [zero] * nv,
        names=[f"a{i}" for i in range(fs.n)] + ["b"],
    )
    for j in range(nv):
        sep.set_bounds(j, None, None)
    for vec in fs.vectors:
        row = {i: 1 for i in range(fs.n) if vec[i]}
        row[fs.n] = -1
        sep.add_constraint(row, LEQ, 0)
    norm = {i: point[i] for i in range(fs.n) if point[i] != 0}
    norm[fs.n] = -1
    sep.add_constraint(norm, EQ, 1)
    cert = solve(sep, mode=mode)
    if cert.status != "optimal":
        raise RuntimeError("no separating certificate for a point outside the hull")
    a, b = cert.x[: fs.n], cert.x[fs.n]
    return HullDecomposition(False, certificate=(tuple(a), b))
