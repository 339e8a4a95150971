"""Multi-item extension in the explicit model: items are assigned whole,
bidders value bundles through full 2^m tables, and the revenue LP ranges
over lotteries of complete assignments.

Assignment counts grow as (n+1)^m, so a size guard protects every entry
point.  Payments attach to coin outcomes proportionally to realized
bundle value, which keeps every charge within the winner's bid and the
empty bundle free.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    NonRepresentableError,
    SizeLimitError,
)
from .lp import EQ, LEQ, LinearProgram, solve
from .model import EXACT, FLOAT, ExplicitDistribution, ValueGrid, convert
from .optimal import SolveOptions
from .verify import VerifyReport, Witness, violated

MAX_ASSIGNMENTS = 6561  # (n+1)^m cap, e.g. m <= 8 at n = 2

UNSOLD = -1


class Valuation:
    """One bidder type: a value for each of the 2^m item bundles, indexed
    by bitmask (bit j set means item j in the bundle); the empty bundle
    is worth 0."""

    __slots__ = ("m", "values")

    def __init__(self, m: int, values: Sequence, mode: str = EXACT):
        if m < 1:
            raise InvalidInputError("need at least one item")
        vals = tuple(convert(x, mode) for x in values)
        if len(vals) != 2**m:
            raise DimensionMismatchError(
                f"bundle table has {len(vals)} entries, expected {2 ** m}"
            )
        if vals[0] != 0:
            raise InvalidInputError("the empty bundle must be worth 0")
        if any(x < 0 for x in vals):
            raise InvalidInputError("negative bundle value")
        self.m = m
        self.values = vals

    def of(self, mask: int):
        return self.values[mask]

    def __eq__(self, other):
        return (
            isinstance(other, Valuation)
            and self.m == other.m
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.m, self.values))

    def __repr__(self):
        return f"Valuation(m={self.m}, {list(map(str, self.values))})"


class MultiItemInstance:
    """Explicit correlated prior over finite per-bidder type lists."""

    __slots__ = ("m", "types", "support", "mode")

    def __init__(
        self,
        m: int,
        types: Sequence[Sequence[Valuation]],
        support: Mapping[tuple, object],
        mode: str = EXACT,
    ):
        if not types:
            raise InvalidInputError("need at least one bidder")
        for i, ts in enumerate(types):
            if not ts:
                raise InvalidInputError(f"bidder {i} has no types")
            for t in ts:
                if t.m != m:
                    raise DimensionMismatchError(
                        f"bidder {i} has a type over {t.m} items, expected {m}"
                    )
        items = support.items() if hasattr(support, "items") else support
        table = {}
        total = 0
        for tprofile, prob in items:
            key = tuple(tprofile)
            if len(key) != len(types):
                raise DimensionMismatchError(f"type profile {key} has wrong length")
            for i, ti in enumerate(key):
                if not 0 <= ti < len(types[i]):
                    raise InvalidInputError(f"bidder {i} has no type {ti}")
            if key in table:
                raise InvalidInputError(f"duplicate type profile {key}")
            q = convert(prob, mode)
            if q <= 0:
                raise InvalidInputError(f"probability {prob} is not positive")
            table[key] = q
            total += q
        if not table:
            raise InvalidInputError("empty support")
        if mode == FLOAT:
            if abs(total - 1.0) > 1e-12:
                raise InvalidInputError(f"probabilities sum to {total!r}, not 1")
        elif total != 1:
            raise InvalidInputError(f"probabilities sum to {total}, not 1")
        for i, ts in enumerate(types):
            used = {key[i] for key in table}
            for k in range(len(ts)):
                if k not in used:
                    raise InvalidInputError(
                        f"type {k} of bidder {i} appears in no support profile"
                    )
        self.m = m
        self.types = tuple(tuple(ts) for ts in types)
        order = {t: k for k, t in enumerate(self._all_profiles())}
        self.support = dict(sorted(table.items(), key=lambda kv: order[kv[0]]))
        self.mode = mode

    @property
    def n(self) -> int:
        return len(self.types)

    def _all_profiles(self):
        return itertools.product(*(range(len(ts)) for ts in self.types))

    def type_profiles(self) -> list:
        """Full product of type indices, lexicographic."""
        return list(self._all_profiles())

    def __repr__(self):
        return f"MultiItemInstance(n={self.n}, m={self.m}, {len(self.support)} profiles)"


def enumerate_assignments(n: int, m: int) -> tuple:
    """All (n+1)^m ways to give each item to a bidder or keep it unsold
    (owner -1), lexicographic in the owner tuples."""
    return tuple(itertools.product(range(-1, n), repeat=m))


def bundle_mask(assignment: tuple, bidder: int) -> int:
    mask = 0
    for j, owner in enumerate(assignment):
        if owner == bidder:
            mask |= 1 << j
    return mask


class MultiMechanism:
    """Per type profile, a lottery over complete assignments (sparse, by
    assignment index) and one payment per bidder."""

    __slots__ = ("inst", "assignments", "lotteries", "payments")

    def __init__(
        self,
        inst: MultiItemInstance,
        lotteries: Mapping[tuple, Sequence[tuple]],
        payments: Mapping[tuple, Sequence],
    ):
        assigns = enumerate_assignments(inst.n, inst.m)
        lot, pay = {}, {}
        for t in inst.type_profiles():
            if t not in lotteries or t not in payments:
                raise InvalidInputError(f"mechanism missing type profile {t}")
            total = 0
            rows = []
            for a_idx, w in lotteries[t]:
                if not 0 <= a_idx < len(assigns):
                    raise InvalidInputError(f"bad assignment index {a_idx}")
                w = convert(w, inst.mode)
                if w <= 0:
                    raise InvalidInputError(f"lottery weight {w} is not positive")
                total += w
                rows.append((a_idx, w))
            if inst.mode == FLOAT:
                if abs(total - 1.0) > 1e-12:
                    raise InvalidInputError(f"lottery at {t} sums to {total!r}")
            elif total != 1:
                raise InvalidInputError(f"lottery at {t} sums to {total}")
            p = tuple(convert(c, inst.mode) for c in payments[t])
            if len(p) != inst.n:
                raise DimensionMismatchError(f"payment row at {t} has wrong length")
            lot[t] = tuple(rows)
            pay[t] = p
        self.inst = inst
        self.assignments = assigns
        self.lotteries = lot
        self.payments = pay

    def expected_value(self, t: tuple, bidder: int):
        """Expected bundle value of the bidder's own type under the
        lottery at t."""
        val = self.inst.types[bidder][t[bidder]]
        zero = 0.0 if self.inst.mode == FLOAT else Fraction(0)
        return sum(
            (w * val.of(bundle_mask(self.assignments[a], bidder)) for a, w in self.lotteries[t]),
            zero,
        )

    def __repr__(self):
        return f"MultiMechanism(n={self.inst.n}, m={self.inst.m})"


def _guard(n: int, m: int, max_assignments: int) -> None:
    count = (n + 1) ** m
    if count > max_assignments:
        raise SizeLimitError(
            f"(n+1)^m = {count} assignments exceed the cap of {max_assignments}"
        )


def build_multi_lp(
    inst: MultiItemInstance,
    options: Optional[SolveOptions] = None,
    max_assignments: int = MAX_ASSIGNMENTS,
) -> LinearProgram:
    """Revenue LP over assignment lotteries: same convexity, truthfulness
    and rationality rows as the single-item program, with bundle values
    in place of unit values."""
    options = options or SolveOptions()
    _guard(inst.n, inst.m, max_assignments)
    n = inst.n
    assigns = enumerate_assignments(n, inst.m)
    A = len(assigns)
    profiles = inst.type_profiles()
    tindex = {t: k for k, t in enumerate(profiles)}
    nlam = len(profiles) * A

    def lam(t_idx: int, a_idx: int) -> int:
        return t_idx * A + a_idx

    def pay(t_idx: int, i: int) -> int:
        return nlam + t_idx * n + i

    zero = 0.0 if options.mode == FLOAT else Fraction(0)
    num_vars = nlam + len(profiles) * n
    objective = [zero] * num_vars
    for t, q in inst.support.items():
        for i in range(n):
            objective[pay(tindex[t], i)] = q
    names = [None] * num_vars
    for k in range(len(profiles)):
        for a in range(A):
            names[lam(k, a)] = f"lam_t{k}_a{a}"
        for i in range(n):
            names[pay(k, i)] = f"pay_t{k}_b{i}"

    lp = LinearProgram(num_vars, objective, maximize=True, names=names)
    if options.allow_negative_payments:
        for k in range(len(profiles)):
            for i in range(n):
                lp.set_bounds(pay(k, i), None, None)

    for k in range(len(profiles)):
        lp.add_constraint({lam(k, a): 1 for a in range(A)}, EQ, 1)

    # value of assignment a to bidder i holding type ti
    def val(i: int, ti: int, a_idx: int):
        return inst.types[i][ti].of(bundle_mask(assigns[a_idx], i))

    def value_coeffs(t_idx: int, i: int, ti: int, sign: int, into: dict) -> None:
        for a_idx in range(A):
            v = val(i, ti, a_idx)
            if v:
                col = lam(t_idx, a_idx)
                into[col] = into.get(col, zero) + sign * v

    for i in range(n):
        others = [range(len(inst.types[j])) for j in range(n) if j != i]
        for rest in itertools.product(*others):
            def at(ti):
                return rest[:i] + (ti,) + rest[i:]

            for true_t in range(len(inst.types[i])):
                k_true = tindex[at(true_t)]
                for rep_t in range(len(inst.types[i])):
                    if rep_t == true_t:
                        continue
                    k_rep = tindex[at(rep_t)]
                    row: dict = {pay(k_rep, i): -1, pay(k_true, i): 1}
                    value_coeffs(k_rep, i, true_t, 1, row)
                    value_coeffs(k_true, i, true_t, -1, row)
                    lp.add_constraint(row, LEQ, 0)

    for i in range(n):
        for k, t in enumerate(profiles):
            row = {pay(k, i): 1}
            value_coeffs(k, i, t[i], -1, row)
            lp.add_constraint(row, LEQ, 0)

    return lp


def solve_multi(
    inst: MultiItemInstance,
    options: Optional[SolveOptions] = None,
    max_assignments: int = MAX_ASSIGNMENTS,
):
    """Solve the multi-item revenue LP; the returned mechanism is replayed
    through check_multi before being handed back.  Returns (mechanism,
    exact expected revenue)."""
    options = options or SolveOptions()
    lp = build_multi_lp(inst, options, max_assignments)
    sol = solve(lp, mode=options.mode)
    if sol.status != "optimal":
        raise RuntimeError(f"multi-item LP reported {sol.status}; this cannot happen")
    n = inst.n
    profiles = inst.type_profiles()
    A = (n + 1) ** inst.m
    nlam = len(profiles) * A
    lotteries, payments = {}, {}
    for k, t in enumerate(profiles):
        weights = sol.x[k * A : (k + 1) * A]
        if options.mode == FLOAT:
            total = sum(w for w in weights if w > 1e-12)
            rows = [(a, w / total) for a, w in enumerate(weights) if w > 1e-12]
        else:
            rows = [(a, w) for a, w in enumerate(weights) if w > 0]
        lotteries[t] = rows
        payments[t] = tuple(sol.x[nlam + k * n : nlam + (k + 1) * n])
    mech = MultiMechanism(inst, lotteries, payments)
    report = check_multi(mech)
    if not report.passed:
        raise RuntimeError(
            f"solved mechanism failed its own replay: {report.witnesses[0]}"
        )
    zero = 0.0 if options.mode == FLOAT else Fraction(0)
    revenue = sum((q * sum(payments[t]) for t, q in inst.support.items()), zero)
    return mech, revenue


def check_multi(mech: MultiMechanism) -> VerifyReport:
    """Replay the LP's truthfulness and rationality rows against the
    mechanism tables."""
    inst = mech.inst
    mode = inst.mode
    ic, ir = [], []
    for i in range(inst.n):
        for t in inst.type_profiles():
            truth = mech.expected_value(t, i) - mech.payments[t][i]
            for rep in range(len(inst.types[i])):
                if rep == t[i]:
                    continue
                q = t[:i] + (rep,) + t[i + 1 :]
                # deviation keeps the true valuation, at the misreport's lottery
                val = inst.types[i][t[i]]
                zero = 0.0 if mode == FLOAT else Fraction(0)
                dev_value = sum(
                    (w * val.of(bundle_mask(mech.assignments[a], i)) for a, w in mech.lotteries[q]),
                    zero,
                )
                dev = dev_value - mech.payments[q][i]
                if violated(truth, dev, ">=", mode):
                    ic.append(
                        Witness("multi_ic", i, t, rep, ">=", truth, dev)
                    )
    for i in range(inst.n):
        for t in inst.type_profiles():
            worth = mech.expected_value(t, i)
            if violated(worth, mech.payments[t][i], ">=", mode):
                ir.append(
                    Witness("multi_ir", i, t, None, ">=", worth, mech.payments[t][i])
                )
    return VerifyReport.merge(
        VerifyReport.build("multi_ic", ic), VerifyReport.build("multi_ir", ir)
    )


@dataclass
class MultiExPostMechanism:
    """Coin-level form of a multi-item mechanism: per type profile, the
    assignment lottery with per-outcome charges."""

    inst: MultiItemInstance
    outcomes: dict  # type profile -> tuple of (assignment index, payments, prob)


def multi_expost(mech: MultiMechanism) -> MultiExPostMechanism:
    """Attach payments to coin outcomes proportionally to realized bundle
    value: charge_i(A) = v_i(S_i(A)) * p_i(t) / E[v_i].  Every charge stays
    within the realized value (by interim IR) and empty bundles are free."""
    inst = mech.inst
    zero = 0.0 if inst.mode == FLOAT else Fraction(0)
    table = {}
    for t in inst.type_profiles():
        ratios = []
        for i in range(inst.n):
            w_i = mech.expected_value(t, i)
            p_i = mech.payments[t][i]
            if w_i == 0:
                if p_i != 0:
                    raise NonRepresentableError(
                        f"bidder {i} pays {p_i} at {t} but values every "
                        "outcome of the lottery at 0"
                    )
                ratios.append(zero)
            else:
                ratios.append(p_i / w_i)
        rows = []
        for a_idx, w in mech.lotteries[t]:
            charge = tuple(
                inst.types[i][t[i]].of(bundle_mask(mech.assignments[a_idx], i))
                * ratios[i]
                for i in range(inst.n)
            )
            rows.append((a_idx, charge, w))
        table[t] = tuple(rows)
    return MultiExPostMechanism(inst, table)


def max_welfare(inst: MultiItemInstance):
    """Full-surplus bound: expected best attainable welfare, by direct
    enumeration of assignments at each support profile."""
    assigns = enumerate_assignments(inst.n, inst.m)
    zero = 0.0 if inst.mode == FLOAT else Fraction(0)
    out = zero
    for t, q in inst.support.items():
        best = None
        for a in assigns:
            w = sum(
                (inst.types[i][t[i]].of(bundle_mask(a, i)) for i in range(inst.n)),
                zero,
            )
            if best is None or w > best:
                best = w
        out += q * best
    return out


def single_item_equivalent(inst: MultiItemInstance) -> ExplicitDistribution:
    """Bridge an m=1 instance to the single-item model: each type becomes
    its value for the lone item.  Types of one bidder must carry distinct
    values for the mapping to be a bijection."""
    if inst.m != 1:
        raise InvalidInputError("only m=1 instances have a single-item equivalent")
    columns = []
    for i, ts in enumerate(inst.types):
        vals = [t.of(1) for t in ts]
        if len(set(vals)) != len(vals):
            raise InvalidInputError(
                f"bidder {i} has two types with the same item value"
            )
        columns.append(vals)
    support = {}
    for t, q in inst.support.items():
        support[tuple(columns[i][ti] for i, ti in enumerate(t))] = q
    grid = ValueGrid([sorted(c) for c in columns], inst.mode)
    return ExplicitDistribution(grid, support, inst.mode, strict=False)
