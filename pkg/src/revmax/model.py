"""Core model: value grids, explicit joint distributions, feasibility
systems, and the three mechanism representations (interim, ex-post,
deterministic), plus the operations tying them together.

Quantities are exact fractions.Fraction in the default mode.  Float mode
keeps plain floats end to end; only construction-time sanity checks apply
a tolerance here (1e-12 on probability totals), the verifier owns the
constraint tolerance.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    NonRepresentableError,
    UndefinedRatioError,
)

EXACT = "exact"
FLOAT = "float"

Number = Union[Fraction, int, float]
Profile = tuple


def convert(x: object, mode: str = EXACT):
    """Coerce one numeric input to the arithmetic of the given mode."""
    if mode == FLOAT:
        if isinstance(x, str):
            return float(Fraction(x))
        return float(x)
    if mode != EXACT:
        raise InvalidInputError(f"unknown arithmetic mode {mode!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot parse rational {x!r}") from exc
    if isinstance(x, float):
        raise InvalidInputError(
            f"float {x!r} in exact mode; pass a Fraction, int, or string"
        )
    raise InvalidInputError(f"cannot interpret {x!r} as a number")


def _check_unit_total(total, mode: str, what: str) -> None:
    if mode == FLOAT:
        if abs(total - 1.0) > 1e-12:
            raise InvalidInputError(f"{what} sum to {total!r}, not 1")
    elif total != 1:
        raise InvalidInputError(f"{what} sum to {total}, not 1")


class ValueGrid:
    """Per-bidder strictly increasing value supports.

    The grid is the common domain of every mechanism table: profiles are
    tuples with one grid value per bidder, enumerated lexicographically
    by value index.
    """

    __slots__ = ("values", "mode")

    def __init__(self, values: Sequence[Sequence[Number]], mode: str = EXACT):
        rows = []
        for vi in values:
            row = tuple(convert(x, mode) for x in vi)
            if not row:
                raise InvalidInputError("bidder with empty value support")
            if any(x < 0 for x in row):
                raise InvalidInputError("negative value in grid")
            if any(row[k] >= row[k + 1] for k in range(len(row) - 1)):
                raise InvalidInputError("grid values must be strictly increasing")
            rows.append(row)
        if not rows:
            raise InvalidInputError("grid needs at least one bidder")
        self.values = tuple(rows)
        self.mode = mode

    @property
    def n(self) -> int:
        return len(self.values)

    def cells(self) -> int:
        out = 1
        for vi in self.values:
            out *= len(vi)
        return out

    def profiles(self) -> Iterator[Profile]:
        """All grid profiles in canonical (lexicographic) order."""
        return itertools.product(*self.values)

    def index(self, bidder: int, value) -> int:
        try:
            return self.values[bidder].index(value)
        except ValueError as exc:
            raise InvalidInputError(
                f"value {value} not on bidder {bidder}'s grid"
            ) from exc

    def on_grid(self, profile: Profile) -> bool:
        return len(profile) == self.n and all(
            v in self.values[i] for i, v in enumerate(profile)
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, ValueGrid) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"ValueGrid({[list(map(str, vi)) for vi in self.values]})"


class ExplicitDistribution:
    """Joint distribution over grid profiles given as an explicit table.

    Correlation is arbitrary: the table is simply a map from profiles to
    positive probabilities summing to one.  By default the grid must
    coincide with the marginal supports; strict=False admits analysis
    grids padded with zero-mass values.
    """

    __slots__ = ("grid", "support", "mode")

    def __init__(
        self,
        grid: ValueGrid,
        support: Union[Mapping[Profile, Number], Iterable[tuple]],
        mode: str = EXACT,
        strict: bool = True,
    ):
        items = support.items() if hasattr(support, "items") else support
        table = {}
        for profile, prob in items:
            key = tuple(convert(v, mode) for v in profile)
            if len(key) != grid.n:
                raise DimensionMismatchError(
                    f"profile {profile} has {len(key)} entries, grid has {grid.n} bidders"
                )
            if not grid.on_grid(key):
                raise InvalidInputError(f"support profile {profile} is off the grid")
            if key in table:
                raise InvalidInputError(f"duplicate support profile {profile}")
            q = convert(prob, mode)
            if q <= 0:
                raise InvalidInputError(f"support probability {prob} is not positive")
            table[key] = q
        if not table:
            raise InvalidInputError("empty support")
        _check_unit_total(sum(table.values()), mode, "support probabilities")
        if strict:
            for i, vi in enumerate(grid.values):
                seen = {key[i] for key in table}
                missing = [v for v in vi if v not in seen]
                if missing:
                    raise InvalidInputError(
                        f"grid value {missing[0]} of bidder {i} appears in no "
                        "support profile (pass strict=False for padded grids)"
                    )
        # canonical order: lexicographic by value index
        order = {p: k for k, p in enumerate(grid.profiles())}
        self.grid = grid
        self.support = dict(sorted(table.items(), key=lambda kv: order[kv[0]]))
        self.mode = mode

    @classmethod
    def from_support(
        cls, support: Union[Mapping[Profile, Number], Iterable[tuple]], mode: str = EXACT
    ) -> "ExplicitDistribution":
        """Build the grid from the marginal supports of the table itself."""
        items = list(support.items() if hasattr(support, "items") else support)
        if not items:
            raise InvalidInputError("empty support")
        n = len(items[0][0])
        columns = [sorted({convert(p[i], mode) for p, _ in items}) for i in range(n)]
        return cls(ValueGrid(columns, mode), items, mode)

    def prob(self, profile: Profile):
        if not self.grid.on_grid(tuple(profile)):
            raise InvalidInputError(f"profile {profile} is off the grid")
        zero = 0.0 if self.mode == FLOAT else Fraction(0)
        return self.support.get(tuple(profile), zero)

    def __repr__(self) -> str:
        return f"ExplicitDistribution({len(self.support)} profiles, n={self.grid.n})"


class FeasibilitySystem:
    """Finite set of 0/1 allocation vectors; randomized mechanisms live
    in its convex hull."""

    __slots__ = ("n", "vectors", "zero_index")

    def __init__(self, n: int, vectors: Sequence[Sequence[int]]):
        if n < 1:
            raise InvalidInputError("need at least one bidder")
        vecs = []
        for vec in vectors:
            t = tuple(vec)
            if len(t) != n:
                raise DimensionMismatchError(f"vector {vec} does not have length {n}")
            if any(c not in (0, 1) for c in t):
                raise InvalidInputError(f"vector {vec} is not 0/1")
            if t in vecs:
                raise InvalidInputError(f"duplicate feasible vector {vec}")
            vecs.append(t)
        zero = (0,) * n
        if zero not in vecs:
            raise InvalidInputError("the all-zero vector must be feasible")
        self.n = n
        self.vectors = tuple(vecs)
        self.zero_index = vecs.index(zero)

    @classmethod
    def single_item(cls, n: int) -> "FeasibilitySystem":
        vecs = [(0,) * n]
        for i in range(n):
            vecs.append(tuple(1 if j == i else 0 for j in range(n)))
        return cls(n, vecs)

    def is_single_item(self) -> bool:
        return set(self.vectors) == set(FeasibilitySystem.single_item(self.n).vectors)

    def winner_index(self, bidder: int) -> int:
        """Index of the vector allocating exactly to one bidder."""
        target = tuple(1 if j == bidder else 0 for j in range(self.n))
        try:
            return self.vectors.index(target)
        except ValueError as exc:
            raise InvalidInputError(f"no unit vector for bidder {bidder}") from exc

    def __repr__(self) -> str:
        return f"FeasibilitySystem(n={self.n}, {len(self.vectors)} vectors)"


def _check_table_domain(grid: ValueGrid, table: Mapping, what: str) -> dict:
    """Reorder a per-profile table canonically, requiring the full grid."""
    out = {}
    for profile in grid.profiles():
        if profile not in table:
            raise InvalidInputError(f"{what} missing profile {profile}")
        out[profile] = table[profile]
    if len(table) != grid.cells():
        extra = set(table) - set(out)
        raise InvalidInputError(f"{what} has off-grid profiles {sorted(extra)[:3]}")
    return out


class InterimMechanism:
    """Expected allocations x_i(v) in [0,1] and payments p_i(v), one row
    per grid profile.  Feasibility (hull membership) is a verifier check,
    not a construction invariant."""

    __slots__ = ("grid", "x", "p", "mode")

    def __init__(
        self,
        grid: ValueGrid,
        x: Mapping[Profile, Sequence[Number]],
        p: Mapping[Profile, Sequence[Number]],
        mode: str = EXACT,
    ):
        xs, ps = {}, {}
        for profile, row in x.items():
            key = tuple(convert(v, mode) for v in profile)
            vals = tuple(convert(c, mode) for c in row)
            if len(vals) != grid.n:
                raise DimensionMismatchError(f"x row at {profile} has wrong length")
            if any(c < 0 or c > 1 for c in vals):
                raise InvalidInputError(f"allocation outside [0,1] at {profile}")
            xs[key] = vals
        for profile, row in p.items():
            key = tuple(convert(v, mode) for v in profile)
            vals = tuple(convert(c, mode) for c in row)
            if len(vals) != grid.n:
                raise DimensionMismatchError(f"p row at {profile} has wrong length")
            ps[key] = vals
        self.grid = grid
        self.x = _check_table_domain(grid, xs, "allocation table")
        self.p = _check_table_domain(grid, ps, "payment table")
        self.mode = mode

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InterimMechanism)
            and self.grid == other.grid
            and self.x == other.x
            and self.p == other.p
        )

    def __hash__(self):
        return hash((self.grid, tuple(self.x.items()), tuple(self.p.items())))

    def __repr__(self) -> str:
        return f"InterimMechanism(n={self.grid.n}, {self.grid.cells()} profiles)"


class ExPostMechanism:
    """Per profile, a lottery over feasible vectors with per-outcome
    payment vectors.

    Outcome rows are (vector index, payments, probability).  Probabilities
    are positive and sum to one per profile.  The losers-pay-zero rule is
    enforced by the verifier (check_expost_ir), so violating tables remain
    expressible; every constructor in this package emits conforming ones.
    """

    __slots__ = ("grid", "fs", "outcomes", "mode")

    def __init__(
        self,
        grid: ValueGrid,
        fs: FeasibilitySystem,
        outcomes: Mapping[Profile, Sequence[tuple]],
        mode: str = EXACT,
    ):
        if fs.n != grid.n:
            raise DimensionMismatchError("feasibility system and grid disagree on n")
        table = {}
        for profile, rows in outcomes.items():
            key = tuple(convert(v, mode) for v in profile)
            clean = []
            total = 0
            for vec_idx, pays, prob in rows:
                if not 0 <= vec_idx < len(fs.vectors):
                    raise InvalidInputError(f"bad vector index {vec_idx} at {profile}")
                pay = tuple(convert(c, mode) for c in pays)
                if len(pay) != grid.n:
                    raise DimensionMismatchError(f"payment row at {profile} has wrong length")
                q = convert(prob, mode)
                if q <= 0:
                    raise InvalidInputError(f"outcome probability {prob} is not positive")
                total += q
                clean.append((vec_idx, pay, q))
            _check_unit_total(total, mode, f"outcome probabilities at {profile}")
            table[key] = tuple(clean)
        self.grid = grid
        self.fs = fs
        self.outcomes = _check_table_domain(grid, table, "outcome table")
        self.mode = mode

    def __repr__(self) -> str:
        return f"ExPostMechanism(n={self.grid.n}, {self.grid.cells()} profiles)"


class DeterministicMechanism:
    """One feasible vector and one payment vector per profile.

    Non-winners pay zero by construction; the winner map generalizes the
    single-item none/bidder choice to an index into the feasibility system.
    """

    __slots__ = ("grid", "fs", "choice", "payments", "mode")

    def __init__(
        self,
        grid: ValueGrid,
        fs: FeasibilitySystem,
        choice: Mapping[Profile, int],
        payments: Mapping[Profile, Sequence[Number]],
        mode: str = EXACT,
    ):
        if fs.n != grid.n:
            raise DimensionMismatchError("feasibility system and grid disagree on n")
        ch, ps = {}, {}
        for profile, idx in choice.items():
            key = tuple(convert(v, mode) for v in profile)
            if not 0 <= idx < len(fs.vectors):
                raise InvalidInputError(f"bad vector index {idx} at {profile}")
            ch[key] = idx
        ch = _check_table_domain(grid, ch, "winner table")
        for profile, row in payments.items():
            key = tuple(convert(v, mode) for v in profile)
            pay = tuple(convert(c, mode) for c in row)
            if len(pay) != grid.n:
                raise DimensionMismatchError(f"payment row at {profile} has wrong length")
            vec = fs.vectors[ch[key]]
            for i, c in enumerate(pay):
                if vec[i] == 0 and c != 0:
                    raise InvalidInputError(
                        f"non-winner {i} charged {c} at {profile}"
                    )
            ps[key] = pay
        self.grid = grid
        self.fs = fs
        self.choice = ch
        self.payments = _check_table_domain(grid, ps, "payment table")
        self.mode = mode

    def winner(self, profile: Profile) -> Optional[int]:
        """Allocated bidder at this profile, or None (single-winner vectors)."""
        vec = self.fs.vectors[self.choice[tuple(profile)]]
        winners = [i for i, c in enumerate(vec) if c == 1]
        if not winners:
            return None
        if len(winners) > 1:
            raise InvalidInputError("profile allocates more than one bidder")
        return winners[0]

    def as_interim(self) -> InterimMechanism:
        x = {v: self.fs.vectors[self.choice[v]] for v in self.grid.profiles()}
        return InterimMechanism(self.grid, x, self.payments, self.mode)

    def as_expost(self) -> ExPostMechanism:
        one = 1.0 if self.mode == FLOAT else Fraction(1)
        rows = {
            v: [(self.choice[v], self.payments[v], one)] for v in self.grid.profiles()
        }
        return ExPostMechanism(self.grid, self.fs, rows, self.mode)

    def __repr__(self) -> str:
        return f"DeterministicMechanism(n={self.grid.n}, {self.grid.cells()} profiles)"


# ---------------------------------------------------------------------------
# operations


def _payment_table(mech) -> Mapping[Profile, Sequence]:
    if isinstance(mech, (InterimMechanism, DeterministicMechanism)):
        return mech.p if isinstance(mech, InterimMechanism) else mech.payments
    if isinstance(mech, ExPostMechanism):
        return interim_of(mech).p
    raise InvalidInputError(f"cannot read payments from {type(mech).__name__}")


def expected_revenue(mech, dist: ExplicitDistribution):
    """Expected total payment under truthful play, summed over the support."""
    if mech.grid != dist.grid:
        raise DimensionMismatchError("mechanism and distribution grids differ")
    p = _payment_table(mech)
    zero = 0.0 if dist.mode == FLOAT else Fraction(0)
    return sum((q * sum(p[v]) for v, q in dist.support.items()), zero)


def approximation_ratio(mech_revenue, opt_revenue):
    """The factor opt/mech by which the mechanism trails the optimum.

    Both revenues zero compare as equal performance (ratio 1); a zero
    mechanism against a positive optimum has no finite ratio.
    """
    if mech_revenue == 0:
        if opt_revenue == 0:
            return Fraction(1)
        raise UndefinedRatioError(
            f"zero-revenue mechanism against optimum {opt_revenue}"
        )
    if isinstance(mech_revenue, float) or isinstance(opt_revenue, float):
        return opt_revenue / mech_revenue
    return Fraction(opt_revenue) / Fraction(mech_revenue)


def interim_of(mech: ExPostMechanism) -> InterimMechanism:
    """Project an ex-post lottery to expected allocations and payments."""
    zero = 0.0 if mech.mode == FLOAT else Fraction(0)
    x, p = {}, {}
    for v, rows in mech.outcomes.items():
        xa = [zero] * mech.grid.n
        pa = [zero] * mech.grid.n
        for vec_idx, pay, prob in rows:
            vec = mech.fs.vectors[vec_idx]
            for i in range(mech.grid.n):
                xa[i] += prob * vec[i]
                pa[i] += prob * pay[i]
        x[v] = tuple(xa)
        p[v] = tuple(pa)
    return InterimMechanism(mech.grid, x, p, mech.mode)


def canonical_expost(mech: InterimMechanism, fs: FeasibilitySystem) -> ExPostMechanism:
    """The one-winner lottery carrying an interim single-item mechanism:
    bidder i wins with probability x_i(v) and then pays p_i(v)/x_i(v),
    leftover mass sells to nobody for free.

    A bidder with x_i = 0 but p_i != 0 cannot be charged this way."""
    if fs.n != mech.grid.n or not fs.is_single_item():
        raise InvalidInputError("canonical ex-post form needs single-item feasibility")
    zero = 0.0 if mech.mode == FLOAT else Fraction(0)
    one = 1.0 if mech.mode == FLOAT else Fraction(1)
    table = {}
    for v in mech.grid.profiles():
        xs, ps = mech.x[v], mech.p[v]
        rows = []
        total = zero
        for i in range(mech.grid.n):
            if xs[i] == 0:
                if ps[i] != 0:
                    raise NonRepresentableError(
                        f"bidder {i} pays {ps[i]} with zero allocation at {v}"
                    )
                continue
            pay = [zero] * mech.grid.n
            pay[i] = ps[i] / xs[i]
            rows.append((fs.winner_index(i), tuple(pay), xs[i]))
            total += xs[i]
        if total > 1:
            raise InvalidInputError(f"allocations at {v} sum to {total} > 1")
        if total < 1:
            rows.append((fs.zero_index, (zero,) * mech.grid.n, one - total))
        table[v] = rows
    return ExPostMechanism(mech.grid, fs, table, mech.mode)


def execute(mech: ExPostMechanism, bids: Sequence[Number], seed: int):
    """Run the mechanism on real-valued bids with the round-down rule.

    Each bid maps to the largest grid value not above it.  A bid below the
    bidder's whole grid excludes him: the profile is looked up at his lowest
    grid value, and every outcome that would allocate to him moves its mass
    to the all-zero vector with no charges.  Returns the sampled
    (allocation vector, payment vector); the draw is fixed by the seed.
    """
    if len(bids) != mech.grid.n:
        raise DimensionMismatchError(f"got {len(bids)} bids for {mech.grid.n} bidders")
    profile = []
    null_bidders = []
    for i, bid in enumerate(bids):
        b = Fraction(bid) if not isinstance(bid, float) else Fraction(bid)
        if b < 0:
            raise InvalidInputError(f"negative bid {bid}")
        below = [g for g in mech.grid.values[i] if Fraction(g) <= b]
        if below:
            profile.append(below[-1])
        else:
            profile.append(mech.grid.values[i][0])
            null_bidders.append(i)
    zero = 0.0 if mech.mode == FLOAT else Fraction(0)
    zero_pay = (zero,) * mech.grid.n
    rows = []
    for vec_idx, pay, prob in mech.outcomes[tuple(profile)]:
        vec = mech.fs.vectors[vec_idx]
        if any(vec[i] == 1 for i in null_bidders):
            rows.append((mech.fs.zero_index, zero_pay, prob))
        else:
            pay = tuple(zero if i in null_bidders else c for i, c in enumerate(pay))
            rows.append((vec_idx, pay, prob))
    r = Fraction(random.Random(seed).random())
    acc = Fraction(0)
    for vec_idx, pay, prob in rows:
        acc += Fraction(prob)
        if r < acc:
            return mech.fs.vectors[vec_idx], pay
    vec_idx, pay, _ = rows[-1]
    return mech.fs.vectors[vec_idx], pay
