"""Query access to a joint value distribution, with metered budgets.

The oracle interface answers point probabilities and one-coordinate
conditionals over a declared grid; reading the marginal supports is free,
everything else passes through a thread-safe ledger that counts queries
and enforces an optional cap atomically, so a query either counts and
runs or raises without counting.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from typing import Mapping, Optional

from .errors import BudgetError, InvalidInputError, UndefinedConditionalError
from .model import EXACT, FLOAT, ExplicitDistribution, ValueGrid


def default_budget(grid: ValueGrid) -> int:
    """Polynomial cap in the bidder count and combined marginal support
    size: 16 * (n + sum of |V_i|)^2."""
    return 16 * (grid.n + sum(len(vi) for vi in grid.values)) ** 2


class QueryLedger:
    """Counts point and conditional queries; increments are atomic and a
    budget, when set, caps their total."""

    def __init__(self, budget: Optional[int] = None):
        if budget is not None and budget < 0:
            raise InvalidInputError("budget cannot be negative")
        self._lock = threading.Lock()
        self._point = 0
        self._conditional = 0
        self.budget = budget

    def charge(self, kind: str) -> None:
        with self._lock:
            if self.budget is not None and self._point + self._conditional >= self.budget:
                raise BudgetError(
                    f"query budget of {self.budget} exhausted"
                )
            if kind == "point":
                self._point += 1
            elif kind == "conditional":
                self._conditional += 1
            else:
                raise InvalidInputError(f"unknown query kind {kind!r}")

    @property
    def point_queries(self) -> int:
        return self._point

    @property
    def conditional_queries(self) -> int:
        return self._conditional

    @property
    def total(self) -> int:
        return self._point + self._conditional

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "point": self._point,
                "conditional": self._conditional,
                "budget": self.budget,
            }


class DistributionOracle(ABC):
    """Metered view of a joint distribution over a value grid."""

    def __init__(self, ledger: Optional[QueryLedger] = None):
        self.ledger = ledger or QueryLedger()

    def marginal_supports(self) -> ValueGrid:
        """The declared grid; free of charge."""
        return self._grid()

    def query_point(self, profile):
        """Pr[a = profile]; counts one point query."""
        self.ledger.charge("point")
        return self._answer_point(tuple(profile))

    def query_conditional(self, bidder: int, value, given: Mapping[int, object]):
        """Pr[a_bidder = value | a_S = given values]; counts one
        conditional query.  Conditioning on a probability-zero event is an
        error (the query still counts)."""
        self.ledger.charge("conditional")
        return self._answer_conditional(bidder, value, dict(given))

    @abstractmethod
    def _grid(self) -> ValueGrid: ...

    @abstractmethod
    def _answer_point(self, profile): ...

    @abstractmethod
    def _answer_conditional(self, bidder, value, given): ...


class ExplicitOracle(DistributionOracle):
    """Adapter presenting an explicit distribution through the oracle
    interface."""

    def __init__(
        self, dist: ExplicitDistribution, ledger: Optional[QueryLedger] = None
    ):
        super().__init__(ledger)
        self.dist = dist

    def _grid(self) -> ValueGrid:
        return self.dist.grid

    def _answer_point(self, profile):
        return self.dist.prob(profile)

    def _answer_conditional(self, bidder, value, given):
        grid = self.dist.grid
        if not 0 <= bidder < grid.n:
            raise InvalidInputError(f"unknown bidder {bidder}")
        if bidder in given:
            raise InvalidInputError("cannot condition a bidder on himself")
        if value not in grid.values[bidder]:
            raise InvalidInputError(f"value {value} off bidder {bidder}'s grid")
        for j, vj in given.items():
            if not 0 <= j < grid.n:
                raise InvalidInputError(f"unknown bidder {j} in condition")
            if vj not in grid.values[j]:
                raise InvalidInputError(f"value {vj} off bidder {j}'s grid")
        zero = 0.0 if self.dist.mode == FLOAT else 0
        den = zero
        num = zero
        for profile, q in self.dist.support.items():
            if all(profile[j] == vj for j, vj in given.items()):
                den += q
                if profile[bidder] == value:
                    num += q
        if den == 0:
            raise UndefinedConditionalError(
                f"conditioning event {given} has probability 0"
            )
        return num / den


class BudgetedOracle(DistributionOracle):
    """Wrapper enforcing a cap through the ledger it shares with the
    wrapped oracle."""

    def __init__(self, inner: DistributionOracle):
        super().__init__(inner.ledger)
        self.inner = inner

    def _grid(self) -> ValueGrid:
        return self.inner._grid()

    def _answer_point(self, profile):
        return self.inner._answer_point(profile)

    def _answer_conditional(self, bidder, value, given):
        return self.inner._answer_conditional(bidder, value, given)


def with_budget(
    oracle: DistributionOracle, budget: Optional[int] = None
) -> BudgetedOracle:
    """Cap the oracle's total queries; the default cap is the polynomial
    budget for its grid.  The cap applies to the shared ledger, so
    queries through either handle count against it."""
    if budget is None:
        budget = default_budget(oracle.marginal_supports())
    if budget < 0:
        raise InvalidInputError("budget cannot be negative")
    oracle.ledger.budget = budget
    return BudgetedOracle(oracle)


def materialize(oracle: DistributionOracle) -> ExplicitDistribution:
    """Rebuild the full explicit table by querying every grid profile
    once; costs exactly the product of the marginal support sizes."""
    grid = oracle.marginal_supports()
    support = {}
    mode = EXACT
    for profile in grid.profiles():
        q = oracle.query_point(profile)
        if isinstance(q, float):
            mode = FLOAT
        if q > 0:
            support[profile] = q
    return ExplicitDistribution(grid, support, mode)
