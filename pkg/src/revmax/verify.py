"""Constraint verification with replayable witnesses.

Every check walks its inequalities in a fixed order (bidder, then profile
lexicographically, then deviation) and records each violation as a
Witness carrying both sides of the broken relation, so re-evaluating the
quoted inequality at the witness reproduces the failure exactly.  Exact
mode compares rationals strictly; float mode flags a constraint once its
deficit exceeds 1e-9 times max(1, |lhs|, |rhs|).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DimensionMismatchError, InvalidInputError
from .model import (
    FLOAT,
    DeterministicMechanism,
    ExPostMechanism,
    FeasibilitySystem,
    InterimMechanism,
)
from .optimal import decompose_allocation

_FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class Witness:
    """One broken constraint: the relation lhs REL rhs failed to hold."""

    check: str
    bidder: Optional[int]
    profile: tuple
    deviation: Optional[object]
    relation: str  # ">=", "<=", or "=="
    lhs: object
    rhs: object
    detail: str = ""


@dataclass
class VerifyReport:
    """Outcome of one or more checks; passed holds exactly when the
    witness list is empty."""

    passed: bool
    checks: dict
    witnesses: tuple

    @classmethod
    def build(cls, name: str, witnesses: Sequence[Witness]) -> "VerifyReport":
        ws = tuple(witnesses)
        return cls(not ws, {name: not ws}, ws)

    @classmethod
    def merge(cls, *reports: "VerifyReport") -> "VerifyReport":
        checks: dict = {}
        witnesses: list = []
        for rep in reports:
            for name, ok in rep.checks.items():
                checks[name] = checks.get(name, True) and ok
            witnesses.extend(rep.witnesses)
        return cls(all(checks.values()), checks, tuple(witnesses))


def violated(lhs, rhs, relation: str, mode: str) -> bool:
    """Does lhs REL rhs fail, under the mode's comparison discipline?"""
    if mode == FLOAT:
        scale = max(1.0, abs(lhs), abs(rhs))
        if relation == ">=":
            return rhs - lhs > _FLOAT_TOL * scale
        if relation == "<=":
            return lhs - rhs > _FLOAT_TOL * scale
        if relation == "==":
            return abs(lhs - rhs) > _FLOAT_TOL * scale
    else:
        if relation == ">=":
            return lhs < rhs
        if relation == "<=":
            return lhs > rhs
        if relation == "==":
            return lhs != rhs
    raise InvalidInputError(f"unknown relation {relation!r}")


def check_truthful(mech: InterimMechanism) -> VerifyReport:
    """No type gains by reporting a different grid value, in expectation."""
    grid = mech.grid
    out = []
    for i in range(grid.n):
        for v in grid.profiles():
            truth = v[i] * mech.x[v][i] - mech.p[v][i]
            for rep in grid.values[i]:
                if rep == v[i]:
                    continue
                q = v[:i] + (rep,) + v[i + 1 :]
                dev = v[i] * mech.x[q][i] - mech.p[q][i]
                if violated(truth, dev, ">=", mech.mode):
                    out.append(
                        Witness("truthful", i, v, rep, ">=", truth, dev)
                    )
    return VerifyReport.build("truthful", out)


def check_ir(mech: InterimMechanism) -> VerifyReport:
    """Truthful reporting never pays more than the expected allocation is
    worth."""
    out = []
    for i in range(mech.grid.n):
        for v in mech.grid.profiles():
            worth = v[i] * mech.x[v][i]
            if violated(worth, mech.p[v][i], ">=", mech.mode):
                out.append(
                    Witness("ir", i, v, None, ">=", worth, mech.p[v][i])
                )
    return VerifyReport.build("ir", out)


def check_expost_ir(mech: ExPostMechanism) -> VerifyReport:
    """Under every coin outcome, a winner pays at most his bid and a
    non-winner pays exactly nothing."""
    out = []
    for i in range(mech.grid.n):
        for v in mech.grid.profiles():
            for t, (vec_idx, pay, _prob) in enumerate(mech.outcomes[v]):
                if mech.fs.vectors[vec_idx][i]:
                    if violated(v[i], pay[i], ">=", mech.mode):
                        out.append(
                            Witness(
                                "expost_ir", i, v, None, ">=", v[i], pay[i],
                                detail=f"outcome {t}",
                            )
                        )
                elif violated(pay[i], 0, "==", mech.mode):
                    out.append(
                        Witness(
                            "expost_ir", i, v, None, "==", pay[i], 0,
                            detail=f"outcome {t}: non-winner charged",
                        )
                    )
    return VerifyReport.build("expost_ir", out)


def check_feasible(mech: InterimMechanism, fs: FeasibilitySystem) -> VerifyReport:
    """Each profile's expected allocation lies in the convex hull of the
    feasible vectors; failures quote a separating certificate."""
    if fs.n != mech.grid.n:
        raise DimensionMismatchError("feasibility system and grid disagree on n")
    out = []
    for v in mech.grid.profiles():
        dec = decompose_allocation(mech.x[v], fs, mech.mode)
        if not dec.in_hull:
            a, b = dec.certificate
            lhs = sum(c * xi for c, xi in zip(a, mech.x[v]))
            out.append(
                Witness(
                    "feasible", None, v, None, "<=", lhs, b,
                    detail=f"separating certificate a={tuple(map(str, a))}, b={b}",
                )
            )
    return VerifyReport.build("feasible", out)


def _column(mech: InterimMechanism, i: int, v: tuple):
    """Own-value sweep of (x_i, p_i) with the other coordinates fixed."""
    xs, ps = [], []
    for g in mech.grid.values[i]:
        q = v[:i] + (g,) + v[i + 1 :]
        xs.append(mech.x[q][i])
        ps.append(mech.p[q][i])
    return xs, ps


def check_extension(mech: InterimMechanism) -> VerifyReport:
    """Truthfulness of the round-down extension to all real values.

    Finitely many conditions cover every off-grid type: (a) grid
    truthfulness; (b) just below each next grid value, the lower outcome
    still beats every menu entry; (c) at the top, the slope is maximal,
    with cheaper payment on ties; (d) below the grid, every menu entry
    has non-positive utility.
    """
    grid = mech.grid
    out = []
    for w in check_truthful(mech).witnesses:
        out_w = Witness(
            "extension", w.bidder, w.profile, w.deviation, w.relation,
            w.lhs, w.rhs, detail="condition a (grid truthfulness)",
        )
        out.append(out_w)
    for i in range(grid.n):
        K = len(grid.values[i])
        for v in grid.profiles():
            k = grid.index(i, v[i])
            xs, ps = _column(mech, i, v)
            if k < K - 1:
                g = grid.values[i][k + 1]
                for j in range(K):
                    if j == k:
                        continue
                    lhs = g * xs[k] - ps[k]
                    rhs = g * xs[j] - ps[j]
                    if violated(lhs, rhs, ">=", mech.mode):
                        out.append(
                            Witness(
                                "extension", i, v, grid.values[i][j], ">=",
                                lhs, rhs,
                                detail=f"condition b (true value just below {g})",
                            )
                        )
            if k == K - 1:
                for j in range(K - 1):
                    if violated(xs[k], xs[j], ">=", mech.mode):
                        out.append(
                            Witness(
                                "extension", i, v, grid.values[i][j], ">=",
                                xs[k], xs[j],
                                detail="condition c (slope above the top value)",
                            )
                        )
                    elif not violated(xs[j], xs[k], ">=", mech.mode):
                        # slopes tie; the top outcome must not cost more
                        if violated(ps[k], ps[j], "<=", mech.mode):
                            out.append(
                                Witness(
                                    "extension", i, v, grid.values[i][j], "<=",
                                    ps[k], ps[j],
                                    detail="condition c (payment at tied top slope)",
                                )
                            )
            if k == 0:
                g = grid.values[i][0]
                for j in range(K):
                    lhs = g * xs[j] - ps[j]
                    if violated(lhs, 0, "<=", mech.mode):
                        out.append(
                            Witness(
                                "extension", i, v, grid.values[i][j], "<=",
                                lhs, 0,
                                detail="condition d (true value below the grid)",
                            )
                        )
    return VerifyReport.build("extension", out)


def check_universal(parts: Sequence[tuple]) -> VerifyReport:
    """A universally truthful object is an explicit finite mixture of
    deterministic mechanisms; every part must be truthful on and off the
    grid, and the mixing weights must form a distribution."""
    parts = list(parts)
    if not parts:
        raise InvalidInputError("empty mixture")
    mode = parts[0][0].mode
    total = sum(prob for _, prob in parts)
    if any(prob <= 0 for _, prob in parts):
        raise InvalidInputError("mixture weights must be positive")
    if violated(total, 1, "==", mode):
        raise InvalidInputError(f"mixture weights sum to {total}, not 1")
    grid = parts[0][0].grid
    out = []
    for idx, (part, _prob) in enumerate(parts):
        if not isinstance(part, DeterministicMechanism):
            raise InvalidInputError(f"part {idx} is not deterministic")
        if part.grid != grid:
            raise DimensionMismatchError(f"part {idx} is on a different grid")
        interim = part.as_interim()
        for rep in (check_truthful(interim), check_extension(interim)):
            for w in rep.witnesses:
                prefix = f"part {idx}"
                detail = f"{prefix}: {w.detail}" if w.detail else prefix
                out.append(
                    Witness(
                        w.check, w.bidder, w.profile, w.deviation,
                        w.relation, w.lhs, w.rhs, detail=detail,
                    )
                )
    return VerifyReport(not out, {"universal": not out}, tuple(out))
