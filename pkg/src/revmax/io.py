"""Line-structured JSON formats for instances, mechanisms, and reports.

One JSON object per line, keys sorted, no spaces: identical inputs give
byte-identical files.  Every quantity is carried as an exact rational
string "p/q" in exact mode (integers print bare, e.g. "2"); float mode
writes plain JSON numbers.  Decimal literals in input files are parsed
exactly, never through binary floating point.

Instance files open with {"format":1,"model":...,"mode":...} and carry
grid/feasible/support lines (or bidder type tables for the multi-item
model).  Mechanism files open with {"format":1,"kind":...,"mode":...}.
Profiles appear in canonical lexicographic order throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InvalidInputError
from .model import (
    EXACT,
    FLOAT,
    DeterministicMechanism,
    ExplicitDistribution,
    ExPostMechanism,
    FeasibilitySystem,
    InterimMechanism,
    ValueGrid,
    convert,
)
from .multi import MultiItemInstance, MultiMechanism, Valuation
from .oracle import QueryLedger
from .verify import VerifyReport, Witness

FORMAT_VERSION = 1

SINGLE_ITEM = "single-item"
SINGLE_PARAMETER = "single-parameter"
MULTI_ITEM = "multi-item"


def dumps_line(obj: dict) -> str:
    """Canonical one-line encoding: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def loads_line(line: str) -> dict:
    try:
        obj = json.loads(line, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"bad JSON line: {line!r}") from exc
    if not isinstance(obj, dict):
        raise InvalidInputError(f"expected a JSON object, got {line!r}")
    return obj


def format_number(x, mode: str):
    """One number as it appears on the wire for the given mode."""
    if mode == FLOAT:
        return float(x)
    return str(Fraction(x))


def parse_number(v, mode: str):
    if isinstance(v, bool) or v is None:
        raise InvalidInputError(f"expected a number, got {v!r}")
    return convert(v, mode)


def _records(text: str) -> list:
    rows = [loads_line(line) for line in text.splitlines() if line.strip()]
    if not rows:
        raise InvalidInputError("empty file")
    return rows


def _header(rows: list, key: str, force_mode: Optional[str] = None) -> tuple:
    head = rows[0]
    if head.get("format") != FORMAT_VERSION:
        raise InvalidInputError(
            f"first line must declare format {FORMAT_VERSION}, got {head}"
        )
    if key not in head:
        raise InvalidInputError(f"header lacks {key!r}: {head}")
    mode = force_mode or head.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise InvalidInputError(f"unknown mode {mode!r}")
    return head, mode


def _fmt_row(row, mode: str) -> list:
    return [format_number(c, mode) for c in row]


def _parse_row(row, mode: str) -> tuple:
    if not isinstance(row, list):
        raise InvalidInputError(f"expected a list of numbers, got {row!r}")
    return tuple(parse_number(c, mode) for c in row)


def _grid_line(grid: ValueGrid, mode: str) -> str:
    return dumps_line({"grid": [_fmt_row(vi, mode) for vi in grid.values]})


def _parse_grid(obj, mode: str) -> ValueGrid:
    return ValueGrid([_parse_row(vi, mode) for vi in obj], mode)


# ---------------------------------------------------------------------------
# instances


def write_instance(inst, fs: Optional[FeasibilitySystem] = None) -> str:
    """Serialize an ExplicitDistribution (with an optional non-default
    feasibility system) or a MultiItemInstance."""
    if isinstance(inst, MultiItemInstance):
        return _write_multi_instance(inst)
    if not isinstance(inst, ExplicitDistribution):
        raise InvalidInputError(f"cannot serialize {type(inst).__name__} as an instance")
    mode = inst.mode
    model = SINGLE_ITEM
    if fs is not None and not fs.is_single_item():
        model = SINGLE_PARAMETER
    out = [dumps_line({"format": FORMAT_VERSION, "model": model, "mode": mode})]
    out.append(_grid_line(inst.grid, mode))
    if model == SINGLE_PARAMETER:
        for vec in fs.vectors:
            out.append(dumps_line({"feasible": list(vec)}))
    for profile, prob in inst.support.items():
        out.append(
            dumps_line(
                {"prob": format_number(prob, mode), "support": _fmt_row(profile, mode)}
            )
        )
    return "".join(out)


def _write_multi_instance(inst: MultiItemInstance) -> str:
    mode = inst.mode
    out = [
        dumps_line(
            {
                "format": FORMAT_VERSION,
                "items": inst.m,
                "model": MULTI_ITEM,
                "mode": mode,
            }
        )
    ]
    for i, ts in enumerate(inst.types):
        out.append(
            dumps_line({"bidder": i, "tables": [_fmt_row(t.values, mode) for t in ts]})
        )
    for t, prob in inst.support.items():
        out.append(dumps_line({"prob": format_number(prob, mode), "support": list(t)}))
    return "".join(out)


@dataclass
class ParsedInstance:
    """Decoded instance file: exactly one of dist/multi is set; fs is the
    feasibility system (explicit or the single-item default)."""

    model: str
    mode: str
    dist: Optional[ExplicitDistribution] = None
    fs: Optional[FeasibilitySystem] = None
    multi: Optional[MultiItemInstance] = None


def read_instance(text: str, mode: Optional[str] = None) -> ParsedInstance:
    """Decode an instance file; mode, when given, overrides the header's
    arithmetic mode."""
    rows = _records(text)
    head, mode = _header(rows, "model", mode)
    model = head["model"]
    if model == MULTI_ITEM:
        return _read_multi_instance(rows, head, mode)
    if model not in (SINGLE_ITEM, SINGLE_PARAMETER):
        raise InvalidInputError(f"unknown model {model!r}")
    grid = None
    vectors = []
    support = []
    for obj in rows[1:]:
        if "grid" in obj:
            if grid is not None:
                raise InvalidInputError("duplicate grid line")
            grid = _parse_grid(obj["grid"], mode)
        elif "feasible" in obj:
            vectors.append(obj["feasible"])
        elif "support" in obj:
            support.append((_parse_row(obj["support"], mode), parse_number(obj["prob"], mode)))
        else:
            raise InvalidInputError(f"unrecognized instance line {obj}")
    if grid is None:
        raise InvalidInputError("instance file lacks a grid line")
    dist = ExplicitDistribution(grid, support, mode)
    if model == SINGLE_PARAMETER:
        if not vectors:
            raise InvalidInputError("single-parameter instance lacks feasible lines")
        fs = FeasibilitySystem(grid.n, vectors)
    else:
        if vectors:
            raise InvalidInputError("feasible lines require the single-parameter model")
        fs = FeasibilitySystem.single_item(grid.n)
    return ParsedInstance(model, mode, dist=dist, fs=fs)


def _read_multi_instance(rows: list, head: dict, mode: str) -> ParsedInstance:
    m = head.get("items")
    if not isinstance(m, int) or m < 1:
        raise InvalidInputError(f"multi-item header needs a positive item count: {head}")
    tables = {}
    support = []
    for obj in rows[1:]:
        if "bidder" in obj:
            i = obj["bidder"]
            if i in tables:
                raise InvalidInputError(f"duplicate type line for bidder {i}")
            tables[i] = [
                Valuation(m, _parse_row(t, mode), mode) for t in obj["tables"]
            ]
        elif "support" in obj:
            t = obj["support"]
            if not all(isinstance(k, int) for k in t):
                raise InvalidInputError(f"type profile {t} must hold type indices")
            support.append((tuple(t), parse_number(obj["prob"], mode)))
        else:
            raise InvalidInputError(f"unrecognized instance line {obj}")
    if sorted(tables) != list(range(len(tables))):
        raise InvalidInputError("bidder type lines must cover 0..n-1")
    types = [tables[i] for i in range(len(tables))]
    inst = MultiItemInstance(m, types, support, mode)
    return ParsedInstance(MULTI_ITEM, mode, multi=inst)


# ---------------------------------------------------------------------------
# mechanisms

INTERIM = "interim"
EXPOST = "expost"
DETERMINISTIC = "deterministic"
UNIVERSAL = "universal"
MULTI = "multi"


def write_mechanism(mech, parts: Optional[Sequence[tuple]] = None) -> str:
    """Serialize one mechanism, or a universal decomposition given as
    parts = [(DeterministicMechanism, probability), ...]."""
    if parts is not None:
        return _write_universal(parts)
    if isinstance(mech, InterimMechanism):
        out = [_mech_header(INTERIM, mech.mode), _grid_line(mech.grid, mech.mode)]
        for v in mech.grid.profiles():
            out.append(
                dumps_line(
                    {
                        "alloc": _fmt_row(mech.x[v], mech.mode),
                        "pay": _fmt_row(mech.p[v], mech.mode),
                        "profile": _fmt_row(v, mech.mode),
                    }
                )
            )
        return "".join(out)
    if isinstance(mech, ExPostMechanism):
        out = [_mech_header(EXPOST, mech.mode), _grid_line(mech.grid, mech.mode)]
        out.extend(_feasible_lines(mech.fs))
        for v in mech.grid.profiles():
            for vec_idx, pay, prob in mech.outcomes[v]:
                out.append(
                    dumps_line(
                        {
                            "pay": _fmt_row(pay, mech.mode),
                            "prob": format_number(prob, mech.mode),
                            "profile": _fmt_row(v, mech.mode),
                            "vector": vec_idx,
                        }
                    )
                )
        return "".join(out)
    if isinstance(mech, DeterministicMechanism):
        out = [_mech_header(DETERMINISTIC, mech.mode), _grid_line(mech.grid, mech.mode)]
        out.extend(_feasible_lines(mech.fs))
        out.extend(_det_rows(mech))
        return "".join(out)
    if isinstance(mech, MultiMechanism):
        return _write_multi_mechanism(mech)
    raise InvalidInputError(f"cannot serialize {type(mech).__name__} as a mechanism")


def _mech_header(kind: str, mode: str, **extra) -> str:
    head = {"format": FORMAT_VERSION, "kind": kind, "mode": mode}
    head.update(extra)
    return dumps_line(head)


def _feasible_lines(fs: FeasibilitySystem) -> list:
    return [dumps_line({"feasible": list(vec)}) for vec in fs.vectors]


def _det_rows(mech: DeterministicMechanism, part: Optional[int] = None) -> list:
    out = []
    for v in mech.grid.profiles():
        row = {
            "pay": _fmt_row(mech.payments[v], mech.mode),
            "profile": _fmt_row(v, mech.mode),
            "vector": mech.choice[v],
        }
        if part is not None:
            row["part"] = part
        out.append(dumps_line(row))
    return out


def _write_universal(parts: Sequence[tuple]) -> str:
    if not parts:
        raise InvalidInputError("universal decomposition needs at least one part")
    first = parts[0][0]
    for mech, _ in parts:
        if not isinstance(mech, DeterministicMechanism):
            raise InvalidInputError("universal parts must be deterministic mechanisms")
        if mech.grid != first.grid or mech.fs.vectors != first.fs.vectors:
            raise InvalidInputError("universal parts must share one grid and system")
    mode = first.mode
    out = [_mech_header(UNIVERSAL, mode), _grid_line(first.grid, mode)]
    out.extend(_feasible_lines(first.fs))
    for k, (mech, prob) in enumerate(parts):
        out.append(dumps_line({"part": k, "prob": format_number(prob, mode)}))
        out.extend(_det_rows(mech, part=k))
    return "".join(out)


def _write_multi_mechanism(mech: MultiMechanism) -> str:
    inst = mech.inst
    mode = inst.mode
    out = [_mech_header(MULTI, mode, items=inst.m)]
    for i, ts in enumerate(inst.types):
        out.append(
            dumps_line({"bidder": i, "tables": [_fmt_row(t.values, mode) for t in ts]})
        )
    for t, prob in inst.support.items():
        out.append(dumps_line({"prob": format_number(prob, mode), "support": list(t)}))
    for t in inst.type_profiles():
        for a_idx, w in mech.lotteries[t]:
            owners = [o if o >= 0 else None for o in mech.assignments[a_idx]]
            out.append(
                dumps_line(
                    {
                        "assignment": owners,
                        "prob": format_number(w, mode),
                        "profile": list(t),
                    }
                )
            )
        out.append(
            dumps_line({"pay": _fmt_row(mech.payments[t], mode), "profile": list(t)})
        )
    return "".join(out)


@dataclass
class ParsedMechanism:
    """Decoded mechanism file: mech is set for all kinds except
    universal, which fills parts instead."""

    kind: str
    mode: str
    mech: Optional[object] = None
    fs: Optional[FeasibilitySystem] = None
    parts: Optional[tuple] = None


def read_mechanism(text: str, mode: Optional[str] = None) -> ParsedMechanism:
    """Decode a mechanism file; mode, when given, overrides the header's
    arithmetic mode."""
    rows = _records(text)
    head, mode = _header(rows, "kind", mode)
    kind = head["kind"]
    if kind == MULTI:
        return _read_multi_mechanism(rows, head, mode)
    grid = None
    vectors = []
    body = []
    for obj in rows[1:]:
        if "grid" in obj:
            grid = _parse_grid(obj["grid"], mode)
        elif "feasible" in obj:
            vectors.append(obj["feasible"])
        else:
            body.append(obj)
    if grid is None:
        raise InvalidInputError("mechanism file lacks a grid line")
    if kind == INTERIM:
        x = {tuple(_parse_row(o["profile"], mode)): _parse_row(o["alloc"], mode) for o in body}
        p = {tuple(_parse_row(o["profile"], mode)): _parse_row(o["pay"], mode) for o in body}
        return ParsedMechanism(kind, mode, mech=InterimMechanism(grid, x, p, mode))
    fs = (
        FeasibilitySystem(grid.n, vectors)
        if vectors
        else FeasibilitySystem.single_item(grid.n)
    )
    if kind == EXPOST:
        outcomes: dict = {}
        for o in body:
            v = _parse_row(o["profile"], mode)
            outcomes.setdefault(v, []).append(
                (o["vector"], _parse_row(o["pay"], mode), parse_number(o["prob"], mode))
            )
        return ParsedMechanism(
            kind, mode, mech=ExPostMechanism(grid, fs, outcomes, mode), fs=fs
        )
    if kind == DETERMINISTIC:
        choice = {}
        payments = {}
        for o in body:
            v = _parse_row(o["profile"], mode)
            choice[v] = o["vector"]
            payments[v] = _parse_row(o["pay"], mode)
        return ParsedMechanism(
            kind, mode, mech=DeterministicMechanism(grid, fs, choice, payments, mode), fs=fs
        )
    if kind == UNIVERSAL:
        probs: dict = {}
        choices: dict = {}
        pays: dict = {}
        for o in body:
            k = o.get("part")
            if not isinstance(k, int):
                raise InvalidInputError(f"universal line lacks a part index: {o}")
            if "profile" not in o:
                probs[k] = parse_number(o["prob"], mode)
                continue
            v = _parse_row(o["profile"], mode)
            choices.setdefault(k, {})[v] = o["vector"]
            pays.setdefault(k, {})[v] = _parse_row(o["pay"], mode)
        if sorted(probs) != list(range(len(probs))) or sorted(choices) != sorted(probs):
            raise InvalidInputError("universal parts must be numbered 0..k-1")
        parts = tuple(
            (DeterministicMechanism(grid, fs, choices[k], pays[k], mode), probs[k])
            for k in range(len(probs))
        )
        return ParsedMechanism(kind, mode, fs=fs, parts=parts)
    raise InvalidInputError(f"unknown mechanism kind {kind!r}")


def _read_multi_mechanism(rows: list, head: dict, mode: str) -> ParsedMechanism:
    m = head.get("items")
    if not isinstance(m, int) or m < 1:
        raise InvalidInputError(f"multi mechanism header needs an item count: {head}")
    tables = {}
    support = []
    lotteries: dict = {}
    payments: dict = {}
    owner_rows = []
    for obj in rows[1:]:
        if "bidder" in obj:
            tables[obj["bidder"]] = [
                Valuation(m, _parse_row(t, mode), mode) for t in obj["tables"]
            ]
        elif "support" in obj:
            support.append((tuple(obj["support"]), parse_number(obj["prob"], mode)))
        elif "assignment" in obj:
            owner_rows.append(obj)
        elif "pay" in obj:
            payments[tuple(obj["profile"])] = _parse_row(obj["pay"], mode)
        else:
            raise InvalidInputError(f"unrecognized mechanism line {obj}")
    if sorted(tables) != list(range(len(tables))):
        raise InvalidInputError("bidder type lines must cover 0..n-1")
    types = [tables[i] for i in range(len(tables))]
    inst = MultiItemInstance(m, types, support, mode)
    from .multi import enumerate_assignments

    index = {a: k for k, a in enumerate(enumerate_assignments(inst.n, m))}
    for obj in owner_rows:
        owners = tuple(-1 if o is None else o for o in obj["assignment"])
        if owners not in index:
            raise InvalidInputError(f"assignment {obj['assignment']} is invalid")
        lotteries.setdefault(tuple(obj["profile"]), []).append(
            (index[owners], parse_number(obj["prob"], mode))
        )
    mech = MultiMechanism(inst, lotteries, payments)
    return ParsedMechanism(MULTI, mode, mech=mech)


# ---------------------------------------------------------------------------
# reports


def witness_line(w: Witness, mode: str) -> str:
    def enc(v):
        if v is None or isinstance(v, (int, str)):
            return v
        if isinstance(v, tuple):
            return [enc(c) for c in v]
        return format_number(v, mode)

    return dumps_line(
        {
            "bidder": w.bidder,
            "check": w.check,
            "detail": w.detail,
            "deviation": enc(w.deviation),
            "lhs": enc(w.lhs),
            "profile": enc(w.profile),
            "relation": w.relation,
            "rhs": enc(w.rhs),
        }
    )


def write_report(report: VerifyReport, mode: str) -> str:
    """Witness lines followed by one summary line."""
    out = [witness_line(w, mode) for w in report.witnesses]
    out.append(
        dumps_line(
            {
                "checks": {k: bool(v) for k, v in sorted(report.checks.items())},
                "passed": report.passed,
                "witnesses": len(report.witnesses),
            }
        )
    )
    return "".join(out)


def read_report(text: str) -> tuple:
    """Decode a verify report into (passed, checks, raw witness dicts)."""
    rows = _records(text)
    summary = rows[-1]
    if "passed" not in summary:
        raise InvalidInputError("report lacks a summary line")
    return bool(summary["passed"]), dict(summary.get("checks", {})), rows[:-1]


def ledger_line(ledger: QueryLedger) -> str:
    snap = ledger.snapshot()
    return dumps_line(
        {
            "budget": snap["budget"],
            "conditional_queries": snap["conditional"],
            "point_queries": snap["point"],
            "total": snap["point"] + snap["conditional"],
        }
    )
