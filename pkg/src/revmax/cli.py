"""Command-line front end.

Subcommands: solve, solve-det, solve-multi, verify, revenue, ratio,
decompose, oracle-stats.  Results go to stdout (or --output for file
artifacts), diagnostics to stderr.  Exit codes: 0 success/pass, 1
verification failed (witnesses reported) or point outside the hull
(certificate reported), 2 input error, 3 resource limit or query budget.

Runs are fully deterministic: identical inputs and flags give
byte-identical output, with every quantity an exact rational string in
exact mode.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import io
from .brute import EnumLimits, enumerate_deterministic_optimal
from .errors import BudgetError, InvalidInputError, SizeLimitError
from .model import (
    EXACT,
    FLOAT,
    FeasibilitySystem,
    approximation_ratio,
    expected_revenue,
    interim_of,
)
from .multi import MAX_ASSIGNMENTS, check_multi, solve_multi
from .optimal import SolveOptions, decompose_allocation, solve_optimal
from .oracle import ExplicitOracle, materialize, with_budget
from .verify import (
    VerifyReport,
    check_expost_ir,
    check_extension,
    check_feasible,
    check_ir,
    check_truthful,
    check_universal,
)


def _read(path: str) -> str:
    return Path(path).read_text()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _report(command: str, mode: str, seed: Optional[int], **extra) -> None:
    obj = {"command": command, "mode": mode, "seed": seed}
    obj.update(extra)
    sys.stdout.write(io.dumps_line(obj))


def _instance(args) -> io.ParsedInstance:
    return io.read_instance(_read(args.instance), args.mode)


def _single(args) -> io.ParsedInstance:
    inst = _instance(args)
    if inst.model == io.MULTI_ITEM:
        raise InvalidInputError(
            f"{args.command} does not take multi-item instances; see solve-multi"
        )
    return inst


def _options(inst: io.ParsedInstance, args) -> SolveOptions:
    return SolveOptions(
        allow_negative_payments=getattr(args, "allow_negative_payments", False),
        mode=inst.mode,
    )


def _cmd_solve(args) -> int:
    inst = _single(args)
    result = solve_optimal(inst.dist, inst.fs, _options(inst, args))
    _emit(io.write_mechanism(result.interim), args.output)
    _report(
        "solve",
        inst.mode,
        args.seed,
        expost=result.expost is not None,
        revenue=io.format_number(result.revenue, inst.mode),
    )
    return 0


def _cmd_solve_det(args) -> int:
    inst = _single(args)
    limits = EnumLimits(max_cells=args.limits) if args.limits else None
    mech, revenue = enumerate_deterministic_optimal(inst.dist, inst.fs, limits)
    _emit(io.write_mechanism(mech), args.output)
    _report(
        "solve-det",
        inst.mode,
        args.seed,
        revenue=io.format_number(revenue, inst.mode),
    )
    return 0


def _cmd_solve_multi(args) -> int:
    inst = _instance(args)
    if inst.model != io.MULTI_ITEM:
        raise InvalidInputError("solve-multi needs a multi-item instance")
    cap = args.limits or MAX_ASSIGNMENTS
    options = SolveOptions(
        allow_negative_payments=args.allow_negative_payments, mode=inst.mode
    )
    mech, revenue = solve_multi(inst.multi, options, max_assignments=cap)
    _emit(io.write_mechanism(mech), args.output)
    _report(
        "solve-multi",
        inst.mode,
        args.seed,
        revenue=io.format_number(revenue, inst.mode),
    )
    return 0


def _as_interim(parsed: io.ParsedMechanism):
    if parsed.kind == io.INTERIM:
        return parsed.mech
    if parsed.kind == io.EXPOST:
        return interim_of(parsed.mech)
    if parsed.kind == io.DETERMINISTIC:
        return parsed.mech.as_interim()
    raise InvalidInputError(f"no interim form for mechanism kind {parsed.kind!r}")


def _require_same_grid(grid, inst: io.ParsedInstance) -> None:
    if inst.dist is None or grid != inst.dist.grid:
        raise InvalidInputError("mechanism and instance disagree on the value grid")


def _require_same_multi(mech_inst, inst: io.ParsedInstance) -> None:
    ours = inst.multi
    if (
        ours is None
        or mech_inst.m != ours.m
        or mech_inst.types != ours.types
        or mech_inst.support != ours.support
    ):
        raise InvalidInputError("mechanism embeds a different multi-item instance")


def _pick_fs(mech: io.ParsedMechanism, inst: io.ParsedInstance) -> FeasibilitySystem:
    if mech.fs is not None and inst.model == io.SINGLE_PARAMETER:
        if mech.fs.vectors != inst.fs.vectors:
            raise InvalidInputError(
                "mechanism and instance disagree on the feasible vectors"
            )
    return mech.fs or inst.fs


def _cmd_verify(args) -> int:
    inst = _instance(args)
    mech = io.read_mechanism(_read(args.mechanism), args.mode)
    if mech.kind == io.MULTI:
        if inst.model != io.MULTI_ITEM:
            raise InvalidInputError("a multi mechanism needs a multi-item instance")
        _require_same_multi(mech.mech.inst, inst)
        report = check_multi(mech.mech)
    elif mech.kind == io.UNIVERSAL:
        _require_same_grid(mech.parts[0][0].grid, inst)
        _pick_fs(mech, inst)
        report = check_universal(mech.parts)
    else:
        interim = _as_interim(mech)
        _require_same_grid(interim.grid, inst)
        fs = _pick_fs(mech, inst)
        parts = []
        if mech.kind == io.EXPOST:
            parts.append(check_expost_ir(mech.mech))
        parts.extend(
            [
                check_truthful(interim),
                check_ir(interim),
                check_feasible(interim, fs),
                check_extension(interim),
            ]
        )
        report = VerifyReport.merge(*parts)
    _emit(io.write_report(report, mech.mode), args.output)
    return 0 if report.passed else 1


def _mechanism_revenue(mech: io.ParsedMechanism, inst: io.ParsedInstance):
    if mech.kind == io.MULTI:
        if inst.model != io.MULTI_ITEM:
            raise InvalidInputError("a multi mechanism needs a multi-item instance")
        _require_same_multi(mech.mech.inst, inst)
        pays = mech.mech.payments
        return sum(q * sum(pays[t]) for t, q in inst.multi.support.items())
    if mech.kind == io.UNIVERSAL:
        _require_same_grid(mech.parts[0][0].grid, inst)
        return sum(
            w * expected_revenue(part.as_interim(), inst.dist)
            for part, w in mech.parts
        )
    interim = _as_interim(mech)
    _require_same_grid(interim.grid, inst)
    return expected_revenue(interim, inst.dist)


def _cmd_revenue(args) -> int:
    inst = _instance(args)
    mech = io.read_mechanism(_read(args.mechanism), args.mode)
    revenue = _mechanism_revenue(mech, inst)
    sys.stdout.write(f"{io.format_number(revenue, mech.mode)}\n")
    return 0


def _cmd_ratio(args) -> int:
    inst = _instance(args)
    mech = io.read_mechanism(_read(args.mechanism), args.mode)
    revenue = _mechanism_revenue(mech, inst)
    if inst.model == io.MULTI_ITEM:
        _, opt = solve_multi(inst.multi, SolveOptions(mode=inst.mode))
    else:
        opt = solve_optimal(inst.dist, inst.fs, _options(inst, args)).revenue
    alpha = approximation_ratio(revenue, opt)
    sys.stdout.write(f"{io.format_number(alpha, mech.mode)}\n")
    return 0


def _cmd_decompose(args) -> int:
    rows = io._records(_read(args.point))
    head, mode = io._header(rows, "kind", args.mode)
    if head["kind"] != "point":
        raise InvalidInputError(f'decompose needs a {{"kind":"point"}} file, got {head}')
    vectors = []
    point = None
    for obj in rows[1:]:
        if "feasible" in obj:
            vectors.append(obj["feasible"])
        elif "point" in obj:
            if point is not None:
                raise InvalidInputError("duplicate point line")
            point = io._parse_row(obj["point"], mode)
        else:
            raise InvalidInputError(f"unrecognized line {obj}")
    if point is None or not vectors:
        raise InvalidInputError("decompose needs feasible lines and one point line")
    fs = FeasibilitySystem(len(point), vectors)
    dec = decompose_allocation(point, fs, mode)
    if dec.in_hull:
        out = [io.dumps_line({"in_hull": True})]
        for f, w in dec.terms:
            out.append(io.dumps_line({"vector": f, "weight": io.format_number(w, mode)}))
        _emit("".join(out), args.output)
        return 0
    a, b = dec.certificate
    out = io.dumps_line(
        {
            "certificate": {
                "a": [io.format_number(c, mode) for c in a],
                "b": io.format_number(b, mode),
            },
            "in_hull": False,
        }
    )
    _emit(out, args.output)
    return 1


def _cmd_oracle_stats(args) -> int:
    inst = _single(args)
    oracle = with_budget(ExplicitOracle(inst.dist), args.budget)
    materialize(oracle)
    _emit(io.ledger_line(oracle.ledger), args.output)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--exact",
        dest="mode",
        action="store_const",
        const=EXACT,
        help="force exact rational arithmetic (default: the file's mode)",
    )
    group.add_argument(
        "--float",
        dest="mode",
        action="store_const",
        const=FLOAT,
        help="force floating-point arithmetic",
    )
    p.set_defaults(mode=None)
    p.add_argument("--seed", type=int, default=None, help="echoed into run reports")
    p.add_argument("--output", metavar="PATH", help="write the file artifact here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="revmax",
        description="Compute, verify, and benchmark revenue-optimal truthful "
        "auctions over correlated bidder distributions.",
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("solve", help="revenue-optimal truthful-in-expectation LP")
    p.add_argument("instance")
    p.add_argument("--allow-negative-payments", action="store_true")
    _add_common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("solve-det", help="best deterministic truthful mechanism")
    p.add_argument("instance")
    p.add_argument("--limits", type=int, metavar="CELLS", help="grid-cell cap")
    _add_common(p)
    p.set_defaults(fn=_cmd_solve_det)

    p = sub.add_parser("solve-multi", help="multi-item assignment-lottery LP")
    p.add_argument("instance")
    p.add_argument("--allow-negative-payments", action="store_true")
    p.add_argument("--limits", type=int, metavar="COUNT", help="assignment cap")
    _add_common(p)
    p.set_defaults(fn=_cmd_solve_multi)

    p = sub.add_parser("verify", help="run every applicable check, report witnesses")
    p.add_argument("instance")
    p.add_argument("mechanism")
    _add_common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("revenue", help="expected revenue of a mechanism file")
    p.add_argument("instance")
    p.add_argument("mechanism")
    _add_common(p)
    p.set_defaults(fn=_cmd_revenue)

    p = sub.add_parser("ratio", help="approximation ratio against the LP optimum")
    p.add_argument("instance")
    p.add_argument("mechanism")
    p.add_argument("--allow-negative-payments", action="store_true")
    _add_common(p)
    p.set_defaults(fn=_cmd_ratio)

    p = sub.add_parser("decompose", help="convex decomposition or hull certificate")
    p.add_argument("point", help='file with {"kind":"point"} header')
    _add_common(p)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("oracle-stats", help="materialize through the query interface")
    p.add_argument("instance")
    p.add_argument("--budget", type=int, default=None, help="query cap")
    _add_common(p)
    p.set_defaults(fn=_cmd_oracle_stats)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SizeLimitError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
