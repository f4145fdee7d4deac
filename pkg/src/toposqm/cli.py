"""Command-line front end: ``toposqm <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import checks, linalg
from .contexts import ContextUniverse, build_universe, characters
from .covariance import covariance_check, truth_value, twist_universe
from .daseinisation import das_proj, das_sa
from .errors import ToposError
from .presheaf import check_natural
from .quantity import arrow_rows, dispersion, pair_quotient_iso, quantity_arrow, rows_to_csv, theta
from .tolerance import TolerancePolicy, default_policy

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _policy(args) -> TolerancePolicy:
    tol = TolerancePolicy.from_json(args.tolerances) if args.tolerances else default_policy()
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(TolerancePolicy)
                 if getattr(args, f.name, None) is not None}
    return tol.replace(**overrides) if overrides else tol


def _seed_ops(entry):
    if isinstance(entry, dict):
        return linalg.operator_from_json(entry)
    if isinstance(entry, list):
        return [linalg.operator_from_json(e) for e in entry]
    raise InputError("each seed must be an operator object or a list of operator objects")


def _read_seeds(path, tol, include_trivial, dim=None) -> ContextUniverse:
    data = _load_json(path)
    seeds = data.get("seeds", []) if isinstance(data, dict) else data
    if isinstance(data, dict):
        dim = data.get("dim", dim)
        include_trivial = include_trivial or bool(data.get("include_trivial", False))
    return build_universe([_seed_ops(s) for s in seeds], include_trivial, tol, dim=dim)


def _universe(args, tol) -> ContextUniverse:
    if getattr(args, "universe", None):
        return ContextUniverse.from_json(_load_json(args.universe), tol)
    if getattr(args, "seeds", None):
        return _read_seeds(args.seeds, tol, args.include_trivial)
    raise InputError("give --universe or --seeds")


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands ----------------------------------------------------------------

def cmd_universe(args) -> int:
    tol = _policy(args)
    u = _read_seeds(args.seeds, tol, args.include_trivial, args.dim)
    if args.out:
        Path(args.out).write_text(_dump(u.to_json()))
    if args.dot:
        Path(args.dot).write_text(u.to_dot())
    print(f"{len(u)} context" + ("" if len(u) == 1 else "s"))
    return EXIT_OK


def cmd_daseinise(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    op = linalg.operator_from_json(_load_json(args.operator))
    out = []
    for v in u:
        if args.projection:
            p = das_proj(op, v, args.direction, tol)
            out.append({"context_key": v.key, "context_label": v.label, "direction": args.direction,
                        "matrix": linalg.operator_to_json(p)["entries"]})
        else:
            out.append(das_sa(op, v, args.direction, tol).to_json())
    _emit(_dump(out), args.out)
    return EXIT_OK


def cmd_arrow(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    op = linalg.operator_from_json(_load_json(args.operator))
    modes = ("outer", "inner") if args.mode == "pair" else (args.mode,)
    reports = {m: check_natural(quantity_arrow(op, u, m, tol)).to_json() for m in modes}
    if args.mode == "pair":
        reports["pair"] = check_natural(quantity_arrow(op, u, "pair", tol)).to_json()
    rows = arrow_rows(op, u, tol)
    if args.format == "json":
        text = _dump({"rows": rows, "naturality": reports})
    else:
        text = rows_to_csv(rows)
        for m, r in reports.items():
            text += f"# naturality {m}: ok={r['ok']} checked={r['checked_squares']} violations={len(r['violations'])}\n"
    _emit(text, args.out)
    return EXIT_OK if all(r["ok"] for r in reports.values()) else EXIT_CHECK_FAILED


def cmd_truth(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    p = linalg.operator_from_json(_load_json(args.projection))
    psi = linalg.state_from_json(_load_json(args.state))
    roots = [u.by_label(args.context).key] if args.context else u.keys
    out = []
    for root in roots:
        s = truth_value(p, psi, root, u, tol)
        out.append({"root": root, "root_label": u[root].name,
                    "members": sorted(s.members), "member_labels": sorted(u[k].name for k in s.members)})
    _emit(_dump(out), args.out)
    return EXIT_OK


def cmd_twist(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    unitary = linalg.operator_from_json(_load_json(args.unitary))
    result = {"twisted_universe": twist_universe(unitary, u, tol).to_json()}
    status = EXIT_OK
    if args.operator:
        op = linalg.operator_from_json(_load_json(args.operator))
        psi = linalg.state_from_json(_load_json(args.state)) if args.state else None
        rep = covariance_check(op, unitary, u, psi, tol)
        result["covariance"] = rep.to_json()
        status = EXIT_OK if rep.ok else EXIT_CHECK_FAILED
    _emit(_dump(result), args.out)
    return status


def cmd_kvalue(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    op = linalg.operator_from_json(_load_json(args.operator))
    outer = quantity_arrow(op, u, "outer", tol)
    pair = quantity_arrow(op, u, "pair", tol)
    disp = dispersion(op, u, tol)
    stages = [u.by_label(args.stage).key] if args.stage else u.keys
    out = []
    for key in stages:
        for ch in characters(u[key]):
            out.append({
                "stage": key, "stage_label": u[key].name, "character": u[key].block_label(ch.block),
                "theta_outer": theta(outer.components[key][ch.block]).to_json()["bv"],
                "pair_class": pair_quotient_iso(pair.components[key][ch.block]).to_json()["bv"],
                "dispersion": disp.components[key][ch.block].to_json()["bv"],
            })
    _emit(_dump(out), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    tol = _policy(args)
    only = [n for item in (args.only or []) for n in item.split(",") if n]
    try:
        report = checks.run_suite(args.seed, only, tol)
    except KeyError as exc:
        raise InputError(str(exc).strip("'\"")) from None
    _emit(checks.suite_json(report), args.out)
    if not args.quiet:
        for c in report["checks"]:
            print(f"{c['status']} {c['name']} deviation={c['deviation']}", file=sys.stderr)
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def cmd_export_dot(args) -> int:
    tol = _policy(args)
    u = _universe(args, tol)
    highlight = set()
    if args.operator:
        op = linalg.operator_from_json(_load_json(args.operator))
        rep = check_natural(quantity_arrow(op, u, args.mode, tol))
        highlight = {(v.upper, v.lower) for v in rep.violations}
    _emit(u.to_dot(highlight), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, universe: bool = True):
    g = p.add_argument_group("tolerances")
    g.add_argument("--tolerances", help="JSON file of tolerance overrides (default: $TOPOSQM_TOLERANCES)")
    for f in dataclasses.fields(TolerancePolicy):
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=float, default=None)
    p.add_argument("--out", "-o", help="write output here instead of stdout")
    if universe:
        p.add_argument("--universe", help="universe JSON written by the 'universe' subcommand")
        p.add_argument("--seeds", help="seed operators JSON (alternative to --universe)")
        p.add_argument("--include-trivial", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toposqm", description="Contexts, daseinisation and presheaf checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("universe", help="build a down-closed context universe from seed operators")
    _common(p, universe=False)
    p.add_argument("seeds", help='JSON: {"seeds": [operator | [operator, ...]], "include_trivial": bool}')
    p.add_argument("--include-trivial", action="store_true")
    p.add_argument("--dim", type=int, help="dimension, needed when there are no seeds")
    p.add_argument("--dot", help="also write the Hasse diagram as DOT")
    p.set_defaults(func=cmd_universe)

    p = sub.add_parser("daseinise", help="daseinise an operator into every context")
    _common(p)
    p.add_argument("operator")
    p.add_argument("--direction", choices=("outer", "inner"), default="outer")
    p.add_argument("--projection", action="store_true", help="treat the operator as a projection")
    p.set_defaults(func=cmd_daseinise)

    p = sub.add_parser("arrow", help="tabulate the value functions of an operator")
    _common(p)
    p.add_argument("operator")
    p.add_argument("--mode", choices=("outer", "inner", "pair"), default="pair")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_arrow)

    p = sub.add_parser("truth", help="truth-value sieves of a projection in a state")
    _common(p)
    p.add_argument("projection")
    p.add_argument("state")
    p.add_argument("--context", help="root context (key or label); default all")
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("twist", help="conjugate a universe by a unitary, optionally checking covariance")
    _common(p)
    p.add_argument("unitary")
    p.add_argument("--operator", help="operator or projection for the covariance report")
    p.add_argument("--state", help="state for the truth-covariance part")
    p.set_defaults(func=cmd_twist)

    p = sub.add_parser("kvalue", help="k-extension values: embedded outer function, pair class, dispersion")
    _common(p)
    p.add_argument("operator")
    p.add_argument("--stage", help="stage context (key or label); default all")
    p.set_defaults(func=cmd_kvalue)

    p = sub.add_parser("check", help="run the invariant suite on the stock fixtures")
    _common(p, universe=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", action="append", help=f"check name(s), comma separated: {', '.join(checks.CHECKS)}")
    p.add_argument("--quiet", "-q", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-dot", help="Hasse diagram, highlighting naturality violations of an arrow")
    _common(p)
    p.add_argument("--operator")
    p.add_argument("--mode", choices=("outer", "inner", "pair"), default="outer")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except json.JSONDecodeError as exc:
        print(f"error: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
    except (OSError, ToposError, KeyError, ValueError) as exc:
        index = getattr(exc, "index", None)
        suffix = f" (seed {index})" if index is not None else ""
        print(f"error: {type(exc).__name__}: {exc}{suffix}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
