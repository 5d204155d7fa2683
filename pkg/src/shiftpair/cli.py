"""Command-line front end.

Exit codes: 0 every check met, 1 a mathematical check failed or was
inconclusive, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import corpus
from .conditions import check_condition_i, check_condition_ii, default_grid
from .config import SCHEMA_VERSION, Config, ConfigError, load_config
from .metric import ClosureError, NonMemberError, verify_closure
from .scalar_fn import DomainError
from .seeding import stream
from .solver import CONVERGED, UNIQUE, picard, probe_uniqueness, write_trace_csv
from .verifier import check_contraction, search_counterexample

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("+inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _parse_params(items: list[str] | None) -> dict:
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            params[key] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    return params


def _load(args) -> tuple[Config, str]:
    if args.config and args.instance:
        raise UsageError("use either --config or --instance, not both")
    if args.config:
        cfg = load_config(args.config)
        source = str(args.config)
    elif args.instance:
        try:
            inst = corpus.instance(args.instance, **_parse_params(args.param))
        except corpus.UnknownInstance as exc:
            raise UsageError(exc.args[0]) from None
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        cfg = inst.as_config()
        source = f"instance:{args.instance}"
    else:
        raise UsageError("no input: pass --config PATH or --instance NAME")
    if args.seed is not None:
        cfg.checks.seed = args.seed
    return cfg, source


# ---------------------------------------------------------------------------
# commands; each returns (exit code, results dict, human-readable lines)


def cmd_check_pair(cfg: Config, args):
    cfg.require("pair")
    checks = cfg.checks.resolved(cfg.space)
    cond_i = check_condition_i(cfg.pair, seed=stream(checks.seed, "condition_i"), n=checks.n_condition_i,
                               tol_eq=checks.tol_eq, tol_ord=checks.tol_ord, u_max=checks.u_max)
    cond_ii = check_condition_ii(cfg.pair, default_grid(cfg.pair, checks.u_max, checks.grid_points), tol=checks.tol)
    code = OK if cond_i.passed and cond_ii.passed else FAILED
    lines = [
        f"condition (i):  {cond_i.verdict}  margin={cond_i.margin:.6g}  samples={cond_i.samples_used}"
        f"  violations={cond_i.failures}",
        f"condition (ii): {cond_ii.verdict}  min gap={cond_ii.margin:.6g}  grid={cond_ii.samples_used}"
        f"  failing points={cond_ii.failures}",
    ]
    for w in cond_i.witnesses[:1]:
        lines.append(f"  (i) witness: u={w['u']!r} v={w['v']!r} psi(u)={w['psi_u']!r} phi(v)={w['phi_v']!r}")
    for w in cond_ii.witnesses[:1]:
        lines.append(f"  (ii) no strict gap at w={w['w']!r}: psi limits {w['psi_limits']} phi limits {w['phi_limits']}")
    return code, {"condition_i": cond_i.to_dict(), "condition_ii": cond_ii.to_dict()}, lines


def _witness_line(w: dict | None) -> str:
    if w is None:
        return "  no off-diagonal pairs evaluated"
    return (f"  witness x={w['x']!r} y={w['y']!r} d(x,y)={w['d_xy']!r} d(Tx,Ty)={w['d_txty']!r}"
            f" psi={w['psi']!r} phi={w['phi']!r}")


def cmd_check_contraction(cfg: Config, args):
    cfg.require("space", "map", "pair")
    checks = cfg.checks.resolved(cfg.space)
    closure = verify_closure(cfg.space, cfg.map, seed=stream(checks.seed, "closure"), n=checks.n_closure)
    results = {"closure": closure.to_dict()}
    lines = [f"closure: {'ok' if closure.ok else 'VIOLATED'} ({closure.checked} points)"]
    if not closure.ok:
        for x, tx in closure.witnesses[:1]:
            lines.append(f"  T({x!r}) = {tx!r} is not in the space")
        return FAILED, results, lines
    sampled = check_contraction(cfg.space, cfg.map, cfg.pair, seed=checks.seed, n=checks.n_contraction,
                                tol=checks.tol, closure_n=checks.n_closure)
    searched = search_counterexample(cfg.space, cfg.map, cfg.pair, seed=checks.seed, budget=checks.search_budget,
                                     tol=checks.tol, closure_n=checks.n_closure)
    results["sampled"] = sampled.to_dict()
    results["search"] = searched.to_dict()
    for label, rep in (("sampled", sampled), ("search", searched)):
        lines.append(f"{label}: {rep.verdict}  worst margin={rep.worst_margin:.6g}  samples={rep.samples_used}"
                     f"  diagonal margin={rep.diagonal_margin:.6g}")
        lines.append(_witness_line(rep.witness))
    code = OK if sampled.passed and searched.passed else FAILED
    return code, results, lines


def cmd_solve(cfg: Config, args):
    cfg.require("space", "map")
    x0 = args.x0 if args.x0 is not None else cfg.solver.x0
    if x0 is None:
        raise ConfigError("solver.x0", "missing (or pass --x0)")
    tol = args.tol if args.tol is not None else cfg.solver.tol_fix
    max_iter = args.max_iter if args.max_iter is not None else cfg.solver.max_iter
    if not cfg.space.contains(x0):
        raise UsageError(f"x0={x0!r} is not a member of {cfg.space.description}")
    trace = picard(cfg.space, cfg.map, x0, tol_fix=tol, max_iter=max_iter)
    if args.trace_out:
        with open(args.trace_out, "w", newline="", encoding="utf-8") as fh:
            write_trace_csv(trace, fh)
    lines = [
        f"verdict: {trace.verdict}",
        f"fixed point: {trace.fixed_point!r}",
        f"residual: {trace.residual!r}",
        f"iterations: {trace.iterations}",
        f"step-distance increases: {trace.monotone_violations}",
    ]
    return (OK if trace.verdict == CONVERGED else FAILED), {"x0": x0, **trace.to_dict()}, lines


def cmd_probe_uniqueness(cfg: Config, args):
    cfg.require("space", "map")
    checks = cfg.checks.resolved(cfg.space)
    n = args.starts if args.starts is not None else checks.n_starts
    if n < 2:
        raise UsageError("--starts must be >= 2")
    report = probe_uniqueness(cfg.space, cfg.map, seed=stream(checks.seed, "uniqueness"), n_starts=n,
                              tol_fix=cfg.solver.tol_fix, tol_unique=checks.tol_unique,
                              max_iter=cfg.solver.max_iter)
    lines = [f"verdict: {report.verdict}", f"max pairwise distance: {report.max_pairwise_distance!r}"]
    for run, z in zip(report.runs, report.limits):
        lines.append(f"  start {run['start']!r} -> {z!r} ({run['verdict']}, {run['iterations']} iterations)")
    return (OK if report.verdict == UNIQUE else FAILED), report.to_dict(), lines


def cmd_corpus(args):
    if args.action == "list":
        names = corpus.list_instances()
        return OK, {"instances": names}, names, None
    if not args.name:
        raise UsageError(f"corpus {args.action} needs an instance name")
    try:
        inst = corpus.instance(args.name, **_parse_params(args.param))
    except corpus.UnknownInstance as exc:
        raise UsageError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    cfg = inst.as_config()
    if args.seed is not None:
        cfg.checks.seed = args.seed
    if args.action == "export":
        doc = cfg.to_dict()
        return OK, {"config": doc}, [json.dumps(_clean(doc), indent=2, sort_keys=True)], cfg
    result = corpus.run_instance(inst, cfg.checks, cfg.solver)
    lines = [f"instance: {inst.name} {inst.params or ''}".rstrip()]
    for key, met in result["expectations"].items():
        lines.append(f"  {key:<16} {'met' if met else 'NOT MET'}")
    c = result["contraction"]
    if c is not None:
        lines.append(f"  contraction worst margin {c['worst_margin']:.6g} ({c['verdict']})")
    lines.append(f"  fixed point {result['solve']['fixed_point']!r} after {result['solve']['iterations']} iterations")
    return (OK if result["all_met"] else FAILED), result, lines, cfg


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="JSON config file")
    common.add_argument("--instance", metavar="NAME", default=argparse.SUPPRESS, help="use a corpus instance")
    common.add_argument("--param", action="append", metavar="KEY=VALUE", default=argparse.SUPPRESS,
                        help="instance parameter, e.g. k=0.5 (repeatable)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit one JSON document")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override checks.seed")

    parser = argparse.ArgumentParser(prog="shiftpair", description=__doc__.splitlines()[0])
    parser.add_argument("--config", metavar="PATH")
    parser.add_argument("--instance", metavar="NAME")
    parser.add_argument("--param", action="append", metavar="KEY=VALUE")
    parser.add_argument("--json", action="store_true")
    parser.add_argument("--seed", type=int)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("check-pair", parents=[common], help="check both pair conditions")
    sub.add_parser("check-contraction", parents=[common], help="closure, sampled check and counterexample search")
    p = sub.add_parser("solve", parents=[common], help="Picard iteration")
    p.add_argument("--x0", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trace-out", metavar="PATH")
    p = sub.add_parser("probe-uniqueness", parents=[common], help="Picard from several starts")
    p.add_argument("--starts", type=int)
    p = sub.add_parser("corpus", parents=[common], help="list, run or export built-in instances")
    p.add_argument("action", choices=["list", "run", "export"])
    p.add_argument("name", nargs="?")
    return parser


_COMMANDS = {
    "check-pair": cmd_check_pair,
    "check-contraction": cmd_check_contraction,
    "solve": cmd_solve,
    "probe-uniqueness": cmd_probe_uniqueness,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    doc: dict = {"schema_version": SCHEMA_VERSION, "command": args.command}
    try:
        if args.command == "corpus":
            code, results, lines, cfg = cmd_corpus(args)
            if cfg is not None:
                doc["config"] = cfg.echo()
            if args.action == "export" and args.json:
                lines = []
        else:
            cfg, source = _load(args)
            doc["source"] = source
            doc["config"] = cfg.echo()
            code, results, lines = _COMMANDS[args.command](cfg, args)
        doc["results"] = results
    except (ConfigError, UsageError, NonMemberError) as exc:
        code = USAGE
        doc["error"] = str(exc)
        lines = []
        if not args.json:
            print(f"error: {exc}", file=sys.stderr)
    except (ClosureError, DomainError) as exc:
        code = FAILED
        doc["error"] = str(exc)
        lines = []
        if not args.json:
            print(f"check failed: {exc}", file=sys.stderr)

    doc["exit_code"] = code
    if args.json:
        print(json.dumps(_clean(doc), indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

