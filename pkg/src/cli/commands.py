"""
Command-line surface: argument parsing, logging setup and subcommand handlers

stdout carries JSON only (one object, or JSON lines for classify);
diagnostics and progress go to stderr through logging.
"""

import argparse
import json
import logging
import sys
import time
from math import ceil
from typing import List, Optional

from src.core.bounds import (BoundParams, choose_C, corollary_bound, derive_table_bound,
                             explicit_bound, least_nonresidue, rank_conditions, table_bound,
                             trevino_check)
from src.core.catalog import (catalog_get, catalog_list, classification_elements, is_proven,
                              load_entries)
from src.core.config import COLUMN_ORDERS, AppConfig
from src.core.errors import InvariantViolation, TernaryError, UsageError
from src.core.feasibility import INCONCLUSIVE, classify_search, nonexistence_suite, sweep
from src.core.lattice import OFLattice, check_box_universal, lattice_from_form, represents
from src.core.qfield import make_field
from src.core.reporting import RunReport, load_elements
from src.core.search_manager import SearchManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INCONCLUSIVE = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
# argparse keys that never reach a report
RUNTIME_KEYS = {"func", "jobs", "verbose", "quiet", "config", "checkpoint", "output"}


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 3"""

    def error(self, message):
        raise UsageError(message)


def setup_logging(level: str):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LOG_FORMAT, stream=sys.stderr, force=True)


def emit(data: dict):
    sys.stdout.write(json.dumps(data, sort_keys=True) + "\n")
    sys.stdout.flush()


def report_params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in RUNTIME_KEYS}


def _search_config(args, config: AppConfig):
    search = config.search
    if getattr(args, "budget", None) is not None:
        search.node_budget = args.budget
    if getattr(args, "time_budget", None) is not None:
        search.time_budget_s = args.time_budget
    if getattr(args, "column_order", None):
        search.column_order = args.column_order
    if getattr(args, "no_symmetry", False):
        search.symmetry_reduction = False
    return search


def _lattice_from_args(args) -> OFLattice:
    if args.lattice:
        return catalog_get(args.lattice)
    if args.form is None or args.D is None:
        raise UsageError("give --lattice NAME or --form with --D")
    ctx = make_field(args.D)
    values = [ctx.parse(t) for t in args.form.split(";")]
    if len(values) == 3:
        values += [ctx.element(0)] * 3
    if len(values) != 6:
        raise UsageError("--form takes 3 (diagonal) or 6 coefficients: xx;yy;zz;xy;xz;yz")
    keys = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
    return lattice_from_form(ctx, dict(zip(keys, values)), 3, label="form")


# subcommand handlers; each returns (outcome dict, exit code)


def cmd_bounds(args, config: AppConfig):
    gamma2 = args.gamma2 or config.bounds.gamma2_mode
    out = {"m": args.m, "rank": args.rank}
    if args.m <= 2:
        out["bound"] = table_bound(args.m, args.rank)
        out["source"] = "table"
        if args.derive:
            derived = derive_table_bound(args.m, args.rank)
            if derived != out["bound"]:
                raise InvariantViolation(f"derived bound {derived} != table {out['bound']}")
            out["derived"] = derived
    else:
        exact = explicit_bound(args.m, args.rank)
        out["bound"] = ceil(exact)
        out["bound_exact"] = f"{exact.numerator}/{exact.denominator}"
        out["source"] = "explicit"
    if args.params:
        params = BoundParams(m=args.m, rank=args.rank, gamma2_mode=gamma2,
                             **dict(_int_pair(p) for p in args.params))
        cb = corollary_bound(params)
        out["corollary"] = {"params": params.to_dict(), "sqrt_bound": cb.sqrt_bound,
                            "delta_bound": cb.delta_bound}
    if args.field is not None:
        cd = {"C1": 2, "C2": 2, "D1": 1, "D2": 1}
        cd.update(dict(_int_pair(p) for p in args.params or [] if p.split("=")[0] in cd))
        checks = rank_conditions(args.field, args.m, **cd)
        out["conditions"] = {str(r): [c.to_dict() for c in cs] for r, cs in checks.items()}
    if args.binary:
        a, b, c = (int(x) for x in args.binary.split(","))
        choice = choose_C([[a, b], [b, c]], gamma2)
        out["choose_C"] = {"p": choice.p, "C": choice.C, "case": choice.case}
    return out, EXIT_OK


def _int_pair(text: str):
    key, _, value = text.partition("=")
    try:
        return key.strip(), int(value)
    except ValueError:
        raise UsageError(f"expected KEY=INT, got {text!r}")


def cmd_nonresidue(args, config: AppConfig):
    out = {}
    if args.p is not None:
        out["p"] = args.p
        out["gamma"] = least_nonresidue(args.p, args.gamma2 or config.bounds.gamma2_mode)
    if args.check_limit is not None:
        out["trevino_limit"] = args.check_limit
        out["trevino_holds"] = trevino_check(args.check_limit)
    if not out:
        raise UsageError("give --p and/or --check-limit")
    return out, EXIT_OK


def cmd_nonexist(args, config: AppConfig):
    search = _search_config(args, config)
    ctx = make_field(args.D)
    elements = load_elements(args.elements, ctx) if args.elements else None
    with SearchManager(config.runtime.jobs, progress_interval_s=search.progress_interval_s) as m:
        verdict = nonexistence_suite(args.D, args.set, args.classical, search,
                                     config.runtime.jobs, args.checkpoint, elements, m)
    code = EXIT_INCONCLUSIVE if verdict.outcome.status == INCONCLUSIVE else EXIT_OK
    return verdict.to_dict(), code


def cmd_classify(args, config: AppConfig):
    search = _search_config(args, config)
    if args.cap is not None:
        search.classify_cap = args.cap
    ctx = make_field(args.D)
    if args.elements:
        S = load_elements(args.elements, ctx)
    else:
        S = classification_elements(args.D, args.trace_bound)
    with SearchManager(config.runtime.jobs, progress_interval_s=search.progress_interval_s) as m:
        result = classify_search(ctx, S, search, args.classical, config.runtime.jobs, m)
    for record in result.records():
        emit(dict(record, kind="candidate"))
    out = result.summary()
    out["elements"] = [x.format() for x in S]
    code = EXIT_INCONCLUSIVE if result.outcome.status == INCONCLUSIVE else EXIT_OK
    return out, code


def cmd_verify(args, config: AppConfig):
    trace_bound = args.trace_bound or config.verify.trace_bound
    norm_bound = args.norm_bound if args.norm_bound is not None else config.verify.norm_bound
    if args.proven:
        lattices = catalog_list(proven_only=True)
    else:
        lattices = [_lattice_from_args(args)]
    reports = []
    with SearchManager(config.runtime.jobs) as m:
        for L in lattices:
            reports.append(check_box_universal(L, trace_bound, config.runtime.jobs, norm_bound, m,
                                               config.verify.chunk_size).to_dict())
    failures = sum(len(r["failures"]) for r in reports)
    return {"reports": reports, "total_failures": failures}, EXIT_OK


def cmd_represent(args, config: AppConfig):
    L = _lattice_from_args(args)
    alpha = L.ctx.parse(args.alpha)
    witness = represents(L, alpha)
    out = {"lattice": L.label, "alpha": alpha.format(), "represented": witness is not None}
    if witness is not None:
        out["witness"] = witness.to_dict()
    return out, EXIT_OK


def cmd_catalog(args, config: AppConfig):
    if args.name:
        lattices = [catalog_get(args.name)]
    else:
        lattices = catalog_list(args.D, args.proven)
    entries = load_entries()
    records = []
    for L in lattices:
        rec = L.to_dict()
        rec["proven"] = is_proven(L.label)
        rec["shape"] = entries[L.label].shape
        records.append(rec)
    return {"count": len(records), "entries": records}, EXIT_OK


def cmd_sweep(args, config: AppConfig):
    if args.stop < args.start:
        raise UsageError("--to must not be below --from")
    search = _search_config(args, config)
    table = sweep(args.start, args.stop, args.set, args.classical, search, config.runtime.jobs)
    if args.output:
        table.to_csv(args.output, index=False)
        logger.info(f"Sweep summary written to {args.output}")
    counts = {k: int(v) for k, v in table["status"].value_counts().items()}
    code = EXIT_INCONCLUSIVE if counts.get(INCONCLUSIVE) else EXIT_OK
    return {"rows": json.loads(table.to_json(orient="records")), "status_counts": counts}, code


# parser


def _add_search_flags(p):
    p.add_argument("--classical", action="store_true", help="off-diagonals in O_F")
    p.add_argument("--budget", type=int, help="node budget")
    p.add_argument("--time-budget", type=float, help="time budget in seconds")
    p.add_argument("--column-order", choices=COLUMN_ORDERS)
    p.add_argument("--no-symmetry", action="store_true", help="disable sign-symmetry reduction")


def _add_lattice_flags(p):
    p.add_argument("--lattice", help="catalog name")
    p.add_argument("--form", help="xx;yy;zz[;xy;xz;yz] with a,b,q coefficients")
    p.add_argument("--D", type=int)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ternary-universal",
                            description="Universal ternary lattices over real quadratic fields")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true")
    parser.add_argument("--jobs", type=int, help="worker processes (default $TERNARY_JOBS or 1)")
    parser.add_argument("--config", help="JSON configuration file")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    sub.required = True

    p = sub.add_parser("bounds", help="discriminant bounds")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rank", type=int, required=True, choices=range(3, 8))
    p.add_argument("--derive", action="store_true", help="recompute the tabulated value")
    p.add_argument("--gamma2", type=int, choices=(5, 7))
    p.add_argument("--params", nargs="*", help="KEY=INT for p1 p2 q1 q2 C1 C2 D1 D2")
    p.add_argument("--field", type=int, help="evaluate the rank conditions for this D")
    p.add_argument("--binary", help="a,b,c of a binary Gram [[a,b],[b,c]] for the C selector")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("nonresidue", help="least quadratic non-residues")
    p.add_argument("--p", type=int)
    p.add_argument("--gamma2", type=int, choices=(5, 7))
    p.add_argument("--check-limit", type=int, help="certify the non-residue bound up to here")
    p.set_defaults(func=cmd_nonresidue)

    p = sub.add_parser("nonexist", help="nonexistence search for one D")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--set", choices=("prescribed", "generic", "fallback", "table"),
                   default="prescribed")
    p.add_argument("--elements", help="file of a,b,q lines replacing the prescribed set")
    p.add_argument("--checkpoint", help="checkpoint file, resumed when present")
    _add_search_flags(p)
    p.set_defaults(func=cmd_nonexist)

    p = sub.add_parser("classify", help="candidate lattices representing a set")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--elements")
    p.add_argument("--trace-bound", type=int, default=16)
    p.add_argument("--cap", type=int, help="witness cap before flagging saturation")
    _add_search_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="box check of universality")
    _add_lattice_flags(p)
    p.add_argument("--proven", action="store_true", help="all proven-universal catalog lattices")
    p.add_argument("--trace-bound", type=int)
    p.add_argument("--norm-bound", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("represent", help="search a representation of one element")
    _add_lattice_flags(p)
    p.add_argument("--alpha", required=True, help="a,b,q")
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("catalog", help="list catalog lattices")
    p.add_argument("--D", type=int)
    p.add_argument("--name")
    p.add_argument("--proven", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("sweep", help="nonexistence searches over a range of D")
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--set", choices=("prescribed", "generic", "fallback"), default="prescribed")
    p.add_argument("--output", help="CSV file for the summary table")
    _add_search_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        config = AppConfig(args.config)
        if args.jobs is not None:
            if args.jobs < 1:
                raise UsageError("--jobs must be at least 1")
            config.runtime.jobs = args.jobs
        level = "DEBUG" if args.verbose else "WARNING" if args.quiet else config.runtime.log_level
        setup_logging(level)
        outcome, code = args.func(args, config)
        report = RunReport(command=args.command, params=report_params(args), outcome=outcome,
                           wall_time_ms=int((time.time() - started) * 1000))
        emit(report.to_dict())
        return code
    except TernaryError as e:
        sys.stderr.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_UNEXPECTED
