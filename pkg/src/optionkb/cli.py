"""Command-line entry point.

Subcommands: ``annotate`` (COCO folder -> quads), ``serve`` (HTTP service
over a snapshot), ``query`` (offline templates), ``values`` (selector
lists).  Exit codes: 0 success, 1 data error, 2 I/O error, 64 usage error.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import queries
from .ingest import DEFAULT_BASE, IngestError, IngestIoError, ProvenanceRecord, ingest_directory
from .queries import (
    BudgetPoint,
    BudgetRange,
    FixedBudgetQuery,
    FixedTargetQuery,
)
from .rdf import NQuadsSyntaxError, serialize_nquads
from .service import ADDR_ENV_VAR, DEFAULT_ADDR, create_app
from .store import QuadStore

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="optionkb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="annotate a COCO result folder into quads")
    p.add_argument("--input", required=True, help="directory holding .info/.dat files")
    p.add_argument("--doi", required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--authors", required=True, help="comma-separated author names")
    p.add_argument("--year", required=True, type=int)
    p.add_argument("--out", help="write canonical N-Quads to this file")
    p.add_argument("--db", help="merge quads into this snapshot file")
    p.add_argument("--base", default=DEFAULT_BASE, help="IRI prefix for minted identifiers")
    p.add_argument("--strict", action="store_true", help="reject non-monotone best deltas")

    p = sub.add_parser("serve", help="serve the HTTP endpoints over a snapshot")
    p.add_argument("--db", required=True, help="N-Quads snapshot (created if absent)")
    p.add_argument("--addr", help=f"host:port (default {DEFAULT_ADDR}, env {ADDR_ENV_VAR})")

    p = sub.add_parser("query", help="run a query template against a snapshot")
    p.add_argument("--db", required=True)
    p.add_argument("--fixed-budget", action="store_true")
    p.add_argument("--fixed-target", action="store_true")
    p.add_argument("--provenance", action="store_true")
    p.add_argument("--alg", help="comma-separated algorithm labels")
    p.add_argument("--problems", help="comma-separated function ids")
    p.add_argument("--instances", help="comma-separated instance numbers")
    p.add_argument("--dims", help="comma-separated dimensions")
    p.add_argument("--budget", help="b for a point, lo:hi for an inclusive range")
    p.add_argument("--target", type=float)
    p.add_argument("--study", help="DOI or algorithm label")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("values", help="list distinct selector values in a snapshot")
    p.add_argument("--db", required=True)
    p.add_argument("--dimension", required=True, choices=queries.VALUE_DIMENSIONS)
    return parser


def _split_csv(raw: str | None, convert=str):
    if raw is None:
        return None
    values = [part.strip() for part in raw.split(",") if part.strip()]
    return [convert(v) for v in values]


def _load_store(db: str, parser: _Parser | None = None) -> QuadStore:
    path = Path(db)
    if not path.exists():
        return QuadStore()
    return QuadStore.load(path)


def _cmd_annotate(args, parser) -> int:
    if (args.out is None) == (args.db is None):
        parser.error("exactly one of --out and --db is required")
    authors = _split_csv(args.authors) or []
    try:
        prov = ProvenanceRecord(args.doi, args.title, tuple(authors), args.year)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        quads, report = ingest_directory(args.input, prov, base=args.base, strict=args.strict)
    except IngestIoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    try:
        if args.out:
            Path(args.out).write_bytes(serialize_nquads(quads).encode("utf-8"))
        else:
            store = _load_store(args.db)
            store.bulk_insert(quads)
            store.save(args.db)
    except NQuadsSyntaxError as exc:
        print(f"error: {args.db}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    addr = args.addr or os.environ.get(ADDR_ENV_VAR) or DEFAULT_ADDR
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: bad address {addr!r}, expected host:port", file=sys.stderr)
        return EXIT_USAGE
    db = Path(args.db)
    try:
        store = QuadStore.load(db) if db.exists() else QuadStore()
    except NQuadsSyntaxError as exc:
        print(f"error: {db}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    app = create_app(store)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    # uvicorn returns after SIGINT/SIGTERM shutdown; persist before exiting
    store.save(db)
    return EXIT_OK


def _result_table(store: QuadStore, args, parser) -> queries.ResultTable:
    selectors = {
        "algorithms": _split_csv(args.alg),
        "problems": _split_csv(args.problems, int),
        "instances": _split_csv(args.instances, int),
        "dimensions": _split_csv(args.dims, int),
    }
    if args.fixed_budget:
        if args.budget is None:
            parser.error("--fixed-budget requires --budget")
        text = args.budget
        try:
            if ":" in text:
                lo, hi = text.split(":", 1)
                budget = BudgetRange(int(lo), int(hi))
            else:
                budget = BudgetPoint(int(text))
        except ValueError as exc:
            parser.error(f"bad --budget {text!r}: {exc}")
        return queries.run_fixed_budget(store, FixedBudgetQuery(budget=budget, **selectors))
    if args.fixed_target:
        if args.target is None:
            parser.error("--fixed-target requires --target")
        return queries.run_fixed_target(store, FixedTargetQuery(target=args.target, **selectors))
    if args.study is None:
        parser.error("--provenance requires --study")
    return queries.provenance_table(queries.run_provenance(store, args.study))


def _cmd_query(args, parser) -> int:
    chosen = [args.fixed_budget, args.fixed_target, args.provenance]
    if sum(chosen) != 1:
        parser.error("exactly one of --fixed-budget, --fixed-target, --provenance is required")
    if args.budget is not None and not args.fixed_budget:
        parser.error("--budget only applies to --fixed-budget")
    if args.target is not None and not args.fixed_target:
        parser.error("--target only applies to --fixed-target")
    if args.study is not None and not args.provenance:
        parser.error("--study only applies to --provenance")
    try:
        store = _load_store(args.db)
    except NQuadsSyntaxError as exc:
        print(f"error: {args.db}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        table = _result_table(store, args, parser)
    except ValueError as exc:
        parser.error(str(exc))
    if args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        print(json.dumps(table.to_dict(), separators=(",", ":"), ensure_ascii=False))
    return EXIT_OK


def _cmd_values(args) -> int:
    try:
        store = _load_store(args.db)
    except NQuadsSyntaxError as exc:
        print(f"error: {args.db}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(queries.distinct_values(store, args.dimension), separators=(",", ":")))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "annotate":
        return _cmd_annotate(args, parser)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "query":
        return _cmd_query(args, parser)
    return _cmd_values(args)


if __name__ == "__main__":
    sys.exit(main())
