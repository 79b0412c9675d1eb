#!/usr/bin/env python3
"""Time ingestion and query throughput on synthetic corpora of growing size.

    python scripts/bench_queries.py --algorithms 5 10 20
"""

import argparse
import random
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from optionkb.ingest import ProvenanceRecord, ingest_directory
from optionkb.queries import (
    BudgetPoint,
    FixedBudgetQuery,
    FixedTargetQuery,
    run_fixed_budget,
    run_fixed_target,
)
from optionkb.store import QuadStore

PROV = ProvenanceRecord("10.5/bench", "Benchmark corpus", ("Bench, B.",), 2020)


def bench(n_algorithms: int, n_queries: int, seed: int) -> dict:
    rng = random.Random(seed)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, Path(__file__).with_name("gen_corpus.py"),
             "--out", tmp, "--algorithms", str(n_algorithms), "--seed", str(seed)],
            check=True, capture_output=True,
        )
        t0 = time.monotonic()
        quads, report = ingest_directory(tmp, PROV)
        t1 = time.monotonic()
        store = QuadStore()
        store.bulk_insert(quads)
        t2 = time.monotonic()
        algs = [f"ALG{a}" for a in range(1, n_algorithms + 1)]
        for i in range(n_queries):
            selectors = {"algorithms": {rng.choice(algs)}} if rng.random() < 0.7 else {}
            if i % 2 == 0:
                run_fixed_budget(store, FixedBudgetQuery(budget=BudgetPoint(rng.randint(0, 20000)), **selectors))
            else:
                run_fixed_target(store, FixedTargetQuery(target=10 ** rng.uniform(-9, 3), **selectors))
        t3 = time.monotonic()
        return {
            "algorithms": n_algorithms,
            "quads": report.quads_emitted,
            "ingest_s": t1 - t0,
            "insert_s": t2 - t1,
            "queries_per_s": n_queries / (t3 - t2),
        }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--algorithms", type=int, nargs="+", default=[5, 10])
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    print(f"{'algs':>6} {'quads':>9} {'ingest s':>9} {'insert s':>9} {'queries/s':>10}")
    for n in args.algorithms:
        row = bench(n, args.queries, args.seed)
        print(f"{row['algorithms']:>6} {row['quads']:>9} {row['ingest_s']:>9.2f} "
              f"{row['insert_s']:>9.2f} {row['queries_per_s']:>10.0f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
