#!/usr/bin/env python3
"""Write a synthetic BBOB-style result folder.

Produces one directory per algorithm, each holding a .info metadata file and
the .dat improvement logs it references.  Useful for exercising the CLI at
arbitrary scale, e.g.:

    python scripts/gen_corpus.py --out /tmp/corpus --algorithms 5
    optionkb annotate --input /tmp/corpus --doi 10.5/demo --title Demo \
        --authors "Demo, A." --year 2020 --out /tmp/corpus.nq
"""

import argparse
import random
from pathlib import Path


def random_series(rng: random.Random, max_events: int):
    n = rng.randint(1, max_events)
    evals = sorted(rng.sample(range(1, 20_000), n))
    rows = []
    best = rng.uniform(1.0, 1e3)
    for e in evals:
        best = best * rng.uniform(0.3, 1.0)
        rows.append((e, best * rng.uniform(1.0, 2.0), best))
    return rows


def write_algorithm(root: Path, alg: str, functions, dimensions, instances, max_events, rng):
    alg_dir = root / alg
    alg_dir.mkdir(parents=True, exist_ok=True)
    info_lines = []
    for f in functions:
        for dim in dimensions:
            rel = f"data_f{f}/{alg}_f{f}_DIM{dim}.dat"
            dat_path = alg_dir / rel
            dat_path.parent.mkdir(parents=True, exist_ok=True)
            summaries = []
            with dat_path.open("w") as fh:
                for inst in range(1, instances + 1):
                    rows = random_series(rng, max_events)
                    fopt = rng.uniform(-100.0, 100.0)
                    fh.write(f"% function evaluation | fitness - Fopt ({fopt!r}) | best fitness - Fopt\n")
                    for e, delta, best in rows:
                        fh.write(f"{e} {delta!r} {best!r}\n")
                    summaries.append(f"{inst}:{rows[-1][0]}|{rows[-1][2]!r}")
            info_lines.append(
                f"funcId = {f}, DIM = {dim}, Precision = 1.000e-08, algId = '{alg}'"
            )
            info_lines.append("% synthetic corpus")
            info_lines.append(f"{rel}, {', '.join(summaries)}")
    (alg_dir / f"{alg}.info").write_text("\n".join(info_lines) + "\n")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="directory to create")
    parser.add_argument("--algorithms", type=int, default=5)
    parser.add_argument("--functions", type=int, default=5)
    parser.add_argument("--dimensions", default="2,5,10", help="comma-separated")
    parser.add_argument("--instances", type=int, default=5)
    parser.add_argument("--max-events", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    root = Path(args.out)
    dimensions = [int(d) for d in args.dimensions.split(",")]
    functions = range(1, args.functions + 1)
    for a in range(1, args.algorithms + 1):
        write_algorithm(root, f"ALG{a}", functions, dimensions, args.instances, args.max_events, rng)
    n_runs = args.algorithms * args.functions * len(dimensions) * args.instances
    print(f"wrote {args.algorithms} algorithm folders under {root} ({n_runs} runs)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
