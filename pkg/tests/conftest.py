"""Shared fixtures: the two-file synthetic result folder and a corpus generator."""

import random
from dataclasses import dataclass

import pytest

from optionkb.ingest import DatRun, InfoRecord, ProvenanceRecord, annotate, parse_dat, parse_info
from optionkb.store import QuadStore

FIXTURE_INFO = (
    "funcId = 1, DIM = 5, Precision = 1.000e-08, algId = 'ALG1'\n"
    "% synthetic fixture\n"
    "data_f1/ALG1_f1_DIM5.dat, 1:12|3.4e-01, 2:20|9.9e-09\n"
)

FIXTURE_DAT = (
    "% function evaluation | noise-free fitness - Fopt (7.948000000000e+01) | "
    "best noise-free fitness - Fopt | measured fitness | best measured fitness\n"
    "1 2.5e+01 2.5e+01 1.044e+02 1.044e+02\n"
    "5 1.0e+00 1.0e+00 8.048e+01 8.048e+01\n"
    "12 3.4e-01 3.4e-01 7.982e+01 7.982e+01\n"
    "% function evaluation | noise-free fitness - Fopt (7.948000000000e+01) | "
    "best noise-free fitness - Fopt | measured fitness | best measured fitness\n"
    "1 5.0e+00 5.0e+00 8.448e+01 8.448e+01\n"
    "20 9.9e-09 9.9e-09 7.948e+01 7.948e+01\n"
)

FIXTURE_PROV = ProvenanceRecord("10.1/x", "T", ("A. Author",), 2016)
FIXTURE_GRAPH = "urn:option:alg/ALG1"
RUN_I1 = "urn:option:run/ALG1/f1/d5/i1"
RUN_I2 = "urn:option:run/ALG1/f1/d5/i2"


def write_fixture_dir(root):
    (root / "ALG1.info").write_text(FIXTURE_INFO)
    (root / "data_f1").mkdir()
    (root / "data_f1" / "ALG1_f1_DIM5.dat").write_text(FIXTURE_DAT)
    return root


@pytest.fixture
def fixture_dir(tmp_path):
    return write_fixture_dir(tmp_path)


def fixture_quads():
    records = parse_info(FIXTURE_INFO)
    runs = parse_dat(FIXTURE_DAT)
    return annotate(records, [runs], FIXTURE_PROV)


@pytest.fixture
def fixture_store():
    store = QuadStore()
    store.bulk_insert(fixture_quads())
    return store


@dataclass(frozen=True)
class CorpusRun:
    """Ground truth for one run, kept independent of the annotation path."""

    algorithm: str
    function_id: int
    dimension: int
    instance: int
    points: tuple[tuple[int, float], ...]  # repaired best-so-far trajectory


@dataclass
class Corpus:
    records: list[InfoRecord]
    runs_by_record: list[list[DatRun]]
    oracle_runs: list[CorpusRun]
    prov: ProvenanceRecord


def _random_series(rng: random.Random, max_events: int):
    n = rng.randint(1, max_events)
    evals = sorted(rng.sample(range(1, 20_000), n))
    rows = []
    best = rng.uniform(1.0, 1e3)
    for e in evals:
        best = best * rng.uniform(0.3, 1.0)
        delta = best * rng.uniform(1.0, 2.0)
        rows.append((e, delta, best))
    return rows


def make_corpus(
    seed: int = 7,
    n_algorithms: int = 5,
    n_functions: int = 5,
    dimensions=(2, 5, 10),
    n_instances: int = 5,
    max_events: int = 50,
) -> Corpus:
    """Synthesize .info/.dat text, parse it, and keep an independent ground truth.

    Everything downstream (annotation, store, queries) sees only the parsed
    structures; oracle_runs carries the repaired trajectories recomputed here.
    """
    rng = random.Random(seed)
    records: list[InfoRecord] = []
    runs_by_record: list[list[DatRun]] = []
    oracle_runs: list[CorpusRun] = []
    for a in range(n_algorithms):
        alg = f"ALG{a + 1}"
        for f in range(1, n_functions + 1):
            for dim in dimensions:
                dat_lines = []
                summaries = []
                for inst in range(1, n_instances + 1):
                    rows = _random_series(rng, max_events)
                    fopt = rng.uniform(-100.0, 100.0) if rng.random() < 0.8 else None
                    header = "% improvement events"
                    if fopt is not None:
                        header += f" ({fopt!r})"
                    dat_lines.append(header)
                    dat_lines.extend(f"{e} {d!r} {b!r}" for e, d, b in rows)
                    summaries.append(f"{inst}:{rows[-1][0]}|{rows[-1][2]!r}")
                    running = []
                    best_so_far = None
                    for e, _d, b in rows:
                        best_so_far = b if best_so_far is None else min(best_so_far, b)
                        running.append((e, best_so_far))
                    oracle_runs.append(CorpusRun(alg, f, dim, inst, tuple(running)))
                info_text = (
                    f"funcId = {f}, DIM = {dim}, Precision = 1.0e-8, algId = '{alg}'\n"
                    f"data/{alg}_f{f}_d{dim}.dat, {', '.join(summaries)}\n"
                )
                dat_text = "\n".join(dat_lines) + "\n"
                parsed_records = parse_info(info_text)
                assert len(parsed_records) == 1
                records.append(parsed_records[0])
                runs_by_record.append(parse_dat(dat_text))
    prov = ProvenanceRecord("10.5/corpus", "Synthetic corpus", ("Gen, A.",), 2017)
    return Corpus(records, runs_by_record, oracle_runs, prov)


def corpus_store(corpus: Corpus) -> QuadStore:
    store = QuadStore()
    store.bulk_insert(annotate(corpus.records, corpus.runs_by_record, corpus.prov))
    return store
