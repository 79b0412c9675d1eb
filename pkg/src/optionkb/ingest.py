"""Annotation pipeline for COCO/BBOB result folders.

A result folder pairs ``.info`` metadata files with ``.dat`` improvement
logs.  Each ``.info`` record names a benchmark function, dimension, and
algorithm plus one trial summary per instance; the referenced ``.dat`` file
holds the logged improvement events, one run per ``%`` header, pairing
positionally with the trial list.

The ``.dat`` rows are the source of truth; ``.info`` summaries are only
cross-checked against the final row of each run (mismatch is a warning, not
an error).  Annotation emits quads into one named graph per algorithm with
deterministic IRIs, so re-ingesting identical data deduplicates cleanly.
"""

import math
import re
import string
from dataclasses import dataclass, field
from pathlib import Path

from . import vocab
from .rdf import Iri, Literal, Quad, double_literal, integer_literal, year_literal

DEFAULT_BASE = "urn:option:"


class IngestError(Exception):
    """Base for ingestion failures; ``path`` is attached when known."""

    def __init__(self, message: str):
        super().__init__(message)
        self.path: str | None = None

    def __str__(self) -> str:
        message = super().__str__()
        return f"{self.path}: {message}" if self.path else message


class InfoFormatError(IngestError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class MissingFieldError(IngestError):
    def __init__(self, name: str, line: int):
        super().__init__(f"line {line}: missing required header field {name!r}")
        self.name = name
        self.line = line


class DatFormatError(IngestError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonMonotoneEvalsError(DatFormatError):
    def __init__(self, line: int):
        super().__init__(line, "evaluation counts must strictly increase within a run")


class PairingMismatchError(IngestError):
    pass


class IngestIoError(IngestError):
    def __init__(self, path, reason: str = "cannot read"):
        super().__init__(f"{reason}: {path}")


@dataclass(frozen=True)
class InfoRecord:
    func_id: int
    dim: int
    precision: float  # parsed and retained, never annotated
    alg_id: str
    data_path: str
    trials: tuple[tuple[int, int, float], ...]  # (instance, final_evals, final_best_delta)


@dataclass(frozen=True)
class DatRun:
    fopt: float | None
    rows: tuple[tuple[int, float, float], ...]  # (evals, delta, best_delta)


@dataclass(frozen=True)
class ProvenanceRecord:
    doi: str
    title: str
    authors: tuple[str, ...]
    year: int

    def __post_init__(self):
        if not self.doi or not self.title:
            raise ValueError("doi and title must be non-empty")
        if not self.authors:
            raise ValueError("at least one author is required")
        if not 1990 <= self.year <= 2100:
            raise ValueError(f"implausible publication year: {self.year}")


@dataclass
class IngestReport:
    files_parsed: int = 0
    runs_annotated: int = 0
    quads_emitted: int = 0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "files_parsed": self.files_parsed,
            "runs_annotated": self.runs_annotated,
            "quads_emitted": self.quads_emitted,
            "warnings": list(self.warnings),
        }


_IRI_SAFE = frozenset(string.ascii_letters + string.digits + "._-")


def encode_component(text: str) -> str:
    """Percent-encode everything outside [A-Za-z0-9._-], bytewise over UTF-8."""
    out = []
    for byte in text.encode("utf-8"):
        c = chr(byte)
        out.append(c if c in _IRI_SAFE else f"%{byte:02X}")
    return "".join(out)


def _split_outside_quotes(line: str) -> list[str]:
    parts, buf, quote = [], [], None
    for c in line:
        if quote:
            buf.append(c)
            if c == quote:
                quote = None
        elif c in "'\"":
            buf.append(c)
            quote = c
        elif c == ",":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(c)
    parts.append("".join(buf))
    return parts


_REQUIRED_INFO_KEYS = ("funcId", "DIM", "Precision", "algId")
_TRIAL_RE = re.compile(r"(\d+):(\d+)\|(\S+)\Z")


def _parse_info_header(line: str, lineno: int, warnings: list[str]) -> dict:
    fields: dict[str, str] = {}
    for part in _split_outside_quotes(line):
        if "=" not in part:
            raise InfoFormatError(lineno, f"expected 'key = value', got {part.strip()!r}")
        key, value = part.split("=", 1)
        key, value = key.strip(), value.strip()
        if key in _REQUIRED_INFO_KEYS:
            fields[key] = value
        else:
            warnings.append(f"line {lineno}: ignored header field {key!r}")
    for key in _REQUIRED_INFO_KEYS:
        if key not in fields:
            raise MissingFieldError(key, lineno)
    try:
        func_id = int(fields["funcId"])
        dim = int(fields["DIM"])
        precision = float(fields["Precision"])
    except ValueError as exc:
        raise InfoFormatError(lineno, f"bad numeric header value: {exc}") from None
    alg = fields["algId"]
    if len(alg) < 2 or alg[0] not in "'\"" or alg[-1] != alg[0]:
        raise InfoFormatError(lineno, f"algId must be quoted, got {alg!r}")
    alg_id = alg[1:-1]
    if func_id < 1 or dim < 1 or precision <= 0 or not alg_id:
        raise InfoFormatError(lineno, "funcId/DIM must be >= 1, Precision > 0, algId non-empty")
    return {"func_id": func_id, "dim": dim, "precision": precision, "alg_id": alg_id, "line": lineno}


def _parse_info_data_line(line: str, lineno: int, header: dict) -> InfoRecord:
    parts = [p.strip() for p in line.split(",")]
    data_path = parts[0]
    if not data_path:
        raise InfoFormatError(lineno, "data line must start with the .dat path")
    trials = []
    seen = set()
    for token in parts[1:]:
        if not token:
            continue
        m = _TRIAL_RE.match(token)
        if not m:
            raise InfoFormatError(lineno, f"bad trial summary {token!r}, expected inst:evals|delta")
        inst, evals = int(m.group(1)), int(m.group(2))
        try:
            delta = float(m.group(3))
        except ValueError:
            raise InfoFormatError(lineno, f"bad trial delta in {token!r}") from None
        if inst in seen:
            raise InfoFormatError(lineno, f"duplicate instance {inst} in trial list")
        seen.add(inst)
        trials.append((inst, evals, delta))
    return InfoRecord(
        func_id=header["func_id"],
        dim=header["dim"],
        precision=header["precision"],
        alg_id=header["alg_id"],
        data_path=data_path,
        trials=tuple(trials),
    )


def parse_info(text: str, warnings: list[str] | None = None) -> list[InfoRecord]:
    """Parse ``.info`` metadata text into records.

    Grammar per record: a ``key = value`` header line, optional ``%`` comment
    lines, then one data line ``path, inst:evals|delta, ...``.  Extra header
    keys are ignored with a warning.
    """
    if warnings is None:
        warnings = []
    records: list[InfoRecord] = []
    header: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if header is None:
            header = _parse_info_header(line, lineno, warnings)
        else:
            records.append(_parse_info_data_line(line, lineno, header))
            header = None
    if header is not None:
        raise InfoFormatError(header["line"], "record header has no data line")
    return records


_PAREN_RE = re.compile(r"\(([^()]*)\)")


def _header_fopt(line: str) -> float | None:
    for group in _PAREN_RE.findall(line):
        try:
            return float(group)
        except ValueError:
            continue
    return None


def parse_dat(text: str, strict: bool = False, warnings: list[str] | None = None) -> list[DatRun]:
    """Parse ``.dat`` improvement logs; each ``%`` header starts a new run.

    Rows are whitespace-separated: evals (int), fitness delta, best delta;
    further columns are ignored.  A best delta that rises within a run is an
    error when strict, otherwise clamped to the running minimum with a
    warning.
    """
    if warnings is None:
        warnings = []
    runs: list[DatRun] = []
    rows: list[tuple[int, float, float]] = []
    fopt: float | None = None
    header_line: int | None = None
    repaired_at: int | None = None

    def close_run():
        nonlocal rows, fopt, repaired_at
        if header_line is not None:
            if not rows:
                raise DatFormatError(header_line, "run has no data rows")
            if repaired_at is not None:
                warnings.append(
                    f"line {repaired_at}: non-monotone best delta clamped to running minimum"
                )
            runs.append(DatRun(fopt=fopt, rows=tuple(rows)))
        rows, fopt, repaired_at = [], None, None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            close_run()
            header_line = lineno
            fopt = _header_fopt(line)
            continue
        if header_line is None:
            raise DatFormatError(lineno, "data row before any run header")
        columns = line.split()
        if len(columns) < 3:
            raise DatFormatError(lineno, f"expected at least 3 columns, got {len(columns)}")
        try:
            evals = int(columns[0])
            delta = float(columns[1])
            best = float(columns[2])
        except ValueError as exc:
            raise DatFormatError(lineno, f"bad numeric value: {exc}") from None
        if not (math.isfinite(delta) and math.isfinite(best)):
            raise DatFormatError(lineno, "non-finite fitness value")
        if rows and evals <= rows[-1][0]:
            raise NonMonotoneEvalsError(lineno)
        if rows and best > rows[-1][2]:
            if strict:
                raise DatFormatError(lineno, "best delta increases within a run")
            if repaired_at is None:
                repaired_at = lineno
            best = rows[-1][2]
        rows.append((evals, delta, best))
    close_run()
    return runs


def annotate(
    infos,
    runs_by_record,
    prov: ProvenanceRecord,
    base: str = DEFAULT_BASE,
    warnings: list[str] | None = None,
) -> list[Quad]:
    """Emit quads for parsed records into one named graph per algorithm.

    Output order is deterministic: per algorithm (first appearance), the
    algorithm quads, then its distinct problems, the study block, and each
    run followed by its events.  Every IRI is minted from the data, so the
    same input always yields the same quads.
    """
    if warnings is None:
        warnings = []
    infos = list(infos)
    runs_by_record = list(runs_by_record)
    if len(infos) != len(runs_by_record):
        raise PairingMismatchError(
            f"{len(infos)} records but {len(runs_by_record)} run groups"
        )
    for record, runs in zip(infos, runs_by_record):
        if len(record.trials) != len(runs):
            raise PairingMismatchError(
                f"algId {record.alg_id!r} funcId {record.func_id} DIM {record.dim}: "
                f"{len(record.trials)} trial summaries but {len(runs)} data runs"
            )

    by_alg: dict[str, list[int]] = {}
    for i, record in enumerate(infos):
        by_alg.setdefault(record.alg_id, []).append(i)

    quads: list[Quad] = []
    seen_run_keys: set[tuple[str, int, int, int]] = set()
    for alg_id, indices in by_alg.items():
        graph = Iri(f"{base}alg/{encode_component(alg_id)}")
        alg = Iri(graph.value)

        def emit(s, p, o):
            quads.append(Quad(graph=graph, subject=s, predicate=p, object=o))

        emit(alg, Iri(vocab.RDF_TYPE), Iri(vocab.OPTIMIZATION_ALGORITHM))
        emit(alg, Iri(vocab.RDFS_LABEL), Literal(alg_id))

        problems: dict[int, Iri] = {}
        for i in indices:
            func_id = infos[i].func_id
            if func_id not in problems:
                prob = Iri(f"{base}prob/f{func_id}")
                problems[func_id] = prob
                emit(prob, Iri(vocab.RDF_TYPE), Iri(vocab.BENCHMARK_PROBLEM))
                emit(prob, Iri(vocab.FUNCTION_ID), integer_literal(func_id))

        study = Iri(f"{base}study/{encode_component(prov.doi)}")
        emit(study, Iri(vocab.RDF_TYPE), Iri(vocab.STUDY))
        emit(study, Iri(vocab.DOI), Literal(prov.doi))
        emit(study, Iri(vocab.TITLE), Literal(prov.title))
        emit(study, Iri(vocab.YEAR), year_literal(prov.year))
        for author in prov.authors:
            emit(study, Iri(vocab.AUTHOR), Literal(author))

        for i in indices:
            record, runs = infos[i], runs_by_record[i]
            for (inst, _final_evals, _final_best), run in zip(record.trials, runs):
                key = (alg_id, record.func_id, record.dim, inst)
                if key in seen_run_keys:
                    warnings.append(
                        f"duplicate run key algId {alg_id!r} f{record.func_id} "
                        f"DIM {record.dim} instance {inst}; quads merge under one run IRI"
                    )
                seen_run_keys.add(key)
                run_iri = Iri(
                    f"{base}run/{encode_component(alg_id)}"
                    f"/f{record.func_id}/d{record.dim}/i{inst}"
                )
                emit(run_iri, Iri(vocab.RDF_TYPE), Iri(vocab.PERFORMANCE_RUN))
                emit(run_iri, Iri(vocab.EXECUTED_BY), alg)
                emit(run_iri, Iri(vocab.ON_PROBLEM), problems[record.func_id])
                emit(run_iri, Iri(vocab.INSTANCE_NUMBER), integer_literal(inst))
                emit(run_iri, Iri(vocab.PROBLEM_DIMENSION), integer_literal(record.dim))
                if run.fopt is not None:
                    emit(run_iri, Iri(vocab.FOPT_VALUE), double_literal(run.fopt))
                emit(run_iri, Iri(vocab.PART_OF_STUDY), study)
                for evals, delta, best in run.rows:
                    event = Iri(f"{run_iri.value}/e{evals}")
                    emit(event, Iri(vocab.RDF_TYPE), Iri(vocab.EVALUATION_EVENT))
                    emit(run_iri, Iri(vocab.HAS_EVENT), event)
                    emit(event, Iri(vocab.EVALUATIONS), integer_literal(evals))
                    emit(event, Iri(vocab.FITNESS_DELTA), double_literal(delta))
                    emit(event, Iri(vocab.BEST_FITNESS_DELTA), double_literal(best))
    return quads


def ingest_directory(
    root: str | Path,
    prov: ProvenanceRecord,
    base: str = DEFAULT_BASE,
    strict: bool = False,
) -> tuple[list[Quad], IngestReport]:
    """Find ``*.info`` files under ``root``, parse, cross-check, and annotate.

    Each trial summary is checked against the final row of its paired run
    (exact on evals, 1e-9 relative on best delta); disagreement is reported
    as a warning.  Parse errors abort with the offending file attached.
    """
    root = Path(root)
    if not root.is_dir():
        raise IngestIoError(root, "not a directory")
    report = IngestReport()
    infos: list[InfoRecord] = []
    runs_by_record: list[list[DatRun]] = []
    dat_cache: dict[Path, list[DatRun]] = {}

    for info_path in sorted(root.rglob("*.info")):
        try:
            text = info_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IngestIoError(info_path, str(exc)) from exc
        local: list[str] = []
        try:
            records = parse_info(text, warnings=local)
        except IngestError as err:
            err.path = str(info_path)
            raise
        report.warnings.extend(f"{info_path}: {w}" for w in local)
        report.files_parsed += 1

        for record in records:
            dat_path = (info_path.parent / record.data_path).resolve()
            if dat_path not in dat_cache:
                try:
                    dat_text = dat_path.read_text(encoding="utf-8")
                except OSError as exc:
                    raise IngestIoError(dat_path, str(exc)) from exc
                local = []
                try:
                    dat_cache[dat_path] = parse_dat(dat_text, strict=strict, warnings=local)
                except IngestError as err:
                    err.path = str(dat_path)
                    raise
                report.warnings.extend(f"{dat_path}: {w}" for w in local)
                report.files_parsed += 1
            runs = dat_cache[dat_path]
            if len(runs) != len(record.trials):
                err = PairingMismatchError(
                    f"algId {record.alg_id!r} funcId {record.func_id}: "
                    f"{len(record.trials)} trial summaries but {len(runs)} runs in {dat_path.name}"
                )
                err.path = str(info_path)
                raise err
            for (inst, final_evals, final_best), run in zip(record.trials, runs):
                evals, _delta, best = run.rows[-1]
                if evals != final_evals or not math.isclose(
                    best, final_best, rel_tol=1e-9, abs_tol=0.0
                ):
                    report.warnings.append(
                        f"{info_path}: instance {inst}: .dat final row "
                        f"(evals={evals}, best={best!r}) disagrees with .info summary "
                        f"(evals={final_evals}, best={final_best!r})"
                    )
            infos.append(record)
            runs_by_record.append(list(runs))

    quads = annotate(infos, runs_by_record, prov, base=base, warnings=report.warnings)
    report.runs_annotated = sum(len(runs) for runs in runs_by_record)
    report.quads_emitted = len(quads)
    return quads, report
