"""Performance queries over an annotated store.

Reconstructs per-run best-so-far trajectories from evaluation-event quads
and answers the template queries (fixed budget, fixed target, provenance)
plus conjunctive quad patterns with numeric filters.

All operations are read-only.  Series and run metadata are memoized per
store revision, so repeated queries against an unchanged store do not
re-scan the indexes.
"""

import bisect
import csv
import io
from dataclasses import dataclass, field
from typing import Iterable
from weakref import WeakKeyDictionary

from . import vocab
from .rdf import (
    XSD_DOUBLE,
    XSD_GYEAR,
    XSD_INTEGER,
    XSD_STRING,
    Blank,
    Iri,
    Literal,
    Term,
    serialize_term,
)
from .ingest import ProvenanceRecord
from .store import QuadPattern, QuadStore


class NoSuchRunError(KeyError):
    """Run IRI has no evaluation events in the store."""


class UnboundFilterVariableError(ValueError):
    """Filter references a variable that no pattern binds."""


@dataclass(frozen=True)
class BestSoFarSeries:
    """Right-continuous step function of the best fitness delta per run.

    Points are strictly increasing in evals and non-increasing in value;
    the function is undefined before the first recorded evaluation.
    """

    run: str
    points: tuple[tuple[int, float], ...]


def value_at(series: BestSoFarSeries, budget: int) -> float | None:
    """Best delta after ``budget`` evaluations; None before the first event."""
    idx = bisect.bisect_right(series.points, budget, key=lambda p: p[0])
    if idx == 0:
        return None
    return series.points[idx - 1][1]


@dataclass(frozen=True)
class Reached:
    evals: int


@dataclass(frozen=True)
class NotReached:
    final_best: float


def evals_to_target(series: BestSoFarSeries, target: float) -> Reached | NotReached:
    """Smallest recorded evals whose best delta is <= target."""
    for evals, best in series.points:
        if best <= target:
            return Reached(evals)
    return NotReached(series.points[-1][1])


def _selector(values, convert) -> frozenset | None:
    if values is None:
        return None
    out = frozenset(convert(v) for v in values)
    if not out:
        raise ValueError("selector set must be non-empty when present")
    return out


@dataclass(frozen=True)
class BudgetPoint:
    evals: int

    def __post_init__(self):
        if self.evals < 0:
            raise ValueError("budget must be >= 0")


@dataclass(frozen=True)
class BudgetRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError("budget range needs 0 <= lo <= hi")


@dataclass(frozen=True)
class FixedBudgetQuery:
    budget: BudgetPoint | BudgetRange
    algorithms: frozenset[str] | None = None
    problems: frozenset[int] | None = None
    instances: frozenset[int] | None = None
    dimensions: frozenset[int] | None = None

    def __post_init__(self):
        if not isinstance(self.budget, (BudgetPoint, BudgetRange)):
            raise ValueError("budget must be a point or a range")
        object.__setattr__(self, "algorithms", _selector(self.algorithms, str))
        object.__setattr__(self, "problems", _selector(self.problems, int))
        object.__setattr__(self, "instances", _selector(self.instances, int))
        object.__setattr__(self, "dimensions", _selector(self.dimensions, int))


@dataclass(frozen=True)
class FixedTargetQuery:
    target: float
    algorithms: frozenset[str] | None = None
    problems: frozenset[int] | None = None
    instances: frozenset[int] | None = None
    dimensions: frozenset[int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", float(self.target))
        object.__setattr__(self, "algorithms", _selector(self.algorithms, str))
        object.__setattr__(self, "problems", _selector(self.problems, int))
        object.__setattr__(self, "instances", _selector(self.instances, int))
        object.__setattr__(self, "dimensions", _selector(self.dimensions, int))


@dataclass(frozen=True)
class ProvenanceQuery:
    study: str  # a DOI or an algorithm label

    def __post_init__(self):
        if not self.study:
            raise ValueError("study selector must be non-empty")


Cell = str | int | float | None


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Cell]]

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}

    def to_csv(self) -> str:
        """Header plus one line per row; absent cells are empty fields."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if cell is None else cell for cell in row])
        return buf.getvalue()


@dataclass(frozen=True)
class RunInfo:
    iri: str
    graph: str
    algorithm: str
    function_id: int
    dimension: int
    instance: int


@dataclass
class _StoreView:
    version: int
    runs: list[RunInfo] | None = None
    series: dict[str, BestSoFarSeries] = field(default_factory=dict)


_views: "WeakKeyDictionary[QuadStore, _StoreView]" = WeakKeyDictionary()


def _view(store: QuadStore) -> _StoreView:
    view = _views.get(store)
    if view is None or view.version != store.version:
        view = _StoreView(version=store.version)
        _views[store] = view
    return view


def _first_object(store, graph, subject, predicate) -> Term | None:
    for quad in store.match(QuadPattern(graph=graph, subject=subject, predicate=Iri(predicate))):
        return quad.object
    return None


def _int_value(term: Term | None) -> int | None:
    if isinstance(term, Literal) and term.datatype == XSD_INTEGER:
        return int(term.lexical)
    return None


def _float_value(term: Term | None) -> float | None:
    if isinstance(term, Literal) and term.datatype in (XSD_INTEGER, XSD_DOUBLE):
        return float(term.lexical)
    return None


def _string_value(term: Term | None) -> str | None:
    if isinstance(term, Literal) and term.datatype == XSD_STRING:
        return term.lexical
    return None


def _runs(store: QuadStore) -> list[RunInfo]:
    """Every well-formed performance run; runs missing required properties are skipped."""
    view = _view(store)
    if view.runs is not None:
        return view.runs
    runs: list[RunInfo] = []
    pattern = QuadPattern(predicate=Iri(vocab.RDF_TYPE), object=Iri(vocab.PERFORMANCE_RUN))
    for quad in store.match(pattern):
        if not isinstance(quad.subject, Iri):
            continue
        g, run = quad.graph, quad.subject
        alg_node = _first_object(store, g, run, vocab.EXECUTED_BY)
        if not isinstance(alg_node, Iri):
            continue
        algorithm = _string_value(_first_object(store, g, alg_node, vocab.RDFS_LABEL))
        prob = _first_object(store, g, run, vocab.ON_PROBLEM)
        function_id = _int_value(_first_object(store, g, prob, vocab.FUNCTION_ID)) if isinstance(prob, Iri) else None
        dimension = _int_value(_first_object(store, g, run, vocab.PROBLEM_DIMENSION))
        instance = _int_value(_first_object(store, g, run, vocab.INSTANCE_NUMBER))
        if None in (algorithm, function_id, dimension, instance):
            continue
        runs.append(RunInfo(run.value, g.value, algorithm, function_id, dimension, instance))
    view.runs = runs
    return runs


def load_series(store: QuadStore, run: str | Iri) -> BestSoFarSeries:
    """Gather a run's (evaluations, best delta) events into a monotone series.

    Events sort by evals; equal evals collapse to the smaller value and a
    rising best delta is clamped to the running minimum, mirroring lenient
    ingestion.
    """
    run_iri = run.value if isinstance(run, Iri) else run
    view = _view(store)
    cached = view.series.get(run_iri)
    if cached is not None:
        return cached
    raw: list[tuple[int, float]] = []
    for quad in store.match(QuadPattern(subject=Iri(run_iri), predicate=Iri(vocab.HAS_EVENT))):
        event = quad.object
        if not isinstance(event, (Iri, Blank)):
            continue
        evals = _int_value(_first_object(store, quad.graph, event, vocab.EVALUATIONS))
        best = _float_value(_first_object(store, quad.graph, event, vocab.BEST_FITNESS_DELTA))
        if evals is None or best is None:
            continue
        raw.append((evals, best))
    if not raw:
        raise NoSuchRunError(run_iri)
    # collapse duplicate evals to the minimum, then clamp to the running minimum
    collapsed: dict[int, float] = {}
    for evals, best in raw:
        if evals not in collapsed or best < collapsed[evals]:
            collapsed[evals] = best
    points: list[tuple[int, float]] = []
    running = None
    for evals in sorted(collapsed):
        best = collapsed[evals]
        if running is not None and best > running:
            best = running
        running = best
        points.append((evals, best))
    series = BestSoFarSeries(run_iri, tuple(points))
    view.series[run_iri] = series
    return series


def _matches_selectors(run: RunInfo, q) -> bool:
    return (
        (q.algorithms is None or run.algorithm in q.algorithms)
        and (q.problems is None or run.function_id in q.problems)
        and (q.instances is None or run.instance in q.instances)
        and (q.dimensions is None or run.dimension in q.dimensions)
    )


def _row_sort_key(row):
    evals = row[4]
    return (row[0], row[1], row[2], row[3], -1 if evals is None else evals)


FIXED_BUDGET_COLUMNS = [
    "algorithm", "functionId", "dimension", "instance", "evals", "bestFitnessDelta", "status",
]
FIXED_TARGET_COLUMNS = [
    "algorithm", "functionId", "dimension", "instance", "evalsToTarget", "finalBestDelta", "status",
]
PROVENANCE_COLUMNS = ["doi", "title", "authors", "year"]


def run_fixed_budget(store: QuadStore, q: FixedBudgetQuery) -> ResultTable:
    """Fitness reached within a budget, for every run matching the selectors.

    A point budget yields one row per run: status "recorded" when the budget
    lands exactly on an event, "carried" when the value carries forward from
    an earlier event, and an absent value before the run's first event.
    A range yields one "recorded" row per event inside [lo, hi]; a run silent
    in the range but with prior history contributes one "carried" row at lo.
    """
    rows = []
    for run in _runs(store):
        if not _matches_selectors(run, q):
            continue
        try:
            series = load_series(store, run.iri)
        except NoSuchRunError:
            continue
        head = [run.algorithm, run.function_id, run.dimension, run.instance]
        if isinstance(q.budget, BudgetPoint):
            b = q.budget.evals
            val = value_at(series, b)
            if val is None:
                status = None
            elif any(e == b for e, _ in series.points):
                status = "recorded"
            else:
                status = "carried"
            rows.append(head + [b, val, status])
        else:
            in_range = [(e, v) for e, v in series.points if q.budget.lo <= e <= q.budget.hi]
            if in_range:
                for e, v in in_range:
                    rows.append(head + [e, v, "recorded"])
            else:
                val = value_at(series, q.budget.lo)
                if val is not None:
                    rows.append(head + [q.budget.lo, val, "carried"])
    rows.sort(key=_row_sort_key)
    return ResultTable(list(FIXED_BUDGET_COLUMNS), rows)


def run_fixed_target(store: QuadStore, q: FixedTargetQuery) -> ResultTable:
    """Evaluations needed to reach the target, per run matching the selectors."""
    rows = []
    for run in _runs(store):
        if not _matches_selectors(run, q):
            continue
        try:
            series = load_series(store, run.iri)
        except NoSuchRunError:
            continue
        outcome = evals_to_target(series, q.target)
        final_best = series.points[-1][1]
        head = [run.algorithm, run.function_id, run.dimension, run.instance]
        if isinstance(outcome, Reached):
            rows.append(head + [outcome.evals, final_best, "reached"])
        else:
            rows.append(head + [None, outcome.final_best, "not-reached"])
    rows.sort(key=_row_sort_key)
    return ResultTable(list(FIXED_TARGET_COLUMNS), rows)


def run_provenance(store: QuadStore, selector: str) -> list[ProvenanceRecord]:
    """Provenance of the study matching a DOI, or reached via an algorithm label."""
    studies: set[str] = set()
    for quad in store.match(QuadPattern(predicate=Iri(vocab.DOI), object=Literal(selector))):
        if isinstance(quad.subject, Iri):
            studies.add(quad.subject.value)
    for quad in store.match(QuadPattern(predicate=Iri(vocab.RDFS_LABEL), object=Literal(selector))):
        alg = quad.subject
        typed = _first_object(store, quad.graph, alg, vocab.RDF_TYPE)
        if typed != Iri(vocab.OPTIMIZATION_ALGORITHM):
            continue
        for run_quad in store.match(QuadPattern(predicate=Iri(vocab.EXECUTED_BY), object=alg)):
            study = _first_object(store, run_quad.graph, run_quad.subject, vocab.PART_OF_STUDY)
            if isinstance(study, Iri):
                studies.add(study.value)
    records = []
    for study_iri in sorted(studies):
        study = Iri(study_iri)
        doi = title = year = None
        authors: set[str] = set()
        for quad in store.match(QuadPattern(subject=study)):
            pred, obj = quad.predicate.value, quad.object
            if pred == vocab.DOI:
                doi = doi or _string_value(obj)
            elif pred == vocab.TITLE:
                title = title or _string_value(obj)
            elif pred == vocab.YEAR:
                if isinstance(obj, Literal) and obj.datatype in (XSD_GYEAR, XSD_INTEGER):
                    year = year if year is not None else int(obj.lexical)
            elif pred == vocab.AUTHOR:
                value = _string_value(obj)
                if value is not None:
                    authors.add(value)
        if None in (doi, title, year) or not authors:
            continue
        try:
            records.append(ProvenanceRecord(doi, title, tuple(sorted(authors)), year))
        except ValueError:
            continue  # malformed uploaded study; not ours to repair
    return records


def provenance_table(records: Iterable[ProvenanceRecord]) -> ResultTable:
    rows = [[r.doi, r.title, "; ".join(r.authors), r.year] for r in records]
    return ResultTable(list(PROVENANCE_COLUMNS), rows)


@dataclass(frozen=True)
class Var:
    name: str  # spelled without the leading '?'

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")


_FILTER_OPS = ("<", "<=", "=", ">=", ">", "!=")


@dataclass(frozen=True)
class BgpFilter:
    var: str
    op: str
    value: Term

    def __post_init__(self):
        if self.op not in _FILTER_OPS:
            raise ValueError(f"unknown comparator {self.op!r}")


@dataclass(frozen=True)
class BgpQuery:
    """Conjunction of (subject, predicate, object, graph) patterns with filters."""

    patterns: tuple[tuple, ...]
    filters: tuple[BgpFilter, ...] = ()

    def __post_init__(self):
        if not self.patterns:
            raise ValueError("at least one pattern is required")
        bound = set()
        for pat in self.patterns:
            if len(pat) != 4:
                raise ValueError("patterns are (subject, predicate, object, graph)")
            s, p, o, g = pat
            for el, ok_types in ((s, (Iri, Blank)), (p, (Iri,)), (o, (Iri, Literal, Blank)), (g, (Iri,))):
                if isinstance(el, Var):
                    bound.add(el.name)
                elif not isinstance(el, ok_types):
                    raise ValueError(f"term {el!r} not allowed in this position")
        for f in self.filters:
            if f.var not in bound:
                raise UnboundFilterVariableError(f.var)


@dataclass
class BindingsTable:
    variables: list[str]
    rows: list[tuple[Term, ...]]

    def to_dict(self) -> dict:
        return {
            "columns": [f"?{v}" for v in self.variables],
            "rows": [[serialize_term(t) for t in row] for row in self.rows],
        }


def _pattern_solutions(store, pat):
    s, p, o, g = pat
    qp = QuadPattern(
        graph=None if isinstance(g, Var) else g,
        subject=None if isinstance(s, Var) else s,
        predicate=None if isinstance(p, Var) else p,
        object=None if isinstance(o, Var) else o,
    )
    for quad in store.match(qp):
        binding: dict[str, Term] = {}
        ok = True
        for el, val in ((s, quad.subject), (p, quad.predicate), (o, quad.object), (g, quad.graph)):
            if isinstance(el, Var):
                if el.name in binding and binding[el.name] != val:
                    ok = False
                    break
                binding[el.name] = val
        if ok:
            yield binding


def _numeric(term: Term) -> int | float | None:
    if isinstance(term, Literal):
        if term.datatype == XSD_INTEGER:
            return int(term.lexical)
        if term.datatype == XSD_DOUBLE:
            return float(term.lexical)
    return None


def _filter_ok(binding: dict, f: BgpFilter) -> bool:
    left, right = binding[f.var], f.value
    ln, rn = _numeric(left), _numeric(right)
    if ln is not None and rn is not None:
        a, b = ln, rn
    else:
        # no shared numeric interpretation: order by serialized form
        a, b = serialize_term(left), serialize_term(right)
    if f.op == "=":
        return a == b
    if f.op == "!=":
        return a != b
    if f.op == "<":
        return a < b
    if f.op == "<=":
        return a <= b
    if f.op == ">":
        return a > b
    return a >= b


def eval_bgp(store: QuadStore, q: BgpQuery) -> BindingsTable:
    """Join the patterns left to right, then apply filters.

    Set semantics over complete binding rows; rows sort lexicographically by
    the serialized terms, column order is first appearance of each variable.
    """
    variables: list[str] = []
    for pat in q.patterns:
        for el in pat:
            if isinstance(el, Var) and el.name not in variables:
                variables.append(el.name)
    solutions: list[dict[str, Term]] = [{}]
    bound: set[str] = set()
    for pat in q.patterns:
        sols = list(_pattern_solutions(store, pat))
        pat_vars = {el.name for el in pat if isinstance(el, Var)}
        shared = sorted(pat_vars & bound)
        table: dict[tuple, list[dict]] = {}
        for sol in sols:
            table.setdefault(tuple(sol[v] for v in shared), []).append(sol)
        joined = []
        for left in solutions:
            for right in table.get(tuple(left[v] for v in shared), []):
                merged = dict(left)
                merged.update(right)
                joined.append(merged)
        solutions = joined
        bound |= pat_vars
        if not solutions:
            break
    seen = set()
    for binding in solutions:
        if all(_filter_ok(binding, f) for f in q.filters):
            seen.add(tuple(binding[v] for v in variables))
    rows = sorted(seen, key=lambda row: tuple(serialize_term(t) for t in row))
    return BindingsTable(variables=variables, rows=rows)


VALUE_DIMENSIONS = ("algorithm", "functionId", "dimension", "instance", "study")


def distinct_values(store: QuadStore, dimension: str) -> list:
    """Distinct selector values across the store, sorted; feeds the UI dropdowns."""
    if dimension == "algorithm":
        values: set = set()
        for quad in store.match(
            QuadPattern(predicate=Iri(vocab.RDF_TYPE), object=Iri(vocab.OPTIMIZATION_ALGORITHM))
        ):
            label = _string_value(_first_object(store, quad.graph, quad.subject, vocab.RDFS_LABEL))
            if label is not None:
                values.add(label)
        return sorted(values)
    property_for = {
        "functionId": vocab.FUNCTION_ID,
        "dimension": vocab.PROBLEM_DIMENSION,
        "instance": vocab.INSTANCE_NUMBER,
    }
    if dimension in property_for:
        values = set()
        for quad in store.match(QuadPattern(predicate=Iri(property_for[dimension]))):
            v = _int_value(quad.object)
            if v is not None:
                values.add(v)
        return sorted(values)
    if dimension == "study":
        values = set()
        for quad in store.match(QuadPattern(predicate=Iri(vocab.DOI))):
            v = _string_value(quad.object)
            if v is not None:
                values.add(v)
        return sorted(values)
    raise ValueError(f"unknown dimension {dimension!r}")
