"""HTTP layer: structured query endpoint, N-Quads upload, value lists.

Requests and responses are JSON except the upload body, which is N-Quads
text.  The wire protocol is intentionally small:

  POST /query    {"template": ..., "params": {...}} or {"bgp": {...}}
  POST /upload   N-Quads body, ?mode=merge (default) or replace-graphs
  GET  /values?dimension=algorithm|functionId|dimension|instance|study
  GET  /vocabulary
  GET  /health

A single store instance backs the app.  Uploads take the writer side of a
readers/writer lock (writer preference); every other endpoint reads under
the reader side, so a response is always computed against one consistent
store revision.
"""

import json
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from . import queries, vocab
from .queries import (
    BgpFilter,
    BgpQuery,
    BudgetPoint,
    BudgetRange,
    FixedBudgetQuery,
    FixedTargetQuery,
    ProvenanceQuery,
    UnboundFilterVariableError,
    Var,
)
from .rdf import NQuadsSyntaxError, double_literal, integer_literal, parse_nquads, parse_term_text
from .store import QuadStore

DEFAULT_ADDR = "127.0.0.1:3330"
ADDR_ENV_VAR = "OPTIONKB_ADDR"


class ReadWriteLock:
    """Many readers or one writer; arriving readers queue behind a waiting writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self):
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self):
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self):
        with self._cond:
            self._writer = False
            self._cond.notify_all()


class _BadRequest(Exception):
    """Maps to 400: the request itself is malformed."""

    def __init__(self, detail: str, line: int | None = None, column: int | None = None):
        self.detail = detail
        self.line = line
        self.column = column


class _InvalidQuery(Exception):
    """Maps to 422: well-formed request that violates a query invariant."""

    def __init__(self, detail: str):
        self.detail = detail


def _error_body(error: str, detail: str, line=None, column=None) -> dict:
    body = {"error": error, "detail": detail}
    if line is not None:
        body["line"] = line
    if column is not None:
        body["column"] = column
    return body


def _int_param(params: dict, key: str) -> int:
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise _InvalidQuery(f"{key} must be an integer")
    return value


def _parse_budget(raw) -> BudgetPoint | BudgetRange:
    if not isinstance(raw, dict):
        raise _InvalidQuery("budget must be {\"point\": n} or {\"lo\": n, \"hi\": n}")
    try:
        if set(raw) == {"point"}:
            return BudgetPoint(_int_param(raw, "point"))
        if set(raw) == {"lo", "hi"}:
            return BudgetRange(_int_param(raw, "lo"), _int_param(raw, "hi"))
    except ValueError as exc:
        raise _InvalidQuery(str(exc)) from None
    raise _InvalidQuery("budget must be {\"point\": n} or {\"lo\": n, \"hi\": n}")


_SELECTOR_KEYS = ("algorithms", "problems", "instances", "dimensions")


def _parse_selectors(params: dict) -> dict:
    out = {}
    for key in _SELECTOR_KEYS:
        if key not in params:
            continue
        values = params[key]
        if not isinstance(values, list):
            raise _InvalidQuery(f"{key} must be an array")
        if key == "algorithms":
            if not all(isinstance(v, str) for v in values):
                raise _InvalidQuery("algorithms must be strings")
        elif not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise _InvalidQuery(f"{key} must be integers")
        out[key] = values
    return out


def _parse_performance_query(template: str, params: dict):
    if not isinstance(params, dict):
        raise _BadRequest("params must be a JSON object")
    known = set(_SELECTOR_KEYS) | {"budget", "target", "study"}
    unknown = set(params) - known
    if unknown:
        raise _InvalidQuery(f"unknown parameters: {sorted(unknown)}")
    try:
        if template == "fixed-budget":
            if "budget" not in params:
                raise _InvalidQuery("fixed-budget requires a budget")
            return FixedBudgetQuery(budget=_parse_budget(params["budget"]), **_parse_selectors(params))
        if template == "fixed-target":
            if "target" not in params:
                raise _InvalidQuery("fixed-target requires a target")
            target = params["target"]
            if isinstance(target, bool) or not isinstance(target, (int, float)):
                raise _InvalidQuery("target must be a number")
            return FixedTargetQuery(target=target, **_parse_selectors(params))
        # provenance
        study = params.get("study")
        if not isinstance(study, str):
            raise _InvalidQuery("provenance requires a study string (DOI or algorithm label)")
        return ProvenanceQuery(study=study)
    except ValueError as exc:
        raise _InvalidQuery(str(exc)) from None


def _parse_bgp_element(raw) -> "Var | object":
    if not isinstance(raw, str):
        raise _BadRequest("pattern elements must be strings")
    if raw.startswith("?"):
        name = raw[1:]
        if not name:
            raise _BadRequest("empty variable name")
        return Var(name)
    try:
        return parse_term_text(raw)
    except NQuadsSyntaxError as exc:
        raise _BadRequest(f"bad term {raw!r}: {exc.reason}") from None


def _parse_filter_value(raw):
    if isinstance(raw, bool):
        raise _BadRequest("filter value must be a number or a term string")
    if isinstance(raw, int):
        return integer_literal(raw)
    if isinstance(raw, float):
        return double_literal(raw)
    if isinstance(raw, str):
        try:
            return parse_term_text(raw)
        except NQuadsSyntaxError as exc:
            raise _BadRequest(f"bad term {raw!r}: {exc.reason}") from None
    raise _BadRequest("filter value must be a number or a term string")


def _parse_bgp(raw: dict) -> BgpQuery:
    if not isinstance(raw, dict):
        raise _BadRequest("bgp must be a JSON object")
    patterns_raw = raw.get("patterns")
    if not isinstance(patterns_raw, list) or not patterns_raw:
        raise _BadRequest("bgp.patterns must be a non-empty array")
    patterns = []
    for pat in patterns_raw:
        if not isinstance(pat, list) or len(pat) != 4:
            raise _BadRequest("each pattern is a 4-element array [subject, predicate, object, graph]")
        patterns.append(tuple(_parse_bgp_element(el) for el in pat))
    filters = []
    for f in raw.get("filters", []):
        if not isinstance(f, dict) or set(f) != {"var", "op", "value"}:
            raise _BadRequest("each filter is {var, op, value}")
        var = f["var"]
        if not isinstance(var, str) or not var.startswith("?") or len(var) < 2:
            raise _BadRequest("filter var must look like ?name")
        op = f["op"]
        if not isinstance(op, str):
            raise _BadRequest("filter op must be a string")
        try:
            filters.append(BgpFilter(var[1:], op, _parse_filter_value(f["value"])))
        except ValueError as exc:
            raise _InvalidQuery(str(exc)) from None
    try:
        return BgpQuery(patterns=tuple(patterns), filters=tuple(filters))
    except UnboundFilterVariableError as exc:
        raise _InvalidQuery(f"filter variable ?{exc.args[0]} is not bound by any pattern") from None
    except ValueError as exc:
        raise _InvalidQuery(str(exc)) from None


def create_app(store: QuadStore) -> FastAPI:
    app = FastAPI(title="optionkb", docs_url=None, redoc_url=None)
    lock = ReadWriteLock()
    app.state.store = store
    app.state.lock = lock

    @app.exception_handler(_BadRequest)
    async def _bad_request(_req, exc: _BadRequest):
        return JSONResponse(_error_body("bad-request", exc.detail, exc.line, exc.column), status_code=400)

    @app.exception_handler(_InvalidQuery)
    async def _invalid_query(_req, exc: _InvalidQuery):
        return JSONResponse(_error_body("invalid-query", exc.detail), status_code=422)

    def _read(work):
        """Run ``work()`` under the reader lock (in the threadpool caller)."""
        lock.acquire_read()
        try:
            return work()
        finally:
            lock.release_read()

    def _answer_query(body: dict):
        has_template, has_bgp = "template" in body, "bgp" in body
        if has_template == has_bgp:
            raise _BadRequest("exactly one of 'template' and 'bgp' is required")
        if has_template:
            template = body["template"]
            if template not in ("fixed-budget", "fixed-target", "provenance"):
                raise _BadRequest(f"unknown template {template!r}")
            parsed = _parse_performance_query(template, body.get("params", {}))
            if isinstance(parsed, FixedBudgetQuery):
                return _read(lambda: queries.run_fixed_budget(store, parsed).to_dict())
            if isinstance(parsed, FixedTargetQuery):
                return _read(lambda: queries.run_fixed_target(store, parsed).to_dict())
            return _read(
                lambda: queries.provenance_table(queries.run_provenance(store, parsed.study)).to_dict()
            )
        bgp = _parse_bgp(body["bgp"])
        return _read(lambda: queries.eval_bgp(store, bgp).to_dict())

    @app.post("/query")
    async def query(request: Request):
        try:
            body = json.loads(await request.body())
        except ValueError:
            raise _BadRequest("request body is not valid JSON")
        if not isinstance(body, dict):
            raise _BadRequest("request body must be a JSON object")
        return JSONResponse(await run_in_threadpool(_answer_query, body))

    def _apply_upload(body: bytes, mode: str):
        quads = parse_nquads(body)  # parse fully before touching the store
        graphs = sorted({q.graph.value for q in quads})
        lock.acquire_write()
        try:
            if mode == "replace-graphs":
                for graph in graphs:
                    store.drop_graph(graph)
            report = store.bulk_insert(quads)
        finally:
            lock.release_write()
        return {"inserted": report.inserted, "duplicates": report.duplicates, "graphs": graphs}

    @app.post("/upload")
    async def upload(request: Request, mode: str = "merge"):
        if mode not in ("merge", "replace-graphs"):
            raise _BadRequest(f"unknown upload mode {mode!r}")
        body = await request.body()
        try:
            return JSONResponse(await run_in_threadpool(_apply_upload, body, mode))
        except NQuadsSyntaxError as exc:
            raise _BadRequest(exc.reason, line=exc.line, column=exc.column)

    @app.get("/values")
    async def values(dimension: str = ""):
        if dimension not in queries.VALUE_DIMENSIONS:
            raise _BadRequest(
                f"unknown dimension {dimension!r}; expected one of {', '.join(queries.VALUE_DIMENSIONS)}"
            )
        result = await run_in_threadpool(_read, lambda: queries.distinct_values(store, dimension))
        return JSONResponse(result)

    @app.get("/vocabulary")
    async def vocabulary():
        return JSONResponse(
            [
                {"curie": t.curie, "iri": t.iri, "kind": t.kind, "label": t.label}
                for t in vocab.vocabulary_terms()
            ]
        )

    @app.get("/health")
    async def health():
        stats = await run_in_threadpool(
            _read, lambda: {"quads": store.count(), "graphs": len(store.list_graphs())}
        )
        return JSONResponse(stats)

    return app
