import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from conftest import FIXTURE_GRAPH, fixture_quads
from optionkb.queries import (
    BudgetPoint,
    FixedBudgetQuery,
    FixedTargetQuery,
    provenance_table,
    run_fixed_budget,
    run_fixed_target,
    run_provenance,
)
from optionkb.rdf import serialize_nquads
from optionkb.service import ReadWriteLock, create_app
from optionkb.store import QuadStore

FIXTURE_NQ = serialize_nquads(fixture_quads())

FB_REQUEST = {
    "template": "fixed-budget",
    "params": {"algorithms": ["ALG1"], "problems": [1], "budget": {"point": 6}},
}
FT_REQUEST = {
    "template": "fixed-target",
    "params": {"algorithms": ["ALG1"], "problems": [1], "target": 0.5},
}
PROV_REQUEST = {"template": "provenance", "params": {"study": "ALG1"}}


@pytest.fixture
def client():
    return TestClient(create_app(QuadStore()))


@pytest.fixture
def loaded_client():
    store = QuadStore()
    store.bulk_insert(fixture_quads())
    return TestClient(create_app(store))


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------- upload


def test_upload_fixture(client):
    resp = client.post("/upload", content=FIXTURE_NQ, headers={"content-type": "application/n-quads"})
    assert resp.status_code == 200
    assert resp.json() == {"inserted": 48, "duplicates": 0, "graphs": [FIXTURE_GRAPH]}
    resp = client.post("/upload", content=FIXTURE_NQ)
    assert resp.json() == {"inserted": 0, "duplicates": 48, "graphs": [FIXTURE_GRAPH]}
    assert client.get("/health").json() == {"quads": 48, "graphs": 1}


def test_upload_syntax_error_is_atomic(client):
    client.post("/upload", content=FIXTURE_NQ)
    before = client.get("/health").json()
    lines = FIXTURE_NQ.splitlines(keepends=True)
    corrupted = "".join(lines[:2]) + "<urn:extra> <urn:p> <urn:o> <urn:g> .\nBROKEN LINE\n"
    resp = client.post("/upload", content=corrupted)
    assert resp.status_code == 400
    body = resp.json()
    assert body["line"] == 4
    assert client.get("/health").json() == before


def test_upload_replace_graphs(client):
    client.post("/upload", content=FIXTURE_NQ)
    extra = '<urn:s> <urn:p> <urn:o> <' + FIXTURE_GRAPH + '> .\n'
    resp = client.post("/upload?mode=replace-graphs", content=extra)
    assert resp.status_code == 200
    assert resp.json() == {"inserted": 1, "duplicates": 0, "graphs": [FIXTURE_GRAPH]}
    assert client.get("/health").json() == {"quads": 1, "graphs": 1}


def test_upload_unknown_mode(client):
    assert client.post("/upload?mode=chaos", content="").status_code == 400


# ---------------------------------------------------------------- query templates


def test_query_fixed_budget(loaded_client):
    resp = loaded_client.post("/query", json=FB_REQUEST)
    assert resp.status_code == 200
    body = resp.json()
    assert body["columns"][:4] == ["algorithm", "functionId", "dimension", "instance"]
    assert len(body["rows"]) == 2
    assert body["rows"][0] == ["ALG1", 1, 5, 1, 6, 1.0, "carried"]
    assert body["rows"][1] == ["ALG1", 1, 5, 2, 6, 5.0, "carried"]


def test_query_fixed_target(loaded_client):
    body = loaded_client.post("/query", json=FT_REQUEST).json()
    assert [row[4] for row in body["rows"]] == [12, 20]


def test_query_provenance(loaded_client):
    body = loaded_client.post("/query", json=PROV_REQUEST).json()
    assert body == {
        "columns": ["doi", "title", "authors", "year"],
        "rows": [["10.1/x", "T", "A. Author", 2016]],
    }


def test_query_equals_in_process(loaded_client):
    store = QuadStore()
    store.bulk_insert(fixture_quads())
    pairs = [
        (FB_REQUEST, run_fixed_budget(
            store, FixedBudgetQuery(budget=BudgetPoint(6), algorithms={"ALG1"}, problems={1})
        ).to_dict()),
        (FT_REQUEST, run_fixed_target(
            store, FixedTargetQuery(target=0.5, algorithms={"ALG1"}, problems={1})
        ).to_dict()),
        (PROV_REQUEST, provenance_table(run_provenance(store, "ALG1")).to_dict()),
    ]
    for request, expected in pairs:
        got = loaded_client.post("/query", json=request).json()
        assert _canonical(got) == _canonical(expected)


def test_query_requires_exactly_one_of_template_and_bgp(client):
    assert client.post("/query", json={}).status_code == 400
    both = dict(FB_REQUEST, bgp={"patterns": [["?s", "?p", "?o", "?g"]]})
    assert client.post("/query", json=both).status_code == 400


def test_query_malformed_json(client):
    resp = client.post("/query", content=b"{nope", headers={"content-type": "application/json"})
    assert resp.status_code == 400


def test_query_unknown_template(client):
    assert client.post("/query", json={"template": "best-ever", "params": {}}).status_code == 400


@pytest.mark.parametrize(
    "params",
    [
        {"budget": {"point": 6}, "algorithms": []},          # empty selector
        {"budget": {"lo": 9, "hi": 2}},                       # inverted range
        {"budget": {"point": -1}},                            # negative budget
        {"budget": {"point": 6}, "problems": ["one"]},        # wrong type
        {"budget": {"point": 6}, "extra": 1},                 # unknown parameter
        {},                                                   # missing budget
        {"budget": {"evals": 6}},                             # bad budget shape
    ],
)
def test_query_invariant_violations_are_422(loaded_client, params):
    resp = loaded_client.post("/query", json={"template": "fixed-budget", "params": params})
    assert resp.status_code == 422


def test_query_fixed_target_requires_target(loaded_client):
    resp = loaded_client.post("/query", json={"template": "fixed-target", "params": {}})
    assert resp.status_code == 422


def test_query_bgp(loaded_client):
    request = {
        "bgp": {
            "patterns": [
                ["?r", "<urn:option:vocab#hasEvent>", "?ev", "?g"],
                ["?ev", "<urn:option:vocab#evaluations>", "?e", "?g"],
            ],
            "filters": [{"var": "?e", "op": "<=", "value": 5}],
        }
    }
    body = loaded_client.post("/query", json=request).json()
    assert body["columns"] == ["?r", "?ev", "?g", "?e"]  # first appearance in s,p,o,g order
    assert len(body["rows"]) == 3
    for row in body["rows"]:
        assert row[0].startswith("<urn:option:run/")
        assert row[3].endswith("integer>")


def test_query_bgp_unbound_filter_is_422(client):
    request = {
        "bgp": {
            "patterns": [["?s", "?p", "?o", "?g"]],
            "filters": [{"var": "?zzz", "op": "=", "value": 1}],
        }
    }
    assert client.post("/query", json=request).status_code == 422


def test_query_bgp_malformed_pattern_is_400(client):
    request = {"bgp": {"patterns": [["?s", "?p", "?o"]]}}
    assert client.post("/query", json=request).status_code == 400
    request = {"bgp": {"patterns": [["?s", "not a term", "?o", "?g"]]}}
    assert client.post("/query", json=request).status_code == 400


# ---------------------------------------------------------------- values / vocabulary / health


def test_values_endpoint(loaded_client):
    assert loaded_client.get("/values", params={"dimension": "algorithm"}).json() == ["ALG1"]
    assert loaded_client.get("/values", params={"dimension": "instance"}).json() == [1, 2]
    assert loaded_client.get("/values", params={"dimension": "color"}).status_code == 400
    assert loaded_client.get("/values").status_code == 400


def test_vocabulary_endpoint(client):
    body = client.get("/vocabulary").json()
    assert len(body) == 20
    assert body[0]["kind"] == "class"
    assert {"curie", "iri", "kind", "label"} == set(body[0])


def test_health_empty(client):
    assert client.get("/health").json() == {"quads": 0, "graphs": 0}


# ---------------------------------------------------------------- reader/writer lock


def test_rwlock_allows_concurrent_readers():
    lock = ReadWriteLock()
    active = []
    barrier = threading.Barrier(3)

    def reader():
        lock.acquire_read()
        barrier.wait(timeout=5)  # all three readers inside simultaneously
        active.append(1)
        lock.release_read()

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=5)
    assert len(active) == 3


def test_rwlock_writer_excludes_readers_and_has_preference():
    lock = ReadWriteLock()
    events = []
    lock.acquire_read()

    def writer():
        lock.acquire_write()
        events.append("write")
        lock.release_write()

    def late_reader():
        time.sleep(0.05)  # arrive after the writer is waiting
        lock.acquire_read()
        events.append("late-read")
        lock.release_read()

    w = threading.Thread(target=writer)
    r = threading.Thread(target=late_reader)
    w.start()
    r.start()
    time.sleep(0.15)
    assert events == []  # writer blocked by initial reader; late reader queued behind writer
    lock.release_read()
    w.join(timeout=5)
    r.join(timeout=5)
    assert events == ["write", "late-read"]


def test_concurrent_uploads_and_reads_stay_consistent(loaded_client):
    errors = []

    def read_loop():
        try:
            for _ in range(20):
                health = loaded_client.get("/health").json()
                assert health["quads"] in (48, 49)
        except Exception as exc:  # surfaces in the main thread
            errors.append(exc)

    extra = "<urn:s> <urn:p> <urn:o> <urn:g2> .\n"
    readers = [threading.Thread(target=read_loop) for _ in range(4)]
    for t in readers:
        t.start()
    loaded_client.post("/upload", content=extra)
    for t in readers:
        t.join(timeout=10)
    assert errors == []
    assert loaded_client.get("/health").json() == {"quads": 49, "graphs": 2}
