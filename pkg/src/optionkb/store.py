"""In-process quad store with dictionary-encoded indexes and named graphs.

Four index orderings (GSPO, SPOG, POSG, OSPG) give every single-bound and
graph-scoped pattern a sorted prefix to scan.  Indexes are kept as lazily
sorted lists over one authoritative quad set, so bulk loads stay linear and
sorting happens once per write burst.

Concurrency contract: many concurrent readers OR one exclusive writer.  The
store itself does no locking; the service layer enforces the contract.
"""

import bisect
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .rdf import Blank, Dictionary, Iri, Literal, Quad, Term, parse_nquads, serialize_nquads

# position permutations: indexes into the canonical (g, s, p, o) id tuple
INDEX_ORDERS: dict[str, tuple[int, int, int, int]] = {
    "gspo": (0, 1, 2, 3),
    "spog": (1, 2, 3, 0),
    "posg": (2, 3, 1, 0),
    "ospg": (3, 1, 2, 0),
}


@dataclass(frozen=True)
class QuadPattern:
    """Match pattern; None is a wildcard, concrete terms obey quad position rules."""

    graph: Iri | None = None
    subject: Iri | Blank | None = None
    predicate: Iri | None = None
    object: Term | None = None

    def __post_init__(self):
        if self.graph is not None and not isinstance(self.graph, Iri):
            raise ValueError("graph pattern must be an IRI")
        if self.subject is not None and not isinstance(self.subject, (Iri, Blank)):
            raise ValueError("subject pattern must be an IRI or blank node")
        if self.predicate is not None and not isinstance(self.predicate, Iri):
            raise ValueError("predicate pattern must be an IRI")
        if self.object is not None and not isinstance(self.object, (Iri, Literal, Blank)):
            raise ValueError("object pattern must be a term")

    def matches(self, quad: Quad) -> bool:
        return (
            (self.graph is None or self.graph == quad.graph)
            and (self.subject is None or self.subject == quad.subject)
            and (self.predicate is None or self.predicate == quad.predicate)
            and (self.object is None or self.object == quad.object)
        )


@dataclass
class InsertReport:
    inserted: int
    duplicates: int


class QuadStore:
    def __init__(self):
        self.dictionary = Dictionary()
        self._quads: set[tuple[int, int, int, int]] = set()  # (g, s, p, o) ids
        self._indexes: dict[str, list[tuple[int, int, int, int]]] = {
            name: [] for name in INDEX_ORDERS
        }
        self._dirty = False
        self.version = 0  # bumped on every mutation; lets read layers cache safely

    def __len__(self) -> int:
        return len(self._quads)

    def count(self) -> int:
        return len(self._quads)

    def _encode(self, quad: Quad) -> tuple[int, int, int, int]:
        enc = self.dictionary.encode
        return (enc(quad.graph), enc(quad.subject), enc(quad.predicate), enc(quad.object))

    def _decode(self, key: tuple[int, int, int, int]) -> Quad:
        dec = self.dictionary.decode
        return Quad(graph=dec(key[0]), subject=dec(key[1]), predicate=dec(key[2]), object=dec(key[3]))

    def insert(self, quad: Quad) -> bool:
        """Insert one quad; returns True iff it was absent (set semantics)."""
        key = self._encode(quad)
        if key in self._quads:
            return False
        self._quads.add(key)
        for name, order in INDEX_ORDERS.items():
            self._indexes[name].append(tuple(key[i] for i in order))
        self._dirty = True
        self.version += 1
        return True

    def bulk_insert(self, quads) -> InsertReport:
        inserted = duplicates = 0
        for quad in quads:
            if self.insert(quad):
                inserted += 1
            else:
                duplicates += 1
        return InsertReport(inserted=inserted, duplicates=duplicates)

    def _ensure_sorted(self):
        # sorted copies swapped in whole, so concurrent readers racing to
        # trigger the first sort after a write burst never see a half-sorted list
        if self._dirty:
            for name, entries in self._indexes.items():
                self._indexes[name] = sorted(entries)
            self._dirty = False

    def index_entries(self, name: str) -> list[tuple[int, int, int, int]]:
        """Sorted id tuples of one index, in that index's permutation order."""
        self._ensure_sorted()
        return list(self._indexes[name])

    def _pattern_ids(self, pattern: QuadPattern) -> tuple[int | None, ...] | None:
        """Encode bound positions; None when a bound term is absent from the store."""
        ids = []
        for term in (pattern.graph, pattern.subject, pattern.predicate, pattern.object):
            if term is None:
                ids.append(None)
            else:
                tid = self.dictionary.lookup(term)
                if tid is None:
                    return None
                ids.append(tid)
        return tuple(ids)

    def match(self, pattern: QuadPattern) -> Iterator[Quad]:
        """All quads matching the pattern, each once, ascending in the chosen index.

        The index is the one whose ordering turns the most bound positions
        into a contiguous prefix; remaining bound positions are filtered.
        """
        ids = self._pattern_ids(pattern)
        if ids is None:
            return
        best_name, best_len = "gspo", -1
        for name, order in INDEX_ORDERS.items():
            k = 0
            while k < 4 and ids[order[k]] is not None:
                k += 1
            if k > best_len:
                best_name, best_len = name, k
        order = INDEX_ORDERS[best_name]
        self._ensure_sorted()
        entries = self._indexes[best_name]
        prefix = tuple(ids[order[i]] for i in range(best_len))
        if prefix:
            lo = bisect.bisect_left(entries, prefix)
            hi = bisect.bisect_left(entries, prefix[:-1] + (prefix[-1] + 1,))
        else:
            lo, hi = 0, len(entries)
        rest = [(i, ids[order[i]]) for i in range(best_len, 4) if ids[order[i]] is not None]
        for entry in entries[lo:hi]:
            if all(entry[i] == v for i, v in rest):
                key = [0, 0, 0, 0]
                for i, pos in enumerate(order):
                    key[pos] = entry[i]
                yield self._decode(tuple(key))

    def all_quads(self) -> Iterator[Quad]:
        return self.match(QuadPattern())

    def list_graphs(self) -> list[str]:
        graphs = {key[0] for key in self._quads}
        return sorted(self.dictionary.decode(g).value for g in graphs)

    def drop_graph(self, graph: str) -> int:
        """Remove every quad in the named graph; returns how many were removed."""
        gid = self.dictionary.lookup(Iri(graph))
        if gid is None:
            return 0
        doomed = {key for key in self._quads if key[0] == gid}
        if not doomed:
            return 0
        self._quads -= doomed
        for name, order in INDEX_ORDERS.items():
            gpos = order.index(0)
            self._indexes[name] = [e for e in self._indexes[name] if e[gpos] != gid]
        self.version += 1
        return len(doomed)

    def save(self, path: str | Path):
        """Write the canonical N-Quads snapshot, statements sorted bytewise."""
        lines = sorted(serialize_nquads([q]) for q in self.all_quads())
        Path(path).write_bytes("".join(lines).encode("utf-8"))

    @classmethod
    def load(cls, path: str | Path) -> "QuadStore":
        store = cls()
        store.bulk_insert(parse_nquads(Path(path).read_bytes()))
        return store
