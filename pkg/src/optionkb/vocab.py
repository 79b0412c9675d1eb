"""Core vocabulary of the knowledge base.

A deliberately small, closed term set: 5 classes and 15 properties in the
``option:`` namespace, plus ``rdf:type`` and ``rdfs:label`` imported from the
standard namespaces.  The vocabulary is not a full ontology: no class
hierarchy, no axioms.  Uploaded data may use predicates outside this set;
such quads are stored verbatim but carry no meaning for the query templates.
"""

from dataclasses import dataclass

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
OPTION_NS = "urn:option:vocab#"

PREFIXES: dict[str, str] = {
    "option": OPTION_NS,
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
}

RDF_TYPE = RDF_NS + "type"
RDFS_LABEL = RDFS_NS + "label"

# Classes
OPTIMIZATION_ALGORITHM = OPTION_NS + "OptimizationAlgorithm"
BENCHMARK_PROBLEM = OPTION_NS + "BenchmarkProblem"
PERFORMANCE_RUN = OPTION_NS + "PerformanceRun"
EVALUATION_EVENT = OPTION_NS + "EvaluationEvent"
STUDY = OPTION_NS + "Study"

# Properties
FUNCTION_ID = OPTION_NS + "functionId"
EXECUTED_BY = OPTION_NS + "executedBy"
ON_PROBLEM = OPTION_NS + "onProblem"
INSTANCE_NUMBER = OPTION_NS + "instanceNumber"
PROBLEM_DIMENSION = OPTION_NS + "problemDimension"
FOPT_VALUE = OPTION_NS + "foptValue"
PART_OF_STUDY = OPTION_NS + "partOfStudy"
HAS_EVENT = OPTION_NS + "hasEvent"
EVALUATIONS = OPTION_NS + "evaluations"
FITNESS_DELTA = OPTION_NS + "fitnessDelta"
BEST_FITNESS_DELTA = OPTION_NS + "bestFitnessDelta"
DOI = OPTION_NS + "doi"
TITLE = OPTION_NS + "title"
AUTHOR = OPTION_NS + "author"
YEAR = OPTION_NS + "year"


class UnknownPrefixError(KeyError):
    """CURIE prefix is not in the prefix table."""


class MalformedCurieError(ValueError):
    """String is not of the form ``prefix:localname``."""


@dataclass(frozen=True)
class VocabTerm:
    curie: str
    iri: str
    kind: str  # "class" or "property"
    label: str


def expand_curie(curie: str, prefixes: dict[str, str] = PREFIXES) -> str:
    """Expand ``prefix:localname`` to an absolute IRI.

    Raises MalformedCurieError unless the string contains exactly one ':'
    and a non-empty local name, UnknownPrefixError if the prefix is not
    registered.
    """
    if curie.count(":") != 1:
        raise MalformedCurieError(f"not a prefix:localname form: {curie!r}")
    prefix, local = curie.split(":", 1)
    if not local:
        raise MalformedCurieError(f"empty local name: {curie!r}")
    if prefix not in prefixes:
        raise UnknownPrefixError(prefix)
    return prefixes[prefix] + local


def compress_iri(iri: str, prefixes: dict[str, str] = PREFIXES) -> str | None:
    """Return the CURIE whose expansion is ``iri``, or None.

    Longest matching namespace wins.  Returns None when no namespace is a
    prefix of the IRI, or when the local part would not round-trip through
    expand_curie (empty, or containing ':').
    """
    best: tuple[str, str] | None = None
    for prefix, ns in prefixes.items():
        if iri.startswith(ns) and (best is None or len(ns) > len(best[1])):
            best = (prefix, ns)
    if best is None:
        return None
    prefix, ns = best
    local = iri[len(ns):]
    if not local or ":" in local:
        return None
    return f"{prefix}:{local}"


_CLASS_LABELS = {
    "BenchmarkProblem": "benchmark problem",
    "EvaluationEvent": "evaluation event",
    "OptimizationAlgorithm": "optimization algorithm",
    "PerformanceRun": "performance run",
    "Study": "study",
}

_PROPERTY_LABELS = {
    "author": "author name",
    "bestFitnessDelta": "best fitness delta so far",
    "doi": "digital object identifier",
    "evaluations": "function evaluations used",
    "executedBy": "executed by algorithm",
    "fitnessDelta": "fitness delta at this event",
    "foptValue": "optimal function value",
    "functionId": "benchmark function number",
    "hasEvent": "has evaluation event",
    "instanceNumber": "problem instance number",
    "onProblem": "run on benchmark problem",
    "partOfStudy": "part of study",
    "problemDimension": "search space dimensionality",
    "title": "publication title",
    "year": "publication year",
}


def vocabulary_terms() -> tuple[VocabTerm, ...]:
    """The 20 ``option:`` terms: classes first, alphabetical within kind."""
    terms = [
        VocabTerm(f"option:{name}", OPTION_NS + name, "class", label)
        for name, label in sorted(_CLASS_LABELS.items())
    ]
    terms += [
        VocabTerm(f"option:{name}", OPTION_NS + name, "property", label)
        for name, label in sorted(_PROPERTY_LABELS.items())
    ]
    return tuple(terms)
