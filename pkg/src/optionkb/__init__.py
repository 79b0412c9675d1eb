"""Knowledge base for black-box optimization benchmarking data.

Annotates COCO/BBOB performance logs into named-graph quads carrying study
provenance, stores them in an indexed in-process quad store, and answers
fixed-budget / fixed-target / provenance queries through a CLI and an HTTP
service.
"""

__version__ = "0.1.0"
