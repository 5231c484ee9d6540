"""Network-model inference experiments: block-model recovery thresholds,
geometry detection in random graphs, urn limit laws, and root finding in
growing trees, with a shared Monte Carlo harness and CLI."""

from . import geom, graphcore, harness, sbm, trees, urns
from .graphcore import Graph, ParseError, RngStream, Tree

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "ParseError",
    "RngStream",
    "Tree",
    "geom",
    "graphcore",
    "harness",
    "sbm",
    "trees",
    "urns",
    "__version__",
]
