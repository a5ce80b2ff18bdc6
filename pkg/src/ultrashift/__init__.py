"""Ultragraph shift spaces: symbolic sets, boundary cylinders, dynamics and KMS data."""

from .document import from_dict, load, parse_document, serialize, to_dict
from .setexpr import format_set, parse_ref, parse_set
from .symsets import SymbolicSet
from .ultragraph import NotInG0, NotRfum2, Ultragraph, graph_to_ultragraph

__version__ = "0.1.0"

__all__ = [
    "SymbolicSet", "Ultragraph", "NotInG0", "NotRfum2", "graph_to_ultragraph",
    "parse_document", "from_dict", "to_dict", "serialize", "load",
    "parse_set", "parse_ref", "format_set",
]
