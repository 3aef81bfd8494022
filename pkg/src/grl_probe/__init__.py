"""Probing graph representation learning methods against structural graph properties."""

from .embedding import EmbeddingMatrix
from .generators import GeneratorSpec, generate_ba, generate_er, generate_hk
from .graph import Graph, load_edge_list, write_edge_list

__version__ = "0.1.0"

__all__ = [
    "EmbeddingMatrix",
    "GeneratorSpec",
    "Graph",
    "generate_ba",
    "generate_er",
    "generate_hk",
    "load_edge_list",
    "write_edge_list",
]
