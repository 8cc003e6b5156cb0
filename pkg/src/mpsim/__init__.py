"""Most permissive simulation of Boolean networks with variable permissive depth."""

from .bits import Subhypercube, format_config, parse_bits
from .bnet import parse_bnet, parse_configuration, read_bnet, serialize_bnet
from .model import BooleanNetwork, Mutation, apply, apply_mutations, influence_graph

__all__ = [
    "BooleanNetwork",
    "Mutation",
    "Subhypercube",
    "apply",
    "apply_mutations",
    "format_config",
    "influence_graph",
    "parse_bits",
    "parse_bnet",
    "parse_configuration",
    "read_bnet",
    "serialize_bnet",
]

__version__ = "0.1.0"
