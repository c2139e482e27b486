"""Clones on finite sets, C-minors and C-equivalence, and a machine-checked
catalog of the maximal and submaximal clones on three elements."""

from .core import (
    Operation,
    OperationVector,
    Relation,
    compose,
    discriminator,
    preserves,
    projection,
)
from .clones import BurleChain, Generated, Intersection, PolOf, membership, parse_spec
from .minor import Budget, Verdict, are_equivalent, enumerate_classes, is_minor

__version__ = "0.1.0"

__all__ = [
    "Operation",
    "OperationVector",
    "Relation",
    "compose",
    "discriminator",
    "preserves",
    "projection",
    "BurleChain",
    "Generated",
    "Intersection",
    "PolOf",
    "membership",
    "parse_spec",
    "Budget",
    "Verdict",
    "are_equivalent",
    "enumerate_classes",
    "is_minor",
]
