"""Verification workbench for typed Petri nets with identifiers."""

from .core import (
    BLACK,
    Binding,
    Diagnostic,
    FiringEvent,
    Identifier,
    InvalidBindingError,
    Kind,
    Marking,
    Multiset,
    NetError,
    NotEnabledAtError,
    NotEnabledError,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
    enabled_bindings,
    fire,
    fire_sequence,
    validate_marking,
    validate_net,
)
from .statespace import (
    BoundHit,
    CanonicalMarking,
    ExplorationBounds,
    StateGraph,
    canonicalize,
    check_boundedness,
    check_genericity,
    explore,
)
from .verdict import Status, Verdict

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
