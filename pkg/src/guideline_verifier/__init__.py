"""Logical relation checking for formalized clinical-guideline rules."""

from .compiler import Session, atom_universe, compile_condition, compile_predicate
from .document import load_document, load_document_file, serialize
from .model import (
    ActionSet,
    BenchmarkLabel,
    CoarseLabel,
    Document,
    Permission,
    Polarity,
    RelationLabel,
    ValidationError,
    polarity,
)
from .relations import RelationConfig, action_relation, classify_pair, condition_relation, explain
from .solver import SatResult, check_sat, emit_smtlib

__version__ = "0.1.0"

__all__ = [
    "ActionSet",
    "BenchmarkLabel",
    "CoarseLabel",
    "Document",
    "Permission",
    "Polarity",
    "RelationConfig",
    "RelationLabel",
    "SatResult",
    "Session",
    "ValidationError",
    "action_relation",
    "atom_universe",
    "check_sat",
    "classify_pair",
    "compile_condition",
    "compile_predicate",
    "condition_relation",
    "emit_smtlib",
    "explain",
    "load_document",
    "load_document_file",
    "polarity",
    "serialize",
]
