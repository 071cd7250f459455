"""Core schema for formalized guideline rules.

Everything here is immutable once built. Parsing and validation of the JSON
interchange format lives in :mod:`guideline_verifier.document`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Union


class ValidationError(ValueError):
    """A document or object violates a schema invariant.

    ``path`` is a JSON-path-like locator (``$.rules[3].action``) and ``line``
    is set for syntax errors coming from the JSON decoder.
    """

    def __init__(self, message: str, path: str = "$", line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        if line is None:
            where = path
        elif path == "$":
            where = f"line {line}"
        else:
            where = f"line {line} ({path})"
        super().__init__(f"{where}: {message}")


_IDENT = re.compile(r"^[a-z][a-z0-9_]*$")
_RULE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.:\-]*$")


def is_snake_identifier(text: str) -> bool:
    return bool(_IDENT.match(text))


def is_identifier(text: str) -> bool:
    return bool(_RULE_ID.match(text))


class Namespace(str, Enum):
    COND = "cond"
    MED = "med"
    MEAS = "meas"
    PROC = "proc"
    ASSESS = "assess"


class CodeSystem(str, Enum):
    SNOMED_CT = "SNOMED-CT"
    LOINC = "LOINC"
    RXNORM = "RxNorm"
    LOCAL = "LOCAL"


@dataclass(frozen=True, eq=False)
class EntityRef:
    """A grounded clinical entity such as ``cond.t2dm`` or ``med.sglt2i``.

    Identity follows the terminology code when one is present, so two local
    ids carrying the same code denote the same entity. Without a code the
    ``namespace.local_id`` pair is the identity.
    """

    namespace: Namespace
    local_id: str
    code_system: Optional[CodeSystem] = None
    code: Optional[str] = None

    def __post_init__(self) -> None:
        if not is_snake_identifier(self.local_id):
            raise ValidationError(f"entity local_id {self.local_id!r} must be lowercase snake_case")
        if (self.code_system is None) != (self.code is None):
            raise ValidationError(f"entity {self}: code and code_system must be given together")
        if self.code is not None and not self.code.strip():
            raise ValidationError(f"entity {self}: empty code")

    @property
    def identity(self) -> tuple[str, str, str]:
        if self.code is not None:
            return (self.namespace.value, self.code_system.value, self.code)
        return (self.namespace.value, "", self.local_id)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EntityRef):
            return NotImplemented
        return self.identity == other.identity

    def __hash__(self) -> int:
        return hash(self.identity)

    def __str__(self) -> str:
        return f"{self.namespace.value}.{self.local_id}"

    @classmethod
    def parse(cls, text: str, code_system: Optional[str] = None, code: Optional[str] = None) -> "EntityRef":
        ns, dot, local = text.partition(".")
        if not dot:
            raise ValidationError(f"entity {text!r} must look like namespace.local_id")
        try:
            namespace = Namespace(ns)
        except ValueError:
            raise ValidationError(
                f"unknown entity namespace {ns!r} (expected one of {[n.value for n in Namespace]})"
            ) from None
        system = None
        if code_system is not None:
            try:
                system = CodeSystem(code_system)
            except ValueError:
                raise ValidationError(f"unknown code system {code_system!r}") from None
        return cls(namespace, local, system, code)


class Sort(str, Enum):
    BOOL = "bool"
    REAL = "real"
    INT = "int"
    ENUM = "enum"


class PredicateOperator(str, Enum):
    HAS = "HAS"
    ON = "ON"
    HISTORY = "HISTORY"
    ASSESS = "ASSESS"
    RISK = "RISK"
    STAGE = "STAGE"
    VALUE = "VALUE"
    DURATION = "DURATION"
    DELTA = "DELTA"

    @property
    def is_boolean(self) -> bool:
        return self in _BOOLEAN_OPERATORS

    def sort(self, stage_sort: Optional[Sort] = None) -> Sort:
        """Return sort of the operator's value. STAGE needs the per-entity declaration."""
        if self.is_boolean:
            return Sort.BOOL
        if self is PredicateOperator.RISK:
            return Sort.ENUM
        if self is PredicateOperator.STAGE:
            if stage_sort not in (Sort.INT, Sort.ENUM):
                raise ValidationError("STAGE sort must be declared as integer or enum")
            return stage_sort
        return Sort.REAL


_BOOLEAN_OPERATORS = frozenset(
    {PredicateOperator.HAS, PredicateOperator.ON, PredicateOperator.HISTORY, PredicateOperator.ASSESS}
)


class Comparator(str, Enum):
    LT = "LT"
    LE = "LE"
    GT = "GT"
    GE = "GE"
    EQ = "EQ"
    NE = "NE"

    def negate(self) -> "Comparator":
        return _NEGATION[self]

    def holds(self, left, right) -> bool:
        if self is Comparator.LT:
            return left < right
        if self is Comparator.LE:
            return left <= right
        if self is Comparator.GT:
            return left > right
        if self is Comparator.GE:
            return left >= right
        if self is Comparator.EQ:
            return left == right
        return left != right

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_NEGATION = {
    Comparator.LT: Comparator.GE,
    Comparator.GE: Comparator.LT,
    Comparator.LE: Comparator.GT,
    Comparator.GT: Comparator.LE,
    Comparator.EQ: Comparator.NE,
    Comparator.NE: Comparator.EQ,
}
_SYMBOLS = {
    Comparator.LT: "<",
    Comparator.LE: "<=",
    Comparator.GT: ">",
    Comparator.GE: ">=",
    Comparator.EQ: "=",
    Comparator.NE: "!=",
}

Literal = Union[Fraction, int, str]


@dataclass(frozen=True)
class PredicateDef:
    """An atomic predicate ``OPERATOR(entity[, qualifier]) [comparator rhs]``.

    ``rhs`` is already normalized to the canonical unit recorded in ``unit``.
    Sort checks need document context (STAGE declarations), so they run in
    the loader rather than here.
    """

    id: str
    operator: PredicateOperator
    entity: EntityRef
    qualifier: Optional[EntityRef] = None
    comparator: Optional[Comparator] = None
    rhs: Optional[Literal] = None
    unit: Optional[str] = None

    def __str__(self) -> str:
        args = str(self.entity) if self.qualifier is None else f"{self.entity}, {self.qualifier}"
        text = f"{self.operator.value}({args})"
        if self.comparator is not None:
            text += f" {self.comparator.symbol} {format_literal(self.rhs)}"
            if self.unit:
                text += f" {self.unit}"
        return text


def format_literal(value: Literal) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return str(value)


# Condition AST ---------------------------------------------------------------


@dataclass(frozen=True)
class Ref:
    predicate: str

    def __str__(self) -> str:
        return self.predicate


@dataclass(frozen=True)
class Not:
    child: "ConditionExpr"

    def __str__(self) -> str:
        inner = str(self.child)
        if isinstance(self.child, (And, Or)):
            inner = f"({inner})"
        return f"NOT {inner}"


@dataclass(frozen=True)
class And:
    children: tuple["ConditionExpr", ...]

    def __str__(self) -> str:
        return " AND ".join(f"({c})" if isinstance(c, Or) else str(c) for c in self.children)


@dataclass(frozen=True)
class Or:
    children: tuple["ConditionExpr", ...]

    def __str__(self) -> str:
        return " OR ".join(str(c) for c in self.children)


ConditionExpr = Union[Ref, Not, And, Or]


def iter_refs(expr: ConditionExpr) -> Iterator[str]:
    if isinstance(expr, Ref):
        yield expr.predicate
    elif isinstance(expr, Not):
        yield from iter_refs(expr.child)
    else:
        for child in expr.children:
            yield from iter_refs(child)


# Actions ---------------------------------------------------------------------


class Category(str, Enum):
    USAGE_CONTROL = "usage_control"
    CONTINUATION_CONTROL = "continuation_control"
    DOSE_ADJUSTMENT = "dose_adjustment"


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    CAUTION = "caution"
    NEUTRAL = "neutral"


class Permission(str, Enum):
    ALLOW = "ALLOW"
    RECOMMEND = "RECOMMEND"
    REQUIRE = "REQUIRE"
    CONSIDER = "CONSIDER"
    CAUTION = "CAUTION"
    AVOID = "AVOID"
    CONTRAINDICATE = "CONTRAINDICATE"
    CONTINUE = "CONTINUE"
    STOP = "STOP"
    REDUCE_DOSE = "REDUCE_DOSE"
    INCREASE_DOSE = "INCREASE_DOSE"
    START_LOW_DOSE = "START_LOW_DOSE"
    MAX_DOSE_LIMIT = "MAX_DOSE_LIMIT"
    TITRATE = "TITRATE"

    @property
    def category(self) -> Category:
        return _CATEGORY[self]

    @property
    def polarity(self) -> Polarity:
        return _POLARITY[self]


_CATEGORY = {
    **{
        p: Category.USAGE_CONTROL
        for p in (
            Permission.ALLOW,
            Permission.RECOMMEND,
            Permission.REQUIRE,
            Permission.CONSIDER,
            Permission.CAUTION,
            Permission.AVOID,
            Permission.CONTRAINDICATE,
        )
    },
    Permission.CONTINUE: Category.CONTINUATION_CONTROL,
    Permission.STOP: Category.CONTINUATION_CONTROL,
    **{
        p: Category.DOSE_ADJUSTMENT
        for p in (
            Permission.REDUCE_DOSE,
            Permission.INCREASE_DOSE,
            Permission.START_LOW_DOSE,
            Permission.MAX_DOSE_LIMIT,
            Permission.TITRATE,
        )
    },
}

_POLARITY = {
    Permission.ALLOW: Polarity.POSITIVE,
    Permission.RECOMMEND: Polarity.POSITIVE,
    Permission.REQUIRE: Polarity.POSITIVE,
    Permission.CONSIDER: Polarity.POSITIVE,
    Permission.CONTINUE: Polarity.POSITIVE,
    Permission.AVOID: Polarity.NEGATIVE,
    Permission.CONTRAINDICATE: Polarity.NEGATIVE,
    Permission.STOP: Polarity.NEGATIVE,
    Permission.CAUTION: Polarity.CAUTION,
    Permission.REDUCE_DOSE: Polarity.NEUTRAL,
    Permission.INCREASE_DOSE: Polarity.NEUTRAL,
    Permission.START_LOW_DOSE: Polarity.NEUTRAL,
    Permission.MAX_DOSE_LIMIT: Polarity.NEUTRAL,
    Permission.TITRATE: Polarity.NEUTRAL,
}


def polarity(permission: Permission) -> Polarity:
    return _POLARITY[permission]


def allows(permission: Permission) -> bool:
    """True when the permission reads as allow(s); CAUTION counts as conditional use."""
    return permission.polarity in (Polarity.POSITIVE, Polarity.CAUTION)


def prohibits(permission: Permission) -> bool:
    return permission.polarity is Polarity.NEGATIVE


@dataclass(frozen=True)
class Action:
    subject: EntityRef
    permission: Permission

    def __str__(self) -> str:
        return f"{self.permission.value} {self.subject}"


class ActionSet:
    """Set of (subject, permission) items with at most one permission per subject."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Action]):
        by_subject: dict[EntityRef, Action] = {}
        for item in items:
            seen = by_subject.get(item.subject)
            if seen is not None and seen != item:
                raise ValidationError(
                    f"subject {item.subject} has two permissions ({seen.permission.value}, "
                    f"{item.permission.value}); split compound directives into separate rules"
                )
            by_subject[item.subject] = item
        self._items = by_subject

    @property
    def items(self) -> tuple[Action, ...]:
        return tuple(sorted(self._items.values(), key=lambda a: (a.subject.identity, a.permission.value)))

    @property
    def subjects(self) -> frozenset[EntityRef]:
        return frozenset(self._items)

    def permission(self, subject: EntityRef) -> Optional[Permission]:
        item = self._items.get(subject)
        return item.permission if item else None

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Action]:
        return iter(self.items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActionSet):
            return NotImplemented
        return frozenset(self._items.values()) == frozenset(other._items.values())

    def __hash__(self) -> int:
        return hash(frozenset(self._items.values()))

    def __repr__(self) -> str:
        return f"ActionSet({list(self.items)!r})"

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.items)


# Rules -------------------------------------------------------------------------


class SemanticCategory(str, Enum):
    RISK_ASSESSMENT = "risk_assessment"
    PHARMACOLOGICAL = "pharmacological"
    NON_PHARMACOLOGICAL = "non_pharmacological"
    OTHER = "other"


@dataclass(frozen=True)
class Source:
    guideline_id: str
    section: Optional[str] = None
    publication_year: Optional[int] = None
    # Marks the section as an exception list for specificity-priority handling.
    exception_list: bool = False


@dataclass(frozen=True)
class Rule:
    id: str
    condition: ConditionExpr
    action: ActionSet
    source: Source
    provenance_text: str = ""
    semantic_category: SemanticCategory = SemanticCategory.PHARMACOLOGICAL
    exception_of: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.action) == 0:
            raise ValidationError(f"rule {self.id}: action set is empty")


@dataclass(frozen=True)
class Axiom:
    antecedent: ConditionExpr
    consequent: ConditionExpr
    justification: str = ""


@dataclass(frozen=True)
class AxiomSet:
    axioms: tuple[Axiom, ...] = ()

    def __len__(self) -> int:
        return len(self.axioms)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(self.axioms)


# Relation labels -----------------------------------------------------------------


class CoarseLabel(str, Enum):
    REDUNDANCY = "redundancy"
    CONFLICT = "conflict"
    NONE = "none"


class BenchmarkLabel(str, Enum):
    LOCAL_CONFLICT = "local_conflict"
    IMPLICATION_CONFLICT_OR_DISAGREEMENT = "implication_conflict_or_disagreement"
    INTRINSIC_CONFLICT_OR_DISAGREEMENT = "intrinsic_conflict_or_disagreement"
    COMPLETE_REDUNDANCY = "complete_redundancy"
    CONTAINED_REDUNDANCY = "contained_redundancy"
    NONE = "none"

    @property
    def coarse(self) -> CoarseLabel:
        if self in (BenchmarkLabel.COMPLETE_REDUNDANCY, BenchmarkLabel.CONTAINED_REDUNDANCY):
            return CoarseLabel.REDUNDANCY
        if self is BenchmarkLabel.NONE:
            return CoarseLabel.NONE
        return CoarseLabel.CONFLICT


class RelationLabel(str, Enum):
    COMPLETE_REDUNDANCY = "complete_redundancy"
    CONTAINED_REDUNDANCY = "contained_redundancy"
    INTRINSIC_CONFLICT = "intrinsic_conflict"
    INTRINSIC_DISAGREEMENT = "intrinsic_disagreement"
    IMPLICATION_CONFLICT = "implication_conflict"
    IMPLICATION_DISAGREEMENT = "implication_disagreement"
    LOCAL_CONFLICT = "local_conflict"
    NONE = "none"

    @property
    def coarse(self) -> CoarseLabel:
        return self.benchmark_label.coarse

    @property
    def benchmark_label(self) -> BenchmarkLabel:
        return _BENCHMARK[self]


_BENCHMARK = {
    RelationLabel.COMPLETE_REDUNDANCY: BenchmarkLabel.COMPLETE_REDUNDANCY,
    RelationLabel.CONTAINED_REDUNDANCY: BenchmarkLabel.CONTAINED_REDUNDANCY,
    RelationLabel.INTRINSIC_CONFLICT: BenchmarkLabel.INTRINSIC_CONFLICT_OR_DISAGREEMENT,
    RelationLabel.INTRINSIC_DISAGREEMENT: BenchmarkLabel.INTRINSIC_CONFLICT_OR_DISAGREEMENT,
    RelationLabel.IMPLICATION_CONFLICT: BenchmarkLabel.IMPLICATION_CONFLICT_OR_DISAGREEMENT,
    RelationLabel.IMPLICATION_DISAGREEMENT: BenchmarkLabel.IMPLICATION_CONFLICT_OR_DISAGREEMENT,
    RelationLabel.LOCAL_CONFLICT: BenchmarkLabel.LOCAL_CONFLICT,
    RelationLabel.NONE: BenchmarkLabel.NONE,
}

# Presentation order used by reports: conflicts first, then redundancy.
LABEL_ORDER = (
    RelationLabel.LOCAL_CONFLICT,
    RelationLabel.IMPLICATION_CONFLICT,
    RelationLabel.IMPLICATION_DISAGREEMENT,
    RelationLabel.INTRINSIC_CONFLICT,
    RelationLabel.INTRINSIC_DISAGREEMENT,
    RelationLabel.CONTAINED_REDUNDANCY,
    RelationLabel.COMPLETE_REDUNDANCY,
    RelationLabel.NONE,
)


# Document ------------------------------------------------------------------------


@dataclass(frozen=True)
class DocumentMeta:
    schema_version: str = "1.0"
    # entity -> default unit for VALUE/DURATION/DELTA predicates lacking one
    units: dict[str, str] = field(default_factory=dict)
    # entity -> Sort.INT | Sort.ENUM
    stage_sorts: dict[str, Sort] = field(default_factory=dict)
    # "OP(entity)" -> closed token domain
    enum_domains: dict[str, tuple[str, ...]] = field(default_factory=dict)
    notes: Optional[str] = None


@dataclass(frozen=True)
class Document:
    meta: DocumentMeta
    predicates: dict[str, PredicateDef]
    rules: tuple[Rule, ...]
    axioms: AxiomSet = AxiomSet()

    def rule(self, rule_id: str) -> Rule:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)

    @property
    def rule_ids(self) -> list[str]:
        return [r.id for r in self.rules]
