"""Pairwise rule relations: condition relation, action relation, taxonomy label."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence

from .compiler import CompiledAxiom, CompiledRule, Formula, TheoryVar, conj, negate
from .model import (
    ActionSet,
    EntityRef,
    Permission,
    RelationLabel,
    Rule,
    allows,
    format_literal,
    prohibits,
)
from .solver import check_sat


class ConditionRelation(str, Enum):
    EQUIVALENT = "equivalent"
    IMPLIES_FORWARD = "implies_forward"  # C_a => C_b
    IMPLIES_BACKWARD = "implies_backward"  # C_b => C_a
    MUTEX = "mutex"
    INTERSECT = "intersect"

    @property
    def is_implication(self) -> bool:
        return self in (ConditionRelation.IMPLIES_FORWARD, ConditionRelation.IMPLIES_BACKWARD)

    def reversed(self) -> "ConditionRelation":
        if self is ConditionRelation.IMPLIES_FORWARD:
            return ConditionRelation.IMPLIES_BACKWARD
        if self is ConditionRelation.IMPLIES_BACKWARD:
            return ConditionRelation.IMPLIES_FORWARD
        return self


class ActionRelationKind(str, Enum):
    EQUIVALENT = "equivalent"
    CONFLICT = "conflict"
    DISAGREEMENT = "disagreement"
    PARTIAL_AGREEMENT = "partial_agreement"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class ActionWitness:
    subject: EntityRef
    permission_a: Permission
    permission_b: Permission


@dataclass(frozen=True)
class ActionRelation:
    value: ActionRelationKind
    witnesses: tuple[ActionWitness, ...] = ()


@dataclass(frozen=True)
class ConditionAnalysis:
    relation: ConditionRelation
    # model of C_a AND C_b when the overlap is satisfiable
    overlap_model: Optional[dict[TheoryVar, Any]] = None


@dataclass(frozen=True)
class RelationConfig:
    spec_prior: bool = False


@dataclass(frozen=True)
class RelationVerdict:
    rule_a: str
    rule_b: str
    label: RelationLabel
    condition_relation: ConditionRelation
    action_relation: ActionRelation
    model: Optional[dict[TheoryVar, Any]] = None
    spec_prior_applied: bool = False
    # for contained redundancy: the rule whose condition is the narrower one
    redundant_rule: Optional[str] = None
    notes: tuple[str, ...] = field(default=())


def condition_relation(
    ca: Formula, cb: Formula, axioms: Sequence[CompiledAxiom] = ()
) -> ConditionAnalysis:
    """Relate two conditions with three satisfiability queries.

    ``C_a AND NOT C_b`` and ``C_b AND NOT C_a`` decide the implications and
    ``C_a AND C_b`` decides overlap. An empty overlap wins over equivalence so
    that rules with no shared population are always mutex.
    """
    forward_gap = check_sat(conj(ca, negate(cb)), axioms)
    backward_gap = check_sat(conj(cb, negate(ca)), axioms)
    overlap = check_sat(conj(ca, cb), axioms)
    if not overlap.sat:
        return ConditionAnalysis(ConditionRelation.MUTEX)
    if not forward_gap.sat and not backward_gap.sat:
        relation = ConditionRelation.EQUIVALENT
    elif not forward_gap.sat:
        relation = ConditionRelation.IMPLIES_FORWARD
    elif not backward_gap.sat:
        relation = ConditionRelation.IMPLIES_BACKWARD
    else:
        relation = ConditionRelation.INTERSECT
    return ConditionAnalysis(relation, overlap.model)


_OPPOSING_DOSE = {frozenset({Permission.REDUCE_DOSE, Permission.INCREASE_DOSE})}


def permissions_conflict(pa: Permission, pb: Permission) -> bool:
    """Allow-vs-prohibit on one subject, or directly opposite dose adjustments."""
    if (allows(pa) and prohibits(pb)) or (prohibits(pa) and allows(pb)):
        return True
    return frozenset({pa, pb}) in _OPPOSING_DOSE


def action_relation(aa: ActionSet, ab: ActionSet) -> ActionRelation:
    if aa == ab:
        return ActionRelation(ActionRelationKind.EQUIVALENT)
    overlap = sorted(aa.subjects & ab.subjects, key=lambda s: s.identity)
    if not overlap:
        return ActionRelation(ActionRelationKind.INDEPENDENT)
    pairs = [ActionWitness(s, aa.permission(s), ab.permission(s)) for s in overlap]
    conflicts = tuple(w for w in pairs if permissions_conflict(w.permission_a, w.permission_b))
    if conflicts:
        return ActionRelation(ActionRelationKind.CONFLICT, conflicts)
    differing = tuple(w for w in pairs if w.permission_a != w.permission_b)
    if differing:
        return ActionRelation(ActionRelationKind.DISAGREEMENT, differing)
    return ActionRelation(ActionRelationKind.PARTIAL_AGREEMENT, tuple(pairs))


def _spec_prior(specific: Rule, general: Rule) -> bool:
    if general.id in specific.exception_of:
        return True
    return specific.source.exception_list and specific.source.guideline_id == general.source.guideline_id


_DECISION = {
    (ConditionRelation.EQUIVALENT, ActionRelationKind.EQUIVALENT): RelationLabel.COMPLETE_REDUNDANCY,
    (ConditionRelation.EQUIVALENT, ActionRelationKind.CONFLICT): RelationLabel.INTRINSIC_CONFLICT,
    (ConditionRelation.EQUIVALENT, ActionRelationKind.DISAGREEMENT): RelationLabel.INTRINSIC_DISAGREEMENT,
    ("implies", ActionRelationKind.EQUIVALENT): RelationLabel.CONTAINED_REDUNDANCY,
    ("implies", ActionRelationKind.CONFLICT): RelationLabel.IMPLICATION_CONFLICT,
    ("implies", ActionRelationKind.DISAGREEMENT): RelationLabel.IMPLICATION_DISAGREEMENT,
    (ConditionRelation.INTERSECT, ActionRelationKind.CONFLICT): RelationLabel.LOCAL_CONFLICT,
}


def classify_pair(
    ra: CompiledRule,
    rb: CompiledRule,
    axioms: Sequence[CompiledAxiom] = (),
    config: RelationConfig = RelationConfig(),
) -> RelationVerdict:
    analysis = condition_relation(ra.formula, rb.formula, axioms)
    actions = action_relation(ra.rule.action, rb.rule.action)
    cond = analysis.relation
    key = ("implies" if cond.is_implication else cond, actions.value)
    label = _DECISION.get(key, RelationLabel.NONE)

    redundant = None
    if cond is ConditionRelation.IMPLIES_FORWARD:
        specific, general = ra.rule, rb.rule
    elif cond is ConditionRelation.IMPLIES_BACKWARD:
        specific, general = rb.rule, ra.rule
    else:
        specific = general = None
    if label is RelationLabel.CONTAINED_REDUNDANCY:
        redundant = specific.id

    applied = False
    if config.spec_prior and label in (RelationLabel.IMPLICATION_CONFLICT, RelationLabel.LOCAL_CONFLICT):
        if label is RelationLabel.IMPLICATION_CONFLICT:
            applied = _spec_prior(specific, general)
        else:
            applied = _spec_prior(ra.rule, rb.rule) or _spec_prior(rb.rule, ra.rule)
        if applied:
            label = RelationLabel.NONE

    notes = ()
    if cond is ConditionRelation.INTERSECT and actions.value is ActionRelationKind.DISAGREEMENT:
        notes = ("intersecting conditions with disagreeing actions (no taxonomy type; reported as none)",)
    return RelationVerdict(
        ra.id,
        rb.id,
        label,
        cond,
        actions,
        analysis.overlap_model,
        applied,
        redundant,
        notes,
    )


# Explanations ---------------------------------------------------------------------------


def format_model(model: Optional[dict[TheoryVar, Any]]) -> str:
    if not model:
        return "(none)"
    parts = []
    for var, value in model.items():
        if isinstance(value, bool):
            parts.append(var.name if value else f"not {var.name}")
        else:
            unit = f" {var.sort.unit}" if var.sort.unit else ""
            parts.append(f"{var.name} = {format_literal(value)}{unit}")
    return ", ".join(parts)


def _witness_text(relation: ActionRelation) -> str:
    return "; ".join(f"{w.subject}: {w.permission_a.value} vs {w.permission_b.value}" for w in relation.witnesses)


def explain(verdict: RelationVerdict) -> str:
    a, b = verdict.rule_a, verdict.rule_b
    label = verdict.label
    if label is RelationLabel.NONE:
        text = f"{a} / {b}: no logical interaction"
        if verdict.spec_prior_applied:
            text += " (conflict suppressed: the specific rule is a declared exception)"
        elif verdict.notes:
            text += f" ({verdict.notes[0]})"
        return text
    if label is RelationLabel.LOCAL_CONFLICT:
        return (
            f"{a} / {b}: local conflict. The conditions only intersect; a patient such as "
            f"[{format_model(verdict.model)}] satisfies both and receives opposing directives "
            f"({_witness_text(verdict.action_relation)})."
        )
    if label is RelationLabel.COMPLETE_REDUNDANCY:
        return f"{a} / {b}: complete redundancy. Equivalent conditions and identical actions; one can be removed."
    if label is RelationLabel.CONTAINED_REDUNDANCY:
        direction = _direction(verdict)
        return (
            f"{a} / {b}: contained redundancy. {direction[0].upper()}{direction[1:]}; actions are identical, so "
            f"{verdict.redundant_rule} adds nothing within the broader rule's scope."
        )
    scope = "over the same population" if label.name.startswith("INTRINSIC") else f"where {_direction(verdict)}"
    return (
        f"{a} / {b}: {label.value.replace('_', ' ')} {scope}; "
        f"differing permissions: {_witness_text(verdict.action_relation)}."
    )


def _direction(verdict: RelationVerdict) -> str:
    if verdict.condition_relation is ConditionRelation.IMPLIES_FORWARD:
        return f"the condition of {verdict.rule_a} implies that of {verdict.rule_b}"
    return f"the condition of {verdict.rule_b} implies that of {verdict.rule_a}"
