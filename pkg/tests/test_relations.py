from __future__ import annotations

import itertools

import pytest
from builders import make_doc, rule

from guideline_verifier import relations
from guideline_verifier.compiler import Session
from guideline_verifier.document import load_document_file
from guideline_verifier.model import Action, ActionSet, EntityRef, Permission, RelationLabel
from guideline_verifier.relations import (
    ActionRelationKind,
    ConditionRelation,
    RelationConfig,
    action_relation,
    classify_pair,
    condition_relation,
    explain,
    permissions_conflict,
)

PREDS = [
    {"id": "t2dm", "operator": "HAS", "entity": "cond.t2dm"},
    {"id": "ckd", "operator": "HAS", "entity": "cond.ckd"},
    {"id": "hypo", "operator": "HAS", "entity": "cond.symptomatic_hypotension"},
    {"id": "liver", "operator": "HAS", "entity": "cond.severe_liver_impairment"},
    {"id": "dialysis", "operator": "HAS", "entity": "proc.dialysis"},
    {"id": "egfr_ge_30", "expr": "VALUE(meas.egfr) >= 30"},
    {"id": "egfr_lt_45", "expr": "VALUE(meas.egfr) < 45"},
    {"id": "egfr_lt_30", "expr": "VALUE(meas.egfr) < 30"},
    {"id": "egfr_lt_15", "expr": "VALUE(meas.egfr) < 15"},
    {"id": "egfr_ge_60", "expr": "VALUE(meas.egfr) >= 60"},
]


def verdict(rules, a, b, axioms=(), config=RelationConfig()):
    doc = make_doc(PREDS, rules, axioms)
    s = Session(doc)
    return classify_pair(s.compile_rule(doc.rule(a)), s.compile_rule(doc.rule(b)), s.axioms(), config)


def _s(subject_perms):
    return ActionSet([Action(EntityRef.parse(s), Permission(p)) for s, p in subject_perms])


def test_condition_relation_examples():
    s = Session(make_doc(PREDS))
    from guideline_verifier.document import parse_condition_text as p

    c = lambda t: s.compile_condition(p(t))  # noqa: E731
    assert condition_relation(c("egfr_lt_30"), c("egfr_lt_45")).relation is ConditionRelation.IMPLIES_FORWARD
    assert condition_relation(c("egfr_lt_45"), c("egfr_lt_30")).relation is ConditionRelation.IMPLIES_BACKWARD
    assert condition_relation(c("liver"), c("liver")).relation is ConditionRelation.EQUIVALENT
    inter = condition_relation(c("t2dm AND egfr_ge_30 AND egfr_lt_45"), c("hypo"))
    assert inter.relation is ConditionRelation.INTERSECT
    assert condition_relation(c("egfr_lt_30"), c("egfr_ge_60")).relation is ConditionRelation.MUTEX


def test_condition_relation_uses_three_queries(monkeypatch):
    calls = []
    real = relations.check_sat

    def counting(*args, **kwargs):
        calls.append(args)
        return real(*args, **kwargs)

    monkeypatch.setattr(relations, "check_sat", counting)
    s = Session(make_doc(PREDS))
    from guideline_verifier.document import parse_condition_text as p

    for a, b in [("liver", "liver"), ("egfr_lt_30", "egfr_lt_45"), ("hypo", "t2dm"), ("egfr_lt_30", "egfr_ge_60")]:
        calls.clear()
        condition_relation(s.compile_condition(p(a)), s.compile_condition(p(b)))
        assert len(calls) == 3


def test_action_relation_examples():
    assert action_relation(_s([("med.sglt2i", "CONTINUE")]), _s([("med.sglt2i", "STOP")])).value is ActionRelationKind.CONFLICT
    dis = action_relation(_s([("med.metformin", "CONTRAINDICATE")]), _s([("med.metformin", "AVOID")]))
    assert dis.value is ActionRelationKind.DISAGREEMENT
    assert dis.witnesses[0].permission_a is Permission.CONTRAINDICATE
    indep = action_relation(_s([("med.sglt2i", "RECOMMEND")]), _s([("med.statin", "RECOMMEND")]))
    assert indep.value is ActionRelationKind.INDEPENDENT
    partial = action_relation(_s([("med.a", "STOP"), ("med.b", "ALLOW")]), _s([("med.a", "STOP")]))
    assert partial.value is ActionRelationKind.PARTIAL_AGREEMENT
    same = action_relation(_s([("med.a", "STOP"), ("med.b", "ALLOW")]), _s([("med.b", "ALLOW"), ("med.a", "STOP")]))
    assert same.value is ActionRelationKind.EQUIVALENT


def test_permission_conflict_table():
    P = Permission
    assert permissions_conflict(P.REDUCE_DOSE, P.INCREASE_DOSE)
    assert not permissions_conflict(P.REDUCE_DOSE, P.START_LOW_DOSE)
    assert permissions_conflict(P.CAUTION, P.CONTRAINDICATE)
    assert not permissions_conflict(P.CAUTION, P.REQUIRE)
    assert not permissions_conflict(P.CONTRAINDICATE, P.AVOID)
    for a, b in itertools.product(P, P):
        assert permissions_conflict(a, b) == permissions_conflict(b, a)


def test_reference_row1_local_conflict():
    rules = [
        rule("a", "t2dm AND ckd AND egfr_ge_30 AND egfr_lt_45", ("med.sglt2i", "RECOMMEND")),
        rule("b", "hypo", ("med.sglt2i", "CONTRAINDICATE")),
    ]
    v = verdict(rules, "a", "b")
    assert v.label is RelationLabel.LOCAL_CONFLICT
    named = {var.name: value for var, value in v.model.items()}
    assert named["HAS(cond.t2dm)"] and named["HAS(cond.ckd)"] and named["HAS(cond.symptomatic_hypotension)"]
    assert 30 <= named["VALUE(meas.egfr)"] < 45


def test_reference_row3_intrinsic_conflict():
    rules = [
        rule("a", "egfr_lt_15 OR dialysis", ("med.sglt2i", "CONTINUE")),
        rule("b", "dialysis OR egfr_lt_15", ("med.sglt2i", "STOP")),
    ]
    assert verdict(rules, "a", "b").label is RelationLabel.INTRINSIC_CONFLICT


def test_contained_redundancy_names_the_narrow_rule():
    rules = [rule("a", "egfr_lt_30", ("med.metformin", "AVOID")), rule("b", "egfr_lt_45", ("med.metformin", "AVOID"))]
    v = verdict(rules, "a", "b")
    assert v.label is RelationLabel.CONTAINED_REDUNDANCY
    assert v.redundant_rule == "a"
    assert verdict(rules, "b", "a").redundant_rule == "a"


def test_identical_rule_twice():
    rules = [rule("a", "liver", ("med.x", "AVOID")), rule("b", "liver", ("med.x", "AVOID"))]
    assert verdict(rules, "a", "b").label is RelationLabel.COMPLETE_REDUNDANCY


@pytest.mark.parametrize(
    "ca, pa, cb, pb, label",
    [
        ("egfr_lt_30", "CONTRAINDICATE", "egfr_lt_45", "AVOID", RelationLabel.IMPLICATION_DISAGREEMENT),
        ("egfr_lt_30", "STOP", "egfr_lt_45", "CONTINUE", RelationLabel.IMPLICATION_CONFLICT),
        ("liver", "REDUCE_DOSE", "liver", "START_LOW_DOSE", RelationLabel.INTRINSIC_DISAGREEMENT),
        ("liver", "REDUCE_DOSE", "liver", "INCREASE_DOSE", RelationLabel.INTRINSIC_CONFLICT),
        ("hypo", "RECOMMEND", "t2dm", "CONSIDER", RelationLabel.NONE),  # intersect + disagreement
        ("egfr_lt_30", "RECOMMEND", "egfr_ge_60", "STOP", RelationLabel.NONE),  # mutex
        ("hypo", "CAUTION", "t2dm", "AVOID", RelationLabel.LOCAL_CONFLICT),
        ("hypo", "CAUTION", "hypo", "REQUIRE", RelationLabel.INTRINSIC_DISAGREEMENT),
    ],
)
def test_decision_table(ca, pa, cb, pb, label):
    rules = [rule("a", ca, ("med.x", pa)), rule("b", cb, ("med.x", pb))]
    assert verdict(rules, "a", "b").label is label
    assert verdict(rules, "b", "a").label is label


def test_mutex_with_equal_actions_is_none():
    rules = [rule("a", "egfr_lt_30", ("med.x", "STOP")), rule("b", "egfr_ge_60", ("med.x", "STOP"))]
    v = verdict(rules, "a", "b")
    assert v.label is RelationLabel.NONE and v.condition_relation is ConditionRelation.MUTEX


def test_partial_agreement_is_none():
    rules = [rule("a", "liver", ("med.x", "STOP"), ("med.y", "ALLOW")), rule("b", "liver", ("med.x", "STOP"))]
    v = verdict(rules, "a", "b")
    assert v.action_relation.value is ActionRelationKind.PARTIAL_AGREEMENT
    assert v.label is RelationLabel.NONE


def test_axiom_turns_intersection_into_implication():
    preds_extra = [{"id": "cv_high", "expr": "RISK(cond.cvd) = high"}]
    rules = [
        rule("a", "t2dm AND cv_high", ("med.x", "RECOMMEND")),
        rule("b", "t2dm AND ckd", ("med.x", "RECOMMEND")),
    ]
    doc_without = make_doc(PREDS + preds_extra, rules)
    doc_with = make_doc(PREDS + preds_extra, rules, [{"if": "ckd", "then": "cv_high"}])
    for doc, expected in [(doc_without, RelationLabel.NONE), (doc_with, RelationLabel.CONTAINED_REDUNDANCY)]:
        s = Session(doc)
        v = classify_pair(s.compile_rule(doc.rule("a")), s.compile_rule(doc.rule("b")), s.axioms())
        assert v.label is expected


def test_spec_prior_suppresses_declared_exceptions():
    rules = [
        rule("general", "egfr_lt_45", ("med.x", "RECOMMEND")),
        rule("specific", "egfr_lt_30", ("med.x", "STOP"), exception_of=["general"]),
    ]
    off = verdict(rules, "general", "specific")
    on = verdict(rules, "general", "specific", config=RelationConfig(spec_prior=True))
    assert off.label is RelationLabel.IMPLICATION_CONFLICT and not off.spec_prior_applied
    assert on.label is RelationLabel.NONE and on.spec_prior_applied
    assert "exception" in explain(on)


def test_spec_prior_via_exception_list_same_guideline():
    exc_rule = rule("specific", "egfr_lt_30", ("med.x", "STOP"))
    exc_rule["source"] = {"guideline_id": "G1", "exception_list": True}
    rules = [rule("general", "egfr_lt_45", ("med.x", "RECOMMEND")), exc_rule]
    on = verdict(rules, "general", "specific", config=RelationConfig(spec_prior=True))
    assert on.label is RelationLabel.NONE
    other = dict(exc_rule, source={"guideline_id": "G2", "exception_list": True})
    rules2 = [rule("general", "egfr_lt_45", ("med.x", "RECOMMEND")), other]
    assert verdict(rules2, "general", "specific", config=RelationConfig(spec_prior=True)).label is RelationLabel.IMPLICATION_CONFLICT


def test_spec_prior_never_touches_intrinsic_conflicts():
    rules = [rule("a", "liver", ("med.x", "RECOMMEND")), rule("b", "liver", ("med.x", "STOP"), exception_of=["a"])]
    v = verdict(rules, "a", "b", config=RelationConfig(spec_prior=True))
    assert v.label is RelationLabel.INTRINSIC_CONFLICT


def test_isolation_from_unrelated_rules(reference_path):
    doc = load_document_file(reference_path)
    s1 = Session(doc)
    base = classify_pair(s1.compile_rule(doc.rule("ref-local-a")), s1.compile_rule(doc.rule("ref-local-b")), s1.axioms())
    s2 = Session(doc)
    for r in reversed(doc.rules):
        s2.compile_rule(r)
    again = classify_pair(s2.compile_rule(doc.rule("ref-local-a")), s2.compile_rule(doc.rule("ref-local-b")), s2.axioms())
    assert base.label is again.label
    assert {v.name: x for v, x in base.model.items()} == {v.name: x for v, x in again.model.items()}


def test_explanations():
    rules = [
        rule("a", "t2dm AND egfr_ge_30 AND egfr_lt_45", ("med.sglt2i", "RECOMMEND")),
        rule("b", "hypo", ("med.sglt2i", "CONTRAINDICATE")),
        rule("c", "egfr_lt_30", ("med.y", "STOP")),
        rule("d", "liver", ("med.z", "REDUCE_DOSE")),
        rule("e", "liver", ("med.z", "TITRATE")),
    ]
    local = explain(verdict(rules, "a", "b"))
    assert "HAS(cond.symptomatic_hypotension)" in local and "VALUE(meas.egfr)" in local
    assert "RECOMMEND vs CONTRAINDICATE" in local
    assert "no logical interaction" in explain(verdict(rules, "a", "c"))
    intrinsic = explain(verdict(rules, "d", "e"))
    assert "REDUCE_DOSE vs TITRATE" in intrinsic
