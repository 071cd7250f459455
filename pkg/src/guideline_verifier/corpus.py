"""Corpus-level scanning: LSH candidate pairing, relationship graph, reports."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from .compiler import CompiledRule, Session, TheoryVar
from .model import LABEL_ORDER, Document, RelationLabel, Rule, SemanticCategory, iter_refs
from .relations import RelationConfig, RelationVerdict, classify_pair, explain

MERSENNE_61 = (1 << 61) - 1
REPORT_VERSION = "1.0"


@dataclass(frozen=True)
class LshConfig:
    num_perm: int = 128
    bands: int = 32
    rows: int = 4
    shingle: int = 3
    seed: int = 1

    def __post_init__(self) -> None:
        if min(self.num_perm, self.bands, self.rows, self.shingle) < 1:
            raise ValueError("LSH parameters must be positive")
        if self.bands * self.rows > self.num_perm:
            raise ValueError(f"bands*rows ({self.bands * self.rows}) exceeds num_perm ({self.num_perm})")

    def collision_probability(self, jaccard: float) -> float:
        return 1 - (1 - jaccard**self.rows) ** self.bands


@dataclass(frozen=True)
class MinHashSignature:
    rule_id: str
    k: int
    values: tuple[int, ...]

    def jaccard(self, other: "MinHashSignature") -> float:
        return sum(a == b for a, b in zip(self.values, other.values)) / self.k


def _h64(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


_PERMUTATIONS: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}


def _permutations(k: int, seed: int) -> tuple[tuple[int, int], ...]:
    cached = _PERMUTATIONS.get((k, seed))
    if cached is None:
        cached = tuple(
            (_h64(f"{seed}:a:{i}") % (MERSENNE_61 - 1) + 1, _h64(f"{seed}:b:{i}") % MERSENNE_61)
            for i in range(k)
        )
        _PERMUTATIONS[(k, seed)] = cached
    return cached


def minhash(rule_id: str, tokens: Iterable[str], k: int = 128, seed: int = 1) -> MinHashSignature:
    hashed = [_h64(t) % MERSENNE_61 for t in set(tokens)]
    if not hashed:
        return MinHashSignature(rule_id, k, (MERSENNE_61,) * k)
    values = tuple(min((a * x + b) % MERSENNE_61 for x in hashed) for a, b in _permutations(k, seed))
    return MinHashSignature(rule_id, k, values)


_WORD = re.compile(r"[a-z0-9]+")


def text_shingles(text: str, size: int = 3) -> set[str]:
    words = _WORD.findall(text.lower())
    if len(words) < size:
        return {"t:" + " ".join(words)} if words else set()
    return {"t:" + " ".join(words[i : i + size]) for i in range(len(words) - size + 1)}


def rule_tokens(rule: Rule, document: Document, shingle: int = 3) -> set[str]:
    """Text shingles plus predicate-variable keys and action subjects."""
    tokens = text_shingles(rule.provenance_text, shingle)
    for pid in iter_refs(rule.condition):
        pred = document.predicates[pid]
        qual = f",{pred.qualifier}" if pred.qualifier is not None else ""
        tokens.add(f"p:{pred.operator.value}({pred.entity}{qual})")
    for action in rule.action:
        tokens.add(f"s:{action.subject}")
    return tokens


def band_keys(signature: MinHashSignature, config: LshConfig) -> list[tuple[int, tuple[int, ...]]]:
    r = config.rows
    return [(i, signature.values[i * r : (i + 1) * r]) for i in range(config.bands)]


def candidate_pairs(
    rules: Sequence[Rule], document: Document, config: LshConfig = LshConfig()
) -> set[tuple[str, str]]:
    """LSH bucket collisions plus every pair sharing an action subject.

    Pairs are returned as ``(earlier_id, later_id)`` in ``rules`` order. Any
    non-``none`` verdict needs a shared subject, so the subject net alone
    already covers every edge; LSH adds textual neighbours on top.
    """
    position = {r.id: i for i, r in enumerate(rules)}

    def ordered(a: str, b: str) -> tuple[str, str]:
        return (a, b) if position[a] < position[b] else (b, a)

    pairs: set[tuple[str, str]] = set()
    buckets: dict[tuple, list[str]] = defaultdict(list)
    for rule in rules:
        sig = minhash(rule.id, rule_tokens(rule, document, config.shingle), config.num_perm, config.seed)
        for key in band_keys(sig, config):
            buckets[key].append(rule.id)
    by_subject: dict[Any, list[str]] = defaultdict(list)
    for rule in rules:
        for subject in rule.action.subjects:
            by_subject[subject].append(rule.id)
    for group in list(buckets.values()) + list(by_subject.values()):
        members = list(dict.fromkeys(group))
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                pairs.add(ordered(a, b))
    return pairs


# Graph ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    rule_a: str
    rule_b: str
    verdict: RelationVerdict


@dataclass(frozen=True)
class RelationshipGraph:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    def degree(self, rule_id: str) -> int:
        return sum(rule_id in (e.rule_a, e.rule_b) for e in self.edges)

    def degrees(self) -> dict[str, int]:
        counts = {n: 0 for n in self.nodes}
        for e in self.edges:
            counts[e.rule_a] += 1
            counts[e.rule_b] += 1
        return counts

    def edge_set(self) -> set[tuple[frozenset, RelationLabel]]:
        return {(frozenset((e.rule_a, e.rule_b)), e.verdict.label) for e in self.edges}


def build_graph(nodes: Sequence[str], verdicts: Iterable[RelationVerdict]) -> RelationshipGraph:
    edges = tuple(
        Edge(v.rule_a, v.rule_b, v) for v in verdicts if v.label is not RelationLabel.NONE and v.rule_a != v.rule_b
    )
    return RelationshipGraph(tuple(nodes), edges)


def isolated_rules(graph: RelationshipGraph, all_rules: Sequence[Any]) -> list[str]:
    """Rules with no incident edge, in the order given."""
    degrees = graph.degrees()
    ids = [r if isinstance(r, str) else r.id for r in all_rules]
    return [rid for rid in ids if degrees.get(rid, 0) == 0]


# Scan ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanConfig:
    exhaustive: bool = False
    lsh: LshConfig = LshConfig()
    relation: RelationConfig = RelationConfig()
    use_axioms: bool = True


@dataclass
class ScanResult:
    rule_ids: list[str]
    verdicts: list[RelationVerdict]
    candidates: set[tuple[str, str]]
    exhaustive: bool
    graph: RelationshipGraph
    skipped: list[str] = field(default_factory=list)

    def label_counts(self, only: Optional[set[tuple[str, str]]] = None) -> dict[str, int]:
        counts = Counter(
            v.label.value for v in self.verdicts if only is None or (v.rule_a, v.rule_b) in only
        )
        return {label.value: counts.get(label.value, 0) for label in LABEL_ORDER}

    @property
    def isolated(self) -> list[str]:
        return isolated_rules(self.graph, self.rule_ids)


def scan(
    document: Document,
    config: ScanConfig = ScanConfig(),
    rule_ids: Optional[Sequence[str]] = None,
    session: Optional[Session] = None,
) -> ScanResult:
    """Classify rule pairs of a document and assemble the relationship graph.

    Only pharmacological rules take part; others are listed in ``skipped``.
    """
    session = session or Session(document)
    chosen = document.rules if rule_ids is None else [document.rule(r) for r in rule_ids]
    rules = [r for r in chosen if r.semantic_category is SemanticCategory.PHARMACOLOGICAL]
    skipped = [r.id for r in chosen if r.semantic_category is not SemanticCategory.PHARMACOLOGICAL]
    compiled: dict[str, CompiledRule] = {r.id: session.compile_rule(r) for r in rules}
    axioms = session.axioms() if config.use_axioms else ()

    candidates = candidate_pairs(rules, document, config.lsh)
    if config.exhaustive:
        pairs = [(a.id, b.id) for i, a in enumerate(rules) for b in rules[i + 1 :]]
    else:
        position = {r.id: i for i, r in enumerate(rules)}
        pairs = sorted(candidates, key=lambda p: (position[p[0]], position[p[1]]))
    verdicts = [classify_pair(compiled[a], compiled[b], axioms, config.relation) for a, b in pairs]
    ids = [r.id for r in rules]
    return ScanResult(ids, verdicts, candidates, config.exhaustive, build_graph(ids, verdicts), skipped)


# Reports ----------------------------------------------------------------------------------


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return value


def model_to_json(model: Optional[dict[TheoryVar, Any]]) -> Optional[dict[str, Any]]:
    if model is None:
        return None
    return {var.name: _json_value(value) for var, value in model.items()}


def verdict_to_json(verdict: RelationVerdict, document: Optional[Document] = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "rule_a": verdict.rule_a,
        "rule_b": verdict.rule_b,
        "label": verdict.label.value,
        "benchmark_label": verdict.label.benchmark_label.value,
        "coarse": verdict.label.coarse.value,
        "evidence": {
            "condition_relation": verdict.condition_relation.value,
            "action_relation": verdict.action_relation.value.value,
            "action_witnesses": [
                {"subject": str(w.subject), "permission_a": w.permission_a.value, "permission_b": w.permission_b.value}
                for w in verdict.action_relation.witnesses
            ],
            "witness_model": model_to_json(verdict.model),
            "spec_prior_applied": verdict.spec_prior_applied,
            "redundant_rule": verdict.redundant_rule,
        },
        "explanation": explain(verdict),
    }
    if document is not None:
        out["sources"] = [_source_json(document.rule(verdict.rule_a)), _source_json(document.rule(verdict.rule_b))]
    return out


def _source_json(rule: Rule) -> dict[str, Any]:
    return {
        "rule_id": rule.id,
        "guideline_id": rule.source.guideline_id,
        "section": rule.source.section,
        "publication_year": rule.source.publication_year,
        "provenance_text": rule.provenance_text,
    }


def _ordered_edges(result: ScanResult) -> list[Edge]:
    position = {rid: i for i, rid in enumerate(result.rule_ids)}
    rank = {label: i for i, label in enumerate(LABEL_ORDER)}
    return sorted(
        result.graph.edges,
        key=lambda e: (rank[e.verdict.label], position[e.rule_a], position[e.rule_b]),
    )


def report_dict(result: ScanResult, document: Document) -> dict[str, Any]:
    candidate_counts = result.label_counts(result.candidates)
    return {
        "report_version": REPORT_VERSION,
        "edges": [verdict_to_json(e.verdict, document) for e in _ordered_edges(result)],
        "isolated": result.isolated,
        "stats": {
            "mode": "exhaustive" if result.exhaustive else "lsh",
            "rules": len(result.rule_ids),
            "skipped_non_pharmacological": result.skipped,
            "pairs_examined": len(result.verdicts),
            "candidate_pairs": len(result.candidates),
            "edges": len(result.graph.edges),
            "label_counts": result.label_counts(),
            "candidate_label_counts": candidate_counts,
            # only known when every pair was classified
            "exhaustive_label_counts": result.label_counts() if result.exhaustive else None,
        },
    }


def _text_report(result: ScanResult, document: Document) -> str:
    lines = []
    current = None
    for edge in _ordered_edges(result):
        coarse = edge.verdict.label.coarse
        if coarse is not current:
            current = coarse
            lines.append(f"== {coarse.value.upper()} ==")
        v = edge.verdict
        a, b = document.rule(v.rule_a), document.rule(v.rule_b)
        lines.append(f"[{v.label.value}] {v.rule_a} <-> {v.rule_b}")
        lines.append(f"  A ({a.source.guideline_id}): {a.provenance_text}")
        lines.append(f"  B ({b.source.guideline_id}): {b.provenance_text}")
        lines.append(f"  conditions: {v.condition_relation.value}; actions: {v.action_relation.value.value}")
        lines.append(f"  {explain(v)}")
    if not result.graph.edges:
        lines.append("no logical interactions found")
    counts = ", ".join(f"{k}={n}" for k, n in result.label_counts().items() if n)
    lines.append(f"-- {len(result.rule_ids)} rules, {len(result.verdicts)} pairs examined; {counts or 'no pairs'}")
    if result.isolated:
        lines.append(f"-- isolated: {', '.join(result.isolated)}")
    return "\n".join(lines) + "\n"


def emit_report(result: ScanResult, document: Document, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report_dict(result, document), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return _text_report(result, document).encode("utf-8")
    raise ValueError(f"unsupported report format {fmt!r} (expected 'json' or 'text')")
