"""Benchmark harness: gold pairs, noise injection, prediction import and scoring."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from .compiler import Session
from .model import BenchmarkLabel, CoarseLabel, Document, Permission, RelationLabel
from .relations import RelationConfig, classify_pair

MAX_NOISE = 8

REFERENCE_COUNTS = {
    BenchmarkLabel.LOCAL_CONFLICT: 20,
    BenchmarkLabel.IMPLICATION_CONFLICT_OR_DISAGREEMENT: 40,
    BenchmarkLabel.INTRINSIC_CONFLICT_OR_DISAGREEMENT: 37,
    BenchmarkLabel.COMPLETE_REDUNDANCY: 15,
    BenchmarkLabel.CONTAINED_REDUNDANCY: 54,
    BenchmarkLabel.NONE: 60,
}
REFERENCE_RATIOS = {
    BenchmarkLabel.LOCAL_CONFLICT: 0.088,
    BenchmarkLabel.IMPLICATION_CONFLICT_OR_DISAGREEMENT: 0.177,
    BenchmarkLabel.INTRINSIC_CONFLICT_OR_DISAGREEMENT: 0.164,
    BenchmarkLabel.COMPLETE_REDUNDANCY: 0.066,
    BenchmarkLabel.CONTAINED_REDUNDANCY: 0.239,
    BenchmarkLabel.NONE: 0.265,
}
REFERENCE_COARSE_RATIOS = {CoarseLabel.CONFLICT: 0.429, CoarseLabel.REDUNDANCY: 0.305, CoarseLabel.NONE: 0.265}


class UnknownLabelError(ValueError):
    pass


class InsufficientIsolatedRules(ValueError):
    pass


class PredictionFormatError(ValueError):
    pass


_BENCHMARK_TOKENS = {label.value for label in BenchmarkLabel}
_LEAF_TOKENS = {label.value for label in RelationLabel}


def normalize_label(token: str, fine: bool = False) -> str:
    """Map a label token to the scoring granularity.

    Benchmark granularity accepts both leaf and merged tokens; fine
    granularity accepts leaf tokens only.
    """
    token = token.strip()
    if fine:
        if token not in _LEAF_TOKENS:
            raise UnknownLabelError(f"unknown fine-grained label {token!r}")
        return token
    if token in _BENCHMARK_TOKENS:
        return token
    if token in _LEAF_TOKENS:
        return RelationLabel(token).benchmark_label.value
    raise UnknownLabelError(f"unknown label {token!r}")


def coarse_of(token: str) -> CoarseLabel:
    if token in _BENCHMARK_TOKENS:
        return BenchmarkLabel(token).coarse
    return RelationLabel(token).coarse


# Gold data ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldPair:
    sample_id: str
    rule_a: str
    rule_b: str
    label: str
    fine_label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.label not in _BENCHMARK_TOKENS:
            raise UnknownLabelError(f"gold label {self.label!r} is not a benchmark label")
        if self.fine_label is not None and self.fine_label not in _LEAF_TOKENS:
            raise UnknownLabelError(f"unknown fine label {self.fine_label!r}")

    def to_json(self) -> dict[str, Any]:
        out = {"sample_id": self.sample_id, "rule_a": self.rule_a, "rule_b": self.rule_b, "label": self.label}
        if self.fine_label is not None:
            out["fine_label"] = self.fine_label
        return out


def load_gold(data: Union[bytes, str], document: Optional[Document] = None) -> list[GoldPair]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    gold = []
    known = set(document.rule_ids) if document is not None else None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            pair = GoldPair(
                str(raw["sample_id"]), str(raw["rule_a"]), str(raw["rule_b"]), raw["label"], raw.get("fine_label")
            )
        except (json.JSONDecodeError, KeyError, TypeError, UnknownLabelError) as exc:
            raise PredictionFormatError(f"gold line {lineno}: {exc}") from None
        if known is not None:
            for rid in (pair.rule_a, pair.rule_b):
                if rid not in known:
                    raise PredictionFormatError(f"gold line {lineno}: unknown rule id {rid!r}")
        gold.append(pair)
    return gold


def dump_gold(gold: Iterable[GoldPair]) -> bytes:
    return "".join(json.dumps(g.to_json()) + "\n" for g in gold).encode("utf-8")


# Noise ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class NoisySample:
    base: GoldPair
    distractors: tuple[str, ...]
    presentation_order: tuple[str, ...]
    seed: int

    @property
    def sample_id(self) -> str:
        return self.base.sample_id

    def to_json(self) -> dict[str, Any]:
        return {
            **self.base.to_json(),
            "distractors": list(self.distractors),
            "presentation_order": list(self.presentation_order),
            "seed": self.seed,
        }


def derive_seed(seed: int, sample_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{sample_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def inject_noise(gold: Sequence[GoldPair], isolated: Sequence[str], k: int, seed: int) -> list[NoisySample]:
    """Add ``k`` isolated distractor rules to every gold pair and shuffle.

    Each sample draws without replacement from the isolated pool (minus its own
    base rules) using a seed derived from ``seed`` and the sample id.
    """
    if not 0 <= k <= MAX_NOISE:
        raise ValueError(f"k must be within [0, {MAX_NOISE}], got {k}")
    samples = []
    for pair in gold:
        derived = derive_seed(seed, pair.sample_id)
        if k == 0:
            samples.append(NoisySample(pair, (), (pair.rule_a, pair.rule_b), derived))
            continue
        pool = [r for r in isolated if r not in (pair.rule_a, pair.rule_b)]
        if len(pool) < k:
            raise InsufficientIsolatedRules(
                f"sample {pair.sample_id}: need {k} isolated rules, only {len(pool)} available"
            )
        rng = random.Random(derived)
        distractors = tuple(rng.sample(pool, k))
        order = [pair.rule_a, pair.rule_b, *distractors]
        rng.shuffle(order)
        samples.append(NoisySample(pair, distractors, tuple(order), derived))
    return samples


def dump_noise(samples: Sequence[NoisySample], k: int, seed: int) -> bytes:
    payload = {"k": k, "seed": seed, "samples": [s.to_json() for s in samples]}
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def load_noise(data: Union[bytes, str]) -> list[NoisySample]:
    raw = json.loads(data)
    out = []
    for item in raw["samples"]:
        base = GoldPair(item["sample_id"], item["rule_a"], item["rule_b"], item["label"], item.get("fine_label"))
        out.append(NoisySample(base, tuple(item["distractors"]), tuple(item["presentation_order"]), item["seed"]))
    return out


def load_dataset(data: Union[bytes, str], document: Optional[Document] = None) -> list[Union[GoldPair, NoisySample]]:
    """Load either a noise dataset (JSON object with ``samples``) or gold JSON lines."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            head = json.loads(text)
        except json.JSONDecodeError:
            head = None
        if isinstance(head, dict) and "samples" in head:
            return load_noise(text)
    return load_gold(text, document)


# Engine as a benchmarked system ----------------------------------------------------------------


def run_engine_as_system(
    dataset: Sequence[Union[GoldPair, NoisySample]],
    document: Document,
    config: RelationConfig = RelationConfig(),
    fine: bool = False,
) -> dict[str, str]:
    """Predict a label for every sample's base pair.

    Each sample gets a fresh compilation session fed with its rules in
    presentation order, so distractors really pass through the engine; they
    still cannot influence the base pair's verdict.
    """
    predictions = {}
    for sample in dataset:
        base = sample.base if isinstance(sample, NoisySample) else sample
        order = sample.presentation_order if isinstance(sample, NoisySample) else (base.rule_a, base.rule_b)
        session = Session(document)
        compiled = {rid: session.compile_rule(document.rule(rid)) for rid in order}
        verdict = classify_pair(compiled[base.rule_a], compiled[base.rule_b], session.axioms(), config)
        predictions[base.sample_id] = verdict.label.value if fine else verdict.label.benchmark_label.value
    return predictions


# Predictions I/O --------------------------------------------------------------------------------


def import_predictions(data: Union[bytes, str], fmt: Optional[str] = None) -> dict[str, str]:
    """Read predictions as CSV (``sample_id,label``) or JSON.

    JSON may be an object ``{sample_id: label}`` or a list of
    ``{"sample_id": ..., "label": ...}`` records.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt is None:
        fmt = "json" if text.lstrip()[:1] in ("{", "[") else "csv"
    if not text.strip():
        return {}
    if fmt == "json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PredictionFormatError(f"line {exc.lineno}: {exc.msg}") from None
        items = raw.items() if isinstance(raw, dict) else ((r.get("sample_id"), r.get("label")) for r in raw)
        out = {}
        for i, (sid, label) in enumerate(items):
            if sid is None or not isinstance(label, str):
                raise PredictionFormatError(f"record {i}: needs sample_id and label")
            try:
                normalize_label(label, fine=label in _LEAF_TOKENS and label not in _BENCHMARK_TOKENS)
            except UnknownLabelError as exc:
                raise PredictionFormatError(f"record {i}: {exc}") from None
            out[str(sid)] = label
        return out
    if fmt != "csv":
        raise ValueError(f"unsupported prediction format {fmt!r}")
    reader = csv.reader(io.StringIO(text))
    out = {}
    for lineno, row in enumerate(reader, 1):
        if not row or not any(cell.strip() for cell in row):
            continue
        if lineno == 1 and [c.strip().lower() for c in row] == ["sample_id", "label"]:
            continue
        if len(row) != 2:
            raise PredictionFormatError(f"line {lineno}: expected 2 fields (sample_id,label), got {len(row)}")
        sid, label = row[0].strip(), row[1].strip()
        if label not in _BENCHMARK_TOKENS and label not in _LEAF_TOKENS:
            raise PredictionFormatError(f"line {lineno}: unknown label {label!r}")
        out[sid] = label
    return out


def export_predictions(predictions: Mapping[str, str], fmt: str = "csv") -> bytes:
    if fmt == "json":
        return (json.dumps(dict(predictions), indent=2) + "\n").encode("utf-8")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "label"])
    for sid, label in predictions.items():
        writer.writerow([sid, label])
    return buf.getvalue().encode("utf-8")


# Scoring --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassScore:
    tp: int
    fp: int
    fn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def to_json(self) -> dict[str, Any]:
        return {
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "support": self.support,
        }


@dataclass(frozen=True)
class ScoreTable:
    labels: tuple[str, ...]
    per_class: dict[str, ClassScore]
    coarse: dict[str, ClassScore]
    confusion: dict[str, dict[str, int]]
    n: int
    missing: tuple[str, ...] = field(default=())

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "per_class": {k: v.to_json() for k, v in self.per_class.items()},
            "coarse": {k: v.to_json() for k, v in self.coarse.items()},
            "confusion": self.confusion,
            "missing_predictions": list(self.missing),
        }

    def format_text(self) -> str:
        width = max(len(label) for label in [*self.labels, "redundancy"])
        lines = [f"{'label':<{width}}  prec.  rec.   F1     support"]
        for name, row in [*self.coarse.items(), *self.per_class.items()]:
            lines.append(f"{name:<{width}}  {row.precision:.3f}  {row.recall:.3f}  {row.f1:.3f}  {row.support}")
        lines.append(f"samples: {self.n}" + (f" ({len(self.missing)} without prediction, scored as none)" if self.missing else ""))
        return "\n".join(lines) + "\n"


def _class_score(pairs: Sequence[tuple[str, str]], positive) -> ClassScore:
    tp = sum(1 for g, p in pairs if positive(g) and positive(p))
    fp = sum(1 for g, p in pairs if not positive(g) and positive(p))
    fn = sum(1 for g, p in pairs if positive(g) and not positive(p))
    return ClassScore(tp, fp, fn)


def score(predictions: Mapping[str, str], gold: Sequence[GoldPair], fine: bool = False) -> ScoreTable:
    """One-vs-rest precision/recall/F1 per class, plus redundancy and conflict rows.

    A prediction counts for a coarse row whenever its fine label falls in that
    category. Samples without a prediction are scored as ``none``.
    """
    labels = tuple(l.value for l in RelationLabel) if fine else tuple(l.value for l in BenchmarkLabel)
    pairs = []
    missing = []
    for g in gold:
        truth = g.label if not fine else g.fine_label
        if truth is None:
            raise UnknownLabelError(f"sample {g.sample_id} has no fine_label for fine-grained scoring")
        if g.sample_id in predictions:
            guess = normalize_label(predictions[g.sample_id], fine)
        else:
            missing.append(g.sample_id)
            guess = "none"
        pairs.append((truth, guess))
    per_class = {label: _class_score(pairs, lambda x, label=label: x == label) for label in labels}
    coarse = {
        c.value: _class_score(pairs, lambda x, c=c: coarse_of(x) is c)
        for c in (CoarseLabel.REDUNDANCY, CoarseLabel.CONFLICT)
    }
    counts = Counter(pairs)
    confusion = {g: {p: counts.get((g, p), 0) for p in labels} for g in labels}
    return ScoreTable(labels, per_class, coarse, confusion, len(pairs), tuple(missing))


# Synthetic gold generator ------------------------------------------------------------------------

_P = Permission
CONFLICT_PERMS = [
    (_P.RECOMMEND, _P.CONTRAINDICATE),
    (_P.CONTINUE, _P.STOP),
    (_P.REQUIRE, _P.AVOID),
    (_P.CAUTION, _P.CONTRAINDICATE),
    (_P.REDUCE_DOSE, _P.INCREASE_DOSE),
    (_P.CONSIDER, _P.STOP),
    (_P.ALLOW, _P.AVOID),
]
DISAGREE_PERMS = [
    (_P.CONTRAINDICATE, _P.AVOID),
    (_P.RECOMMEND, _P.CONSIDER),
    (_P.REDUCE_DOSE, _P.START_LOW_DOSE),
    (_P.CAUTION, _P.RECOMMEND),
    (_P.TITRATE, _P.MAX_DOSE_LIMIT),
    (_P.STOP, _P.AVOID),
]
SAME_PERMS = [_P.RECOMMEND, _P.AVOID, _P.CONTRAINDICATE, _P.STOP, _P.REDUCE_DOSE, _P.CONSIDER]


class _Builder:
    def __init__(self) -> None:
        self.predicates: list[dict[str, Any]] = []
        self.rules: list[dict[str, Any]] = []
        self.stage_sorts: dict[str, str] = {}
        self.domains: dict[str, list[str]] = {}

    def pred(self, pid: str, **spec: Any) -> str:
        self.predicates.append({"id": pid, **spec})
        return pid

    def rule(self, rid: str, condition: str, actions: list[tuple[str, Permission]], text: str, guideline: str) -> str:
        self.rules.append(
            {
                "id": rid,
                "condition": condition,
                "action": [{"subject": s, "permission": p.value} for s, p in actions],
                "source": {"guideline_id": guideline, "section": "synthetic"},
                "provenance_text": text,
                "semantic_category": "pharmacological",
            }
        )
        return rid

    def vocabulary(self, tag: str) -> dict[str, str]:
        """Fresh predicates for one pair, all keyed on entities unique to ``tag``."""
        v = {}
        v["a"] = self.pred(f"{tag}_has_a", operator="HAS", entity=f"cond.{tag}_a")
        v["b"] = self.pred(f"{tag}_has_b", operator="HAS", entity=f"cond.{tag}_b")
        v["c"] = self.pred(f"{tag}_on_c", operator="ON", entity=f"med.{tag}_c")
        meas = f"meas.{tag}_lab"
        for name, cmp_, val in [("lt15", "LT", 15), ("lt30", "LT", 30), ("lt45", "LT", 45), ("ge30", "GE", 30), ("ge45", "GE", 45)]:
            v[name] = self.pred(f"{tag}_{name}", operator="VALUE", entity=meas, comparator=cmp_, value=val, unit="mL/min/1.73m2")
        stage = f"cond.{tag}_stage"
        self.stage_sorts[stage] = "integer"
        v["st3"] = self.pred(f"{tag}_stage_ge3", operator="STAGE", entity=stage, comparator="GE", value=3)
        v["st4"] = self.pred(f"{tag}_stage_ge4", operator="STAGE", entity=stage, comparator="GT", value=3)
        risk = f"cond.{tag}_risk"
        self.domains[f"RISK({risk})"] = ["low", "high"]
        v["high"] = self.pred(f"{tag}_risk_high", operator="RISK", entity=risk, comparator="EQ", value="high")
        v["low"] = self.pred(f"{tag}_risk_low", operator="RISK", entity=risk, comparator="EQ", value="low")
        return v


_EQUIVALENT_CONDITIONS = [
    lambda v: (f"{v['a']} OR {v['b']}", f"{v['b']} OR {v['a']}"),
    lambda v: (f"NOT ({v['a']} AND {v['b']})", f"NOT {v['a']} OR NOT {v['b']}"),
    lambda v: (v["lt30"], f"NOT {v['ge30']}"),
    lambda v: (v["high"], f"NOT {v['low']}"),
    lambda v: (f"{v['a']} AND {v['lt45']}", f"{v['lt45']} AND {v['a']}"),
]
_IMPLYING_CONDITIONS = [
    lambda v: (v["lt30"], v["lt45"]),
    lambda v: (f"{v['a']} AND {v['b']}", v["a"]),
    lambda v: (v["st4"], v["st3"]),
    lambda v: (f"{v['a']} AND {v['lt15']}", f"{v['a']} OR {v['c']}"),
    lambda v: (v["b"], f"{v['b']} OR {v['c']}"),
]
_INTERSECTING_CONDITIONS = [
    lambda v: (f"{v['a']} AND {v['ge30']} AND {v['lt45']}", v["b"]),
    lambda v: (f"{v['a']} OR {v['b']}", f"{v['b']} OR {v['c']}"),
    lambda v: (v["lt45"], v["ge30"]),
    lambda v: (f"{v['high']} AND {v['a']}", f"NOT {v['a']} OR {v['b']}"),
]
_MUTEX_CONDITIONS = [
    lambda v: (v["lt30"], v["ge45"]),
    lambda v: (f"{v['a']} AND {v['b']}", f"NOT {v['a']}"),
    lambda v: (v["high"], v["low"]),
]


def synthetic_benchmark(
    counts: Mapping[BenchmarkLabel, int] = REFERENCE_COUNTS, n_isolated: int = 24, seed: int = 0
) -> tuple[dict[str, Any], list[GoldPair]]:
    """Build a rules document and gold pairs with the requested label counts.

    Every pair gets private entities and drug subjects, so pairs never interact
    with each other; ``n_isolated`` extra single rules serve as distractors.
    Labels are assigned by construction, not by running the engine.
    """
    rng = random.Random(seed)
    b = _Builder()
    gold: list[GoldPair] = []
    index = 0

    def add(label: RelationLabel, cond_pair: tuple[str, str], perms, subject_override=None, extra=None) -> None:
        nonlocal index
        tag = f"p{index:03d}"
        subject = f"med.{tag}_drug"
        ca, cb = cond_pair
        acts_a = [(subject, perms[0])] + (extra or [])
        acts_b = [(subject_override or subject, perms[1])]
        guideline_a, guideline_b = f"GL-{rng.randint(1, 12):02d}", f"GL-{rng.randint(1, 12):02d}"
        ra = b.rule(f"{tag}-a", ca, acts_a, f"{tag} rule a: {perms[0].value.lower()} {subject} when {ca}", guideline_a)
        rb = b.rule(f"{tag}-b", cb, acts_b, f"{tag} rule b: {perms[1].value.lower()} {subject_override or subject} when {cb}", guideline_b)
        if rng.random() < 0.5:
            ra, rb = rb, ra
        gold.append(GoldPair(f"s{index:04d}", ra, rb, label.benchmark_label.value, label.value))
        index += 1

    def vocab() -> dict[str, str]:
        return b.vocabulary(f"p{index:03d}")

    def pick(options):
        return options[rng.randrange(len(options))]

    for label, count in counts.items():
        for i in range(count):
            v = vocab()
            if label is BenchmarkLabel.LOCAL_CONFLICT:
                add(RelationLabel.LOCAL_CONFLICT, pick(_INTERSECTING_CONDITIONS)(v), pick(CONFLICT_PERMS))
            elif label is BenchmarkLabel.IMPLICATION_CONFLICT_OR_DISAGREEMENT:
                if i % 2 == 0:
                    add(RelationLabel.IMPLICATION_CONFLICT, pick(_IMPLYING_CONDITIONS)(v), pick(CONFLICT_PERMS))
                else:
                    add(RelationLabel.IMPLICATION_DISAGREEMENT, pick(_IMPLYING_CONDITIONS)(v), pick(DISAGREE_PERMS))
            elif label is BenchmarkLabel.INTRINSIC_CONFLICT_OR_DISAGREEMENT:
                if i % 2 == 0:
                    add(RelationLabel.INTRINSIC_CONFLICT, pick(_EQUIVALENT_CONDITIONS)(v), pick(CONFLICT_PERMS))
                else:
                    add(RelationLabel.INTRINSIC_DISAGREEMENT, pick(_EQUIVALENT_CONDITIONS)(v), pick(DISAGREE_PERMS))
            elif label is BenchmarkLabel.COMPLETE_REDUNDANCY:
                p = pick(SAME_PERMS)
                add(RelationLabel.COMPLETE_REDUNDANCY, pick(_EQUIVALENT_CONDITIONS)(v), (p, p))
            elif label is BenchmarkLabel.CONTAINED_REDUNDANCY:
                p = pick(SAME_PERMS)
                add(RelationLabel.CONTAINED_REDUNDANCY, pick(_IMPLYING_CONDITIONS)(v), (p, p))
            else:
                variant = i % 5
                if variant == 0:
                    add(RelationLabel.NONE, pick(_MUTEX_CONDITIONS)(v), pick(CONFLICT_PERMS))
                elif variant == 1:
                    add(RelationLabel.NONE, pick(_INTERSECTING_CONDITIONS)(v), pick(DISAGREE_PERMS))
                elif variant == 2:
                    p = pick(SAME_PERMS)
                    tag = f"p{index:03d}"
                    add(RelationLabel.NONE, pick(_EQUIVALENT_CONDITIONS)(v), (p, p), extra=[(f"med.{tag}_other", _P.CONSIDER)])
                elif variant == 3:
                    tag = f"p{index:03d}"
                    add(RelationLabel.NONE, pick(_IMPLYING_CONDITIONS)(v), pick(CONFLICT_PERMS), subject_override=f"med.{tag}_alt")
                else:
                    p = pick(SAME_PERMS)
                    add(RelationLabel.NONE, pick(_INTERSECTING_CONDITIONS)(v), (p, p))

    for j in range(n_isolated):
        tag = f"iso{j:02d}"
        pid = b.pred(f"{tag}_has", operator="HAS", entity=f"cond.{tag}")
        perm = pick(SAME_PERMS)
        b.rule(f"{tag}", pid, [(f"med.{tag}_drug", perm)], f"isolated rule {tag}: {perm.value.lower()} when {pid}", "GL-ISO")

    document = {
        "meta": {
            "schema_version": "1.0",
            "stage_sorts": b.stage_sorts,
            "enum_domains": b.domains,
            "notes": f"synthetic benchmark, seed {seed}",
        },
        "predicates": b.predicates,
        "rules": b.rules,
        "axioms": [],
    }
    return document, gold


def label_marginals(gold: Sequence[GoldPair]) -> dict[str, tuple[int, float]]:
    counts = Counter(g.label for g in gold)
    total = len(gold)
    return {label.value: (counts.get(label.value, 0), counts.get(label.value, 0) / total if total else 0.0) for label in BenchmarkLabel}
