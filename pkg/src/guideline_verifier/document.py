"""JSON interchange format: loading, validation and canonical serialization.

Top-level keys are ``meta``, ``predicates``, ``rules`` and ``axioms``.
Conditions may be written as text (``has_t2dm AND NOT on_insulin``) or as an
AST (``{"and": [{"ref": "has_t2dm"}, {"not": {"ref": "on_insulin"}}]}``).
Predicates may likewise be written structurally or as ``"expr":
"VALUE(meas.egfr) < 45"``.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Optional

from .model import (
    Action,
    ActionSet,
    And,
    Axiom,
    AxiomSet,
    Comparator,
    ConditionExpr,
    Document,
    DocumentMeta,
    EntityRef,
    Not,
    Or,
    Permission,
    PredicateDef,
    PredicateOperator,
    Ref,
    Rule,
    SemanticCategory,
    Sort,
    Source,
    ValidationError,
    is_identifier,
    is_snake_identifier,
    iter_refs,
)

SCHEMA_VERSION = "1.0"

# unit alias -> (canonical unit, multiplier into canonical)
UNIT_TABLE: dict[str, tuple[str, Fraction]] = {
    "mL/min/1.73m2": ("mL/min/1.73m2", Fraction(1)),
    "ml/min/1.73m2": ("mL/min/1.73m2", Fraction(1)),
    "mL/min/1.73 m2": ("mL/min/1.73m2", Fraction(1)),
    "mL/min/1.73m^2": ("mL/min/1.73m2", Fraction(1)),
    "days": ("days", Fraction(1)),
    "day": ("days", Fraction(1)),
    "d": ("days", Fraction(1)),
    "hours": ("days", Fraction(1, 24)),
    "hour": ("days", Fraction(1, 24)),
    "h": ("days", Fraction(1, 24)),
    "weeks": ("days", Fraction(7)),
    "week": ("days", Fraction(7)),
    "months": ("days", Fraction(30)),
    "month": ("days", Fraction(30)),
    "years": ("days", Fraction(365)),
    "year": ("days", Fraction(365)),
    "percent": ("percent", Fraction(1)),
    "%": ("percent", Fraction(1)),
    "fraction": ("percent", Fraction(100)),
    "mmol/L": ("mmol/L", Fraction(1)),
    "mEq/L": ("mmol/L", Fraction(1)),
    "umol/L": ("umol/L", Fraction(1)),
    "µmol/L": ("umol/L", Fraction(1)),
    "mmHg": ("mmHg", Fraction(1)),
    "kg": ("kg", Fraction(1)),
    "g": ("kg", Fraction(1, 1000)),
    "kg/m2": ("kg/m2", Fraction(1)),
    "bpm": ("bpm", Fraction(1)),
}


def normalize_unit(value: Fraction, unit: Optional[str]) -> tuple[Fraction, Optional[str]]:
    """Convert ``value`` into the canonical unit. Unknown units pass through unchanged."""
    if unit is None:
        return value, None
    canonical, factor = UNIT_TABLE.get(unit, (unit, Fraction(1)))
    return value * factor, canonical


_COMPARATOR_TOKENS = {
    "<": Comparator.LT,
    "<=": Comparator.LE,
    "≤": Comparator.LE,
    ">": Comparator.GT,
    ">=": Comparator.GE,
    "≥": Comparator.GE,
    "=": Comparator.EQ,
    "==": Comparator.EQ,
    "!=": Comparator.NE,
    "≠": Comparator.NE,
    "<>": Comparator.NE,
}


def parse_comparator(token: str, path: str) -> Comparator:
    if token in _COMPARATOR_TOKENS:
        return _COMPARATOR_TOKENS[token]
    try:
        return Comparator(token.upper())
    except ValueError:
        raise ValidationError(f"unknown comparator {token!r}", path) from None


# Condition text grammar -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(|\)|[A-Za-z_][A-Za-z0-9_]*|\S)")


def _tokenize(text: str, path: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:  # only trailing whitespace left
            break
        tokens.append(match.group(1))
        pos = match.end()
    for token in tokens:
        if not (token in "()" or re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", token)):
            raise ValidationError(f"unexpected character {token!r} in condition {text!r}", path)
    return tokens


def parse_condition_text(text: str, path: str = "$") -> ConditionExpr:
    """Parse ``expr := term (("AND"|"OR") term)*`` with precedence NOT > AND > OR."""
    tokens = _tokenize(text, path)
    pos = 0

    def peek() -> Optional[str]:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ValidationError(f"unexpected end of condition {text!r}", path)
        pos += 1
        return tokens[pos - 1]

    def parse_or() -> ConditionExpr:
        items = [parse_and()]
        while peek() == "OR":
            take()
            items.append(parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def parse_and() -> ConditionExpr:
        items = [parse_term()]
        while peek() == "AND":
            take()
            items.append(parse_term())
        return items[0] if len(items) == 1 else And(tuple(items))

    def parse_term() -> ConditionExpr:
        token = take()
        if token == "NOT":
            return Not(parse_term())
        if token == "(":
            inner = parse_or()
            if take() != ")":
                raise ValidationError(f"expected ')' in condition {text!r}", path)
            return inner
        if token in ("AND", "OR", ")"):
            raise ValidationError(f"unexpected {token!r} in condition {text!r}", path)
        return Ref(token)

    if not tokens:
        raise ValidationError("empty condition", path)
    expr = parse_or()
    if pos != len(tokens):
        raise ValidationError(f"trailing tokens {tokens[pos:]} in condition {text!r}", path)
    return expr


def _parse_condition(raw: Any, path: str) -> ConditionExpr:
    if isinstance(raw, str):
        return parse_condition_text(raw, path)
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ValidationError("condition node must be a string or a single-key object", path)
    (key, value), = raw.items()
    key = key.lower()
    if key == "ref":
        if not isinstance(value, str):
            raise ValidationError("ref must name a predicate id", path)
        return Ref(value)
    if key == "not":
        return Not(_parse_condition(value, f"{path}.not"))
    if key in ("and", "or"):
        if not isinstance(value, list) or len(value) < 2:
            raise ValidationError(f"{key.upper()} needs at least two operands", path)
        children = tuple(_parse_condition(v, f"{path}.{key}[{i}]") for i, v in enumerate(value))
        return And(children) if key == "and" else Or(children)
    raise ValidationError(f"unknown condition node {key!r}", path)


def condition_to_json(expr: ConditionExpr) -> Any:
    if isinstance(expr, Ref):
        return {"ref": expr.predicate}
    if isinstance(expr, Not):
        return {"not": condition_to_json(expr.child)}
    key = "and" if isinstance(expr, And) else "or"
    return {key: [condition_to_json(c) for c in expr.children]}


# Predicate text form -------------------------------------------------------------------

_PRED_TEXT = re.compile(
    r"^\s*(?P<op>[A-Za-z]+)\s*\(\s*(?P<args>[^)]*)\)\s*"
    r"(?:(?P<cmp><=|>=|==|!=|<>|<|>|=|≤|≥|≠)\s*(?P<rhs>[^\s%]+)\s*(?P<unit>%|\S.*?)?)?\s*$"
)


def _snake(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.strip().lower()).strip("_")


def _parse_predicate_text(text: str, path: str) -> dict[str, Any]:
    match = _PRED_TEXT.match(text)
    if match is None:
        raise ValidationError(f"cannot parse predicate expression {text!r}", path)
    args = [a.strip() for a in match.group("args").split(",") if a.strip()]
    if not args or len(args) > 2:
        raise ValidationError(f"predicate {text!r} needs one entity (plus qualifier for ASSESS)", path)
    raw: dict[str, Any] = {"operator": match.group("op").upper()}
    if len(args) == 2:
        subject, qualifier = args
        raw["entity"] = subject if "." in subject else f"assess.{_snake(subject)}"
        raw["qualifier"] = qualifier
    else:
        raw["entity"] = args[0]
    if match.group("cmp"):
        raw["comparator"] = match.group("cmp")
        raw["value"] = match.group("rhs")
        if match.group("unit"):
            raw["unit"] = "percent" if match.group("unit") == "%" else match.group("unit").strip()
    return raw


# Loader ----------------------------------------------------------------------------------


class _Loader:
    def __init__(self, raw: dict[str, Any]):
        self.raw = raw
        self.codes: dict[tuple[str, str], tuple[str, str]] = {}

    # entities
    def collect_codes(self) -> None:
        def visit(node: Any, path: str) -> None:
            if isinstance(node, dict) and "code" in node and ("id" in node or "local_id" in node):
                ident = node.get("id") or f"{node.get('namespace')}.{node.get('local_id')}"
                ns, _, local = str(ident).partition(".")
                entry = (node.get("code_system"), node.get("code"))
                known = self.codes.setdefault((ns, local), entry)
                if known != entry:
                    raise ValidationError(f"entity {ident} carries two different codes {known} and {entry}", path)

        for i, p in enumerate(self.raw.get("predicates") or []):
            if isinstance(p, dict):
                visit(p.get("entity"), f"$.predicates[{i}].entity")
                visit(p.get("qualifier"), f"$.predicates[{i}].qualifier")
        for i, r in enumerate(self.raw.get("rules") or []):
            if isinstance(r, dict):
                actions = r.get("action")
                actions = actions if isinstance(actions, list) else [actions]
                for j, a in enumerate(actions):
                    if isinstance(a, dict):
                        visit(a.get("subject"), f"$.rules[{i}].action[{j}].subject")

    def entity(self, raw: Any, path: str) -> EntityRef:
        try:
            if isinstance(raw, str):
                ref = EntityRef.parse(raw)
            elif isinstance(raw, dict):
                ident = raw.get("id")
                if ident is None:
                    ident = f"{raw.get('namespace')}.{raw.get('local_id')}"
                ref = EntityRef.parse(str(ident), raw.get("code_system"), raw.get("code"))
            else:
                raise ValidationError("entity must be a string or object")
            if ref.code is None:
                system, code = self.codes.get((ref.namespace.value, ref.local_id), (None, None))
                if code is not None:
                    ref = EntityRef.parse(str(ref), system, code)
            return ref
        except ValidationError as exc:
            raise ValidationError(exc.message, path) from None

    # meta
    def meta(self) -> DocumentMeta:
        raw = self.raw.get("meta") or {}
        if not isinstance(raw, dict):
            raise ValidationError("meta must be an object", "$.meta")
        version = str(raw.get("schema_version", SCHEMA_VERSION))
        if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
            raise ValidationError(f"unsupported schema_version {version}", "$.meta.schema_version")
        stage_sorts = {}
        for entity, sort in (raw.get("stage_sorts") or {}).items():
            token = str(sort).lower()
            if token in ("integer", "int"):
                stage_sorts[entity] = Sort.INT
            elif token == "enum":
                stage_sorts[entity] = Sort.ENUM
            else:
                raise ValidationError(f"STAGE sort for {entity} must be 'integer' or 'enum'", "$.meta.stage_sorts")
        domains = {}
        for key, tokens in (raw.get("enum_domains") or {}).items():
            if not isinstance(tokens, list) or not tokens:
                raise ValidationError(f"enum domain {key} must be a non-empty list", "$.meta.enum_domains")
            domains[key] = tuple(sorted({str(t).lower() for t in tokens}))
        units = {str(k): str(v) for k, v in (raw.get("units") or {}).items()}
        return DocumentMeta(version, units, stage_sorts, domains, raw.get("notes"))

    # predicates
    def literal(self, raw: Any, sort: Sort, path: str) -> tuple[Any, Optional[str]]:
        if sort is Sort.ENUM:
            if not isinstance(raw, str) or not re.match(r"^[A-Za-z0-9_+\-]+$", raw):
                raise ValidationError(f"enum value must be a token, got {raw!r}", path)
            return raw.lower(), None
        if isinstance(raw, bool):
            raise ValidationError(f"expected a number, got {raw!r}", path)
        unit = None
        if isinstance(raw, str):
            text = raw.strip()
            if text.endswith("%"):
                text, unit = text[:-1].strip(), "percent"
            try:
                value = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise ValidationError(f"expected a number, got {raw!r}", path) from None
        elif isinstance(raw, (int, Fraction)):
            value = Fraction(raw)
        else:
            raise ValidationError(f"expected a number, got {raw!r}", path)
        if sort is Sort.INT:
            if value.denominator != 1:
                raise ValidationError(f"integer-sorted predicate needs an integer, got {raw!r}", path)
            return int(value), unit
        return value, unit

    def predicate(self, raw: Any, meta: DocumentMeta, path: str) -> PredicateDef:
        if not isinstance(raw, dict):
            raise ValidationError("predicate must be an object", path)
        pid = raw.get("id")
        if not isinstance(pid, str) or not is_snake_identifier(pid):
            raise ValidationError(f"predicate id {pid!r} must be lowercase snake_case", path)
        if "expr" in raw:
            raw = {**_parse_predicate_text(str(raw["expr"]), path), **{k: v for k, v in raw.items() if k != "expr"}}
        try:
            operator = PredicateOperator(str(raw.get("operator", "")).upper())
        except ValueError:
            raise ValidationError(f"unknown operator {raw.get('operator')!r}", path) from None
        entity = self.entity(raw.get("entity"), f"{path}.entity")
        qualifier = None
        if operator is PredicateOperator.ASSESS:
            if raw.get("qualifier") is None:
                raise ValidationError("ASSESS needs a qualifier (the assessed entity)", path)
            qualifier = self.entity(raw["qualifier"], f"{path}.qualifier")
        elif raw.get("qualifier") is not None:
            raise ValidationError(f"qualifier only allowed for ASSESS, not {operator.value}", path)

        stage_sort = meta.stage_sorts.get(str(entity))
        if operator is PredicateOperator.STAGE and stage_sort is None:
            raise ValidationError(f"STAGE({entity}) needs a stage_sorts declaration in meta", path)
        sort = operator.sort(stage_sort)

        comparator_raw = raw.get("comparator")
        value_raw = raw.get("value")
        if sort is Sort.BOOL:
            # "ASSESS(x, y) = True" is accepted as the plain boolean predicate
            if comparator_raw is not None and not (
                parse_comparator(str(comparator_raw), path) is Comparator.EQ and str(value_raw).lower() == "true"
            ):
                raise ValidationError(f"{operator.value} is boolean-sorted and takes no comparison", path)
            if comparator_raw is None and value_raw not in (None, True):
                raise ValidationError(f"{operator.value} is boolean-sorted and takes no value", path)
            if raw.get("unit") is not None:
                raise ValidationError(f"{operator.value} is boolean-sorted and takes no unit", path)
            return PredicateDef(pid, operator, entity, qualifier)

        if comparator_raw is None or value_raw is None:
            raise ValidationError(f"{operator.value} is {sort.value}-sorted and needs comparator and value", path)
        comparator = parse_comparator(str(comparator_raw), path)
        if sort is Sort.ENUM and comparator not in (Comparator.EQ, Comparator.NE):
            raise ValidationError(f"{operator.value}({entity}) is enum-sorted; only = and != apply", path)
        value, inline_unit = self.literal(value_raw, sort, f"{path}.value")
        unit = raw.get("unit") or inline_unit
        if sort is Sort.ENUM:
            if unit is not None:
                raise ValidationError("enum-sorted predicates take no unit", path)
            domain = meta.enum_domains.get(f"{operator.value}({entity})")
            if domain is not None and value not in domain:
                raise ValidationError(f"{value!r} not in declared domain {list(domain)}", f"{path}.value")
            return PredicateDef(pid, operator, entity, None, comparator, value)
        if sort is Sort.INT:
            if unit is not None:
                raise ValidationError("integer-sorted predicates take no unit", path)
            return PredicateDef(pid, operator, entity, None, comparator, value)

        if unit is None:
            unit = meta.units.get(str(entity))
        if unit is None and operator is PredicateOperator.DURATION:
            unit = "days"
        if operator is PredicateOperator.DELTA and unit is None:
            raise ValidationError("DELTA must declare its unit: percent or an absolute unit", path)
        value, unit = normalize_unit(value, unit)
        return PredicateDef(pid, operator, entity, None, comparator, value, unit)

    # rules
    def condition(self, raw: Any, predicates: dict[str, PredicateDef], path: str) -> ConditionExpr:
        if raw is None:
            raise ValidationError("missing condition", path)
        expr = _parse_condition(raw, path)
        for ref in iter_refs(expr):
            if ref not in predicates:
                raise ValidationError(f"unresolved predicate reference {ref!r}", path)
        return expr

    def rule(self, raw: Any, predicates: dict[str, PredicateDef], path: str) -> Rule:
        if not isinstance(raw, dict):
            raise ValidationError("rule must be an object", path)
        rid = raw.get("id")
        if not isinstance(rid, str) or not is_identifier(rid):
            raise ValidationError(f"invalid rule id {rid!r}", path)
        condition = self.condition(raw.get("condition"), predicates, f"{path}.condition")
        actions_raw = raw.get("action")
        if isinstance(actions_raw, dict):
            actions_raw = [actions_raw]
        if not isinstance(actions_raw, list) or not actions_raw:
            raise ValidationError("action must be a non-empty list of {subject, permission}", f"{path}.action")
        actions = []
        for i, item in enumerate(actions_raw):
            ipath = f"{path}.action[{i}]"
            if not isinstance(item, dict):
                raise ValidationError("action item must be an object", ipath)
            try:
                permission = Permission(str(item.get("permission", "")).upper())
            except ValueError:
                raise ValidationError(f"unknown permission {item.get('permission')!r}", ipath) from None
            actions.append(Action(self.entity(item.get("subject"), f"{ipath}.subject"), permission))
        try:
            action = ActionSet(actions)
        except ValidationError as exc:
            raise ValidationError(exc.message, f"{path}.action") from None

        source_raw = raw.get("source") or {}
        if isinstance(source_raw, str):
            source_raw = {"guideline_id": source_raw}
        if not isinstance(source_raw, dict) or not source_raw.get("guideline_id"):
            raise ValidationError("source needs a guideline_id", f"{path}.source")
        year = source_raw.get("publication_year")
        if year is not None and (isinstance(year, bool) or not isinstance(year, int)):
            raise ValidationError("publication_year must be an integer", f"{path}.source")
        source = Source(
            str(source_raw["guideline_id"]),
            source_raw.get("section"),
            year,
            bool(source_raw.get("exception_list", False)),
        )
        try:
            category = SemanticCategory(raw.get("semantic_category", SemanticCategory.PHARMACOLOGICAL.value))
        except ValueError:
            raise ValidationError(f"unknown semantic_category {raw.get('semantic_category')!r}", path) from None
        exception_of = raw.get("exception_of") or ()
        if isinstance(exception_of, str):
            exception_of = (exception_of,)
        return Rule(
            rid,
            condition,
            action,
            source,
            str(raw.get("provenance_text", "")),
            category,
            tuple(exception_of),
        )

    def load(self) -> Document:
        unknown = set(self.raw) - {"meta", "predicates", "rules", "axioms"}
        if unknown:
            raise ValidationError(f"unknown top-level keys {sorted(unknown)}")
        self.collect_codes()
        meta = self.meta()

        predicates: dict[str, PredicateDef] = {}
        raw_preds = self.raw.get("predicates") or []
        if not isinstance(raw_preds, list):
            raise ValidationError("predicates must be a list", "$.predicates")
        for i, raw in enumerate(raw_preds):
            pred = self.predicate(raw, meta, f"$.predicates[{i}]")
            if pred.id in predicates:
                raise ValidationError(f"duplicate predicate id {pred.id!r}", f"$.predicates[{i}]")
            predicates[pred.id] = pred

        rules: list[Rule] = []
        seen: set[str] = set()
        raw_rules = self.raw.get("rules") or []
        if not isinstance(raw_rules, list):
            raise ValidationError("rules must be a list", "$.rules")
        for i, raw in enumerate(raw_rules):
            rule = self.rule(raw, predicates, f"$.rules[{i}]")
            if rule.id in seen:
                raise ValidationError(f"duplicate rule id {rule.id!r}", f"$.rules[{i}]")
            seen.add(rule.id)
            rules.append(rule)
        for i, rule in enumerate(rules):
            for target in rule.exception_of:
                if target not in seen or target == rule.id:
                    raise ValidationError(f"exception_of names unknown rule {target!r}", f"$.rules[{i}].exception_of")

        axioms = []
        raw_axioms = self.raw.get("axioms") or []
        if not isinstance(raw_axioms, list):
            raise ValidationError("axioms must be a list", "$.axioms")
        for i, raw in enumerate(raw_axioms):
            path = f"$.axioms[{i}]"
            if not isinstance(raw, dict):
                raise ValidationError("axiom must be an object", path)
            antecedent = raw.get("if", raw.get("antecedent"))
            consequent = raw.get("then", raw.get("consequent"))
            axioms.append(
                Axiom(
                    self.condition(antecedent, predicates, f"{path}.if"),
                    self.condition(consequent, predicates, f"{path}.then"),
                    str(raw.get("justification", "")),
                )
            )
        return Document(meta, predicates, tuple(rules), AxiomSet(tuple(axioms)))


def _check_axioms_satisfiable(doc: Document) -> None:
    from .compiler import Session
    from .solver import check_sat

    if not doc.axioms.axioms:
        return
    session = Session(doc)
    if not check_sat(session.axiom_formula(), ()).sat:
        raise ValidationError("axiom set is unsatisfiable", "$.axioms")


def load_document(data: bytes | str, extra_axioms: Optional[list] = None) -> Document:
    """Parse and validate an interchange document.

    Raises :class:`ValidationError` on malformed JSON (with a line number),
    unresolved references, sort mismatches, duplicate ids, conflicting
    permissions for one subject, or an unsatisfiable axiom set.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"document is not UTF-8: {exc}") from None
    else:
        text = data
    try:
        raw = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{exc.msg} (column {exc.colno})", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ValidationError("document must be a JSON object")
    own_axioms = len(raw.get("axioms") or [])
    if extra_axioms:
        raw["axioms"] = list(raw.get("axioms") or []) + list(extra_axioms)
    try:
        doc = _Loader(raw).load()
        _check_axioms_satisfiable(doc)
    except ValidationError as exc:
        if exc.line is not None or exc.path == "$":
            raise
        m = re.match(r"\$\.axioms\[(\d+)\]", exc.path)
        if m and int(m.group(1)) >= own_axioms:
            # came from the external axiom file; no line in this document
            raise type(exc)(exc.message, f"$.extra_axioms[{int(m.group(1)) - own_axioms}]{exc.path[m.end():]}") from None
        line = locate_path(text, exc.path)
        raise type(exc)(exc.message, exc.path, line) from None
    return doc


_PATH_STEP = re.compile(r"\.([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")
_WS = re.compile(r"[ \t\n\r]*")


def locate_path(text: str, path: str) -> Optional[int]:
    """1-based line where the value at a ``$.a[0].b`` style path starts.

    Walks the raw text with the stdlib decoder, skipping sibling values; the
    deepest step that can be resolved wins.
    """
    decoder = json.JSONDecoder()
    steps = [(m.group(1), m.group(2)) for m in _PATH_STEP.finditer(path)]
    pos = resolved = _WS.match(text, 0).end()
    try:
        for key, index in steps:
            resolved = pos
            if key is not None:
                if text[pos] != "{":
                    break
                pos = _WS.match(text, pos + 1).end()
                found = None
                while text[pos] != "}":
                    name, pos = json.decoder.scanstring(text, pos + 1)
                    pos = _WS.match(text, pos).end() + 1  # colon
                    pos = _WS.match(text, pos).end()
                    if name == key:
                        found = pos
                    _, pos = decoder.raw_decode(text, pos)
                    pos = _WS.match(text, pos).end()
                    if text[pos] == ",":
                        pos = _WS.match(text, pos + 1).end()
                if found is None:
                    break
                pos = found
            else:
                if text[pos] != "[":
                    break
                pos = _WS.match(text, pos + 1).end()
                for _ in range(int(index)):
                    _, pos = decoder.raw_decode(text, pos)
                    pos = _WS.match(text, pos).end()
                    if text[pos] != ",":
                        raise ValueError("index out of range")
                    pos = _WS.match(text, pos + 1).end()
        resolved = pos
    except (ValueError, IndexError):
        pass
    return text.count("\n", 0, resolved) + 1


def load_axioms_json(data: bytes | str) -> list:
    """Raw axiom entries from a JSON list or an object with an ``axioms`` key."""
    try:
        raw = json.loads(data, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{exc.msg} (column {exc.colno})", line=exc.lineno) from None
    if isinstance(raw, dict):
        raw = raw.get("axioms")
    if not isinstance(raw, list):
        raise ValidationError("axiom file must be a JSON list or an object with an 'axioms' list")
    return raw


def load_document_file(path, axioms_path=None) -> Document:
    with open(path, "rb") as fh:
        data = fh.read()
    extra = None
    if axioms_path is not None:
        with open(axioms_path, "rb") as fh:
            extra = load_axioms_json(fh.read())
    return load_document(data, extra)


# Serializer ----------------------------------------------------------------------------


def _entity_json(entity: EntityRef) -> Any:
    if entity.code is None:
        return str(entity)
    return {"id": str(entity), "code_system": entity.code_system.value, "code": entity.code}


def _value_json(value: Any) -> Any:
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return value


def predicate_to_json(pred: PredicateDef) -> dict[str, Any]:
    out: dict[str, Any] = {"id": pred.id, "operator": pred.operator.value, "entity": _entity_json(pred.entity)}
    if pred.qualifier is not None:
        out["qualifier"] = _entity_json(pred.qualifier)
    if pred.comparator is not None:
        out["comparator"] = pred.comparator.value
        out["value"] = _value_json(pred.rhs)
    if pred.unit is not None:
        out["unit"] = pred.unit
    return out


def rule_to_json(rule: Rule) -> dict[str, Any]:
    source: dict[str, Any] = {"guideline_id": rule.source.guideline_id}
    if rule.source.section is not None:
        source["section"] = rule.source.section
    if rule.source.publication_year is not None:
        source["publication_year"] = rule.source.publication_year
    if rule.source.exception_list:
        source["exception_list"] = True
    out: dict[str, Any] = {
        "id": rule.id,
        "condition": condition_to_json(rule.condition),
        "action": [{"subject": _entity_json(a.subject), "permission": a.permission.value} for a in rule.action],
        "source": source,
        "provenance_text": rule.provenance_text,
        "semantic_category": rule.semantic_category.value,
    }
    if rule.exception_of:
        out["exception_of"] = list(rule.exception_of)
    return out


def document_to_json(doc: Document) -> dict[str, Any]:
    meta: dict[str, Any] = {"schema_version": doc.meta.schema_version}
    if doc.meta.units:
        meta["units"] = dict(sorted(doc.meta.units.items()))
    if doc.meta.stage_sorts:
        meta["stage_sorts"] = {
            k: ("integer" if v is Sort.INT else "enum") for k, v in sorted(doc.meta.stage_sorts.items())
        }
    if doc.meta.enum_domains:
        meta["enum_domains"] = {k: list(v) for k, v in sorted(doc.meta.enum_domains.items())}
    if doc.meta.notes is not None:
        meta["notes"] = doc.meta.notes
    return {
        "meta": meta,
        "predicates": [predicate_to_json(p) for p in doc.predicates.values()],
        "rules": [rule_to_json(r) for r in doc.rules],
        "axioms": [
            {
                "if": condition_to_json(a.antecedent),
                "then": condition_to_json(a.consequent),
                "justification": a.justification,
            }
            for a in doc.axioms
        ],
    }


def serialize(doc: Document) -> bytes:
    return (json.dumps(document_to_json(doc), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
