"""Compile predicates to theory atoms and conditions to NNF formulas."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from .model import (
    And,
    Axiom,
    Comparator,
    ConditionExpr,
    Document,
    EntityRef,
    Not,
    PredicateDef,
    PredicateOperator,
    Ref,
    Rule,
    Sort,
    ValidationError,
    format_literal,
)


class CompileError(ValidationError):
    """Sort clash or unresolved reference discovered while compiling."""


# value given to open enum domains for "anything not mentioned"
SENTINEL = "__other__"


@dataclass(frozen=True)
class VarSort:
    kind: Sort
    unit: Optional[str] = None
    # closed domain for enums; None means open (mentioned tokens + sentinel)
    domain: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class TheoryVar:
    operator: PredicateOperator
    entity: EntityRef
    qualifier: Optional[EntityRef]
    sort: VarSort

    @property
    def key(self) -> tuple:
        return (self.operator, self.entity, self.qualifier)

    @property
    def order_key(self) -> tuple:
        qual = self.qualifier.identity if self.qualifier is not None else ()
        return (self.operator.value, self.entity.identity, qual)

    @property
    def name(self) -> str:
        args = str(self.entity) if self.qualifier is None else f"{self.entity}, {self.qualifier}"
        return f"{self.operator.value}({args})"

    def __str__(self) -> str:
        return self.name


# Constraints -------------------------------------------------------------------------


@dataclass(frozen=True)
class IsTrue:
    def holds(self, value: Any) -> bool:
        return value is True

    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Cmp:
    comparator: Comparator
    threshold: Fraction

    def holds(self, value: Any) -> bool:
        return self.comparator.holds(value, self.threshold)

    def __str__(self) -> str:
        return f"{self.comparator.symbol} {format_literal(self.threshold)}"


@dataclass(frozen=True)
class EnumEq:
    token: str

    def holds(self, value: Any) -> bool:
        return value == self.token

    def __str__(self) -> str:
        return f"= {self.token}"


@dataclass(frozen=True)
class EnumNe:
    token: str

    def holds(self, value: Any) -> bool:
        return value != self.token

    def __str__(self) -> str:
        return f"!= {self.token}"


Constraint = Union[IsTrue, Cmp, EnumEq, EnumNe]

_CANONICAL_CMP = {Comparator.LT, Comparator.LE, Comparator.EQ}
_CONSTRAINT_RANK = {IsTrue: 0, Cmp: 1, EnumEq: 2, EnumNe: 3}
_CMP_RANK = {c: i for i, c in enumerate(Comparator)}


def negate_constraint(c: Constraint) -> Constraint:
    if isinstance(c, Cmp):
        return Cmp(c.comparator.negate(), c.threshold)
    if isinstance(c, EnumEq):
        return EnumNe(c.token)
    if isinstance(c, EnumNe):
        return EnumEq(c.token)
    raise ValueError("IsTrue has no atomic negation")


@dataclass(frozen=True)
class TheoryAtom:
    var: TheoryVar
    constraint: Constraint

    def holds(self, value: Any) -> bool:
        return self.constraint.holds(value)

    def canonical(self) -> tuple["TheoryAtom", bool]:
        """Return ``(atom, positive)`` with the atom in canonical orientation.

        Canonical comparators are LT, LE and EQ; enums use EnumEq. Complementary
        comparisons therefore share one atom and differ only in polarity.
        """
        c = self.constraint
        if isinstance(c, Cmp) and c.comparator not in _CANONICAL_CMP:
            return TheoryAtom(self.var, negate_constraint(c)), False
        if isinstance(c, EnumNe):
            return TheoryAtom(self.var, EnumEq(c.token)), False
        return self, True

    @property
    def order_key(self) -> tuple:
        c = self.constraint
        if isinstance(c, Cmp):
            detail: tuple = (c.threshold, _CMP_RANK[c.comparator])
        elif isinstance(c, (EnumEq, EnumNe)):
            detail = (0, c.token)
        else:
            detail = ()
        return (self.var.order_key, _CONSTRAINT_RANK[type(c)], detail)

    def __str__(self) -> str:
        if isinstance(self.constraint, IsTrue):
            return self.var.name
        return f"{self.var.name} {self.constraint}"


# Formulas (NNF) --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Lit:
    atom: TheoryAtom
    positive: bool = True

    @property
    def constraint(self) -> Constraint:
        """The constraint this literal asserts, with negation pushed into the comparator."""
        if self.positive:
            return self.atom.constraint
        return negate_constraint(self.atom.constraint) if not isinstance(self.atom.constraint, IsTrue) else None

    def negate(self) -> "Lit":
        return Lit(self.atom, not self.positive)

    def __str__(self) -> str:
        if self.positive:
            return str(self.atom)
        c = self.constraint
        if c is None:
            return f"¬{self.atom.var.name}"
        return f"{self.atom.var.name} {c}"


@dataclass(frozen=True)
class FAnd:
    args: tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " ∧ ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class FOr:
    args: tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " ∨ ".join(str(a) for a in self.args) + ")"


Formula = Union[Const, Lit, FAnd, FOr]


def literal(atom: TheoryAtom, positive: bool = True) -> Lit:
    canon, pos = atom.canonical()
    return Lit(canon, pos == positive)


def conj(*parts: Formula) -> Formula:
    args: list[Formula] = []
    for part in parts:
        if part == TRUE:
            continue
        if part == FALSE:
            return FALSE
        if isinstance(part, FAnd):
            args.extend(part.args)
        else:
            args.append(part)
    args = list(dict.fromkeys(args))
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else FAnd(tuple(args))


def disj(*parts: Formula) -> Formula:
    args: list[Formula] = []
    for part in parts:
        if part == FALSE:
            continue
        if part == TRUE:
            return TRUE
        if isinstance(part, FOr):
            args.extend(part.args)
        else:
            args.append(part)
    args = list(dict.fromkeys(args))
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else FOr(tuple(args))


def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Lit):
        return f.negate()
    if isinstance(f, FAnd):
        return disj(*(negate(a) for a in f.args))
    return conj(*(negate(a) for a in f.args))


def implies(antecedent: Formula, consequent: Formula) -> Formula:
    return disj(negate(antecedent), consequent)


def iter_literals(f: Formula):
    if isinstance(f, Lit):
        yield f
    elif isinstance(f, (FAnd, FOr)):
        for a in f.args:
            yield from iter_literals(a)


def evaluate(f: Formula, assignment: Mapping[TheoryVar, Any]) -> bool:
    """Evaluate ``f`` under a full valuation of its theory variables."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        return f.atom.holds(assignment[f.atom.var]) == f.positive
    if isinstance(f, FAnd):
        return all(evaluate(a, assignment) for a in f.args)
    return any(evaluate(a, assignment) for a in f.args)


def atom_universe(formulas: Iterable[Formula]) -> list[TheoryAtom]:
    atoms = {lit.atom for f in formulas for lit in iter_literals(f)}
    return sorted(atoms, key=lambda a: a.order_key)


# Session -------------------------------------------------------------------------------


@dataclass(frozen=True)
class CompiledAxiom:
    antecedent: Formula
    consequent: Formula
    justification: str = ""

    @property
    def formula(self) -> Formula:
        return implies(self.antecedent, self.consequent)


@dataclass(frozen=True)
class CompiledRule:
    rule: Rule
    formula: Formula

    @property
    def id(self) -> str:
        return self.rule.id


class Session:
    """Compilation environment tying predicates to one shared set of theory variables.

    A session is single-writer; the formulas it hands out are immutable.
    """

    def __init__(self, document: Document):
        self.document = document
        self._vars: dict[tuple, TheoryVar] = {}
        self._atoms: dict[str, TheoryAtom] = {}
        self._rules: dict[str, CompiledRule] = {}
        self._axioms: Optional[tuple[CompiledAxiom, ...]] = None

    @property
    def variables(self) -> list[TheoryVar]:
        return sorted(self._vars.values(), key=lambda v: v.order_key)

    def _var_sort(self, p: PredicateDef) -> VarSort:
        meta = self.document.meta
        kind = p.operator.sort(meta.stage_sorts.get(str(p.entity)))
        if kind is Sort.ENUM:
            return VarSort(kind, domain=meta.enum_domains.get(f"{p.operator.value}({p.entity})"))
        if kind is Sort.REAL:
            return VarSort(kind, unit=p.unit)
        return VarSort(kind)

    def variable(self, p: PredicateDef) -> TheoryVar:
        key = (p.operator, p.entity, p.qualifier)
        sort = self._var_sort(p)
        var = self._vars.get(key)
        if var is None:
            var = TheoryVar(p.operator, p.entity, p.qualifier, sort)
            self._vars[key] = var
        elif var.sort != sort:
            raise CompileError(
                f"predicate {p.id}: {var.name} already has sort {_sort_text(var.sort)}, "
                f"not {_sort_text(sort)}"
            )
        return var

    def compile_predicate(self, p: PredicateDef) -> TheoryAtom:
        var = self.variable(p)
        kind = var.sort.kind
        if kind is Sort.BOOL:
            return TheoryAtom(var, IsTrue())
        if kind is Sort.ENUM:
            return TheoryAtom(var, EnumEq(p.rhs) if p.comparator is Comparator.EQ else EnumNe(p.rhs))
        return TheoryAtom(var, Cmp(p.comparator, Fraction(p.rhs)))

    def _atom_for(self, pid: str) -> TheoryAtom:
        atom = self._atoms.get(pid)
        if atom is None:
            try:
                pred = self.document.predicates[pid]
            except KeyError:
                raise CompileError(f"unresolved predicate reference {pid!r}") from None
            atom = self._atoms[pid] = self.compile_predicate(pred)
        return atom

    def compile_condition(self, expr: ConditionExpr, positive: bool = True) -> Formula:
        if isinstance(expr, Ref):
            return literal(self._atom_for(expr.predicate), positive)
        if isinstance(expr, Not):
            return self.compile_condition(expr.child, not positive)
        parts = [self.compile_condition(c, positive) for c in expr.children]
        # De Morgan: under negation AND becomes OR and vice versa
        if isinstance(expr, And) == positive:
            return conj(*parts)
        return disj(*parts)

    def compile_rule(self, rule: Rule) -> CompiledRule:
        compiled = self._rules.get(rule.id)
        if compiled is None or compiled.rule is not rule:
            compiled = CompiledRule(rule, self.compile_condition(rule.condition))
            self._rules[rule.id] = compiled
        return compiled

    def compile_axiom(self, axiom: Axiom) -> CompiledAxiom:
        return CompiledAxiom(
            self.compile_condition(axiom.antecedent),
            self.compile_condition(axiom.consequent),
            axiom.justification,
        )

    def axioms(self) -> tuple[CompiledAxiom, ...]:
        if self._axioms is None:
            self._axioms = tuple(self.compile_axiom(a) for a in self.document.axioms)
        return self._axioms

    def axiom_formula(self) -> Formula:
        return conj(*(a.formula for a in self.axioms()))


def _sort_text(sort: VarSort) -> str:
    if sort.kind is Sort.REAL:
        return f"real[{sort.unit or 'unitless'}]"
    if sort.kind is Sort.ENUM and sort.domain is not None:
        return f"enum{{{', '.join(sort.domain)}}}"
    return sort.kind.value


def compile_predicate(p: PredicateDef, env: Session) -> TheoryAtom:
    return env.compile_predicate(p)


def compile_condition(c: ConditionExpr, env: Session) -> Formula:
    return env.compile_condition(c)


def compile_rules(env: Session, rules: Sequence[Rule]) -> list[CompiledRule]:
    return [env.compile_rule(r) for r in rules]
