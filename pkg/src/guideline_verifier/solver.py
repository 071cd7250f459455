"""Satisfiability for the rule fragment: booleans, one-variable rational
comparisons and enum (in)equalities.

The search is DPLL directly over NNF formulas. Each theory variable is
checked on its own: for ordered sorts the assigned comparisons are tested on
a finite candidate set (every threshold, midpoints between consecutive
thresholds, and one point beyond each end), which is complete because the
truth of every literal is constant on the open gaps between thresholds.
All arithmetic is exact (``fractions.Fraction``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Sequence

from .compiler import (
    FALSE,
    SENTINEL,
    TRUE,
    Cmp,
    CompiledAxiom,
    Const,
    EnumEq,
    EnumNe,
    FAnd,
    FOr,
    Formula,
    IsTrue,
    Lit,
    TheoryAtom,
    TheoryVar,
    atom_universe,
    conj,
    disj,
    iter_literals,
)
from .model import Sort

DEFAULT_MAX_DECISIONS = 200_000


class SolverCapacityError(RuntimeError):
    """The decision budget ran out before a verdict was reached."""


@dataclass(frozen=True)
class SatResult:
    sat: bool
    model: Optional[dict[TheoryVar, Any]] = None

    @property
    def status(self) -> str:
        return "SAT" if self.sat else "UNSAT"


# Theory checks ---------------------------------------------------------------------------


def _constraints(lits: Iterable[tuple[TheoryAtom, bool]]) -> list:
    out = []
    for atom, value in lits:
        c = atom.constraint
        if value:
            out.append(c)
        elif isinstance(c, Cmp):
            out.append(Cmp(c.comparator.negate(), c.threshold))
        elif isinstance(c, EnumEq):
            out.append(EnumNe(c.token))
        elif isinstance(c, EnumNe):
            out.append(EnumEq(c.token))
        else:
            out.append(None)  # negated boolean
    return out


def _ordered_candidates(thresholds: Sequence[Fraction], integral: bool) -> list:
    points = sorted(set(thresholds))
    if not points:
        return [0]
    if integral:
        cands = [int(p) for p in points if p.denominator == 1]
        cands += [math.floor(p) + 1 for p in points]
        cands.append(math.ceil(points[0]) - 1)
        # keep first-seen order, drop duplicates
        return list(dict.fromkeys(cands))
    cands = list(points)
    cands += [(a + b) / 2 for a, b in zip(points, points[1:])]
    cands += [points[0] - 1, points[-1] + 1]
    return cands


def solve_variable(var: TheoryVar, lits: Sequence[tuple[TheoryAtom, bool]]) -> tuple[bool, Any]:
    """Find a value for ``var`` satisfying every (atom, truth) pair, if one exists."""
    kind = var.sort.kind
    if kind is Sort.BOOL:
        values = {truth for _, truth in lits}
        if len(values) > 1:
            return False, None
        return True, (values.pop() if values else False)
    constraints = _constraints(lits)
    if kind is Sort.ENUM:
        if var.sort.domain is not None:
            candidates = list(var.sort.domain)
        else:
            mentioned = sorted({c.token for c in constraints})
            candidates = mentioned + [SENTINEL]
    else:
        candidates = _ordered_candidates([c.threshold for c in constraints], kind is Sort.INT)
        if kind is Sort.REAL:
            candidates = [Fraction(c) for c in candidates]
    for value in candidates:
        if all(c.holds(value) for c in constraints):
            return True, value
    return False, None


# Search -------------------------------------------------------------------------------------


def _substitute(f: Formula, assign: Mapping[TheoryAtom, bool]) -> Formula:
    if isinstance(f, Const):
        return f
    if isinstance(f, Lit):
        value = assign.get(f.atom)
        if value is None:
            return f
        return TRUE if value == f.positive else FALSE
    parts = [_substitute(a, assign) for a in f.args]
    return conj(*parts) if isinstance(f, FAnd) else disj(*parts)


def _unit_literals(f: Formula) -> list[Lit]:
    if isinstance(f, Lit):
        return [f]
    if isinstance(f, FAnd):
        return [a for a in f.args if isinstance(a, Lit)]
    return []


class _Search:
    def __init__(self, atoms: list[TheoryAtom], max_decisions: int):
        self.atoms = atoms
        self.by_var: dict[TheoryVar, list[TheoryAtom]] = {}
        for atom in atoms:
            self.by_var.setdefault(atom.var, []).append(atom)
        self.decisions = 0
        self.max_decisions = max_decisions

    def _consistent(self, var: TheoryVar, assign: Mapping[TheoryAtom, bool]) -> bool:
        lits = [(a, assign[a]) for a in self.by_var[var] if a in assign]
        return solve_variable(var, lits)[0]

    def _propagate(self, f: Formula, assign: dict[TheoryAtom, bool], touched: set[TheoryVar]) -> Optional[Formula]:
        """Unit and theory propagation to a fixpoint. Returns None on conflict."""
        while True:
            for var in touched:
                if not self._consistent(var, assign):
                    return None
            f = _substitute(f, assign)
            if f == FALSE:
                return None
            forced: dict[TheoryAtom, bool] = {}
            for lit in _unit_literals(f):
                if forced.get(lit.atom, lit.positive) != lit.positive:
                    return None
                forced[lit.atom] = lit.positive
            # theory propagation: an unassigned atom whose one polarity is infeasible
            for var in touched:
                for atom in self.by_var[var]:
                    if atom in assign or atom in forced:
                        continue
                    assign[atom] = True
                    ok_true = self._consistent(var, assign)
                    assign[atom] = False
                    ok_false = self._consistent(var, assign)
                    del assign[atom]
                    if not ok_true and not ok_false:
                        return None
                    if ok_true != ok_false:
                        forced[atom] = ok_true
            if not forced:
                return f
            assign.update(forced)
            touched = {a.var for a in forced}

    def run(self, f: Formula, assign: dict[TheoryAtom, bool], touched: set[TheoryVar]) -> Optional[dict]:
        f = self._propagate(f, assign, touched)
        if f is None:
            return None
        if f == TRUE:
            return assign
        present = {lit.atom for lit in iter_literals(f)}
        atom = next(a for a in self.atoms if a in present and a not in assign)
        for value in (True, False):
            self.decisions += 1
            if self.decisions > self.max_decisions:
                raise SolverCapacityError(f"decision budget of {self.max_decisions} exhausted")
            trial = dict(assign)
            trial[atom] = value
            found = self.run(f, trial, {atom.var})
            if found is not None:
                return found
        return None


def _axiom_formula(axioms: Optional[Iterable[CompiledAxiom] | Formula]) -> Formula:
    if axioms is None:
        return TRUE
    if isinstance(axioms, (Const, Lit, FAnd, FOr)):
        return axioms
    return conj(*(a.formula for a in axioms))


def check_sat(
    f: Formula,
    axioms: Optional[Iterable[CompiledAxiom] | Formula] = None,
    *,
    max_decisions: int = DEFAULT_MAX_DECISIONS,
) -> SatResult:
    """Decide ``f`` conjoined with the axiom implications.

    SAT results carry a model covering every variable in the query. Branching
    follows atom-universe order so models are reproducible.
    """
    query = conj(f, _axiom_formula(axioms))
    atoms = atom_universe([query])
    search = _Search(atoms, max_decisions)
    found = search.run(query, {}, set(search.by_var))
    if found is None:
        return SatResult(False)
    model = {}
    for var, var_atoms in search.by_var.items():
        ok, value = solve_variable(var, [(a, found[a]) for a in var_atoms if a in found])
        assert ok, "search returned a theory-inconsistent assignment"
        model[var] = value
    return SatResult(True, dict(sorted(model.items(), key=lambda kv: kv[0].order_key)))


# SMT-LIB2 export ------------------------------------------------------------------------------


def _smt_symbol(var: TheoryVar) -> str:
    return "|" + var.name.replace("|", "/").replace("\\", "/") + "|"


def _smt_rational(value: Fraction) -> str:
    body = f"(/ {abs(value.numerator)} {value.denominator})"
    return f"(- {body})" if value < 0 else body


_SMT_CMP = {"LT": "<", "LE": "<=", "GT": ">", "GE": ">=", "EQ": "="}


class _SmtWriter:
    def __init__(self, formulas: Sequence[Formula]):
        self.atoms = atom_universe(formulas)
        self.vars: list[TheoryVar] = []
        for atom in self.atoms:
            if atom.var not in self.vars:
                self.vars.append(atom.var)
        self.enum_index: dict[TheoryVar, dict[str, int]] = {}
        for var in self.vars:
            if var.sort.kind is Sort.ENUM:
                if var.sort.domain is not None:
                    tokens = list(var.sort.domain)
                else:
                    tokens = sorted({a.constraint.token for a in self.atoms if a.var == var})
                self.enum_index[var] = {t: i for i, t in enumerate(tokens)}

    @property
    def logic(self) -> str:
        has_int = any(v.sort.kind in (Sort.INT, Sort.ENUM) for v in self.vars)
        return "QF_LIRA" if has_int else "QF_LRA"

    def declarations(self) -> list[str]:
        lines = []
        for var in self.vars:
            kind = var.sort.kind
            smt_sort = {Sort.BOOL: "Bool", Sort.REAL: "Real"}.get(kind, "Int")
            lines.append(f"(declare-const {_smt_symbol(var)} {smt_sort})")
            if kind is Sort.ENUM and var.sort.domain is not None:
                top = len(var.sort.domain) - 1
                lines.append(f"(assert (and (<= 0 {_smt_symbol(var)}) (<= {_smt_symbol(var)} {top})))")
        return lines

    def atom(self, atom: TheoryAtom) -> str:
        sym = _smt_symbol(atom.var)
        c = atom.constraint
        if isinstance(c, IsTrue):
            return sym
        if isinstance(c, (EnumEq, EnumNe)):
            idx = self.enum_index[atom.var][c.token]
            text = f"(= {sym} {idx})"
            return text if isinstance(c, EnumEq) else f"(not {text})"
        lhs = sym if atom.var.sort.kind is Sort.REAL else f"(to_real {sym})"
        if c.comparator.value == "NE":
            return f"(not (= {lhs} {_smt_rational(c.threshold)}))"
        return f"({_SMT_CMP[c.comparator.value]} {lhs} {_smt_rational(c.threshold)})"

    def formula(self, f: Formula) -> str:
        if isinstance(f, Const):
            return "true" if f.value else "false"
        if isinstance(f, Lit):
            text = self.atom(f.atom)
            return text if f.positive else f"(not {text})"
        op = "and" if isinstance(f, FAnd) else "or"
        return f"({op} " + " ".join(self.formula(a) for a in f.args) + ")"


def emit_smtlib(
    f: Formula,
    axioms: Iterable[CompiledAxiom] = (),
    *,
    comment: Optional[str] = None,
) -> str:
    """Render ``f`` plus axiom implications as a standalone SMT-LIB2 script.

    Enums become bounded integers (index = position in the sorted token list);
    thresholds are written as exact ``(/ n d)`` rationals.
    """
    axioms = list(axioms)
    writer = _SmtWriter([f] + [a.formula for a in axioms])
    lines = []
    if comment:
        lines += [f"; {line}" for line in comment.splitlines()]
    lines.append(f"(set-logic {writer.logic})")
    lines += writer.declarations()
    for axiom in axioms:
        note = f" ; {axiom.justification}" if axiom.justification else ""
        lines.append(
            f"(assert (=> {writer.formula(axiom.antecedent)} {writer.formula(axiom.consequent)})){note}"
        )
    lines.append(f"(assert {writer.formula(f)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
