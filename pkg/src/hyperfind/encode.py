"""First-order encodings of trace specifications over symbolic traces.

Universal trace quantification becomes a conjunction over the finite set of
observed symbolic traces, each wrapped in a forall over its fresh
variables; existential quantification dually becomes a disjunction of
exists blocks. The invariant body is instantiated at every observation
index by substituting each trace-indexed variable `x@pi` with the bound
trace's symbolic memory term for `x`.

`lazy_query` builds the per-universal-trace refutation query: the
universal path constraint conjoined with "no existential trace matches";
its free variables are exactly the universal trace's fresh variables, so a
model concretizes directly into a counterexample trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import logic
from .logic import Formula
from .symexec import SymTrace


class EncodingError(Exception):
    pass


def _body_slots(body: Formula) -> List[Tuple[str, str, str]]:
    """(full name, program variable, trace variable) per free body variable."""
    slots = []
    for name in sorted(logic.free_vars(body)):
        if "@" not in name:
            raise EncodingError(f"specification variable {name!r} is not trace-indexed")
        var, trace = name.rsplit("@", 1)
        slots.append((name, var, trace))
    return slots


def encode_invariant(body: Formula, k: int, binding: Dict[str, SymTrace]) -> Formula:
    """Conjunction over observation indices 0..k-1 of the instantiated body."""
    slots = _body_slots(body)
    conjuncts = []
    for i in range(k):
        sigma = {}
        for name, var, trace_var in slots:
            if trace_var not in binding:
                raise EncodingError(f"trace variable {trace_var!r} is not bound")
            trace = binding[trace_var]
            if len(trace.observed) <= i:
                raise EncodingError(
                    f"trace bound to {trace_var!r} has fewer than {i + 1} observations")
            memory = trace.observed[i].memory()
            if var not in memory:
                raise EncodingError(
                    f"program bound to {trace_var!r} has no variable {var!r}")
            sigma[name] = memory[var]
        conjuncts.append(logic.substitute(body, sigma))
    return logic.conj(conjuncts)


def _domain_constraint(names: Sequence[str],
                       domain: Optional[Tuple[int, int]]) -> Formula:
    if domain is None:
        return logic.TRUE
    lo, hi = domain
    return logic.conj(
        [logic.conj([logic.cmp("<=", logic.IntLit(lo), logic.Var(v)),
                     logic.cmp("<=", logic.Var(v), logic.IntLit(hi))])
         for v in names])


@dataclass(frozen=True)
class QuantifiedTraces:
    kind: str  # "forall" | "exists"
    trace_var: str
    traces: Tuple[SymTrace, ...]


def encode(quantifiers: Sequence[QuantifiedTraces], body: Formula, k: int,
           domain: Optional[Tuple[int, int]] = None) -> Formula:
    """Closed encoding of the bound-k semantics over materialized trace sets.

    The optional domain interval constrains every fresh variable of every
    trace; it exists so desk-scale runs can be cross-checked against the
    finite-domain oracle, and is conjoined next to the path formulas, never
    inside them.
    """
    def rec(i: int, binding: Dict[str, SymTrace]) -> Formula:
        if i == len(quantifiers):
            return encode_invariant(body, k, binding)
        q = quantifiers[i]
        parts = []
        for trace in q.traces:
            fv = trace.free_vars()
            scope = logic.conj([trace.path, _domain_constraint(fv, domain)])
            inner = rec(i + 1, {**binding, q.trace_var: trace})
            if q.kind == "forall":
                parts.append(logic.forall(fv, logic.implies(scope, inner)))
            else:
                parts.append(logic.exists(fv, logic.conj([scope, inner])))
        return logic.conj(parts) if q.kind == "forall" else logic.disj(parts)

    return rec(0, {})


@dataclass(frozen=True)
class EncodedQuery:
    formula: Formula
    free_vars: Tuple[str, ...]
    provenance: str
    explanation: Formula  # the "no matching trace" part


def lazy_query(universal: SymTrace, universal_var: str,
               existential_var: Optional[str],
               existential_traces: Sequence[SymTrace],
               body: Formula, k: int,
               domain: Optional[Tuple[int, int]] = None,
               provenance: str = "") -> EncodedQuery:
    """Refutation query for one universal trace.

    Satisfiable iff the universal trace has an instantiation that no
    existential trace can match; a model assigns the universal trace's
    fresh variables. Specifications with no existential quantifier use the
    plain negated invariant as the explanation part.
    """
    fv1 = universal.free_vars()
    c1 = logic.conj([universal.path, _domain_constraint(fv1, domain)])
    if existential_var is None:
        c2 = logic.negate(encode_invariant(body, k, {universal_var: universal}))
    else:
        blocks = []
        for trace in existential_traces:
            fv2 = trace.free_vars()
            matched = logic.conj([
                trace.path,
                _domain_constraint(fv2, domain),
                encode_invariant(body, k, {universal_var: universal,
                                           existential_var: trace}),
            ])
            blocks.append(logic.forall(fv2, logic.negate(matched)))
        c2 = logic.conj(blocks)
    return EncodedQuery(
        formula=logic.conj([c1, c2]),
        free_vars=fv1,
        provenance=provenance,
        explanation=c2,
    )
