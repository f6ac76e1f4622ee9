"""Pattern queries over stored knowledge graphs.

A pattern is an atom with ``?``-prefixed variables allowed in any
position: ``change(male,?x)``, ``?p(man,paper)``, ``stand(?x)``.
Constants match facts by surface form, or by exact term when written
with an explicit ``#synset``; variables bind to the surface form of
whatever fills their position, and a repeated variable must bind to the
same value everywhere it appears.  Queries range over positive facts
only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from vid2kg.atoms import Atom, KnowledgeGraph, Term, sorted_atoms
from vid2kg.errors import DataError
from vid2kg.ontology import Ontology, closure

_PATTERN_RE = re.compile(r"^([^()\s]+)\(([^()]*)\)$")
_VAR_RE = re.compile(r"^\?([a-z][a-z0-9_]*)$")


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class QueryPattern:
    """Predicate and argument positions, each a Term or a Variable."""

    predicate: Term | Variable
    args: tuple[Term | Variable, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> tuple[str, ...]:
        """Distinct variable names in positional order."""
        names = []
        for pos in (self.predicate, *self.args):
            if isinstance(pos, Variable) and pos.name not in names:
                names.append(pos.name)
        return tuple(names)


def _parse_position(token: str, what: str) -> Term | Variable:
    token = token.strip()
    if token.startswith("?"):
        m = _VAR_RE.match(token)
        if not m:
            raise DataError(
                f"bad variable {token!r} in {what}: expected ?name with a "
                "lowercase name"
            )
        return Variable(m.group(1))
    if "#" in token:
        surface, _, synset = token.partition("#")
        try:
            return Term(surface, synset)
        except DataError as exc:
            raise DataError(f"bad {what} in pattern: {exc}") from exc
    try:
        return Term(token)
    except DataError as exc:
        raise DataError(f"bad {what} in pattern: {exc}") from exc


def parse_pattern(text: str) -> QueryPattern:
    """Parse ``pred(arg)`` / ``pred(arg1,arg2)`` with optional ?variables."""
    stripped = text.strip()
    if stripped.startswith("!"):
        raise DataError(
            f"pattern {text!r} is negated; queries range over positive facts"
        )
    m = _PATTERN_RE.match(stripped)
    if not m:
        raise DataError(f"not a query pattern: {text!r}")
    pred_token, body = m.groups()
    if not body.strip():
        raise DataError(f"query pattern has no arguments: {text!r}")
    args = tuple(
        _parse_position(part, "argument") for part in body.split(",")
    )
    if len(args) > 2:
        raise DataError(f"query pattern arity must be 1 or 2, got {len(args)}")
    return QueryPattern(_parse_position(pred_token, "predicate"), args)


def _match_position(pos: Term | Variable, term: Term, bindings: dict) -> bool:
    if isinstance(pos, Variable):
        bound = bindings.get(pos.name)
        if bound is None:
            bindings[pos.name] = term.surface
            return True
        return bound == term.surface
    if pos.synset is not None:
        return pos == term
    return pos.surface == term.surface


def match_atom(pattern: QueryPattern, atom: Atom):
    """Bindings dict when the fact unifies with the pattern, else None."""
    if atom.negated or atom.arity != pattern.arity:
        return None
    bindings: dict[str, str] = {}
    if not _match_position(pattern.predicate, atom.predicate, bindings):
        return None
    for pos, term in zip(pattern.args, atom.args):
        if not _match_position(pos, term, bindings):
            return None
    return bindings


def query_kg(
    kg: KnowledgeGraph,
    pattern: QueryPattern,
    ont: Ontology | None = None,
    with_closure: bool = False,
):
    """Deduplicated bindings of the pattern against one graph's facts."""
    if with_closure and ont is None:
        raise DataError("closure-augmented queries require an ontology")
    facts = set(kg.facts)
    if with_closure:
        facts |= closure(kg.facts, ont)
    rows = set()
    for atom in sorted_atoms(facts):
        bindings = match_atom(pattern, atom)
        if bindings is not None:
            rows.add(tuple(sorted(bindings.items())))
    return [dict(items) for items in sorted(rows)]


def query_store(
    kgs,
    pattern: QueryPattern,
    ont: Ontology | None = None,
    with_closure: bool = False,
):
    """(video_id, bindings) matches across a store, sorted and deduplicated.

    Ordering is video_id first, then the bindings sorted by variable name.
    """
    out = []
    for kg in sorted(kgs, key=lambda k: k.video_id):
        for bindings in query_kg(kg, pattern, ont, with_closure):
            out.append((kg.video_id, bindings))
    return out
