"""Core data model: terms, logical atoms, knowledge graphs.

Atoms are predicate applications over one or two ordered arguments with
a polarity flag.  Equality everywhere is structural, so atoms and terms
can live in sets and serve as dict keys.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from vid2kg.errors import DataError

# structural characters of the canonical atom syntax; surfaces and
# synset ids must avoid them
_BAD_CHARS = re.compile(r"[\s(),#!?]")


def _check_name(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise DataError(f"{what} must be a non-empty string")
    if _BAD_CHARS.search(value):
        raise DataError(f"{what} {value!r} contains whitespace or reserved characters")
    if value != value.lower():
        raise DataError(f"{what} {value!r} must be lowercase")


@dataclass(frozen=True)
class Term:
    """A lowercase surface form, optionally linked to an ontology synset."""

    surface: str
    synset: str | None = None

    def __post_init__(self):
        _check_name(self.surface, "term surface")
        if self.synset is not None:
            _check_name(self.synset, "synset id")

    def sort_key(self):
        return (self.surface, self.synset or "")

    def __str__(self):
        if self.synset is None:
            return self.surface
        return f"{self.surface}#{self.synset}"


@dataclass(frozen=True)
class Atom:
    """predicate(args) with polarity; arity is 1 or 2."""

    predicate: Term
    args: tuple[Term, ...]
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not isinstance(self.predicate, Term):
            raise DataError("atom predicate must be a Term")
        if not all(isinstance(a, Term) for a in self.args):
            raise DataError("atom arguments must be Terms")
        if len(self.args) not in (1, 2):
            raise DataError(f"atom arity must be 1 or 2, got {len(self.args)}")
        if not isinstance(self.negated, bool):
            raise DataError("atom polarity must be a bool")

    @property
    def arity(self) -> int:
        return len(self.args)

    def unnegated(self) -> "Atom":
        if not self.negated:
            return self
        return Atom(self.predicate, self.args, False)

    def negate(self) -> "Atom":
        return Atom(self.predicate, self.args, not self.negated)

    def sort_key(self):
        return (
            self.negated,
            self.predicate.sort_key(),
            tuple(a.sort_key() for a in self.args),
        )

    def __str__(self):
        return canonical_atom_string(self)


def canonical_atom_string(atom: Atom) -> str:
    """Render an atom as ``pred(a)`` / ``pred(a,b)``, ``!``-prefixed when negated.

    Synset links are kept as ``surface#synset`` so the rendering parses
    back to an equal atom.
    """
    body = ",".join(str(a) for a in atom.args)
    bang = "!" if atom.negated else ""
    return f"{bang}{atom.predicate}({body})"


_ATOM_RE = re.compile(r"^(!?)([^()\s]+)\(([^()]*)\)$")


def _parse_term(text: str, what: str) -> Term:
    text = text.strip()
    if "#" in text:
        surface, _, synset = text.partition("#")
        return Term(surface, synset)
    try:
        return Term(text)
    except DataError as exc:
        raise DataError(f"bad {what} in atom string: {exc}") from exc


def parse_atom_string(text: str) -> Atom:
    """Inverse of canonical_atom_string; whitespace after commas is tolerated."""
    m = _ATOM_RE.match(text.strip())
    if not m:
        raise DataError(f"not an atom string: {text!r}")
    bang, pred, body = m.groups()
    if not body.strip():
        raise DataError(f"atom string has no arguments: {text!r}")
    args = tuple(_parse_term(part, "argument") for part in body.split(","))
    return Atom(_parse_term(pred, "predicate"), args, bang == "!")


def _check_polarity(facts, negated_facts):
    for a in facts:
        if a.negated:
            raise DataError(f"negated atom {a} in the positive fact set")
    for a in negated_facts:
        if not a.negated:
            raise DataError(f"non-negated atom {a} in the negated fact set")
    clash = {a.unnegated() for a in negated_facts} & set(facts)
    if clash:
        some = sorted(clash, key=Atom.sort_key)[0]
        raise DataError(f"contradiction: {some} is both asserted and negated")


def _check_args_covered(individuals, facts, negated_facts, video_id):
    for a in list(facts) + list(negated_facts):
        for t in a.args:
            if t not in individuals:
                raise DataError(
                    f"{video_id}: argument {t} of {a} missing from individuals"
                )


@dataclass(frozen=True)
class KnowledgeGraph:
    """Per-video set of individuals, facts, and explicitly negated facts."""

    video_id: str
    individuals: frozenset[Term] = field(default_factory=frozenset)
    facts: frozenset[Atom] = field(default_factory=frozenset)
    negated_facts: frozenset[Atom] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "individuals", frozenset(self.individuals))
        object.__setattr__(self, "facts", frozenset(self.facts))
        object.__setattr__(self, "negated_facts", frozenset(self.negated_facts))
        if not self.video_id:
            raise DataError("video_id must be non-empty")
        _check_polarity(self.facts, self.negated_facts)
        _check_args_covered(self.individuals, self.facts, self.negated_facts, self.video_id)

    @classmethod
    def build(cls, video_id, facts=(), negated_facts=(), individuals=()):
        """Construct a graph, adding every argument term to individuals."""
        inds = set(individuals)
        for a in list(facts) + list(negated_facts):
            inds.update(a.args)
        return cls(video_id, frozenset(inds), frozenset(facts), frozenset(negated_facts))

    @property
    def is_empty(self) -> bool:
        return not self.facts and not self.negated_facts


@dataclass(frozen=True)
class DatasetRecord:
    """A knowledge graph plus an optional precomputed feature vector."""

    video_id: str
    individuals: frozenset[Term]
    facts: frozenset[Atom]
    negated_facts: frozenset[Atom]
    feature: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "individuals", frozenset(self.individuals))
        object.__setattr__(self, "facts", frozenset(self.facts))
        object.__setattr__(self, "negated_facts", frozenset(self.negated_facts))
        if self.feature is not None:
            object.__setattr__(self, "feature", tuple(float(v) for v in self.feature))
        if not self.video_id:
            raise DataError("video_id must be non-empty")
        _check_polarity(self.facts, self.negated_facts)
        _check_args_covered(self.individuals, self.facts, self.negated_facts, self.video_id)

    @classmethod
    def from_graph(cls, kg: KnowledgeGraph, feature=None):
        return cls(kg.video_id, kg.individuals, kg.facts, kg.negated_facts, feature)

    def graph(self) -> KnowledgeGraph:
        return KnowledgeGraph(self.video_id, self.individuals, self.facts, self.negated_facts)


@dataclass(frozen=True, eq=True)
class Vocabulary:
    """Retained individuals and predicates, with their corpus presence counts.

    ``counts`` maps (role, term) to the number of videos the term occurred
    in, where role is one of "individual", "unary", "binary".  Counts cover
    every observed term; the retained sets are the ones that survived the
    frequency and stop-verb filters.
    """

    individuals: frozenset[Term]
    unary_predicates: frozenset[Term]
    binary_predicates: frozenset[Term]
    counts: dict[tuple[str, Term], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "individuals", frozenset(self.individuals))
        object.__setattr__(self, "unary_predicates", frozenset(self.unary_predicates))
        object.__setattr__(self, "binary_predicates", frozenset(self.binary_predicates))
        object.__setattr__(self, "counts", dict(self.counts))

    def predicates(self, arity: int) -> frozenset[Term]:
        if arity == 1:
            return self.unary_predicates
        if arity == 2:
            return self.binary_predicates
        raise ValueError(f"no predicates of arity {arity}")

    def admits(self, atom: Atom) -> bool:
        """True when the atom mentions only retained terms at the right roles."""
        if atom.predicate not in self.predicates(atom.arity):
            return False
        return all(t in self.individuals for t in atom.args)


def sorted_terms(terms) -> list[Term]:
    return sorted(terms, key=Term.sort_key)


def sorted_atoms(atoms) -> list[Atom]:
    return sorted(atoms, key=Atom.sort_key)
