"""Ontology loading and inference closure.

Synsets form an acyclic hypernym graph per word class.  Closure derives
new facts two ways: replacing an argument by a hypernym of its linked
synset, and replacing a verb or adjective predicate by a hypernym.  The
first lemma of a synset names the terms it contributes to derived
facts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from vid2kg.atoms import Atom, Term, _check_name
from vid2kg.errors import DataError

POS_VALUES = ("noun", "verb", "adj")


@dataclass(frozen=True)
class Synset:
    id: str
    lemmas: tuple[str, ...]
    pos: str
    gloss: str
    hypernyms: tuple[str, ...]

    def __post_init__(self):
        _check_name(self.id, "synset id")
        if self.pos not in POS_VALUES:
            raise DataError(f"synset {self.id}: pos must be one of {POS_VALUES}")
        if not self.lemmas:
            raise DataError(f"synset {self.id}: needs at least one lemma")
        for lemma in self.lemmas:
            _check_name(lemma, f"lemma of synset {self.id}")

    @property
    def canonical_lemma(self) -> str:
        return self.lemmas[0]


class Ontology:
    def __init__(self, synsets):
        self.synsets: dict[str, Synset] = {}
        for syn in synsets:
            if syn.id in self.synsets:
                raise DataError(f"duplicate synset id {syn.id}")
            self.synsets[syn.id] = syn
        self._validate_edges()
        self._check_acyclic()
        self.lemma_index: dict[tuple[str, str], frozenset[str]] = {}
        index: dict[tuple[str, str], set[str]] = {}
        for syn in self.synsets.values():
            for lemma in syn.lemmas:
                index.setdefault((lemma, syn.pos), set()).add(syn.id)
        self.lemma_index = {k: frozenset(v) for k, v in index.items()}

    def _validate_edges(self):
        for syn in self.synsets.values():
            for h in syn.hypernyms:
                target = self.synsets.get(h)
                if target is None:
                    raise DataError(f"synset {syn.id}: dangling hypernym {h!r}")
                if target.pos != syn.pos:
                    raise DataError(
                        f"synset {syn.id} ({syn.pos}) has cross-pos hypernym {h} ({target.pos})"
                    )

    def _check_acyclic(self):
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {sid: WHITE for sid in self.synsets}
        for start in self.synsets:
            if color[start] != WHITE:
                continue
            stack = [(start, iter(self.synsets[start].hypernyms))]
            color[start] = GRAY
            while stack:
                sid, edges = stack[-1]
                advanced = False
                for nxt in edges:
                    if color[nxt] == GRAY:
                        raise DataError(f"hypernym cycle through {nxt}")
                    if color[nxt] == WHITE:
                        color[nxt] = GRAY
                        stack.append((nxt, iter(self.synsets[nxt].hypernyms)))
                        advanced = True
                        break
                if not advanced:
                    color[sid] = BLACK
                    stack.pop()

    def candidates(self, lemma: str, pos: str) -> list[str]:
        """Synset ids containing (lemma, pos), in id order."""
        return sorted(self.lemma_index.get((lemma, pos), ()))

    def hypernym_term(self, synset_id: str) -> Term:
        syn = self.synsets[synset_id]
        return Term(syn.canonical_lemma, syn.id)


def load_ontology(path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: bad JSON ({exc.msg})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("synsets"), list):
        raise DataError(f"{path}: expected an object with a 'synsets' list")
    synsets = []
    for i, obj in enumerate(doc["synsets"]):
        if not isinstance(obj, dict):
            raise DataError(f"{path}: synsets[{i}] is not an object")
        try:
            synsets.append(
                Synset(
                    obj["id"],
                    tuple(obj["lemmas"]),
                    obj["pos"],
                    obj.get("gloss", ""),
                    tuple(obj.get("hypernyms", ())),
                )
            )
        except KeyError as exc:
            raise DataError(f"{path}: synsets[{i}] missing key {exc}") from exc
    return Ontology(synsets)


def _direct(atom: Atom, ont: Ontology):
    """One-step consequences of a single fact."""
    for i, arg in enumerate(atom.args):
        syn = ont.synsets.get(arg.synset) if arg.synset else None
        if syn is None:
            continue
        for h in syn.hypernyms:
            args = list(atom.args)
            args[i] = ont.hypernym_term(h)
            yield Atom(atom.predicate, tuple(args))
    pred_syn = ont.synsets.get(atom.predicate.synset) if atom.predicate.synset else None
    if pred_syn is not None and pred_syn.pos in ("verb", "adj"):
        for h in pred_syn.hypernyms:
            yield Atom(ont.hypernym_term(h), atom.args)


def closure(facts, ont: Ontology, restrict_to=None) -> set[Atom]:
    """All facts derivable from the input set, excluding the input itself.

    Runs to fixpoint over argument and predicate generalization.  With
    restrict_to, derived facts are kept only when every argument is in
    the given term set.
    """
    base = set(facts)
    for a in base:
        if a.negated:
            raise DataError(f"closure input must be non-negated, got {a}")
    known = set(base)
    frontier = list(base)
    derived = set()
    while frontier:
        atom = frontier.pop()
        for new in _direct(atom, ont):
            if new not in known:
                known.add(new)
                derived.add(new)
                frontier.append(new)
    if restrict_to is not None:
        allowed = set(restrict_to)
        derived = {a for a in derived if all(t in allowed for t in a.args)}
    return derived
