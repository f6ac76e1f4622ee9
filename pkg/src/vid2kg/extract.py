"""Rule-based atom extraction from dependency parses.

One sentence yields at most a handful of atoms:

* root branch: a verb root gives ``root(subj)`` or ``root(subj, obj)``;
  an adjective root with a copula gives ``root(subj)``; a noun root
  with a copula and an adpositional case marker gives
  ``case_word(subj, root)``.
* conjunction branch: each ``cc`` word points at a conjunct; its atom
  is extracted like a root atom, resolving a missing subject through
  the conjunct's own head.
* modifier branch: each ``amod`` word m modifying t gives ``m(t)``.
* compound branch: adjacent compounds are merged into one surface form
  (``bus stop`` becomes ``busstop``) by rewriting the atoms extracted
  above.

``mode`` selects between two behaviours of the original rule tables:
``faithful`` reproduces them verbatim, including an early exit that
suppresses every atom when the sentence root has no direct object and
a dead second compound branch; ``repaired`` (default) lifts the early
exit and merges compounds that sit immediately after their target.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from vid2kg.atoms import Atom, Term
from vid2kg.conllu import DependencySentence, read_conllu
from vid2kg.errors import DataError
from vid2kg.kgio import _iter_jsonl, atom_from_obj, atom_to_obj, dump_line

log = logging.getLogger(__name__)

MODES = ("faithful", "repaired")

# predicate word classes, used downstream to pick the sense inventory
KIND_VERB = "verb"
KIND_ADJ = "adj"
KIND_CASE = "case"


def _find_subject(sent, root_idx, subj_override):
    """The nsubj dependent of root, else one reachable via the override.

    The override is how conjunct atoms inherit their subject: when the
    conjunct has no nsubj of its own, the nsubj of its head is used.
    An override token that is itself an nsubj word is taken directly.
    """
    subj = sent.first_dependent(root_idx, "nsubj")
    if subj is not None or subj_override is None:
        return subj
    over = sent.token(subj_override)
    if over.deprel == "nsubj":
        return over
    return sent.first_dependent(over.index, "nsubj")


def _root_atom_tagged(sent, root_idx, subj_override):
    root = sent.token(root_idx)
    subj = _find_subject(sent, root_idx, subj_override)
    if subj is None:
        return None
    if root.upos == "VERB":
        obj = sent.first_dependent(root_idx, "obj")
        if obj is not None:
            return Atom(Term(root.lemma), (Term(subj.lemma), Term(obj.lemma))), KIND_VERB
        return Atom(Term(root.lemma), (Term(subj.lemma),)), KIND_VERB
    if root.upos == "ADJ":
        if sent.first_dependent(root_idx, "cop") is not None:
            return Atom(Term(root.lemma), (Term(subj.lemma),)), KIND_ADJ
        return None
    if root.upos == "NOUN":
        cop = sent.first_dependent(root_idx, "cop")
        case = None
        for tok in sent.dependents(root_idx, "case"):
            if tok.upos == "ADP":
                case = tok
                break
        if cop is not None and case is not None:
            return Atom(Term(case.lemma), (Term(subj.lemma), Term(root.lemma))), KIND_CASE
    return None


def extract_root_atom(sent: DependencySentence, root: int, subj_override: int | None = None):
    """Extract the atom rooted at token index ``root``, or None."""
    res = _root_atom_tagged(sent, root, subj_override)
    return None if res is None else res[0]


def _replace_term(atom, old_surface, new_term):
    pred = new_term if atom.predicate.surface == old_surface else atom.predicate
    args = tuple(new_term if t.surface == old_surface else t for t in atom.args)
    if pred is atom.predicate and args == atom.args:
        return atom
    return Atom(pred, args, atom.negated)


def extract_all_atoms_tagged(sent: DependencySentence, mode: str = "repaired"):
    """All atoms of a sentence, each tagged with its predicate word class."""
    if mode not in MODES:
        raise DataError(f"unknown extraction mode {mode!r}")
    root = sent.root()
    tagged = []

    obj = sent.first_dependent(root.index, "obj")
    if mode == "faithful":
        if obj is None:
            return []
        res = _root_atom_tagged(sent, root.index, obj.index)
    else:
        res = _root_atom_tagged(sent, root.index, None)
    if res is not None:
        if mode == "faithful" and res[1] == KIND_CASE:
            log.warning(
                "case-marked noun root %r: using the subject as first argument",
                sent.token(root.index).lemma,
            )
        tagged.append(res)

    for cc in [t for t in sent.tokens if t.deprel == "cc"]:
        if cc.head == 0:
            continue
        sub_root = sent.token(cc.head)
        if sub_root.head == 0:
            # the conjunct is the sentence root itself: there is no
            # grandparent to resolve a subject through
            continue
        res = _root_atom_tagged(sent, sub_root.index, sub_root.head)
        if res is not None:
            tagged.append(res)

    for mod in [t for t in sent.tokens if t.deprel == "amod"]:
        if mod.head == 0:
            continue
        target = sent.token(mod.head)
        tagged.append((Atom(Term(mod.lemma), (Term(target.lemma),)), KIND_ADJ))

    for comp in [t for t in sent.tokens if t.deprel == "compound"]:
        if comp.head == 0:
            continue
        target = sent.token(comp.head)
        if comp.index == target.index - 1:
            merged = Term(comp.lemma + target.lemma)
        elif mode == "repaired" and comp.index == target.index + 1:
            merged = Term(target.lemma + comp.lemma)
        else:
            continue
        tagged = [(_replace_term(a, target.lemma, merged), k) for a, k in tagged]

    return tagged


def extract_all_atoms(sent: DependencySentence, mode: str = "repaired"):
    """All atoms of a sentence under the given extraction mode."""
    return [a for a, _ in extract_all_atoms_tagged(sent, mode)]


@dataclass(frozen=True)
class CaptionExtraction:
    """Atoms of one caption, kept with the sentence for sense linking."""

    video_id: str
    sentence: str
    atoms: tuple[Atom, ...]
    pred_kinds: tuple[str, ...]


def read_video_map(path) -> list[tuple[int, str]]:
    """Read sentence_index<TAB>video_id rows; indices are 0-based."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataError(f"{path}:{lineno}: expected index<TAB>video_id")
            try:
                idx = int(cols[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: sentence index {cols[0]!r} is not an integer") from None
            if not cols[1]:
                raise DataError(f"{path}:{lineno}: empty video id")
            rows.append((idx, cols[1]))
    return rows


def parse_caption_file(conllu_path, video_map_path, mode: str = "repaired"):
    """Extract atoms for every mapped caption of a parsed caption file."""
    sentences = read_conllu(conllu_path)
    rows = read_video_map(video_map_path)
    out = []
    for idx, video_id in rows:
        if not 0 <= idx < len(sentences):
            raise DataError(
                f"{video_map_path}: sentence index {idx} out of range "
                f"for a file of {len(sentences)} sentences"
            )
        sent = sentences[idx]
        tagged = extract_all_atoms_tagged(sent, mode)
        out.append(
            CaptionExtraction(
                video_id,
                sent.text,
                tuple(a for a, _ in tagged),
                tuple(k for _, k in tagged),
            )
        )
    return out


def write_fragments(path, extractions) -> None:
    """One store line per caption, with the sentence and word classes kept."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ext in extractions:
            facts = []
            for atom, kind in zip(ext.atoms, ext.pred_kinds):
                obj = atom_to_obj(atom)
                obj["pred_pos"] = kind
                facts.append(obj)
            inds = sorted({t.surface for a in ext.atoms for t in a.args})
            fh.write(
                dump_line(
                    {
                        "video_id": ext.video_id,
                        "sentence": ext.sentence,
                        "individuals": inds,
                        "facts": facts,
                    }
                )
                + "\n"
            )


def read_fragments(path) -> list[CaptionExtraction]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        for key in ("video_id", "facts"):
            if key not in obj:
                raise DataError(f"{where}: missing key {key!r}")
        atoms = []
        kinds = []
        for fact in obj["facts"]:
            atoms.append(atom_from_obj(fact, where))
            kinds.append(fact.get("pred_pos", KIND_VERB) if isinstance(fact, dict) else KIND_VERB)
        out.append(
            CaptionExtraction(
                obj["video_id"], obj.get("sentence", ""), tuple(atoms), tuple(kinds)
            )
        )
    return out
