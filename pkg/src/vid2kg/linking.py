"""Context-sensitive linking of atom terms to ontology synsets.

Each candidate synset is scored by the cosine similarity between the
pooled vector of its gloss and the pooled vector of the sentence the
atom came from.  Predicates use the sense inventory of their word
class (verbs for root and conjunct atoms, adjectives for modifier
atoms, none for case-word predicates); arguments use nouns.
"""

from __future__ import annotations

from vid2kg.atoms import Atom, Term
from vid2kg.embeddings import EmbeddingTable, cosine, sentence_vector, tokenize
from vid2kg.extract import KIND_ADJ, KIND_VERB, CaptionExtraction
from vid2kg.ontology import Ontology

_PRED_POS = {KIND_VERB: "verb", KIND_ADJ: "adj"}


def link_word(word, pos, context, ont: Ontology, emb: EmbeddingTable):
    """Best synset id for (word, pos) in context, or None without candidates.

    Candidates are scanned in id order with a strict improvement test,
    so ties resolve to the lexicographically smallest id.
    """
    cands = ont.candidates(word, pos)
    if not cands:
        return None
    ctx_vec = sentence_vector(tokenize(context), emb)
    best = None
    best_sim = -float("inf")
    for sid in cands:
        gloss_vec = sentence_vector(tokenize(ont.synsets[sid].gloss), emb)
        sim = cosine(gloss_vec, ctx_vec)
        if sim > best_sim:
            best, best_sim = sid, sim
    return best


def _link_term(term: Term, pos, context, ont, emb) -> Term:
    if pos is None or term.synset is not None:
        return term
    sid = link_word(term.surface, pos, context, ont, emb)
    if sid is None:
        return term
    return Term(term.surface, sid)


def link_atom(atom: Atom, pred_kind, sentence, ont, emb) -> Atom:
    pred = _link_term(atom.predicate, _PRED_POS.get(pred_kind), sentence, ont, emb)
    args = tuple(_link_term(t, "noun", sentence, ont, emb) for t in atom.args)
    return Atom(pred, args, atom.negated)


def link_atoms(extractions, ont: Ontology, emb: EmbeddingTable) -> list[CaptionExtraction]:
    """Link every atom of every caption; structure is preserved."""
    out = []
    for ext in extractions:
        atoms = tuple(
            link_atom(a, k, ext.sentence, ont, emb)
            for a, k in zip(ext.atoms, ext.pred_kinds)
        )
        out.append(CaptionExtraction(ext.video_id, ext.sentence, atoms, ext.pred_kinds))
    return out
