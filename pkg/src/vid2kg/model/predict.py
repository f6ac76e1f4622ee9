"""Thresholded inference: predicted individuals, then facts over them."""

from __future__ import annotations

from vid2kg.atoms import Atom, KnowledgeGraph, Term, sorted_terms
from vid2kg.model.config import ModelConfig
from vid2kg.model.network import classify_individuals, score_fact
from vid2kg.model.params import ModelParams


def predict(e, params: ModelParams, cfg: ModelConfig):
    """Returns (predicted individuals, predicted facts).

    Individuals clear the strict classifier threshold; predicate MLPs then
    run only over those individuals (all of them for unary predicates, all
    ordered pairs for binary ones, reflexive pairs included unless disabled)
    and keep the atoms that clear the same strict threshold.
    """
    c_hat = classify_individuals(e, params)
    chosen = [
        t
        for j, t in enumerate(params.individual_order)
        if c_hat[j] > cfg.threshold
    ]
    atoms: set[Atom] = set()
    for p in sorted_terms(params.unary_mlps):
        for a in chosen:
            if score_fact(e, p, (a,), params) > cfg.threshold:
                atoms.add(Atom(p, (a,)))
    for p in sorted_terms(params.binary_mlps):
        for a in chosen:
            for b in chosen:
                if a == b and not cfg.reflexive_pairs:
                    continue
                if score_fact(e, p, (a, b), params) > cfg.threshold:
                    atoms.add(Atom(p, (a, b)))
    return frozenset(chosen), frozenset(atoms)


def predict_kg(video_id: str, e, params: ModelParams, cfg: ModelConfig) -> KnowledgeGraph:
    """predict() packaged as a per-video graph."""
    individuals, facts = predict(e, params, cfg)
    return KnowledgeGraph.build(video_id, facts=facts, individuals=individuals)
