"""Deterministic synthetic corpora with recoverable fact structure.

Facts follow fixed rules over a per-individual bit and a per-video scene
flag, and the encoding exposes exactly the individual indicators plus the
scene flag, so labels are linearly recoverable from the inputs the model
sees.  The negated set is the full complement grid over the present
individuals, which makes threshold-based evaluation meaningful.

The rules are chosen to separate the ablations: bright and dark demand
opposite decision functions from their MLPs, bit-1 and bit-0 individuals
demand different vectors, and the moving predicate depends only on the
encoding, which a random encoder scrambles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from vid2kg.atoms import Atom, DatasetRecord, Term, Vocabulary
from vid2kg.dataset import BuildConfig, build_vocabulary
from vid2kg.model.features import FeatureStore

INDIVIDUALS = ("man", "woman", "dog", "car", "ball", "chair")
BITS = {"man": 1, "woman": 0, "dog": 1, "car": 0, "ball": 1, "chair": 0}
UNARY = ("bright", "dark", "moving")
BINARY = ("above", "below")
ENCODING_DIM = 8


@dataclass(frozen=True)
class SynthCorpus:
    records: tuple[DatasetRecord, ...]
    vocab: Vocabulary
    features: FeatureStore


def _truth(inds, scene: int) -> set[Atom]:
    t: set[Atom] = set()
    for x in inds:
        if BITS[x]:
            t.add(Atom(Term("bright"), (Term(x),)))
        else:
            t.add(Atom(Term("dark"), (Term(x),)))
        if scene:
            t.add(Atom(Term("moving"), (Term(x),)))
    for x in inds:
        for y in inds:
            if BITS[x] > BITS[y]:
                t.add(Atom(Term("above"), (Term(x), Term(y))))
            elif BITS[x] < BITS[y]:
                t.add(Atom(Term("below"), (Term(x), Term(y))))
    return t


def _grid(inds) -> set[Atom]:
    atoms: set[Atom] = set()
    for p in UNARY:
        for x in inds:
            atoms.add(Atom(Term(p), (Term(x),)))
    for p in BINARY:
        for x in inds:
            for y in inds:
                atoms.add(Atom(Term(p), (Term(x), Term(y))))
    return atoms


def _encoding(inds, scene: int) -> np.ndarray:
    e = np.zeros(ENCODING_DIM)
    for x in inds:
        e[INDIVIDUALS.index(x)] = 1.0
    e[6] = float(scene)
    return e


def _record(video_id: str, inds, scene: int):
    truth = _truth(inds, scene)
    negated = {a.negate() for a in _grid(inds) - truth}
    record = DatasetRecord(
        video_id, {Term(x) for x in inds}, frozenset(truth), frozenset(negated)
    )
    return record, _encoding(inds, scene)


def _corpus(named_examples) -> SynthCorpus:
    records = []
    vectors = {}
    for video_id, inds, scene in named_examples:
        record, e = _record(video_id, inds, scene)
        records.append(record)
        vectors[video_id] = e
    vocab = build_vocabulary(
        [r.graph() for r in records], BuildConfig(rng_seed=0, min_count=1)
    )
    return SynthCorpus(
        tuple(records), vocab, FeatureStore(ENCODING_DIM, vectors=vectors)
    )


def overfit_corpus(num_videos: int = 20) -> SynthCorpus:
    """Videos of cycling individual pairs; 6 individuals, 3 unary + 2 binary."""
    examples = []
    for k in range(num_videos):
        a = INDIVIDUALS[k % 6]
        b = INDIVIDUALS[(k + 1 + k // 6) % 6]
        if a == b:
            b = INDIVIDUALS[(k + 2) % 6]
        examples.append((f"synth{k:03d}", (a, b), k % 2))
    return _corpus(examples)


def ablation_corpus(repetitions: int = 2) -> SynthCorpus:
    """Every pair of 4 individuals at both scene values, repeated.

    Repetitions share features and labels but carry distinct video ids, so a
    random encoder sees that many more distinct vectors to memorize.
    """
    pool = INDIVIDUALS[:4]
    examples = []
    k = 0
    for _rep in range(repetitions):
        for scene in (0, 1):
            for pair in combinations(pool, 2):
                examples.append((f"abl{k:03d}", pair, scene))
                k += 1
    return _corpus(examples)
