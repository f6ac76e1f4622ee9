"""Sanity checks on the shipped synthetic corpora."""

from vid2kg.atoms import Atom, Term
from vid2kg.synth import (
    BITS,
    ENCODING_DIM,
    INDIVIDUALS,
    ablation_corpus,
    overfit_corpus,
)


def test_overfit_corpus_shape():
    corpus = overfit_corpus(20)
    assert len(corpus.records) == 20
    assert corpus.features.dim == ENCODING_DIM
    assert len(corpus.features) == 20
    assert corpus.vocab.individuals == frozenset(Term(s) for s in INDIVIDUALS)
    assert corpus.vocab.unary_predicates == frozenset(
        Term(s) for s in ("bright", "dark", "moving")
    )
    assert corpus.vocab.binary_predicates == frozenset(
        Term(s) for s in ("above", "below")
    )


def test_every_record_has_two_distinct_individuals():
    for record in overfit_corpus(20).records:
        assert len(record.individuals) == 2


def test_facts_follow_the_bit_rules():
    corpus = overfit_corpus(12)
    for record in corpus.records:
        e = corpus.features.get(record.video_id)
        scene = int(e[6])
        for x in record.individuals:
            expected_unary = Atom(Term("bright" if BITS[x.surface] else "dark"), (x,))
            assert expected_unary in record.facts
            assert (Atom(Term("moving"), (x,)) in record.facts) == bool(scene)
        for atom in record.facts:
            if atom.predicate.surface == "above":
                assert BITS[atom.args[0].surface] > BITS[atom.args[1].surface]
            if atom.predicate.surface == "below":
                assert BITS[atom.args[0].surface] < BITS[atom.args[1].surface]


def test_negated_set_is_the_grid_complement():
    for record in overfit_corpus(8).records:
        n = len(record.individuals)
        # 3 unary predicates x n plus 2 binary x n^2, split between T and F
        grid = 3 * n + 2 * n * n
        assert len(record.facts) + len(record.negated_facts) == grid
        clash = {a.unnegated() for a in record.negated_facts} & record.facts
        assert not clash


def test_encoding_marks_individuals_and_scene():
    corpus = overfit_corpus(10)
    for record in corpus.records:
        e = corpus.features.get(record.video_id)
        assert e.shape == (ENCODING_DIM,)
        present = {INDIVIDUALS[i] for i in range(6) if e[i] == 1.0}
        assert present == {t.surface for t in record.individuals}
        assert e[6] in (0.0, 1.0)
        assert e[7] == 0.0


def test_corpora_are_deterministic():
    a = overfit_corpus(15)
    b = overfit_corpus(15)
    assert a.records == b.records
    first = ablation_corpus(2)
    second = ablation_corpus(2)
    assert first.records == second.records


def test_ablation_corpus_repeats_pairs_under_fresh_ids():
    corpus = ablation_corpus(2)
    # C(4,2) pairs x 2 scenes x 2 repetitions
    assert len(corpus.records) == 24
    ids = [r.video_id for r in corpus.records]
    assert len(set(ids)) == 24
    first_half = [(r.individuals, r.facts) for r in corpus.records[:12]]
    second_half = [(r.individuals, r.facts) for r in corpus.records[12:]]
    assert first_half == second_half
