"""Dataset assembly: merge per-caption atoms into per-video graphs, filter
rare vocabulary, and draw closed-world negatives.

Negative sampling replaces a fact's predicate with a different predicate of
the same arity, drawn uniformly from the vocabulary.  Corruptions that would
collide with a true fact of the same video, or with a negative already drawn
for it, are resampled a bounded number of times and then skipped with a
logged warning.  Each video gets its own RNG stream derived from the
configured seed and the video id, so builds are reproducible and videos can
be processed in any order or in parallel.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass

import numpy as np

from vid2kg.atoms import (
    Atom,
    KnowledgeGraph,
    Term,
    Vocabulary,
    sorted_atoms,
    sorted_terms,
)
from vid2kg.errors import DataError
from vid2kg.kgio import read_dataset, term_from_obj, term_to_obj, write_dataset

__all__ = [
    "BuildConfig",
    "CorpusStats",
    "assemble_dataset",
    "build_vocabulary",
    "compute_stats",
    "filter_kgs",
    "generate_negatives",
    "merge_annotations",
    "read_dataset",
    "read_vocabulary",
    "stats_table",
    "stats_to_obj",
    "video_rng",
    "write_dataset",
    "write_vocabulary",
]

log = logging.getLogger(__name__)

DEFAULT_EXCLUDED_VERBS = frozenset({"take", "do", "be", "have"})

# resamples per negative before giving up on it
MAX_RETRIES = 100

_ROLES = ("individual", "unary", "binary")


@dataclass(frozen=True)
class BuildConfig:
    """Knobs for vocabulary filtering and negative sampling."""

    rng_seed: int
    min_count: int = 50
    excluded_verbs: frozenset[str] = DEFAULT_EXCLUDED_VERBS
    negatives_per_fact: int = 1

    def __post_init__(self):
        object.__setattr__(self, "excluded_verbs", frozenset(self.excluded_verbs))
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0:
            raise ValueError("rng_seed must be a non-negative integer")
        if self.min_count < 1:
            raise ValueError("min_count must be at least 1")
        if self.negatives_per_fact < 1:
            raise ValueError("negatives_per_fact must be at least 1")


@dataclass(frozen=True)
class CorpusStats:
    num_examples: int
    num_individuals: int
    num_attributes: int
    num_relations: int
    num_nonempty_examples: int

    def __post_init__(self):
        if self.num_nonempty_examples > self.num_examples:
            raise ValueError("more non-empty examples than examples")


def merge_annotations(entries) -> list[KnowledgeGraph]:
    """Union caption-level atoms into one graph per video.

    ``entries`` is an iterable of (video_id, atoms) pairs, typically several
    per video (one per caption).  Individuals are the argument terms of the
    merged facts.  Videos whose captions all produced nothing are kept as
    empty graphs.  Output is sorted by video id.
    """
    by_video: dict[str, set[Atom]] = {}
    for video_id, atoms in entries:
        bucket = by_video.setdefault(video_id, set())
        bucket.update(atoms)
    return [
        KnowledgeGraph.build(vid, facts=by_video[vid]) for vid in sorted(by_video)
    ]


def build_vocabulary(kgs, cfg: BuildConfig) -> Vocabulary:
    """Count per-video term presence and keep what clears min_count.

    A term occurring five times inside one video still counts once: the
    threshold is over videos, applied after caption merging.  Excluded verbs
    are dropped from the predicate sets no matter how often they occur.
    """
    counts: dict[tuple[str, Term], int] = {}
    for kg in kgs:
        present: set[tuple[str, Term]] = set()
        for t in kg.individuals:
            present.add(("individual", t))
        for atom in kg.facts:
            role = "unary" if atom.arity == 1 else "binary"
            present.add((role, atom.predicate))
        for key in present:
            counts[key] = counts.get(key, 0) + 1

    def retained(role, extra=lambda t: True):
        return frozenset(
            t
            for (r, t), c in counts.items()
            if r == role and c >= cfg.min_count and extra(t)
        )

    not_excluded = lambda t: t.surface not in cfg.excluded_verbs
    return Vocabulary(
        individuals=retained("individual"),
        unary_predicates=retained("unary", not_excluded),
        binary_predicates=retained("binary", not_excluded),
        counts=counts,
    )


def filter_kgs(kgs, vocab: Vocabulary) -> list[KnowledgeGraph]:
    """Drop atoms and individuals the vocabulary does not admit.

    Retained individuals survive even when every atom mentioning them was
    dropped; graphs reduced to nothing stay in the corpus as empty examples.
    """
    out = []
    for kg in kgs:
        out.append(
            KnowledgeGraph.build(
                kg.video_id,
                facts={a for a in kg.facts if vocab.admits(a)},
                negated_facts={a for a in kg.negated_facts if vocab.admits(a)},
                individuals={t for t in kg.individuals if t in vocab.individuals},
            )
        )
    return out


def video_rng(rng_seed: int, video_id: str) -> np.random.Generator:
    """Per-video RNG stream: seed material is the seed plus a video-id hash."""
    digest = hashlib.sha256(video_id.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "big") for i in range(0, 32, 4)]
    return np.random.default_rng(np.random.SeedSequence([rng_seed, *words]))


def _arity_word(arity: int) -> str:
    return "unary" if arity == 1 else "binary"


def generate_negatives(
    kg: KnowledgeGraph, vocab: Vocabulary, cfg: BuildConfig
) -> KnowledgeGraph:
    """Draw closed-world negatives for every fact of one video's graph.

    Each fact is corrupted negatives_per_fact times by swapping its predicate
    for a uniformly random different vocabulary predicate of the same arity.
    A draw that reproduces a true fact of this video, or a negative already
    drawn for it, is rejected and resampled; after MAX_RETRIES rejections the
    negative is skipped and a warning is logged.
    """
    pools = {
        1: sorted_terms(vocab.unary_predicates),
        2: sorted_terms(vocab.binary_predicates),
    }
    rng = video_rng(cfg.rng_seed, kg.video_id)
    negatives: set[Atom] = set()
    for fact in sorted_atoms(kg.facts):
        pool = pools[fact.arity]
        if len(pool) < 2:
            raise DataError(
                f"{kg.video_id}: cannot corrupt {fact}: vocabulary has "
                f"{len(pool)} {_arity_word(fact.arity)} predicate(s), need at least 2"
            )
        candidates = [p for p in pool if p != fact.predicate]
        for _ in range(cfg.negatives_per_fact):
            drawn = None
            for _attempt in range(MAX_RETRIES):
                pred = candidates[int(rng.integers(len(candidates)))]
                corrupted = Atom(pred, fact.args, negated=True)
                if corrupted.unnegated() in kg.facts or corrupted in negatives:
                    continue
                drawn = corrupted
                break
            if drawn is None:
                log.warning(
                    "%s: skipped a negative for %s after %d rejected draws",
                    kg.video_id,
                    fact,
                    MAX_RETRIES,
                )
            else:
                negatives.add(drawn)
    return KnowledgeGraph.build(
        kg.video_id,
        facts=kg.facts,
        negated_facts=negatives,
        individuals=kg.individuals,
    )


def assemble_dataset(entries, cfg: BuildConfig):
    """Merge, build the vocabulary, filter, and draw negatives in one pass.

    Returns (kgs, vocab); the graphs come back sorted by video id with their
    negatives attached.
    """
    merged = merge_annotations(entries)
    vocab = build_vocabulary(merged, cfg)
    filtered = filter_kgs(merged, vocab)
    kgs = [generate_negatives(kg, vocab, cfg) for kg in filtered]
    return kgs, vocab


def compute_stats(kgs) -> CorpusStats:
    individuals: set[Term] = set()
    attributes: set[Term] = set()
    relations: set[Term] = set()
    nonempty = 0
    for kg in kgs:
        individuals.update(kg.individuals)
        for atom in kg.facts:
            (attributes if atom.arity == 1 else relations).add(atom.predicate)
        if kg.facts:
            nonempty += 1
    return CorpusStats(
        num_examples=len(list(kgs)),
        num_individuals=len(individuals),
        num_attributes=len(attributes),
        num_relations=len(relations),
        num_nonempty_examples=nonempty,
    )


def stats_to_obj(stats: CorpusStats) -> dict:
    # the sum is reported alongside the split counts for comparison against
    # corpus summaries that collapse attributes and relations into one column
    return {
        "num_examples": stats.num_examples,
        "num_individuals": stats.num_individuals,
        "num_attributes": stats.num_attributes,
        "num_relations": stats.num_relations,
        "num_predicates": stats.num_attributes + stats.num_relations,
        "num_nonempty_examples": stats.num_nonempty_examples,
    }


def stats_table(stats: CorpusStats) -> str:
    rows = [
        ("Num Examples", stats.num_examples),
        ("Num Individuals", stats.num_individuals),
        ("Num Attributes", stats.num_attributes),
        ("Num Relations", stats.num_relations),
        ("Num Predicates (attrs + rels)", stats.num_attributes + stats.num_relations),
        ("Num Non-empty Examples", stats.num_nonempty_examples),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def vocab_to_obj(vocab: Vocabulary) -> dict:
    counts = [
        {"role": role, "term": term_to_obj(term), "count": count}
        for (role, term), count in sorted(
            vocab.counts.items(), key=lambda item: (item[0][0], item[0][1].sort_key())
        )
    ]
    return {
        "individuals": [term_to_obj(t) for t in sorted_terms(vocab.individuals)],
        "unary_predicates": [
            term_to_obj(t) for t in sorted_terms(vocab.unary_predicates)
        ],
        "binary_predicates": [
            term_to_obj(t) for t in sorted_terms(vocab.binary_predicates)
        ],
        "counts": counts,
    }


def vocab_from_obj(obj, where: str) -> Vocabulary:
    for key in ("individuals", "unary_predicates", "binary_predicates", "counts"):
        if key not in obj:
            raise DataError(f"{where}: missing key {key!r}")
    counts = {}
    for entry in obj["counts"]:
        role = entry.get("role")
        if role not in _ROLES:
            raise DataError(f"{where}: bad count role {role!r}")
        if not isinstance(entry.get("count"), int) or entry["count"] < 1:
            raise DataError(f"{where}: count must be a positive integer")
        counts[(role, term_from_obj(entry["term"], where))] = entry["count"]
    return Vocabulary(
        individuals=frozenset(term_from_obj(o, where) for o in obj["individuals"]),
        unary_predicates=frozenset(
            term_from_obj(o, where) for o in obj["unary_predicates"]
        ),
        binary_predicates=frozenset(
            term_from_obj(o, where) for o in obj["binary_predicates"]
        ),
        counts=counts,
    )


def write_vocabulary(vocab: Vocabulary, path) -> None:
    text = json.dumps(vocab_to_obj(vocab), indent=2, sort_keys=True, ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_vocabulary(path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected a JSON object")
    return vocab_from_obj(obj, str(path))
