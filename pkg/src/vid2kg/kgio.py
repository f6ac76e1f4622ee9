"""JSONL serialization for knowledge graph stores and datasets.

A store line holds one video: its individuals as plain surfaces and its
facts as objects carrying polarity and optional synset links.  Dataset
lines additionally split positive from negated facts and may embed a
feature vector.  Writers emit sorted, compact lines so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json

from vid2kg.atoms import Atom, DatasetRecord, KnowledgeGraph, Term, sorted_atoms, sorted_terms
from vid2kg.errors import DataError


def atom_to_obj(atom: Atom) -> dict:
    obj = {
        "pred": atom.predicate.surface,
        "args": [t.surface for t in atom.args],
        "neg": atom.negated,
    }
    if atom.predicate.synset is not None:
        obj["pred_syn"] = atom.predicate.synset
    if any(t.synset is not None for t in atom.args):
        obj["arg_syns"] = [t.synset for t in atom.args]
    return obj


def atom_from_obj(obj, where: str) -> Atom:
    if not isinstance(obj, dict):
        raise DataError(f"{where}: fact entry must be an object")
    try:
        pred = obj["pred"]
        args = obj["args"]
    except KeyError as exc:
        raise DataError(f"{where}: fact entry missing key {exc}") from exc
    if not isinstance(args, list):
        raise DataError(f"{where}: fact args must be a list")
    arg_syns = obj.get("arg_syns")
    if arg_syns is None:
        arg_syns = [None] * len(args)
    if len(arg_syns) != len(args):
        raise DataError(f"{where}: arg_syns length does not match args")
    try:
        terms = tuple(Term(a, s) for a, s in zip(args, arg_syns))
        return Atom(Term(pred, obj.get("pred_syn")), terms, bool(obj.get("neg", False)))
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from exc


def term_to_obj(term: Term) -> dict:
    obj = {"t": term.surface}
    if term.synset is not None:
        obj["syn"] = term.synset
    return obj


def term_from_obj(obj, where: str) -> Term:
    if not isinstance(obj, dict) or "t" not in obj:
        raise DataError(f"{where}: term entry must be an object with key 't'")
    try:
        return Term(obj["t"], obj.get("syn"))
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from exc


def dump_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _iter_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: line is not a JSON object")
            yield lineno, obj


def kg_to_obj(kg: KnowledgeGraph) -> dict:
    atoms = sorted_atoms(kg.facts) + sorted_atoms(kg.negated_facts)
    return {
        "video_id": kg.video_id,
        "individuals": sorted({t.surface for t in kg.individuals}),
        "facts": [atom_to_obj(a) for a in atoms],
    }


def kg_from_obj(obj, where: str) -> KnowledgeGraph:
    for key in ("video_id", "individuals", "facts"):
        if key not in obj:
            raise DataError(f"{where}: missing key {key!r}")
    if not isinstance(obj["individuals"], list) or not isinstance(obj["facts"], list):
        raise DataError(f"{where}: individuals and facts must be lists")
    atoms = [atom_from_obj(o, where) for o in obj["facts"]]
    facts = frozenset(a for a in atoms if not a.negated)
    negated = frozenset(a for a in atoms if a.negated)
    arg_terms = {t for a in atoms for t in a.args}
    covered = {t.surface for t in arg_terms}
    try:
        extra = {Term(s) for s in obj["individuals"] if s not in covered}
        return KnowledgeGraph(obj["video_id"], arg_terms | extra, facts, negated)
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from exc


def write_kg_store(kgs, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for kg in kgs:
            fh.write(dump_line(kg_to_obj(kg)) + "\n")


def read_kg_store(path) -> list[KnowledgeGraph]:
    return [kg_from_obj(obj, f"{path}:{lineno}") for lineno, obj in _iter_jsonl(path)]


def record_to_obj(rec: DatasetRecord) -> dict:
    obj = {
        "video_id": rec.video_id,
        "individuals": [term_to_obj(t) for t in sorted_terms(rec.individuals)],
        "facts": [atom_to_obj(a) for a in sorted_atoms(rec.facts)],
        "negated_facts": [atom_to_obj(a) for a in sorted_atoms(rec.negated_facts)],
    }
    if rec.feature is not None:
        obj["feature"] = list(rec.feature)
    return obj


def record_from_obj(obj, where: str) -> DatasetRecord:
    for key in ("video_id", "individuals", "facts", "negated_facts"):
        if key not in obj:
            raise DataError(f"{where}: missing key {key!r}")
    feature = obj.get("feature")
    if feature is not None:
        if not isinstance(feature, list) or not all(
            isinstance(v, (int, float)) for v in feature
        ):
            raise DataError(f"{where}: feature must be a list of numbers")
        feature = tuple(float(v) for v in feature)
    try:
        return DatasetRecord(
            obj["video_id"],
            frozenset(term_from_obj(o, where) for o in obj["individuals"]),
            frozenset(atom_from_obj(o, where) for o in obj["facts"]),
            frozenset(atom_from_obj(o, where) for o in obj["negated_facts"]),
            feature,
        )
    except DataError as exc:
        if str(exc).startswith(where):
            raise
        raise DataError(f"{where}: {exc}") from exc


def write_dataset(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dump_line(record_to_obj(rec)) + "\n")


def read_dataset(path) -> list[DatasetRecord]:
    return [record_from_obj(obj, f"{path}:{lineno}") for lineno, obj in _iter_jsonl(path)]
