import pytest

from vid2kg.atoms import Atom, DatasetRecord, KnowledgeGraph, Term
from vid2kg.errors import DataError
from vid2kg.kgio import (
    read_dataset,
    read_kg_store,
    write_dataset,
    write_kg_store,
)


def _kg():
    return KnowledgeGraph.build(
        "vid7",
        facts=[
            Atom(Term("eat", "eat.v.01"), (Term("man", "man.n.01"), Term("banana"))),
            Atom(Term("stand"), (Term("man", "man.n.01"),)),
        ],
        negated_facts=[Atom(Term("throw"), (Term("man", "man.n.01"), Term("banana")), True)],
        individuals=[Term("paper")],
    )


def test_kg_store_round_trip(tmp_path):
    path = tmp_path / "store.jsonl"
    kg = _kg()
    write_kg_store([kg], path)
    [back] = read_kg_store(path)
    assert back.video_id == kg.video_id
    assert back.facts == kg.facts
    assert back.negated_facts == kg.negated_facts
    # synset-free extras survive by surface; argument terms keep their links
    assert Term("paper") in back.individuals
    assert Term("man", "man.n.01") in back.individuals


def test_kg_store_is_deterministic(tmp_path):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_kg_store([_kg()], p1)
    write_kg_store([_kg()], p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_kg_store_bad_json_names_line(tmp_path):
    path = tmp_path / "store.jsonl"
    path.write_text('{"video_id":"v1","individuals":[],"facts":[]}\nnot json\n')
    with pytest.raises(DataError, match=r":2"):
        read_kg_store(path)


def test_kg_store_missing_key(tmp_path):
    path = tmp_path / "store.jsonl"
    path.write_text('{"video_id":"v1","facts":[]}\n')
    with pytest.raises(DataError, match="individuals"):
        read_kg_store(path)


def test_dataset_round_trip_is_exact(tmp_path):
    path = tmp_path / "data.jsonl"
    rec = DatasetRecord.from_graph(_kg(), feature=(0.1, -2.5, 3.0))
    plain = DatasetRecord.from_graph(KnowledgeGraph.build("vid9"))
    write_dataset([rec, plain], path)
    back = read_dataset(path)
    assert back == [rec, plain]


def test_dataset_rejects_bad_feature(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"video_id":"v1","individuals":[],"facts":[],"negated_facts":[],"feature":["x"]}\n'
    )
    with pytest.raises(DataError, match="feature"):
        read_dataset(path)


def test_dataset_rejects_wrong_polarity_in_array(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"video_id":"v1","individuals":[{"t":"man"}],'
        '"facts":[{"pred":"stand","args":["man"],"neg":true}],"negated_facts":[]}\n'
    )
    with pytest.raises(DataError):
        read_dataset(path)


def test_empty_file_reads_empty(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text("")
    assert read_dataset(path) == []
    assert read_kg_store(path) == []
