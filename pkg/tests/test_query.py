"""Pattern parsing and KG pattern matching."""

import pytest

from vid2kg.atoms import Atom, KnowledgeGraph, Term
from vid2kg.errors import DataError
from vid2kg.ontology import load_ontology
from vid2kg.query import (
    QueryPattern,
    Variable,
    match_atom,
    parse_pattern,
    query_kg,
    query_store,
)


def A(pred, *args, neg=False):
    return Atom(Term(pred), tuple(Term(a) for a in args), neg)


def linked(surface, synset):
    return Term(surface, synset)


@pytest.fixture(scope="module")
def ontology(request):
    fixtures = request.config.rootpath / "fixtures"
    return load_ontology(fixtures / "ontology.json")


class TestParsePattern:
    def test_ground_pattern(self):
        p = parse_pattern("eat(man,banana)")
        assert p.predicate == Term("eat")
        assert p.args == (Term("man"), Term("banana"))
        assert p.arity == 2
        assert p.variables() == ()

    def test_variable_argument(self):
        p = parse_pattern("change(male,?x)")
        assert p.predicate == Term("change")
        assert p.args == (Term("male"), Variable("x"))
        assert p.variables() == ("x",)

    def test_variable_predicate_and_spacing(self):
        p = parse_pattern("  ?p(man, paper)  ")
        assert p.predicate == Variable("p")
        assert p.args == (Term("man"), Term("paper"))

    def test_synset_qualified_constant(self):
        p = parse_pattern("stand(man#man.n.01)")
        assert p.args == (Term("man", "man.n.01"),)

    def test_repeated_variable(self):
        p = parse_pattern("chase(?x,?x)")
        assert p.variables() == ("x",)

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "stand",
            "stand()",
            "stand(a,b,c)",
            "!stand(?x)",
            "stand(?X)",
            "stand(??x)",
            "st and(?x)",
        ],
    )
    def test_bad_patterns_rejected(self, text):
        with pytest.raises(DataError):
            parse_pattern(text)


class TestMatchAtom:
    def test_ground_match_gives_empty_bindings(self):
        assert match_atom(parse_pattern("eat(man,banana)"), A("eat", "man", "banana")) == {}

    def test_surface_constant_ignores_synset(self):
        atom = Atom(Term("stand"), (linked("man", "man.n.01"),))
        assert match_atom(parse_pattern("stand(man)"), atom) == {}

    def test_synset_constant_requires_exact_term(self):
        pattern = parse_pattern("stand(man#man.n.01)")
        assert match_atom(pattern, Atom(Term("stand"), (linked("man", "man.n.01"),))) == {}
        assert match_atom(pattern, A("stand", "man")) is None

    def test_variable_binds_surface(self):
        atom = Atom(Term("change"), (Term("male"), linked("paper", "paper.n.01")))
        assert match_atom(parse_pattern("change(male,?x)"), atom) == {"x": "paper"}

    def test_repeated_variable_must_agree(self):
        pattern = parse_pattern("chase(?x,?x)")
        assert match_atom(pattern, A("chase", "dog", "dog")) == {"x": "dog"}
        assert match_atom(pattern, A("chase", "dog", "cat")) is None

    def test_arity_and_polarity_mismatches(self):
        pattern = parse_pattern("run(?x)")
        assert match_atom(pattern, A("run", "a", "b")) is None
        assert match_atom(pattern, A("run", "a", neg=True)) is None

    def test_predicate_variable(self):
        assert match_atom(parse_pattern("?p(man)"), A("stand", "man")) == {"p": "stand"}


FOLD_KG = KnowledgeGraph.build(
    "vid_fold",
    facts={
        Atom(
            Term("fold", "fold.v.01"),
            (linked("man", "man.n.01"), linked("origami", "origami.n.01")),
        ),
        Atom(Term("stand", "stand.v.01"), (linked("man", "man.n.01"),)),
    },
)

# the words man and fold both occur, but no fold fact connects a male to
# anything: a folded sheet is handed over, nothing is folded by the man
DISTRACTOR_KG = KnowledgeGraph.build(
    "vid_handed",
    facts={
        Atom(
            Term("hand", "hand.v.01"),
            (linked("man", "man.n.01"), linked("paper", "paper.n.01")),
        ),
        Atom(Term("folded"), (linked("paper", "paper.n.01"),)),
    },
)


class TestQueryKg:
    def test_closure_requires_ontology(self):
        with pytest.raises(DataError, match="ontology"):
            query_kg(FOLD_KG, parse_pattern("stand(?x)"), None, with_closure=True)

    def test_stand_bindings_after_closure(self, ontology):
        rows = query_kg(FOLD_KG, parse_pattern("stand(?x)"), ontology, with_closure=True)
        assert rows == [{"x": "male"}, {"x": "man"}, {"x": "person"}]

    def test_without_closure_only_the_literal_fact(self):
        rows = query_kg(FOLD_KG, parse_pattern("stand(?x)"))
        assert rows == [{"x": "man"}]

    def test_fold_implies_change_for_a_male(self, ontology):
        rows = query_kg(
            FOLD_KG, parse_pattern("change(male,?x)"), ontology, with_closure=True
        )
        assert rows == [{"x": "origami"}]

    def test_distractor_kg_never_matches(self, ontology):
        pattern = parse_pattern("change(male,?x)")
        assert query_kg(DISTRACTOR_KG, pattern, ontology, with_closure=True) == []

    def test_duplicate_bindings_collapse(self, ontology):
        # fold(person,...) and change(person,...) both appear after closure;
        # a two-variable query over them yields each binding pair once
        rows = query_kg(
            FOLD_KG, parse_pattern("change(?x,?y)"), ontology, with_closure=True
        )
        assert {tuple(sorted(r.items())) for r in rows} == {
            (("x", "male"), ("y", "origami")),
            (("x", "man"), ("y", "origami")),
            (("x", "person"), ("y", "origami")),
        }


class TestQueryStore:
    def test_rows_sorted_by_video_then_bindings(self, ontology):
        store = [DISTRACTOR_KG, FOLD_KG]
        rows = query_store(store, parse_pattern("?p(man,?y)"))
        assert rows == [
            ("vid_fold", {"p": "fold", "y": "origami"}),
            ("vid_handed", {"p": "hand", "y": "paper"}),
        ]

    def test_no_matches_is_an_empty_list(self):
        assert query_store([FOLD_KG], parse_pattern("drink(?x)")) == []

    def test_materialized_closure_equals_the_flag(self, ontology):
        from vid2kg.ontology import closure

        pattern = parse_pattern("stand(?x)")
        flagged = query_store([FOLD_KG], pattern, ontology, with_closure=True)
        augmented = KnowledgeGraph.build(
            FOLD_KG.video_id, facts=FOLD_KG.facts | closure(FOLD_KG.facts, ontology)
        )
        materialized = query_store([augmented], pattern)
        assert flagged == materialized

    def test_ground_query_reports_matching_videos(self):
        rows = query_store([FOLD_KG, DISTRACTOR_KG], parse_pattern("folded(paper)"))
        assert rows == [("vid_handed", {})]
