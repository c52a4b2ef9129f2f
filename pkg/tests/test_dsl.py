from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from ppreflect.completion import reflect
from ppreflect.dsl import ParseError, TermSyntaxError, load, parse, parse_term, print_document
from ppreflect.fincat import validate_category
from ppreflect.msa import IllSorted, enumerate_terms, render
from ppreflect.samples import delta

CORPUS = sorted((Path(__file__).resolve().parent.parent / "corpus").glob("*.cat"))

SMALL = """\
category C {
  objects: X, Y;
  morphisms:
    f : X -> Y;
  compose:
}
"""


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    doc = load(str(path))
    text = print_document(doc)
    again = parse(text)
    assert again.decls == doc.decls
    assert print_document(again) == text


def test_delta_file_matches_sample():
    doc = load(str(CORPUS[0].parent / "delta.cat"))
    D = doc.categories["Delta"]
    ref = delta()
    assert validate_category(D) == []
    assert sorted(D.morphisms) == sorted(ref.morphisms)
    assert D.comp == ref.comp


def test_identities_are_generated():
    doc = parse(SMALL)
    C = doc.categories["C"]
    assert C.identity == {"X": "id_X", "Y": "id_Y"}
    assert C.comp[("f", "id_X")] == "f"


def diag(src):
    with pytest.raises(ParseError) as exc:
        parse(src)
    return exc.value.diagnostics


def test_syntax_error_position():
    d = diag("category C {\n  objects X;\n}")
    assert (d[0].line, d[0].col) == (2, 11)


def test_missing_composite_diagnosed():
    src = SMALL.replace("f : X -> Y;", "f : X -> Y;\n    g : Y -> X;")
    msgs = [x.message for x in diag(src)]
    assert any("non-total composition table: missing" in m for m in msgs)


def test_unknown_name_and_duplicates():
    src = SMALL + "functor F : D { X -> { a }; }\n"
    assert any("unknown" in d.message for d in diag(src))
    src = SMALL + SMALL
    d = diag(src)
    assert any("duplicate declaration" in x.message for x in d)
    assert d[0].line > 6


def test_query_config_precedence():
    doc = load(str(CORPUS[0].parent / "delta.cat"))
    assert doc.config("equal")["functor"] == ["S"]
    assert doc.config()["models"] == ["Y2", "T"]


@pytest.fixture(scope="module")
def th():
    doc = load(str(CORPUS[0].parent / "delta.cat"))
    F = doc.functors["S"]
    return reflect(F.category, doc.product_cones(doc.category_of("S")), F).theory


def test_parse_term_errors(th):
    with pytest.raises(TermSyntaxError) as exc:
        parse_term("inl(codiag(1.L_id_1)", th.signature)
    assert exc.value.col == 21
    with pytest.raises(TermSyntaxError):
        parse_term("nope", th.signature)
    with pytest.raises(IllSorted):
        parse_term("inl(1.L_id_1)", th.signature)


@given(st.data())
def test_render_then_parse(th, data):
    sort = data.draw(st.sampled_from(["0", "1", "2"]))
    t = data.draw(st.sampled_from(list(enumerate_terms(th.signature, sort, 4))))
    assert parse_term(render(t), th.signature) is t


def test_nat_declaration():
    src = SMALL + """
functor A : C { X -> { a }; Y -> { b, c }; f -> [a => b]; }
nat alpha : A -> A { X: [a => a]; Y: [b => b, c => c]; }
nat beta : A -> A { X: [a => a]; Y: [b => c, c => c]; }
"""
    doc = parse(src)
    assert set(doc.nats) == {"alpha", "beta"}
    assert doc.nats["alpha"].components["Y"] == {"b": "b", "c": "c"}
    assert parse(print_document(doc)).decls == doc.decls
