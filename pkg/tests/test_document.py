import json

import pytest
from helpers import load_fixture_doc
from hypothesis import given
from hypothesis import strategies as st

from odin import (
    DependencyGraph,
    DocumentParseError,
    DocumentValidationError,
    MissingLayerError,
    document_to_dict,
    make_sentence,
    parse_document,
)
from odin.document import incoming_edges, outgoing_edges


def _payload(**sentence):
    base = {"words": ["a", "b", "c"], "startOffsets": [0, 2, 4], "endOffsets": [1, 3, 5]}
    base.update(sentence)
    return json.dumps({"id": "d", "text": "a b c", "sentences": [base]})


def test_minimal_document():
    doc = parse_document(_payload(tags=["DT", "NN", "VB"]))
    assert len(doc.sentences) == 1
    s = doc.sentences[0]
    assert len(s) == 3
    assert s.tags == ("DT", "NN", "VB")
    assert s.lemmas is None and s.graph is None


def test_layer_length_mismatch_names_layer_and_sentence():
    with pytest.raises(DocumentValidationError) as exc:
        parse_document(_payload(lemmas=["a", "b"]))
    assert exc.value.layer == "lemmas"
    assert exc.value.sentence == 0
    assert "lemmas" in str(exc.value)


def test_malformed_json_reports_location():
    with pytest.raises(DocumentParseError) as exc:
        parse_document('{"id": "x",\n "sentences": [}')
    assert exc.value.line == 2


@pytest.mark.parametrize("payload", [
    "[]",
    '{"id": "x"}',
    '{"sentences": [{"words": ["a"]}]}',
    '{"sentences": [{"words": ["a"], "startOffsets": [0], "endOffsets": [1], "bogus": 1}]}',
    '{"sentences": [{"words": [1], "startOffsets": [0], "endOffsets": [1]}]}',
])
def test_wrong_shapes_are_parse_errors(payload):
    with pytest.raises(DocumentParseError):
        parse_document(payload)


def test_bad_offsets_and_edges_are_validation_errors():
    with pytest.raises(DocumentValidationError):
        parse_document(_payload(startOffsets=[0, 2, 4], endOffsets=[1, 2, 5]))
    with pytest.raises(DocumentValidationError) as exc:
        parse_document(_payload(graph={"edges": [{"source": 0, "destination": 7, "relation": "x"}], "roots": [0]}))
    assert exc.value.layer == "graph"
    dup = {"source": 0, "destination": 1, "relation": "x"}
    with pytest.raises(DocumentValidationError):
        parse_document(_payload(graph={"edges": [dup, dup], "roots": []}))


def test_offsets_must_fit_text():
    bad = json.loads(_payload())
    bad["text"] = "a b"
    with pytest.raises(DocumentValidationError):
        parse_document(json.dumps(bad))


def test_parallel_edges_with_different_relations_allowed():
    g = DependencyGraph.from_edges([(0, 1, "x"), (0, 1, "y")])
    assert set(g.outgoing(0)) == {("x", 1), ("y", 1)}


def test_walkthrough_fixture():
    doc = load_fixture_doc("walkthrough")
    s = doc.sentences[0]
    assert len(s) == 12
    assert [i for i, e in enumerate(s.entities) if e.startswith("B-")] == [3, 5, 10]
    assert {("prep_of", 3), ("prep_by", 5)} <= outgoing_edges(s, 1)


def test_edge_lookup_examples():
    s = make_sentence(["x", "y", "z", "w"], edges=[(1, 0, "nsubj"), (1, 3, "dobj")])
    assert outgoing_edges(s, 1) == {("nsubj", 0), ("dobj", 3)}
    assert outgoing_edges(s, 0) == set()
    assert incoming_edges(s, 0) == {("nsubj", 1)}
    assert incoming_edges(s, 1) == set()


def test_missing_graph_is_an_error_for_edge_lookup():
    s = make_sentence(["x"])
    with pytest.raises(MissingLayerError):
        outgoing_edges(s, 0)


def test_marriage_offsets_follow_text():
    doc = load_fixture_doc("marriage")
    s = doc.sentences[5]
    assert doc.text[s.start_offsets[4]:s.end_offsets[4]] == "married"
    assert doc.span_text(5, 8, 12) == "March 12, 2010"


def test_round_trip_is_deterministic():
    doc = load_fixture_doc("marriage")
    again = parse_document(json.dumps(document_to_dict(doc)))
    assert again == doc
    assert parse_document(json.dumps(document_to_dict(doc))) == again


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 8))
    edges = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.sampled_from("abc")),
                         max_size=20))
    return n, edges


@given(graphs())
def test_outgoing_incoming_duality(g):
    n, edges = g
    s = make_sentence(["w"] * n, edges=edges)
    for t in range(n):
        assert incoming_edges(s, t) == {(r, src) for src, dst, r in edges if dst == t}
        for rel, dst in outgoing_edges(s, t):
            assert (rel, t) in incoming_edges(s, dst)
