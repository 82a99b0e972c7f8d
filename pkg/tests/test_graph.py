"""Graph construction, lookup, adjacency, and TSV reading."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ontovec.errors import DuplicateEntity, MalformedTriple, NotFound, UnknownIri
from ontovec.graph import (
    EntityRecord,
    RelationRecord,
    build_graph,
    read_triples_tsv,
    triples_as_sets,
)


def test_minimal_graph():
    g = build_graph(["A", "B"], ["is_a"], [("A", "is_a", "B")])
    assert g.num_entities == 2
    assert g.num_relations == 1
    assert g.num_triples == 1
    assert g.triples.tolist() == [[0, 0, 1]]


def test_duplicate_triples_collapse():
    g = build_graph(["A", "B"], ["is_a"], [("A", "is_a", "B"), ("A", "is_a", "B")])
    assert g.num_triples == 1


def test_unknown_iri_rejected():
    with pytest.raises(UnknownIri):
        build_graph(["A", "B"], ["is_a"], [("A", "is_a", "C")])
    with pytest.raises(UnknownIri):
        build_graph(["A", "B"], ["is_a"], [("A", "part_of", "B")])


def test_duplicate_entity_rejected():
    with pytest.raises(DuplicateEntity):
        build_graph(["A", "A"], ["is_a"], [])
    with pytest.raises(DuplicateEntity):
        build_graph(["A"], ["is_a", "is_a"], [])


def test_records_preserved():
    rec = EntityRecord(iri="GO:1", label="one", obsolete=True, namespace="bp")
    g = build_graph([rec, "GO:2"], [RelationRecord(iri="is_a")], [])
    assert g.entities[0] == rec
    assert g.entities[1].label == ""


def test_lookup_both_directions():
    g = build_graph(["GO:0008150", "GO:0000001"], ["is_a"], [])
    assert g.lookup(0).iri == "GO:0008150"
    assert g.lookup("GO:0008150").iri == "GO:0008150"
    assert g.entity_index("GO:0000001") == 1
    with pytest.raises(NotFound):
        g.lookup("GO:9999999")
    with pytest.raises(NotFound):
        g.lookup(5)
    with pytest.raises(NotFound):
        g.relation_index("part_of")


@given(
    st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=60, unique=True)
)
def test_index_iri_bijection(ids):
    iris = [f"X:{i}" for i in ids]
    g = build_graph(iris, ["r"], [])
    for i, iri in enumerate(iris):
        assert g.entity_index(iri) == i
        assert g.lookup(i).iri == iri


def test_adjacency_matches_triples():
    g = build_graph(
        ["A", "B", "C"],
        ["is_a", "part_of"],
        [("A", "is_a", "B"), ("A", "part_of", "C"), ("B", "is_a", "C")],
    )
    flat = sum(len(adj) for adj in g.out_adjacency)
    assert flat == g.num_triples
    rebuilt = {
        (h, int(r), int(t))
        for h, adj in enumerate(g.out_adjacency)
        for r, t in adj
    }
    assert rebuilt == {tuple(int(x) for x in row) for row in g.triples}


def test_permutation_preserves_triple_multiset():
    ents = ["A", "B", "C", "D"]
    trips = [("A", "r", "B"), ("C", "r", "D"), ("B", "s", "C")]
    g1 = build_graph(ents, ["r", "s"], trips)
    g2 = build_graph(ents[::-1], ["s", "r"], trips[::-1])
    assert sorted(g1.triple_iris()) == sorted(g2.triple_iris())


def test_triples_dtype_and_shape():
    g = build_graph(["A"], ["r"], [])
    assert g.triples.shape == (0, 3)
    assert g.triples.dtype == np.int64


def test_read_triples_tsv():
    text = "# comment\nA\tis_a\tB\n\nB\tpart_of\tC\n"
    g = read_triples_tsv(text)
    assert g.entity_iris() == ["A", "B", "C"]
    assert [r.iri for r in g.relations] == ["is_a", "part_of"]
    assert g.num_triples == 2


def test_read_triples_tsv_malformed():
    with pytest.raises(MalformedTriple):
        read_triples_tsv("A\tis_a\n")
    with pytest.raises(MalformedTriple):
        read_triples_tsv("A\t\tB\n")


def test_triples_as_sets():
    g = build_graph(
        ["A", "B", "C"], ["r"], [("A", "r", "C"), ("B", "r", "C")]
    )
    heads_by_rt, tails_by_hr = triples_as_sets(g)
    assert heads_by_rt[(0, 2)] == {0, 1}
    assert tails_by_hr[(0, 0)] == {2}
