"""In-memory knowledge graph: entity/relation dictionaries, triples, adjacency.

The graph is immutable after construction and shared read-only by the
trainers, the walk generator, and the evaluation code.  Entities and
relations get dense integer indices in first-appearance order so parameter
tables can be plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DuplicateEntity, MalformedTriple, NotFound, UnknownIri


@dataclass(frozen=True)
class EntityRecord:
    iri: str
    label: str = ""
    obsolete: bool = False
    namespace: str = ""


@dataclass(frozen=True)
class RelationRecord:
    iri: str


@dataclass(frozen=True, eq=False)
class KnowledgeGraph:
    entities: tuple[EntityRecord, ...]
    relations: tuple[RelationRecord, ...]
    #: (n, 3) int64 array of (head_index, relation_index, tail_index) rows
    triples: np.ndarray
    #: per-entity (k_i, 2) int64 arrays of (relation_index, tail_index)
    out_adjacency: tuple[np.ndarray, ...]
    _entity_index: dict[str, int] = field(repr=False, default_factory=dict)
    _relation_index: dict[str, int] = field(repr=False, default_factory=dict)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    @property
    def num_triples(self) -> int:
        return int(self.triples.shape[0])

    def entity_index(self, iri: str) -> int:
        try:
            return self._entity_index[iri]
        except KeyError:
            raise NotFound(f"entity {iri!r} not in graph") from None

    def relation_index(self, iri: str) -> int:
        try:
            return self._relation_index[iri]
        except KeyError:
            raise NotFound(f"relation {iri!r} not in graph") from None

    def entity_iris(self) -> list[str]:
        return [e.iri for e in self.entities]

    def lookup(self, iri_or_index: Union[str, int]) -> EntityRecord:
        """Resolve an entity by IRI or dense index."""
        if isinstance(iri_or_index, str):
            return self.entities[self.entity_index(iri_or_index)]
        idx = int(iri_or_index)
        if not 0 <= idx < len(self.entities):
            raise NotFound(f"entity index {idx} out of range")
        return self.entities[idx]

    def triple_iris(self) -> list[tuple[str, str, str]]:
        """Triples spelled out as IRIs, in storage order."""
        return [
            (self.entities[h].iri, self.relations[r].iri, self.entities[t].iri)
            for h, r, t in self.triples
        ]


def _as_entity(e: Union[EntityRecord, str]) -> EntityRecord:
    return e if isinstance(e, EntityRecord) else EntityRecord(iri=e)


def build_graph(
    entities: Iterable[Union[EntityRecord, str]],
    relations: Iterable[Union[RelationRecord, str]],
    triples: Iterable[tuple[str, str, str]],
) -> KnowledgeGraph:
    """Assemble a graph from declared entities/relations and IRI triples.

    Indices follow first-appearance order of the input lists.  Exact
    duplicate triples are collapsed; a triple naming an undeclared IRI
    raises :class:`UnknownIri`.
    """
    ent_records: list[EntityRecord] = []
    ent_index: dict[str, int] = {}
    for e in entities:
        rec = _as_entity(e)
        if not rec.iri:
            raise UnknownIri("entity with empty IRI")
        if rec.iri in ent_index:
            raise DuplicateEntity(f"entity {rec.iri!r} declared twice")
        ent_index[rec.iri] = len(ent_records)
        ent_records.append(rec)

    rel_records: list[RelationRecord] = []
    rel_index: dict[str, int] = {}
    for r in relations:
        rec = r if isinstance(r, RelationRecord) else RelationRecord(iri=r)
        if not rec.iri:
            raise UnknownIri("relation with empty IRI")
        if rec.iri in rel_index:
            raise DuplicateEntity(f"relation {rec.iri!r} declared twice")
        rel_index[rec.iri] = len(rel_records)
        rel_records.append(rec)

    seen: set[tuple[int, int, int]] = set()
    rows: list[tuple[int, int, int]] = []
    for h_iri, r_iri, t_iri in triples:
        if h_iri not in ent_index:
            raise UnknownIri(f"triple head {h_iri!r} not in entity list")
        if r_iri not in rel_index:
            raise UnknownIri(f"triple relation {r_iri!r} not in relation list")
        if t_iri not in ent_index:
            raise UnknownIri(f"triple tail {t_iri!r} not in entity list")
        row = (ent_index[h_iri], rel_index[r_iri], ent_index[t_iri])
        if row in seen:
            continue
        seen.add(row)
        rows.append(row)

    triple_arr = np.asarray(rows, dtype=np.int64).reshape(len(rows), 3)
    adjacency = _build_adjacency(len(ent_records), triple_arr)
    return KnowledgeGraph(
        entities=tuple(ent_records),
        relations=tuple(rel_records),
        triples=triple_arr,
        out_adjacency=adjacency,
        _entity_index=ent_index,
        _relation_index=rel_index,
    )


def _build_adjacency(n_entities: int, triples: np.ndarray) -> tuple[np.ndarray, ...]:
    buckets: list[list[tuple[int, int]]] = [[] for _ in range(n_entities)]
    for h, r, t in triples:
        buckets[int(h)].append((int(r), int(t)))
    return tuple(
        np.asarray(b, dtype=np.int64).reshape(len(b), 2) for b in buckets
    )


def read_triples_tsv(text: str) -> KnowledgeGraph:
    """Build a graph from generic triple TSV.

    Three tab-separated columns ``head<TAB>relation<TAB>tail``; lines that
    are blank or start with ``#`` are ignored.  Entities and relations are
    declared implicitly, indexed in first-appearance order (head before
    tail within a line).
    """
    ent_order: dict[str, None] = {}
    rel_order: dict[str, None] = {}
    triples: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\n\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedTriple(
                f"line {lineno}: expected 3 tab-separated columns, got {len(parts)}"
            )
        h, r, t = (p.strip() for p in parts)
        if not (h and r and t):
            raise MalformedTriple(f"line {lineno}: empty column")
        ent_order.setdefault(h)
        ent_order.setdefault(t)
        rel_order.setdefault(r)
        triples.append((h, r, t))
    return build_graph(list(ent_order), list(rel_order), triples)


def triples_as_sets(graph: KnowledgeGraph) -> tuple[dict, dict]:
    """Known-true lookup tables used by filtered evaluation.

    Returns ``(heads_by_rt, tails_by_hr)`` where ``heads_by_rt[(r, t)]`` is
    the set of head indices observed with that relation/tail.
    """
    heads_by_rt: dict[tuple[int, int], set[int]] = {}
    tails_by_hr: dict[tuple[int, int], set[int]] = {}
    for h, r, t in graph.triples:
        heads_by_rt.setdefault((int(r), int(t)), set()).add(int(h))
        tails_by_hr.setdefault((int(h), int(r)), set()).add(int(t))
    return heads_by_rt, tails_by_hr
