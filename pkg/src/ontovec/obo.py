"""OBO 1.4 flat-file ingestion.

Parses the line-oriented ``[Term]`` stanza format that GO and HP releases
use, then converts the parsed document into a :class:`KnowledgeGraph` of
class-to-class edges.  Only the tags needed for embedding are recognized;
everything else is ignored.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import MalformedStanza, MalformedTagLine
from .graph import EntityRecord, KnowledgeGraph, build_graph

log = logging.getLogger(__name__)


@dataclass
class TermStanza:
    id: str
    name: str = ""
    namespace: str = ""
    is_a: list[str] = field(default_factory=list)
    relationships: list[tuple[str, str]] = field(default_factory=list)
    is_obsolete: bool = False
    alt_ids: list[str] = field(default_factory=list)


@dataclass
class OntologyDocument:
    ontology_id: str = ""
    data_version: str = ""
    terms: list[TermStanza] = field(default_factory=list)
    #: edges discarded because they sat on an obsolete stanza
    obsolete_edges_dropped: int = 0


@dataclass
class IngestReport:
    terms: int
    obsolete: int
    triples: int
    dropped_edges: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "terms": self.terms,
                "obsolete": self.obsolete,
                "triples": self.triples,
                "dropped_edges": self.dropped_edges,
            }
        )


def _strip_comment(value: str) -> str:
    # OBO allows a trailing `! human readable` comment on value lines
    return value.split("!", 1)[0].strip()


def parse_obo(text: str) -> OntologyDocument:
    """Parse OBO flat-file text into an :class:`OntologyDocument`.

    Recognized term tags: ``id``, ``name``, ``namespace``, ``is_a``,
    ``relationship``, ``is_obsolete``, ``alt_id``.  ``[Typedef]`` stanzas
    and unrecognized tags are skipped.  Edges found on obsolete stanzas
    are dropped and counted.
    """
    doc = OntologyDocument()
    current: TermStanza | None = None
    in_typedef = False
    in_header = True

    def finish(stanza: TermStanza | None) -> None:
        if stanza is None:
            return
        if not stanza.id:
            raise MalformedStanza("[Term] stanza without an id tag")
        if stanza.is_obsolete and (stanza.is_a or stanza.relationships):
            doc.obsolete_edges_dropped += len(stanza.is_a) + len(stanza.relationships)
            stanza.is_a = []
            stanza.relationships = []
        doc.terms.append(stanza)

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line == "[Term]":
            finish(current)
            current = TermStanza(id="")
            in_typedef = False
            in_header = False
            continue
        if line.startswith("[") and line.endswith("]"):
            # some other stanza kind, e.g. [Typedef]
            finish(current)
            current = None
            in_typedef = True
            in_header = False
            continue
        if in_typedef:
            continue
        if ":" not in line:
            raise MalformedTagLine(f"no tag separator in line: {line!r}")
        tag, value = line.split(":", 1)
        tag = tag.strip()
        value = value.strip()
        if current is None:
            if in_header:
                if tag == "ontology":
                    doc.ontology_id = value
                elif tag == "data-version":
                    doc.data_version = value
            continue
        if tag == "id":
            current.id = _strip_comment(value)
        elif tag == "name":
            current.name = value
        elif tag == "namespace":
            current.namespace = _strip_comment(value)
        elif tag == "is_a":
            target = _strip_comment(value)
            if target:
                current.is_a.append(target)
        elif tag == "relationship":
            body = _strip_comment(value)
            parts = body.split()
            if len(parts) >= 2:
                current.relationships.append((parts[0], parts[1]))
        elif tag == "is_obsolete":
            current.is_obsolete = _strip_comment(value).lower() == "true"
        elif tag == "alt_id":
            alt = _strip_comment(value)
            if alt:
                current.alt_ids.append(alt)
        # all other tags ignored

    finish(current)
    if doc.obsolete_edges_dropped:
        log.warning(
            "dropped %d edges found on obsolete stanzas", doc.obsolete_edges_dropped
        )
    return doc


def to_graph(
    doc: OntologyDocument, include_obsolete: bool = False
) -> tuple[KnowledgeGraph, IngestReport]:
    """Convert a parsed document into a graph plus an ingest report.

    One entity per non-obsolete term (obsolete terms join as isolated
    nodes when ``include_obsolete``); one triple per ``is_a`` edge and per
    typed relationship.  Edges pointing at ids absent from the document
    are dropped and counted in the report.
    """
    entities: list[EntityRecord] = []
    known: set[str] = set()
    for term in doc.terms:
        if term.is_obsolete and not include_obsolete:
            continue
        entities.append(
            EntityRecord(
                iri=term.id,
                label=term.name,
                obsolete=term.is_obsolete,
                namespace=term.namespace,
            )
        )
        known.add(term.id)

    relations: dict[str, None] = {"is_a": None}
    triples: list[tuple[str, str, str]] = []
    dropped = 0
    for term in doc.terms:
        if term.id not in known:
            continue
        for target in term.is_a:
            if target in known:
                triples.append((term.id, "is_a", target))
            else:
                dropped += 1
        for rel, target in term.relationships:
            if target in known:
                relations.setdefault(rel)
                triples.append((term.id, rel, target))
            else:
                dropped += 1

    graph = build_graph(entities, list(relations), triples)
    report = IngestReport(
        terms=len(doc.terms),
        obsolete=sum(1 for t in doc.terms if t.is_obsolete),
        triples=graph.num_triples,
        dropped_edges=dropped,
    )
    return graph, report
