"""Concept lookup and similarity queries over a loaded version.

Queries may name a concept by exact IRI, by label, or by alternate id.
Label and alt-id matching is case-insensitive with whitespace collapsed;
an exact IRI hit always wins, and a label that maps to several concepts
is reported as ambiguous rather than silently picking one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousLabel, NotFound, ZeroVector
from .store import Labels, VectorTable

PURL_PREFIX = "http://purl.obolibrary.org/obo/"

_WS_RE = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs."""
    return _WS_RE.sub(" ", text.strip()).lower()


def concept_url(iri: str) -> str:
    """OBO PURL for a CURIE-style IRI (``GO:0008150`` style)."""
    return PURL_PREFIX + iri.replace(":", "_")


@dataclass(frozen=True)
class Resolution:
    iri: str
    matched_by: str  # "iri" | "label" | "alt_id"


class ConceptIndex:
    """Maps user-facing names onto the IRIs of one published version."""

    def __init__(self, iris, labels: Labels):
        self._iris = set(iris)
        self._by_label: dict[str, list[str]] = {}
        for iri, label in labels.labels.items():
            if iri not in self._iris or not label:
                continue
            self._by_label.setdefault(normalize(label), []).append(iri)
        self._by_alt: dict[str, list[str]] = {}
        for alt, primary in labels.alt_ids.items():
            if primary not in self._iris:
                continue
            self._by_alt.setdefault(normalize(alt), []).append(primary)
        self.namespaces = dict(labels.namespaces)

    def resolve(self, query: str) -> Resolution:
        """Find the concept a query names.

        Precedence: exact IRI (case-sensitive), then normalized label,
        then normalized alternate id.  Raises AmbiguousLabel with the
        sorted candidate IRIs when a name maps to several concepts, and
        NotFound when it maps to none.
        """
        if query in self._iris:
            return Resolution(iri=query, matched_by="iri")
        key = normalize(query)
        for table, matched_by in ((self._by_label, "label"), (self._by_alt, "alt_id")):
            hits = table.get(key, [])
            if len(hits) == 1:
                return Resolution(iri=hits[0], matched_by=matched_by)
            if len(hits) > 1:
                raise AmbiguousLabel(query, sorted(set(hits)))
        raise NotFound(f"no concept matches {query!r}")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding spill.

    Equal inputs return exactly 1.0 rather than a value a few ulps off.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    if np.array_equal(a, b):
        return 1.0
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class Neighbor:
    iri: str
    label: str
    score: float
    url: str


def similarity(table: VectorTable, iri_a: str, iri_b: str) -> float:
    return cosine(table.row(iri_a), table.row(iri_b))


def top_k(
    table: VectorTable,
    labels: Labels,
    iri: str,
    k: int = 10,
    namespace: str | None = None,
) -> list[Neighbor]:
    """The k concepts most cosine-similar to ``iri``, best first.

    The query concept itself is excluded.  Ties are broken by IRI in
    ascending order.  With ``namespace`` set, only concepts annotated
    with that namespace are considered.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    query_vec = table.row(iri)
    qn = float(np.linalg.norm(query_vec))
    if qn == 0.0:
        raise ZeroVector(f"stored vector for {iri} is all zeros")

    keep = np.ones(len(table.iris), dtype=bool)
    keep[table.index_of(iri)] = False
    if namespace is not None:
        ns = labels.namespaces
        keep &= np.array([ns.get(c) == namespace for c in table.iris], dtype=bool)
    candidates = np.flatnonzero(keep)
    if candidates.size == 0:
        return []

    rows = table.matrix[candidates]
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        bad = table.iris[candidates[int(np.argmin(norms))]]
        raise ZeroVector(f"stored vector for {bad} is all zeros")
    scores = np.clip(rows @ query_vec / (norms * qn), -1.0, 1.0)

    # iris are stored sorted, so candidate index order is IRI order and
    # a stable sort on descending score breaks ties by ascending IRI.
    order = np.argsort(-scores, kind="stable")[:k]
    out = []
    for pos in order:
        ciri = table.iris[candidates[pos]]
        out.append(
            Neighbor(
                iri=ciri,
                label=labels.labels.get(ciri, ""),
                score=float(scores[pos]),
                url=concept_url(ciri),
            )
        )
    return out
