"""Exception taxonomy shared across the package."""


class OntovecError(Exception):
    """Base class for all package errors."""


# graph construction / lookup

class NotFound(OntovecError):
    """An entity, relation, concept, store object, or version does not exist."""


class UnknownIri(OntovecError):
    """A triple references an IRI absent from the declared entity/relation lists."""


class DuplicateEntity(OntovecError):
    """The same entity IRI was declared twice."""


class MalformedTriple(OntovecError):
    """A triple line does not have three tab-separated columns."""


# OBO parsing

class MalformedStanza(OntovecError):
    """A [Term] stanza is missing its id tag."""


class MalformedTagLine(OntovecError):
    """A stanza line has no `tag: value` separator."""


# models / training

class EmptyGraph(OntovecError):
    """The graph has no entities or no triples, so nothing can be trained."""


class SingleEntityGraph(OntovecError):
    """Negative sampling cannot corrupt a triple in a one-entity graph."""


class NonFiniteLoss(OntovecError):
    """Training produced NaN/inf loss; aborted rather than clamped."""


class EmptyCorpus(OntovecError):
    """No walk sentences were produced, so no vocabulary can be built."""


# store

class StoreError(OntovecError):
    """Base class for persistence failures."""


class VersionExists(StoreError):
    """A version with this tag is already published for this graph."""


class CorruptStore(StoreError):
    """Stored bytes fail checksum or structural validation on read-back."""


class DimensionMismatch(StoreError):
    """A vector fails export validation (wrong length or non-finite values)."""


class InvalidProv(StoreError):
    """A provenance record violates its cardinality invariants."""


# watcher

class FetchFailed(OntovecError):
    """A source could not be retrieved after bounded retries."""


class InvalidConfig(OntovecError):
    """A watcher/service configuration file is structurally invalid."""


# query

class ZeroVector(OntovecError):
    """Cosine similarity is undefined against an all-zero vector."""


class AmbiguousLabel(OntovecError):
    """A normalized label resolves to more than one concept."""

    def __init__(self, label: str, candidates: list[str]):
        super().__init__(f"label {label!r} is ambiguous: {', '.join(candidates)}")
        self.label = label
        self.candidates = candidates
