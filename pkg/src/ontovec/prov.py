"""Provenance records for published embeddings.

Each training run is an activity that used exactly one ontology entity
and generated exactly one embedding entity; hyperparameters ride along
as activity attributes.  Serialization follows the PROV-JSON layout of
entity / activity / used / wasGeneratedBy sections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import InvalidProv

ONTOLOGY_TYPE = "ontology"
EMBEDDING_TYPE = "embedding"


@dataclass(frozen=True)
class ProvEntity:
    id: str
    type: str
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ProvActivity:
    id: str
    started_at: str
    ended_at: str
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ProvRecord:
    entities: tuple[ProvEntity, ...]
    activities: tuple[ProvActivity, ...]
    #: (activity_id, entity_id) pairs
    used: tuple[tuple[str, str], ...]
    #: (entity_id, activity_id) pairs
    generated: tuple[tuple[str, str], ...]

    def __post_init__(self):
        by_id = {e.id: e for e in self.entities}
        act_ids = {a.id for a in self.activities}
        if len(by_id) != len(self.entities) or len(act_ids) != len(self.activities):
            raise InvalidProv("duplicate entity or activity ids")
        for aid, eid in self.used:
            if aid not in act_ids or eid not in by_id:
                raise InvalidProv(f"dangling used link ({aid}, {eid})")
            if by_id[eid].type != ONTOLOGY_TYPE:
                raise InvalidProv(f"activity {aid} uses non-ontology entity {eid}")
        for eid, aid in self.generated:
            if aid not in act_ids or eid not in by_id:
                raise InvalidProv(f"dangling generation link ({eid}, {aid})")
            if by_id[eid].type != EMBEDDING_TYPE:
                raise InvalidProv(f"generated entity {eid} is not an embedding")
        used_counts: dict[str, int] = {a: 0 for a in act_ids}
        for aid, _ in self.used:
            used_counts[aid] += 1
        for aid, count in used_counts.items():
            if count != 1:
                raise InvalidProv(f"activity {aid} must use exactly one ontology entity")
        gen_counts: dict[str, int] = {
            e.id: 0 for e in self.entities if e.type == EMBEDDING_TYPE
        }
        for eid, _ in self.generated:
            gen_counts[eid] += 1
        for eid, count in gen_counts.items():
            if count != 1:
                raise InvalidProv(f"embedding {eid} must have exactly one generating activity")


def write_prov(record: ProvRecord) -> dict:
    """PROV-JSON-shaped document for the record."""
    doc: dict[str, dict] = {"entity": {}, "activity": {}, "used": {}, "wasGeneratedBy": {}}
    for ent in record.entities:
        doc["entity"][ent.id] = {"prov:type": ent.type, **ent.attributes}
    for act in record.activities:
        doc["activity"][act.id] = {
            "prov:startTime": act.started_at,
            "prov:endTime": act.ended_at,
            **act.attributes,
        }
    for i, (aid, eid) in enumerate(record.used, start=1):
        doc["used"][f"_:u{i}"] = {"prov:activity": aid, "prov:entity": eid}
    for i, (eid, aid) in enumerate(record.generated, start=1):
        doc["wasGeneratedBy"][f"_:g{i}"] = {"prov:entity": eid, "prov:activity": aid}
    return doc


def training_prov(
    ontology_id: str,
    ontology_sha256: str,
    source_url: str,
    runs: list[dict],
) -> ProvRecord:
    """Record for one ontology entity plus one activity+embedding per run.

    Each run dict needs: ``model`` (kind name), ``entity_id``,
    ``activity_id``, ``started_at``, ``ended_at``, ``hyperparameters``
    (flat dict), and optionally ``sha256`` of the embedding file.
    """
    entities = [
        ProvEntity(
            id=ontology_id,
            type=ONTOLOGY_TYPE,
            attributes={"sha256": ontology_sha256, "source": source_url},
        )
    ]
    activities = []
    used = []
    generated = []
    for run in runs:
        attrs: dict[str, Any] = {"model": run["model"]}
        attrs.update(run.get("hyperparameters", {}))
        ent_attrs = {"model": run["model"]}
        if "sha256" in run:
            ent_attrs["sha256"] = run["sha256"]
        entities.append(ProvEntity(id=run["entity_id"], type=EMBEDDING_TYPE, attributes=ent_attrs))
        activities.append(
            ProvActivity(
                id=run["activity_id"],
                started_at=run["started_at"],
                ended_at=run["ended_at"],
                attributes=attrs,
            )
        )
        used.append((run["activity_id"], ontology_id))
        generated.append((run["entity_id"], run["activity_id"]))
    return ProvRecord(
        entities=tuple(entities),
        activities=tuple(activities),
        used=tuple(used),
        generated=tuple(generated),
    )
