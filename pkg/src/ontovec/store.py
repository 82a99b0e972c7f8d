"""Versioned on-disk store for trained embeddings.

Layout under the store root::

    <kg>/manifest.json                      append-only version log
    <kg>/<version>/labels.json              label / alt-id / namespace maps
    <kg>/<version>/checksums.json           sha256 of every published file
    <kg>/<version>/<model>/vectors.json     the embedding table
    <kg>/<version>/<model>/prov.json        provenance record
    <kg>/<version>/<model>/report.json      training report (optional)

Versions are staged in a dot-prefixed sibling directory and published
with a single rename, so readers never observe a half-written version.
The manifest is rewritten through a temp file + replace for the same
reason.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import re
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import (
    CorruptStore,
    DimensionMismatch,
    NotFound,
    VersionExists,
)
from .models import ModelArtifact, ModelKind
from .prov import ProvRecord, write_prov

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")
_VERSION_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.json"
CHECKSUMS_NAME = "checksums.json"
VECTORS_NAME = "vectors.json"
PROV_NAME = "prov.json"
REPORT_NAME = "report.json"


def sanitize_version_tag(raw: str) -> str:
    """Turn a data-version value into a filesystem-safe tag.

    Takes the basename of path-like values (``releases/2024-01-01`` ->
    ``2024-01-01``) and replaces any remaining unsafe characters.
    """
    tag = raw.strip().rstrip("/").rsplit("/", 1)[-1]
    tag = _VERSION_SAFE_RE.sub("_", tag)
    return tag or "unversioned"


def _utc_iso(value) -> str:
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc).isoformat()
    # Validate string timestamps eagerly so the manifest stays orderable.
    datetime.fromisoformat(value)
    return value


@dataclass(frozen=True)
class VersionManifest:
    """One entry in a knowledge graph's version log."""

    kg_name: str
    version_tag: str
    source_url: str
    sha256: str
    retrieved_at: str
    models: tuple[str, ...]

    def __post_init__(self):
        if not _SHA256_RE.match(self.sha256):
            raise ValueError(f"not a sha256 hex digest: {self.sha256!r}")
        object.__setattr__(self, "retrieved_at", _utc_iso(self.retrieved_at))
        object.__setattr__(self, "models", tuple(self.models))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self) | {"models": list(self.models)}

    @classmethod
    def from_dict(cls, data: dict) -> "VersionManifest":
        return cls(
            kg_name=data["kg_name"],
            version_tag=data["version_tag"],
            source_url=data["source_url"],
            sha256=data["sha256"],
            retrieved_at=data["retrieved_at"],
            models=tuple(data["models"]),
        )


@dataclass(frozen=True)
class Labels:
    """Per-version lookup maps keyed by concept IRI."""

    labels: dict[str, str] = field(default_factory=dict)
    alt_ids: dict[str, str] = field(default_factory=dict)
    namespaces: dict[str, str] = field(default_factory=dict)

    def to_payload(self, kg: str, version: str) -> dict:
        return {
            "kg": kg,
            "version": version,
            "labels": self.labels,
            "alt_ids": self.alt_ids,
            "namespaces": self.namespaces,
        }

    @classmethod
    def from_payload(cls, data: dict) -> "Labels":
        return cls(
            labels=dict(data.get("labels", {})),
            alt_ids=dict(data.get("alt_ids", {})),
            namespaces=dict(data.get("namespaces", {})),
        )


def canonical_json(doc) -> str:
    """Stable serialization: sorted keys, no whitespace, repr floats."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def export_vectors_json(
    kg: str,
    version: str,
    kind: ModelKind,
    entity_iris: list[str],
    vectors: np.ndarray,
) -> str:
    """Serialize an embedding table to the interchange JSON format.

    Raises DimensionMismatch when the IRI list and matrix disagree, when
    rows have uneven lengths, or when any value is not finite.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d table, got shape {vectors.shape}")
    if len(entity_iris) != vectors.shape[0]:
        raise DimensionMismatch(
            f"{len(entity_iris)} iris but {vectors.shape[0]} vector rows"
        )
    if not np.all(np.isfinite(vectors)):
        raise DimensionMismatch("embedding table contains non-finite values")
    doc = {
        "kg": kg,
        "version": version,
        "model": kind.value,
        "dimension": int(vectors.shape[1]),
        "vectors": {iri: [float(x) for x in row] for iri, row in zip(entity_iris, vectors)},
    }
    return canonical_json(doc)


def parse_vectors_json(text: str) -> dict:
    """Parse and validate a vectors.json document.

    Returns the parsed dict with an extra ``_matrix`` (n, d) float64
    array and ``_iris`` list ordered to match the matrix rows.
    """
    doc = json.loads(text)
    dim = doc["dimension"]
    iris = sorted(doc["vectors"])
    matrix = np.empty((len(iris), dim), dtype=np.float64)
    for i, iri in enumerate(iris):
        row = doc["vectors"][iri]
        if len(row) != dim:
            raise DimensionMismatch(
                f"vector for {iri} has length {len(row)}, expected {dim}"
            )
        for x in row:
            if not math.isfinite(x):
                raise DimensionMismatch(f"vector for {iri} contains a non-finite value")
        matrix[i] = row
    doc["_iris"] = iris
    doc["_matrix"] = matrix
    return doc


@dataclass(frozen=True)
class VectorTable:
    """In-memory view of one model's published vectors."""

    kind: ModelKind
    dimension: int
    iris: tuple[str, ...]
    matrix: np.ndarray

    def row(self, iri: str) -> np.ndarray:
        return self.matrix[self.index_of(iri)]

    def index_of(self, iri: str) -> int:
        idx = self._index().get(iri)
        if idx is None:
            raise NotFound(f"no vector for {iri}")
        return idx

    def __contains__(self, iri: str) -> bool:
        return iri in self._index()

    def _index(self) -> dict[str, int]:
        cached = getattr(self, "_iri_index", None)
        if cached is None:
            cached = {iri: i for i, iri in enumerate(self.iris)}
            object.__setattr__(self, "_iri_index", cached)
        return cached


@dataclass(frozen=True)
class LoadedVersion:
    manifest: VersionManifest
    labels: Labels
    tables: dict[str, VectorTable]

    def table(self, kind: ModelKind | str) -> VectorTable:
        key = kind.value if isinstance(kind, ModelKind) else str(kind)
        if key not in self.tables:
            raise NotFound(f"model {key} not published for this version")
        return self.tables[key]


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class VectorStore:
    """Filesystem-backed store of published embedding versions."""

    def __init__(self, root: str | os.PathLike):
        self.root = os.fspath(root)
        os.makedirs(self.root, exist_ok=True)

    # -- paths -------------------------------------------------------

    def kg_dir(self, kg: str) -> str:
        return os.path.join(self.root, kg)

    def version_dir(self, kg: str, version: str) -> str:
        return os.path.join(self.kg_dir(kg), version)

    def _manifest_path(self, kg: str) -> str:
        return os.path.join(self.kg_dir(kg), MANIFEST_NAME)

    # -- manifest ----------------------------------------------------

    def read_manifest(self, kg: str) -> list[VersionManifest]:
        path = self._manifest_path(kg)
        if not os.path.exists(path):
            return []
        try:
            with open(path, encoding="utf-8") as fh:
                entries = json.load(fh)
            return [VersionManifest.from_dict(e) for e in entries]
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptStore(f"unreadable manifest for {kg}: {exc}") from exc

    def _append_manifest(self, manifest: VersionManifest) -> None:
        entries = [m.to_dict() for m in self.read_manifest(manifest.kg_name)]
        entries.append(manifest.to_dict())
        path = self._manifest_path(manifest.kg_name)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(entries, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)

    def list_kgs(self) -> list[str]:
        if not os.path.isdir(self.root):
            return []
        return sorted(
            name
            for name in os.listdir(self.root)
            if os.path.exists(os.path.join(self.root, name, MANIFEST_NAME))
        )

    def list_versions(self, kg: str) -> list[VersionManifest]:
        return self.read_manifest(kg)

    def latest_version(self, kg: str) -> VersionManifest:
        entries = self.read_manifest(kg)
        if not entries:
            raise NotFound(f"no published versions for {kg}")
        # Later manifest position wins ties on retrieval time.
        return max(
            enumerate(entries),
            key=lambda pair: (datetime.fromisoformat(pair[1].retrieved_at), pair[0]),
        )[1]

    def resolve_version(self, kg: str, version: str) -> VersionManifest:
        if version == "latest":
            return self.latest_version(kg)
        for entry in self.read_manifest(kg):
            if entry.version_tag == version:
                return entry
        raise NotFound(f"version {version} not published for {kg}")

    # -- publish -----------------------------------------------------

    def save_version(
        self,
        manifest: VersionManifest,
        artifacts: dict[ModelKind, ModelArtifact],
        entity_iris: list[str],
        labels: Labels,
        provs: dict[ModelKind, ProvRecord],
        reports: dict[ModelKind, dict] | None = None,
    ) -> str:
        """Atomically publish one version; returns the version directory.

        Everything is written into a hidden staging directory first and
        renamed into place in one step, then the manifest entry is
        appended.  A failure anywhere leaves no visible version behind.
        """
        kg, version = manifest.kg_name, manifest.version_tag
        expected = {kind.value for kind in artifacts}
        if set(manifest.models) != expected:
            raise ValueError(
                f"manifest lists models {sorted(manifest.models)} "
                f"but artifacts were given for {sorted(expected)}"
            )
        final_dir = self.version_dir(kg, version)
        if os.path.exists(final_dir) or any(
            m.version_tag == version for m in self.read_manifest(kg)
        ):
            raise VersionExists(f"{kg} already has a version {version}")
        os.makedirs(self.kg_dir(kg), exist_ok=True)
        staging = os.path.join(self.kg_dir(kg), f".stage-{version}")
        if os.path.exists(staging):
            shutil.rmtree(staging)
        os.makedirs(staging)
        reports = reports or {}
        try:
            checksums: dict[str, str] = {}

            def put(rel_path: str, text: str) -> None:
                path = os.path.join(staging, rel_path)
                os.makedirs(os.path.dirname(path) or staging, exist_ok=True)
                data = text.encode("utf-8")
                with open(path, "wb") as fh:
                    fh.write(data)
                checksums[rel_path] = _sha256_bytes(data)

            put(LABELS_NAME, canonical_json(labels.to_payload(kg, version)))
            for kind, artifact in artifacts.items():
                if kind not in provs:
                    raise ValueError(f"missing provenance record for {kind.value}")
                text = export_vectors_json(
                    kg, version, kind, entity_iris, artifact.entity_vecs
                )
                put(os.path.join(kind.value, VECTORS_NAME), text)
                put(
                    os.path.join(kind.value, PROV_NAME),
                    canonical_json(write_prov(provs[kind])),
                )
                if kind in reports:
                    put(
                        os.path.join(kind.value, REPORT_NAME),
                        canonical_json(reports[kind]),
                    )
            with open(
                os.path.join(staging, CHECKSUMS_NAME), "w", encoding="utf-8"
            ) as fh:
                json.dump(checksums, fh, indent=2, sort_keys=True)
                fh.write("\n")
            os.rename(staging, final_dir)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        self._append_manifest(manifest)
        return final_dir

    # -- load --------------------------------------------------------

    def _read_verified(self, vdir: str, checksums: dict[str, str], rel_path: str) -> str:
        path = os.path.join(vdir, rel_path)
        if not os.path.exists(path):
            raise CorruptStore(f"missing file {rel_path} in {vdir}")
        with open(path, "rb") as fh:
            data = fh.read()
        want = checksums.get(rel_path)
        if want is None:
            raise CorruptStore(f"{rel_path} has no recorded checksum in {vdir}")
        got = _sha256_bytes(data)
        if got != want:
            raise CorruptStore(
                f"checksum mismatch for {rel_path} in {vdir}: "
                f"recorded {want[:12]}.., found {got[:12]}.."
            )
        return data.decode("utf-8")

    def _version_files(self, manifest: VersionManifest) -> tuple[str, dict, Labels]:
        vdir = self.version_dir(manifest.kg_name, manifest.version_tag)
        if not os.path.isdir(vdir):
            raise CorruptStore(f"manifest lists {manifest.version_tag} but directory is missing")
        try:
            with open(os.path.join(vdir, CHECKSUMS_NAME), encoding="utf-8") as fh:
                checksums = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptStore(f"unreadable checksums in {vdir}: {exc}") from exc
        try:
            labels = Labels.from_payload(
                json.loads(self._read_verified(vdir, checksums, LABELS_NAME))
            )
        except json.JSONDecodeError as exc:
            raise CorruptStore(f"unreadable labels in {vdir}: {exc}") from exc
        return vdir, checksums, labels

    def _load_table(self, vdir: str, checksums: dict, name: str) -> VectorTable:
        rel = os.path.join(name, VECTORS_NAME)
        try:
            doc = parse_vectors_json(self._read_verified(vdir, checksums, rel))
        except (json.JSONDecodeError, KeyError) as exc:
            raise CorruptStore(f"unreadable vectors for {name} in {vdir}: {exc}") from exc
        return VectorTable(
            kind=ModelKind(doc["model"]),
            dimension=int(doc["dimension"]),
            iris=tuple(doc["_iris"]),
            matrix=doc["_matrix"],
        )

    def load_table(
        self, kg: str, version: str, kind: ModelKind | str
    ) -> tuple[VersionManifest, Labels, VectorTable]:
        """Load labels plus one model's table, verifying their checksums."""
        manifest = self.resolve_version(kg, version)
        name = kind.value if isinstance(kind, ModelKind) else str(kind)
        if name not in manifest.models:
            raise NotFound(
                f"model {name} not published for {kg} {manifest.version_tag}"
            )
        vdir, checksums, labels = self._version_files(manifest)
        return manifest, labels, self._load_table(vdir, checksums, name)

    def load_version(self, kg: str, version: str = "latest") -> LoadedVersion:
        manifest = self.resolve_version(kg, version)
        vdir, checksums, labels = self._version_files(manifest)
        tables = {
            name: self._load_table(vdir, checksums, name) for name in manifest.models
        }
        return LoadedVersion(manifest=manifest, labels=labels, tables=tables)

    def vectors_path(self, kg: str, version: str, kind: ModelKind | str) -> str:
        """Path to a published vectors.json, for download endpoints."""
        manifest = self.resolve_version(kg, version)
        name = kind.value if isinstance(kind, ModelKind) else str(kind)
        if name not in manifest.models:
            raise NotFound(f"model {name} not published for {kg} {manifest.version_tag}")
        path = os.path.join(self.version_dir(kg, manifest.version_tag), name, VECTORS_NAME)
        if not os.path.exists(path):
            raise CorruptStore(f"manifest lists {name} but vectors.json is missing")
        return path
