"""Release polling, change detection, and the retraining pipeline.

Sources are HTTP(S) URLs or local file paths.  A change is detected by
comparing the SHA-256 of the fetched bytes against the most recently
published manifest for that knowledge graph; HTTP metadata is never
trusted.  On change, every configured model is retrained and the whole
version is published atomically, so a failure in any model publishes
nothing.

Time, network, and sleeping are injectable so the loop can be driven by
a fake clock in tests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from .errors import FetchFailed, InvalidConfig
from .graph import read_triples_tsv
from .logutil import log_event
from .models import ALL_KINDS, ModelArtifact, ModelKind
from .obo import parse_obo, to_graph
from .prov import training_prov
from .rdf2vec import SkipGramConfig, WalkConfig, rdf2vec_embed
from .store import Labels, VectorStore, VersionManifest, sanitize_version_tag
from .training import TrainConfig, train

FETCH_ATTEMPTS = 3
MIN_POLL_INTERVAL = 60.0


@dataclass(frozen=True)
class SourceConfig:
    """One watched ontology release URL (or local file)."""

    kg_name: str
    url: str
    poll_interval: float = 86400.0
    models: tuple[ModelKind, ...] = ALL_KINDS
    format: str = "obo"
    train_overrides: dict = field(default_factory=dict)
    walk_overrides: dict = field(default_factory=dict)
    sg_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.kg_name:
            raise InvalidConfig("kg_name must be non-empty")
        if self.poll_interval < MIN_POLL_INTERVAL:
            raise InvalidConfig(
                f"poll_interval must be at least {MIN_POLL_INTERVAL:.0f}s"
            )
        if self.format not in ("obo", "tsv"):
            raise InvalidConfig(f"unknown source format {self.format!r}")
        if not self.models:
            raise InvalidConfig("at least one model kind is required")
        object.__setattr__(
            self, "models", tuple(ModelKind(m) for m in self.models)
        )

    def train_config(self, seed_override: Optional[int] = None) -> TrainConfig:
        overrides = dict(self.train_overrides)
        if seed_override is not None:
            overrides["seed"] = seed_override
        return TrainConfig(**overrides)

    def walk_config(self, seed_override: Optional[int] = None) -> WalkConfig:
        overrides = dict(self.walk_overrides)
        if seed_override is not None:
            overrides["seed"] = seed_override
        return WalkConfig(**overrides)

    def sg_config(self, seed_override: Optional[int] = None) -> SkipGramConfig:
        overrides = dict(self.sg_overrides)
        if seed_override is not None:
            overrides["seed"] = seed_override
        return SkipGramConfig(**overrides)


@dataclass(frozen=True)
class ServiceConfig:
    """Top-level config: watched sources plus store and API settings."""

    sources: tuple[SourceConfig, ...]
    store_path: str = "store"
    api_host: str = "127.0.0.1"
    api_port: int = 8000

    def __post_init__(self):
        names = [s.kg_name for s in self.sources]
        if len(set(names)) != len(names):
            raise InvalidConfig("kg_name values must be unique across sources")

    def source(self, kg_name: str) -> SourceConfig:
        for src in self.sources:
            if src.kg_name == kg_name:
                return src
        raise InvalidConfig(f"no configured source named {kg_name!r}")


def load_config(path: str) -> ServiceConfig:
    """Read the JSON config file; see ServiceConfig/SourceConfig fields."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    try:
        sources = tuple(
            SourceConfig(
                kg_name=entry["kg_name"],
                url=entry["url"],
                poll_interval=float(entry.get("poll_interval", 86400.0)),
                models=tuple(entry.get("models", [k.value for k in ALL_KINDS])),
                format=entry.get("format", "obo"),
                train_overrides=dict(entry.get("train", {})),
                walk_overrides=dict(entry.get("walks", {})),
                sg_overrides=dict(entry.get("skipgram", {})),
            )
            for entry in raw.get("sources", [])
        )
        api = raw.get("api", {})
        return ServiceConfig(
            sources=sources,
            store_path=raw.get("store_path", "store"),
            api_host=api.get("host", "127.0.0.1"),
            api_port=int(api.get("port", 8000)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad config {path}: {exc}") from exc


def _default_transport(url: str) -> bytes:
    import requests

    response = requests.get(url, timeout=60)
    response.raise_for_status()
    return response.content


def fetch(
    source: SourceConfig,
    transport: Optional[Callable[[str], bytes]] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[bytes, str]:
    """Retrieve the source bytes and their locally computed SHA-256.

    Three attempts with 1s then 2s backoff; raises FetchFailed after the
    last one.  Local paths go through the same retry discipline.
    """
    is_remote = source.url.startswith(("http://", "https://"))
    if is_remote and transport is None:
        transport = _default_transport
    last_error: Exception | None = None
    for attempt in range(FETCH_ATTEMPTS):
        try:
            if is_remote:
                data = transport(source.url)
            else:
                with open(source.url, "rb") as fh:
                    data = fh.read()
            return data, hashlib.sha256(data).hexdigest()
        except Exception as exc:
            last_error = exc
            log_event(
                "fetch_retry",
                level=logging.WARNING,
                kg=source.kg_name,
                attempt=attempt + 1,
                error=exc,
            )
            if attempt < FETCH_ATTEMPTS - 1:
                sleep(float(2**attempt))
    raise FetchFailed(
        f"{source.url} failed after {FETCH_ATTEMPTS} attempts: {last_error}"
    ) from last_error


@dataclass(frozen=True)
class UpdateCheck:
    changed: bool
    data: bytes
    sha256: str


def check_for_update(
    source: SourceConfig,
    store: VectorStore,
    transport: Optional[Callable[[str], bytes]] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> UpdateCheck:
    """Fetch and compare against the latest published checksum."""
    data, sha = fetch(source, transport=transport, sleep=sleep)
    manifests = store.read_manifest(source.kg_name)
    if manifests:
        latest = store.latest_version(source.kg_name)
        if latest.sha256 == sha:
            return UpdateCheck(changed=False, data=data, sha256=sha)
    return UpdateCheck(changed=True, data=data, sha256=sha)


def _parse_source(source: SourceConfig, data: bytes):
    """Decode bytes into (graph, labels, version_hint)."""
    text = data.decode("utf-8")
    if source.format == "obo":
        doc = parse_obo(text)
        graph, report = to_graph(doc, include_obsolete=False)
        kept = {rec.iri for rec in graph.entities}
        labels = Labels(
            labels={rec.iri: rec.label for rec in graph.entities if rec.label},
            alt_ids={
                alt: term.id
                for term in doc.terms
                if term.id in kept and not term.is_obsolete
                for alt in term.alt_ids
            },
            namespaces={
                rec.iri: rec.namespace for rec in graph.entities if rec.namespace
            },
        )
        log_event(
            "ingest",
            kg=source.kg_name,
            terms=report.terms,
            obsolete=report.obsolete,
            triples=report.triples,
            dropped_edges=report.dropped_edges,
        )
        return graph, labels, doc.data_version
    graph = read_triples_tsv(text)
    return graph, Labels(), ""


def _pick_version_tag(store: VectorStore, kg: str, hint: str, sha256: str) -> str:
    """Data-version header when present, else the checksum prefix.

    A tag collision with different bytes (a republished data-version)
    gets a checksum suffix so each distinct checksum publishes once.
    """
    tag = sanitize_version_tag(hint) if hint.strip() else f"sha-{sha256[:12]}"
    existing = {m.version_tag for m in store.read_manifest(kg)}
    if tag in existing:
        tag = f"{tag}-{sha256[:8]}"
    return tag


def run_pipeline(
    source: SourceConfig,
    data: bytes,
    sha256: str,
    store: VectorStore,
    wall_clock: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
    version_override: Optional[str] = None,
    models_override: Optional[tuple[ModelKind, ...]] = None,
    seed_override: Optional[int] = None,
) -> VersionManifest:
    """Parse, train every configured model, and publish one version.

    All-or-nothing: any parse or training failure propagates before the
    store is touched, and the store publish itself is atomic.
    """
    retrieved_at = wall_clock()
    graph, labels, version_hint = _parse_source(source, data)
    kinds = models_override if models_override is not None else source.models
    if version_override:
        tag = sanitize_version_tag(version_override)
    else:
        tag = _pick_version_tag(store, source.kg_name, version_hint, sha256)

    artifacts: dict[ModelKind, ModelArtifact] = {}
    reports: dict[ModelKind, dict] = {}
    runs = {}
    for kind in kinds:
        started = wall_clock()
        if kind is ModelKind.RDF2VEC:
            walk_cfg = source.walk_config(seed_override)
            sg_cfg = source.sg_config(seed_override)
            artifacts[kind] = rdf2vec_embed(graph, walk_cfg, sg_cfg)
            hyper = {
                "walks_per_entity": walk_cfg.walks_per_entity,
                "depth": walk_cfg.depth,
                "dimension": sg_cfg.dimension,
                "window": sg_cfg.window,
                "negatives": sg_cfg.negatives,
                "epochs": sg_cfg.epochs,
                "seed": sg_cfg.seed,
            }
        else:
            train_cfg = source.train_config(seed_override)
            artifact, report = train(graph, kind, train_cfg)
            artifacts[kind] = artifact
            reports[kind] = report.to_dict()
            hyper = {
                "dimension": train_cfg.dimension,
                "epochs": train_cfg.epochs,
                "batch_size": train_cfg.batch_size,
                "margin": train_cfg.margin,
                "learning_rate": train_cfg.learning_rate,
                "optimizer": train_cfg.optimizer.value,
                "seed": train_cfg.seed,
            }
        runs[kind] = {
            "model": kind.value,
            "entity_id": f"embeddings/{source.kg_name}/{tag}/{kind.value}",
            "activity_id": f"training/{source.kg_name}/{tag}/{kind.value}",
            "started_at": started.astimezone(timezone.utc).isoformat(),
            "ended_at": wall_clock().astimezone(timezone.utc).isoformat(),
            "hyperparameters": hyper,
        }
        log_event("trained", kg=source.kg_name, version=tag, model=kind.value)

    ontology_id = f"ontology/{source.kg_name}/{tag}"
    provs = {
        kind: training_prov(ontology_id, sha256, source.url, [run])
        for kind, run in runs.items()
    }
    manifest = VersionManifest(
        kg_name=source.kg_name,
        version_tag=tag,
        source_url=source.url,
        sha256=sha256,
        retrieved_at=retrieved_at,
        models=tuple(kind.value for kind in kinds),
    )
    entity_iris = [rec.iri for rec in graph.entities]
    store.save_version(manifest, artifacts, entity_iris, labels, provs, reports)
    log_event(
        "published",
        kg=source.kg_name,
        version=tag,
        models=",".join(m.value for m in kinds),
        sha256=sha256[:12],
    )
    return manifest


class Watcher:
    """Schedules per-source checks; `tick` is the testable unit."""

    def __init__(
        self,
        config: ServiceConfig,
        store: Optional[VectorStore] = None,
        transport: Optional[Callable[[str], bytes]] = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.time,
        wall_clock: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
    ):
        self.config = config
        self.store = store if store is not None else VectorStore(config.store_path)
        self.transport = transport
        self.sleep = sleep
        self.clock = clock
        self.wall_clock = wall_clock
        self._next_due = {src.kg_name: 0.0 for src in config.sources}
        self.fetch_count = 0

    def poll_source(self, source: SourceConfig) -> Optional[VersionManifest]:
        """One check of one source; publishes when the checksum changed."""
        self.fetch_count += 1
        update = check_for_update(
            source, self.store, transport=self.transport, sleep=self.sleep
        )
        if not update.changed:
            log_event("unchanged", kg=source.kg_name, sha256=update.sha256[:12])
            return None
        return run_pipeline(
            source,
            update.data,
            update.sha256,
            self.store,
            wall_clock=self.wall_clock,
        )

    def tick(self, now: Optional[float] = None) -> list[VersionManifest]:
        """Poll every source that is due at `now`; never raises per-source."""
        if now is None:
            now = self.clock()
        published = []
        for source in self.config.sources:
            if now < self._next_due[source.kg_name]:
                continue
            self._next_due[source.kg_name] = now + source.poll_interval
            try:
                manifest = self.poll_source(source)
                if manifest is not None:
                    published.append(manifest)
            except Exception as exc:
                log_event(
                    "source_failed",
                    level=logging.ERROR,
                    kg=source.kg_name,
                    error=exc,
                )
        return published

    def seconds_until_due(self, now: float) -> float:
        return max(0.0, min(self._next_due.values()) - now)

    def run_once(self) -> list[VersionManifest]:
        """Immediate single cycle over all sources (manual trigger)."""
        for name in self._next_due:
            self._next_due[name] = 0.0
        return self.tick(self.clock())

    def run_forever(self, stop: Optional[Callable[[], bool]] = None) -> None:
        while stop is None or not stop():
            self.tick(self.clock())
            wait = self.seconds_until_due(self.clock())
            if wait > 0:
                self.sleep(min(wait, 60.0))
