"""REST service over the vector store.

Endpoints under /api/v1 cover catalog listing, single-vector retrieval,
cosine similarity, top-k closest concepts, and raw vectors.json
download, plus /health.  Every response body echoes the resolved
version tag, and each request resolves "latest" exactly once, so a
version published mid-request never mixes into its results.

Model tables are loaded lazily per (kg, version, model) and kept in a
small LRU cache.  When a built frontend bundle is present it is served
at the site root.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    AmbiguousLabel,
    CorruptStore,
    NotFound,
    StoreError,
    ZeroVector,
)
from .logutil import log_event
from .query import ConceptIndex, cosine, top_k
from .store import Labels, VectorStore, VectorTable, VersionManifest

MAX_K = 100
DEFAULT_CACHE_SIZE = 6


class BadRequest(Exception):
    pass


@dataclass(frozen=True)
class _Entry:
    manifest: VersionManifest
    labels: Labels
    table: VectorTable
    index: ConceptIndex


class _TableCache:
    """LRU over loaded (kg, version, model) tables; thread-safe."""

    def __init__(self, store: VectorStore, capacity: int):
        self.store = store
        self.capacity = capacity
        self._lock = threading.Lock()
        self._entries: OrderedDict[tuple[str, str, str], _Entry] = OrderedDict()

    def get(self, kg: str, version: str, model: str) -> _Entry:
        # Resolve "latest" outside the cache so keys are concrete tags.
        manifest = self.store.resolve_version(kg, version)
        key = (kg, manifest.version_tag, model)
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                return self._entries[key]
        manifest, labels, table = self.store.load_table(
            kg, manifest.version_tag, model
        )
        entry = _Entry(
            manifest=manifest,
            labels=labels,
            table=table,
            index=ConceptIndex(table.iris, labels),
        )
        with self._lock:
            self._entries[key] = entry
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        return entry


def _error_body(code: str, message: str, **extra) -> dict:
    return {"code": code, "message": message, **extra}


def create_app(
    store_path: str | os.PathLike,
    frontend_dir: str | os.PathLike | None = None,
    cache_size: int = DEFAULT_CACHE_SIZE,
    clock=time.time,
) -> FastAPI:
    store = VectorStore(store_path)
    cache = _TableCache(store, cache_size)
    started = clock()
    app = FastAPI(title="ontovec", docs_url=None, redoc_url=None)

    @app.exception_handler(AmbiguousLabel)
    async def _ambiguous(request: Request, exc: AmbiguousLabel):
        return JSONResponse(
            status_code=409,
            content=_error_body(
                "ambiguous_label",
                str(exc),
                label=exc.label,
                candidates=list(exc.candidates),
            ),
        )

    @app.exception_handler(NotFound)
    async def _not_found(request: Request, exc: NotFound):
        return JSONResponse(status_code=404, content=_error_body("not_found", str(exc)))

    @app.exception_handler(BadRequest)
    async def _bad_request(request: Request, exc: BadRequest):
        return JSONResponse(status_code=400, content=_error_body("bad_request", str(exc)))

    @app.exception_handler(ZeroVector)
    async def _zero_vector(request: Request, exc: ZeroVector):
        log_event("zero_vector", level=logging.ERROR, path=request.url.path, error=exc)
        return JSONResponse(status_code=500, content=_error_body("zero_vector", str(exc)))

    @app.exception_handler(CorruptStore)
    async def _corrupt(request: Request, exc: CorruptStore):
        log_event("corrupt_store", level=logging.ERROR, path=request.url.path, error=exc)
        return JSONResponse(
            status_code=500, content=_error_body("corrupt_store", str(exc))
        )

    @app.get("/api/v1/catalog")
    def catalog():
        kgs = []
        for kg in store.list_kgs():
            manifests = store.list_versions(kg)
            if not manifests:
                continue
            latest = store.latest_version(kg)
            kgs.append(
                {
                    "name": kg,
                    "versions": [m.version_tag for m in manifests],
                    "latest": latest.version_tag,
                    "models": list(latest.models),
                }
            )
        return {"kgs": kgs}

    @app.get("/api/v1/vector/{kg}/{model}/{concept}")
    def vector(kg: str, model: str, concept: str, version: str = "latest"):
        entry = cache.get(kg, version, model)
        resolved = entry.index.resolve(concept)
        row = entry.table.row(resolved.iri)
        return {
            "kg": kg,
            "version": entry.manifest.version_tag,
            "model": model,
            "iri": resolved.iri,
            "label": entry.labels.labels.get(resolved.iri, ""),
            "vector": [float(x) for x in row],
        }

    @app.get("/api/v1/similarity/{kg}/{model}")
    def similarity(kg: str, model: str, a: str, b: str, version: str = "latest"):
        entry = cache.get(kg, version, model)
        iri_a = entry.index.resolve(a).iri
        iri_b = entry.index.resolve(b).iri
        score = cosine(entry.table.row(iri_a), entry.table.row(iri_b))
        return {
            "kg": kg,
            "version": entry.manifest.version_tag,
            "model": model,
            "a": iri_a,
            "b": iri_b,
            "score": score,
        }

    @app.get("/api/v1/closest/{kg}/{model}")
    def closest(
        kg: str,
        model: str,
        q: str,
        k: int = 10,
        version: str = "latest",
        namespace: str | None = None,
    ):
        if not 1 <= k <= MAX_K:
            raise BadRequest(f"k must be between 1 and {MAX_K}")
        entry = cache.get(kg, version, model)
        iri = entry.index.resolve(q).iri
        rows = top_k(entry.table, entry.labels, iri, k=k, namespace=namespace)
        return {
            "kg": kg,
            "version": entry.manifest.version_tag,
            "model": model,
            "query": iri,
            "k": k,
            "rows": [
                {"iri": r.iri, "label": r.label, "score": r.score, "url": r.url}
                for r in rows
            ],
        }

    @app.api_route("/api/v1/download/{kg}/{model}/{version}", methods=["GET", "HEAD"])
    def download(kg: str, model: str, version: str):
        manifest = store.resolve_version(kg, version)
        path = store.vectors_path(kg, manifest.version_tag, model)
        filename = f"{kg}-{manifest.version_tag}-{model}.json"
        return FileResponse(
            path, media_type="application/json", filename=filename
        )

    @app.get("/health")
    def health():
        status = "ok"
        loaded = {}
        try:
            for kg in store.list_kgs():
                loaded[kg] = store.latest_version(kg).version_tag
        except StoreError:
            status = "degraded"
        return {
            "status": status,
            "loaded_versions": loaded,
            "uptime": clock() - started,
        }

    if frontend_dir is None:
        default_dist = os.path.join("frontend", "dist")
        frontend_dir = default_dist if os.path.isdir(default_dist) else None
    if frontend_dir is not None and os.path.isdir(frontend_dir):
        app.mount("/", StaticFiles(directory=os.fspath(frontend_dir), html=True))

    return app
