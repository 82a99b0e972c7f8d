"""Shared fixtures: toy graphs, an OBO fixture, and a small trained store."""

import json
import os

import numpy as np
import pytest

from ontovec.graph import EntityRecord, KnowledgeGraph, RelationRecord, build_graph
from ontovec.models import ModelArtifact, ModelConfig, ModelKind
from ontovec.prov import training_prov
from ontovec.store import Labels, VectorStore, VersionManifest
from ontovec.watcher import SourceConfig, run_pipeline

#: acceptance tests append "PASS: ..." lines here; printed in the summary
ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


OBO_FIXTURE = """format-version: 1.2
ontology: go
data-version: releases/2024-06-17
remark: hand-written fixture

[Term]
id: GO:0000001
name: alpha process
namespace: biological_process
def: "the root" [GOC:x]

[Term]
id: GO:0000002
name: beta process
namespace: biological_process
alt_id: GO:7000002
is_a: GO:0000001 ! alpha process

[Term]
id: GO:0000003
name: gamma function
namespace: molecular_function
is_a: GO:0000001
relationship: part_of GO:0000002 ! beta process

[Term]
id: GO:0000004
name: delta process
namespace: biological_process
is_a: GO:0000002
is_a: GO:0000099 ! dangling target, must be dropped

[Typedef]
id: part_of
name: part of

[Term]
id: GO:0000005
name: retired process
is_obsolete: true
is_a: GO:0000001
"""


def make_tree(branching: int = 4, depth: int = 4) -> KnowledgeGraph:
    """Balanced is_a tree: every non-root points at its parent."""
    entities = ["N:0"]
    triples = []
    previous = ["N:0"]
    counter = 1
    for _ in range(depth):
        level = []
        for parent in previous:
            for _ in range(branching):
                child = f"N:{counter}"
                counter += 1
                entities.append(child)
                triples.append((child, "is_a", parent))
                level.append(child)
        previous = level
    return build_graph(entities, ["is_a"], triples)


def make_chain(n: int = 3) -> KnowledgeGraph:
    names = [f"C:{i}" for i in range(n)]
    triples = [(names[i], "next", names[i + 1]) for i in range(n - 1)]
    return build_graph(names, ["next"], triples)


@pytest.fixture
def obo_text():
    return OBO_FIXTURE


@pytest.fixture
def tree_graph():
    return make_tree(branching=2, depth=3)


def write_fixture_store(
    root,
    kg="go",
    version="v1",
    n=20,
    d=8,
    kinds=(ModelKind.DISTMULT,),
    seed=0,
    matrix=None,
    labels=None,
    retrieved_at="2024-01-01T00:00:00+00:00",
):
    """Publish a store of random vectors without running training."""
    rng = np.random.default_rng(seed)
    iris = [f"{kg.upper()}:{i:07d}" for i in range(n)]
    if matrix is None:
        matrix = rng.normal(size=(n, d))
    if labels is None:
        labels = Labels(
            labels={iri: f"concept {i}" for i, iri in enumerate(iris)},
            alt_ids={},
            namespaces={},
        )
    store = VectorStore(root)
    artifacts = {}
    provs = {}
    for kind in kinds:
        artifacts[kind] = ModelArtifact(
            config=ModelConfig(kind=kind, dimension=d), entity_vecs=matrix
        )
        provs[kind] = training_prov(
            f"ontology/{kg}/{version}",
            "0" * 64,
            "file:///fixture",
            [
                {
                    "model": kind.value,
                    "entity_id": f"embeddings/{kg}/{version}/{kind.value}",
                    "activity_id": f"training/{kg}/{version}/{kind.value}",
                    "started_at": retrieved_at,
                    "ended_at": retrieved_at,
                    "hyperparameters": {"dimension": d},
                }
            ],
        )
    manifest = VersionManifest(
        kg_name=kg,
        version_tag=version,
        source_url="file:///fixture",
        sha256="0" * 64,
        retrieved_at=retrieved_at,
        models=tuple(k.value for k in kinds),
    )
    store.save_version(manifest, artifacts, iris, labels, provs)
    return store, iris, matrix


@pytest.fixture
def fixture_store(tmp_path):
    store, iris, matrix = write_fixture_store(tmp_path / "store")
    return store, iris, matrix


def write_obo_source(tmp_path, text=OBO_FIXTURE, name="go.obo"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def small_source(tmp_path, models=("TransE", "DistMult"), **overrides):
    """SourceConfig over the OBO fixture with fast training settings."""
    path = write_obo_source(tmp_path)
    defaults = dict(
        kg_name="go",
        url=path,
        poll_interval=60,
        models=models,
        train_overrides={"epochs": 3, "dimension": 8, "batch_size": 4},
        walk_overrides={"walks_per_entity": 2, "depth": 2},
        sg_overrides={"dimension": 8, "epochs": 2, "window": 2},
    )
    defaults.update(overrides)
    return SourceConfig(**defaults)


@pytest.fixture
def trained_store(tmp_path):
    """A store published through the real pipeline (two fast models)."""
    source = small_source(tmp_path)
    store = VectorStore(tmp_path / "store")
    with open(source.url, "rb") as fh:
        data = fh.read()
    import hashlib

    manifest = run_pipeline(
        source, data, hashlib.sha256(data).hexdigest(), store
    )
    return store, source, manifest


def write_service_config(tmp_path, source: SourceConfig, store_path) -> str:
    config = {
        "store_path": str(store_path),
        "sources": [
            {
                "kg_name": source.kg_name,
                "url": source.url,
                "poll_interval": source.poll_interval,
                "models": [k.value for k in source.models],
                "format": source.format,
                "train": source.train_overrides,
                "walks": source.walk_overrides,
                "skipgram": source.sg_overrides,
            }
        ],
    }
    path = tmp_path / "service.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)
