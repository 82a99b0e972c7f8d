"""Command-line interface.

Subcommands: ingest, train, watch, serve, query sim|closest, export.
Exit codes: 0 success, 1 user error (bad input, missing data), 2
unexpected internal error.
"""

from __future__ import annotations

import hashlib
import json
import shutil
import sys

import click

from .errors import OntovecError
from .logutil import configure_logging
from .models import ALL_KINDS, ModelKind
from .obo import parse_obo, to_graph
from .query import similarity as cosine_similarity
from .query import top_k
from .store import VectorStore
from .watcher import Watcher, fetch, load_config, run_pipeline

_MODEL_NAMES = [k.value for k in ALL_KINDS]


@click.group()
def cli():
    """Train and serve biomedical knowledge-graph embeddings."""


@cli.command()
@click.argument("obo_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report", is_flag=True, help="Print the ingest report as JSON.")
def ingest(obo_path, report):
    """Parse an OBO file and summarize what a training graph would hold."""
    with open(obo_path, encoding="utf-8") as fh:
        doc = parse_obo(fh.read())
    graph, ingest_report = to_graph(doc)
    if report:
        click.echo(ingest_report.to_json())
        return
    click.echo(f"ontology: {doc.ontology_id or '(unnamed)'}")
    click.echo(f"data-version: {doc.data_version or '(none)'}")
    click.echo(f"terms: {ingest_report.terms} ({ingest_report.obsolete} obsolete)")
    click.echo(f"entities: {graph.num_entities}")
    click.echo(f"relations: {graph.num_relations}")
    click.echo(f"triples: {ingest_report.triples}")
    click.echo(f"dropped edges: {ingest_report.dropped_edges}")


@cli.command()
@click.argument("kg")
@click.argument("version")
@click.option(
    "--model",
    "models",
    multiple=True,
    type=click.Choice(_MODEL_NAMES),
    help="Model kind to train; repeatable. Default: all configured.",
)
@click.option("--seed", type=int, default=None, help="Override every training seed.")
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Service config file naming the source for KG.",
)
def train(kg, version, models, seed, config_path):
    """Fetch KG's source now and publish VERSION from it."""
    configure_logging()
    config = load_config(config_path)
    source = config.source(kg)
    store = VectorStore(config.store_path)
    data, sha = fetch(source)
    kinds = tuple(ModelKind(m) for m in models) if models else None
    manifest = run_pipeline(
        source,
        data,
        sha,
        store,
        version_override=version,
        models_override=kinds,
        seed_override=seed,
    )
    click.echo(
        f"published {manifest.kg_name} {manifest.version_tag} "
        f"({', '.join(manifest.models)})"
    )


@cli.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--once", is_flag=True, help="Run one cycle over all sources and exit.")
def watch(config_path, once):
    """Poll configured sources and retrain on checksum changes."""
    configure_logging()
    config = load_config(config_path)
    watcher = Watcher(config)
    if once:
        published = watcher.run_once()
        for manifest in published:
            click.echo(f"published {manifest.kg_name} {manifest.version_tag}")
        if not published:
            click.echo("no changes")
        return
    watcher.run_forever()


@cli.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--host", default=None, help="Override the configured bind host.")
@click.option("--port", type=int, default=None, help="Override the configured port.")
def serve(config_path, host, port):
    """Serve the REST API (and the web UI when a build is present)."""
    import uvicorn

    from .api import create_app

    configure_logging()
    config = load_config(config_path)
    app = create_app(config.store_path)
    uvicorn.run(
        app,
        host=host if host is not None else config.api_host,
        port=port if port is not None else config.api_port,
    )


@cli.group()
def query():
    """Similarity queries against a published store."""


def _open_table(store_path, kg, model, version):
    store = VectorStore(store_path)
    manifest, labels, table = store.load_table(kg, version, model)
    return manifest, labels, table


@query.command("sim")
@click.argument("kg")
@click.argument("model", type=click.Choice(_MODEL_NAMES))
@click.argument("concept_a")
@click.argument("concept_b")
@click.option("--version", default="latest", show_default=True)
@click.option("--store", "store_path", default="store", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def query_sim(kg, model, concept_a, concept_b, version, store_path, as_json):
    """Cosine similarity between two concepts (IRI, label, or alt id)."""
    from .query import ConceptIndex

    manifest, labels, table = _open_table(store_path, kg, model, version)
    index = ConceptIndex(table.iris, labels)
    iri_a = index.resolve(concept_a).iri
    iri_b = index.resolve(concept_b).iri
    score = cosine_similarity(table, iri_a, iri_b)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "kg": kg,
                    "version": manifest.version_tag,
                    "model": model,
                    "a": iri_a,
                    "b": iri_b,
                    "score": score,
                }
            )
        )
        return
    click.echo(f"{kg} {manifest.version_tag} {model}")
    click.echo(f"cosine({iri_a}, {iri_b}) = {score:.4f}")


@query.command("closest")
@click.argument("kg")
@click.argument("model", type=click.Choice(_MODEL_NAMES))
@click.argument("concept")
@click.option("-k", type=click.IntRange(1, 100), default=10, show_default=True)
@click.option("--namespace", default=None, help="Restrict hits to one namespace.")
@click.option("--version", default="latest", show_default=True)
@click.option("--store", "store_path", default="store", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def query_closest(kg, model, concept, k, namespace, version, store_path, as_json):
    """Top-k concepts most similar to CONCEPT."""
    from .query import ConceptIndex

    manifest, labels, table = _open_table(store_path, kg, model, version)
    index = ConceptIndex(table.iris, labels)
    iri = index.resolve(concept).iri
    rows = top_k(table, labels, iri, k=k, namespace=namespace)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "kg": kg,
                    "version": manifest.version_tag,
                    "model": model,
                    "query": iri,
                    "rows": [
                        {"iri": r.iri, "label": r.label, "score": r.score, "url": r.url}
                        for r in rows
                    ],
                }
            )
        )
        return
    click.echo(f"{kg} {manifest.version_tag} {model}: closest to {iri}")
    width = max([len(r.iri) for r in rows] + [4])
    click.echo(f"{'iri':<{width}}  {'score':>7}  label")
    for r in rows:
        click.echo(f"{r.iri:<{width}}  {r.score:>7.4f}  {r.label}")


@cli.command()
@click.argument("kg")
@click.argument("version")
@click.argument("model", type=click.Choice(_MODEL_NAMES))
@click.option(
    "-o",
    "--output",
    required=True,
    type=click.Path(dir_okay=False, writable=True),
    help="Destination path for the vectors.json copy.",
)
@click.option("--store", "store_path", default="store", show_default=True)
def export(kg, version, model, output, store_path):
    """Copy a published vectors.json out of the store byte-for-byte."""
    store = VectorStore(store_path)
    path = store.vectors_path(kg, version, model)
    shutil.copyfile(path, output)
    digest = hashlib.sha256(open(output, "rb").read()).hexdigest()
    click.echo(f"wrote {output} sha256={digest}")


def main(argv=None) -> int:
    """Entry point mapping errors onto stable exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except OntovecError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
