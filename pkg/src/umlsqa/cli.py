"""Single entry point: dataset, umls, pipeline, metrics and review commands.

Exit codes are stable: 0 success, 2 validation/usage, 3 provider
failure, 4 local storage/I/O failure, 1 anything unexpected. Credentials
come from environment variables and are never echoed into logs or
output at any verbosity.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import config as config_mod
from . import dataset as dataset_mod
from . import metrics as metrics_mod
from . import pipeline as pipeline_mod
from . import review as review_mod
from .errors import ProviderError, StorageError, UmlsQaError, ValidationError
from .providers import HttpEmbeddingProvider, OrthogonalStubEmbedder
from .umls import FileCache, FixtureUmlsProvider, HttpUmlsProvider, RecordingUmlsProvider, UmlsClient

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_PROVIDER = 3
EXIT_STORAGE = 4

logger = logging.getLogger(__name__)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug logging.")
def cli(verbose: int):
    """UMLS-augmented medical QA: pipeline, scoring and blind review."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# -- dataset ------------------------------------------------------------------


@cli.group("dataset")
def dataset_group():
    """Corpus conversion and subsets."""


@dataset_group.command("convert")
@click.argument("src", type=click.Path(path_type=Path))
@click.argument("dst", type=click.Path(path_type=Path))
@click.option("--from", "src_format", default=dataset_mod.TREC_XML,
              type=click.Choice(dataset_mod.FORMATS), show_default=True)
def dataset_convert(src: Path, dst: Path, src_format: str):
    """Convert a corpus file to the normalized JSONL format."""
    corpus = dataset_mod.load_corpus(src, format=src_format)
    dataset_mod.save_corpus(corpus, dst)
    click.echo(f"wrote {len(corpus)} record(s) to {dst}")


@dataset_group.command("subset")
@click.argument("src", type=click.Path(path_type=Path))
@click.argument("dst", type=click.Path(path_type=Path))
@click.option("--ids-file", required=True, type=click.Path(path_type=Path),
              help="File with one record id per line (the explicit subset manifest).")
@click.option("--suffix", default="-subset", show_default=True)
def dataset_subset(src: Path, dst: Path, ids_file: Path, suffix: str):
    """Select an explicit subset of a normalized corpus."""
    corpus = dataset_mod.load_corpus(src)
    ids = _read_ids(ids_file)
    subset = dataset_mod.select_subset(corpus, ids, suffix=suffix)
    dataset_mod.save_corpus(subset, dst)
    click.echo(f"wrote {len(subset)} record(s) to {dst}")


def _read_ids(path: Path) -> list[str]:
    if not path.exists():
        raise ValidationError(f"ids file not found: {path}")
    ids = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            ids.append(line)
    return ids


# -- umls ---------------------------------------------------------------------


def _umls_client(fixture_dir: Path | None, base_url: str | None, cache_dir: Path | None) -> UmlsClient:
    if fixture_dir is not None:
        provider = FixtureUmlsProvider(fixture_dir)
    else:
        provider = HttpUmlsProvider(base_url=base_url or "https://uts-ws.nlm.nih.gov/rest")
    cache = FileCache(cache_dir) if cache_dir else None
    return UmlsClient(provider, cache=cache)


@cli.group("umls")
def umls_group():
    """Concept linking and fixture recording."""


@umls_group.command("link")
@click.argument("term")
@click.option("--fixture-dir", type=click.Path(path_type=Path), default=None)
@click.option("--base-url", default=None)
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None)
def umls_link(term: str, fixture_dir: Path | None, base_url: str | None, cache_dir: Path | None):
    """Link one term to its concept id and preferred name."""
    client = _umls_client(fixture_dir, base_url, cache_dir)
    linked = client.link_concept(term)
    if linked is None:
        click.echo(json.dumps({"term": term, "match": None}))
        return
    cui, name = linked
    click.echo(json.dumps({"term": term, "cui": cui, "preferred_name": name}, ensure_ascii=False))


@umls_group.command("concept")
@click.argument("cui")
@click.option("--cap", default=25, show_default=True)
@click.option("--fixture-dir", type=click.Path(path_type=Path), default=None)
@click.option("--base-url", default=None)
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None)
def umls_concept(cui: str, cap: int, fixture_dir: Path | None, base_url: str | None,
                 cache_dir: Path | None):
    """Print a concept's prioritized definition and capped relations."""
    client = _umls_client(fixture_dir, base_url, cache_dir)
    definition = client.fetch_definition(cui)
    relations = client.fetch_relations(cui, cap=cap)
    click.echo(
        json.dumps(
            {
                "cui": cui,
                "definition": (
                    {"text": definition.text, "source_vocabulary": definition.source_vocabulary}
                    if definition
                    else None
                ),
                "relations": [
                    {
                        "label": r.label,
                        "related_name": r.related_name,
                        "related_cui": r.related_cui,
                        "source_vocabulary": r.source_vocabulary,
                    }
                    for r in relations
                ],
            },
            ensure_ascii=False,
        )
    )


@umls_group.command("record-fixtures")
@click.option("--terms-file", required=True, type=click.Path(path_type=Path),
              help="File with one term per line.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--base-url", default=None)
def umls_record_fixtures(terms_file: Path, out_dir: Path, base_url: str | None):
    """Record live search/definition/relation responses as fixtures."""
    live = HttpUmlsProvider(base_url=base_url or "https://uts-ws.nlm.nih.gov/rest")
    client = UmlsClient(RecordingUmlsProvider(live, out_dir))
    recorded = 0
    for term in _read_ids(terms_file):
        linked = client.link_concept(term)
        if linked is None:
            logger.warning("no concept for %r; recorded empty search", term)
            continue
        cui, _ = linked
        client.fetch_definition(cui)
        client.fetch_relations(cui)
        recorded += 1
    click.echo(f"recorded fixtures for {recorded} term(s) under {out_dir}")


# -- pipeline -------------------------------------------------------------------


@cli.group("pipeline")
def pipeline_group():
    """Answer generation runs."""


@pipeline_group.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--workers", default=None, type=int, help="Overrides the config's worker count.")
def pipeline_run(config_path: Path, corpus_path: Path, out_path: Path, workers: int | None):
    """Generate one answer per (question, config); resumable."""
    spec = config_mod.load_experiment(config_path, overrides={"workers": workers})
    corpus = dataset_mod.load_corpus(corpus_path)
    pipeline_mod.run_experiment(
        corpus, spec.configs, spec.providers, out_path, max_workers=spec.workers
    )
    answers = pipeline_mod.load_answer_set(out_path)
    click.echo(f"answer set complete: {len(answers)} answer(s) in {out_path}")


@pipeline_group.command("answer")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--question-id", required=True)
@click.option("--config-id", default=None, help="Run only the matching config.")
def pipeline_answer(config_path: Path, corpus_path: Path, question_id: str, config_id: str | None):
    """Answer a single question and print the full provenance record(s)."""
    spec = config_mod.load_experiment(config_path)
    corpus = dataset_mod.load_corpus(corpus_path)
    record = corpus.by_id(question_id)
    configs = [c for c in spec.configs if config_id is None or c.config_id == config_id]
    if not configs:
        raise ValidationError(
            f"no config matches {config_id!r}; available: {[c.config_id for c in spec.configs]}"
        )
    for cfg in configs:
        answer = pipeline_mod.answer_question(record, cfg, spec.providers)
        click.echo(json.dumps(answer.to_dict(), ensure_ascii=False))


# -- metrics --------------------------------------------------------------------


@cli.group("metrics")
def metrics_group():
    """Automatic scoring."""


@metrics_group.command("score")
@click.option("--answers", "answers_path", required=True, type=click.Path(path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_prefix", required=True, type=click.Path(path_type=Path),
              help="Prefix for <out>.jsonl (records) and <out>.txt (table).")
@click.option("--embedding", default="stub", type=click.Choice(["stub", "http"]),
              show_default=True, help="BERTScore embedder: deterministic stub or HTTP endpoint.")
@click.option("--embedding-url", default=None)
def metrics_score(answers_path: Path, corpus_path: Path, out_prefix: Path,
                  embedding: str, embedding_url: str | None):
    """Score an answer set and emit the six-column report."""
    answers = pipeline_mod.load_answer_set(answers_path)
    if not answers:
        raise ValidationError(f"no answers found in {answers_path}")
    corpus = dataset_mod.load_corpus(corpus_path)
    if embedding == "http":
        if not embedding_url:
            raise ValidationError("--embedding http requires --embedding-url")
        embedder = HttpEmbeddingProvider(embedding_url)
    else:
        embedder = OrthogonalStubEmbedder()
    report = metrics_mod.score_answer_set(answers, corpus, embedder)
    table = metrics_mod.render_table(report)

    records_path = out_prefix.with_suffix(".jsonl")
    table_path = out_prefix.with_suffix(".txt")
    records_path.parent.mkdir(parents=True, exist_ok=True)
    with open(records_path, "w", encoding="utf-8") as fp:
        for rec in metrics_mod.report_records(report):
            fp.write(json.dumps(rec, ensure_ascii=False) + "\n")
    table_path.write_text(table + "\n", encoding="utf-8")
    _write_manifest(
        out_prefix.with_suffix(".manifest.json"),
        kind="metrics-score",
        inputs={
            "answers_digest": _file_digest(answers_path),
            "corpus_digest": _file_digest(corpus_path),
        },
        providers={"embedding": embedder.describe()},
        outputs=[str(records_path), str(table_path)],
    )
    click.echo(table)


# -- review ---------------------------------------------------------------------


@cli.group("review")
def review_group():
    """Blind pairwise review lifecycle."""


@review_group.command("init")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--answers", "answer_paths", required=True, multiple=True,
              type=click.Path(path_type=Path),
              help="Exactly twice: first the augmented system's answer set, then the baseline's.")
@click.option("--config", "config_ids", multiple=True,
              help="Config id to select per --answers file when a file holds several.")
@click.option("--seed", required=True, type=int)
@click.option("--store", "store_dir", required=True, type=click.Path(path_type=Path))
@click.option("--name", default="review", show_default=True)
def review_init(corpus_path: Path, answer_paths: tuple[Path, ...], config_ids: tuple[str, ...],
                seed: int, store_dir: Path, name: str):
    """Blind two answer sets into a review store."""
    if len(answer_paths) != 2:
        raise ValidationError("--answers must be given exactly twice (augmented, then baseline)")
    if config_ids and len(config_ids) != 2:
        raise ValidationError("--config must be given exactly twice when used")
    corpus = dataset_mod.load_corpus(corpus_path)
    sides = []
    for i, answers_path in enumerate(answer_paths):
        wanted = config_ids[i] if config_ids else None
        sides.append(_answers_by_question(answers_path, wanted))
    (augmented_label, augmented), (baseline_label, baseline) = sides

    pairs = []
    for record in corpus.records:
        if record.id in augmented and record.id in baseline:
            pairs.append((record, augmented[record.id], baseline[record.id]))
    if not pairs:
        raise ValidationError("no question has answers in both answer sets")
    blinded = review_mod.assign_blinding(pairs, seed)
    review_mod.ReviewStore.create(
        store_dir,
        blinded,
        systems={review_mod.AUGMENTED: augmented_label, review_mod.BASELINE: baseline_label},
        seed=seed,
        name=name,
    )
    click.echo(f"review store initialized with {len(blinded)} blinded pair(s) at {store_dir}")


def _answers_by_question(path: Path, config_id: str | None) -> tuple[str, dict[str, str]]:
    answers = pipeline_mod.load_answer_set(path)
    if not answers:
        raise ValidationError(f"no answers found in {path}")
    available = sorted({a["config_id"] for a in answers})
    if config_id is None:
        if len(available) > 1:
            raise ValidationError(
                f"{path} holds several configs {available}; select one with --config"
            )
        config_id = available[0]
    elif config_id not in available:
        raise ValidationError(f"{path} has no config {config_id!r}; available: {available}")
    return config_id, {
        a["question_id"]: a["answer_text"] for a in answers if a["config_id"] == config_id
    }


@review_group.command("serve")
@click.option("--store", "store_dir", required=True, type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--admin-token", default=None, envvar="REVIEW_ADMIN_TOKEN",
              help="Token for the aggregate summary endpoint; generated when omitted.")
@click.option("--static-dir", default=None, type=click.Path(path_type=Path),
              help="Serve the review UI's compiled assets from this directory.")
def review_serve(store_dir: Path, host: str, port: int, admin_token: str | None,
                 static_dir: Path | None):
    """Run the blind-review HTTP service."""
    import uvicorn

    store = review_mod.ReviewStore.load(store_dir)
    app = review_mod.create_app(store, admin_token=admin_token, static_dir=static_dir)
    click.echo(f"admin token: {app.state.admin_token}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@review_group.command("report")
@click.option("--store", "store_dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path),
              help="Also write the machine-readable summary JSON here.")
def review_report(store_dir: Path, out_path: Path | None):
    """De-blind all judgments and print the four-dimension win rates."""
    store = review_mod.ReviewStore.load(store_dir)
    judgments = store.judgments()
    if not judgments:
        raise ValidationError("no judgments recorded yet; nothing to report")
    summary = review_mod.compute_win_rates(judgments, store.assignments())
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(
            json.dumps(summary.to_dict(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
        )
    click.echo(review_mod.render_win_rate_table(summary))


# -- shared helpers ---------------------------------------------------------------


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(path: Path, kind: str, inputs: dict, providers: dict, outputs: list[str]):
    manifest = {
        "kind": kind,
        **inputs,
        "providers": providers,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(manifest, fp, ensure_ascii=False, indent=1)
        fp.write("\n")


def main(argv: list[str] | None = None) -> int:
    """Console entry point with stable exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        exc.show()
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_UNEXPECTED
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except ProviderError as exc:
        click.echo(f"provider error: {exc}", err=True)
        return EXIT_PROVIDER
    except (StorageError, OSError) as exc:
        click.echo(f"storage error: {exc}", err=True)
        return EXIT_STORAGE
    except UmlsQaError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNEXPECTED
    except SystemExit as exc:  # click may still exit directly (e.g. --help)
        code = exc.code
        return int(code) if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
