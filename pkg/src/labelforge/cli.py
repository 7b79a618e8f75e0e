"""Command-line interface for the label curation pipeline."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict
from pathlib import Path

import click

from . import __version__, storage
from ._backend import BACKEND
from .clustering import cluster_corpus
from .errors import BindError, LabelForgeError
from .ingest import Corpus, RawSentence, SectionKind, load_corpus
from .labelset import apply_merges, export_label_matrix, filter_min_support
from .normalize import (
    NormalizationConfig,
    load_abbreviations,
    load_stopwords,
    normalize_corpus,
    normalize_sentence,
)
from .pipeline import PipelineConfig, run_pipeline
from .service import ReviewSession
from .service import serve as serve_service
from .similarity import SimilarityParams, lcf_table, similarity
from .synthetic import (
    dump_reports_jsonl,
    planted_corpus,
    planted_pair_indices,
    synthetic_reports,
)
from .tuning import (
    evaluate_params,
    load_labeled_pairs,
    parse_grid,
    select_operating_point,
    sweep,
)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _log_level_name() -> str:
    raw = os.environ.get("LABELFORGE_LOG_LEVEL", "info").strip().lower()
    if raw not in _LOG_LEVELS:
        return "info"
    return "warning" if raw == "warn" else raw


def _fail(e: Exception) -> click.ClickException:
    stage = getattr(e, "stage", None)
    message = f"[{stage}] {e}" if stage else str(e)
    return click.ClickException(message)


def _sim_options(fn):
    for option in reversed(
        [
            click.option("--tau", type=float, default=0.75, show_default=True,
                         help="word prefix-ratio threshold"),
            click.option("--delta", type=float, default=0.1, show_default=True,
                         help="alignment gap penalty"),
            click.option("--gamma", type=float, default=0.7, show_default=True,
                         help="sentence match threshold"),
            click.option("--cluster-gamma", type=float, default=None,
                         help="clustering threshold (defaults to --gamma)"),
        ]
    ):
        fn = option(fn)
    return fn


def _load_reports(path) -> Corpus:
    """Accept either the raw reports format or a corpus snapshot."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if first == storage.CORPUS_MAGIC:
        return storage.read_corpus(path)
    return load_corpus(path)


@click.group()
@click.version_option(__version__, prog_name="labelforge")
def main():
    """Curate sentence-level labels from templated free-text reports."""
    logging.basicConfig(
        level=_LOG_LEVELS[_log_level_name()],
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.argument("reports", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def ingest(reports, out):
    """Parse a reports file and write a corpus snapshot."""
    try:
        corpus = _load_reports(reports)
    except LabelForgeError as e:
        raise _fail(e)
    storage.write_corpus(corpus, out)
    click.echo(
        f"{len(corpus.documents)} reports, {len(corpus.sentences)} sentences -> {out}"
    )


@main.command()
@click.argument("reports", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--stopwords", type=click.Path(exists=True, dir_okay=False),
              help="stopword list (defaults to the bundled list)")
@click.option("--abbreviations", type=click.Path(exists=True, dir_okay=False),
              help="TAB-separated abbreviation expansions")
@click.option("--typo-folding", is_flag=True, help="fold one-edit typos onto frequent words")
@click.option("--typo-min-vocab-freq", type=int, default=5, show_default=True)
def normalize(reports, out, stopwords, abbreviations, typo_folding, typo_min_vocab_freq):
    """Normalize and deduplicate sentences; write a sentences snapshot."""
    config = NormalizationConfig(
        stopwords=(
            load_stopwords(stopwords) if stopwords
            else NormalizationConfig.default().stopwords
        ),
        abbreviations=load_abbreviations(abbreviations) if abbreviations else {},
        typo_folding=typo_folding,
        typo_min_vocab_freq=typo_min_vocab_freq,
    )
    try:
        corpus = _load_reports(reports)
        sentences, stats = normalize_corpus(corpus, config)
    except LabelForgeError as e:
        raise _fail(e)
    storage.write_sentences(sentences, stats, out)
    click.echo(
        f"{stats.raw_sentences} raw -> {stats.normalized_sentences} normalized "
        f"({stats.dropped_empty} dropped) -> {stats.unique_sentences} unique -> {out}"
    )


@main.command()
@click.argument("text_a")
@click.argument("text_b")
@_sim_options
@click.option("--dump-table", is_flag=True, help="print the alignment DP table")
def sim(text_a, text_b, tau, delta, gamma, cluster_gamma, dump_table):
    """Score two sentences against each other."""
    config = NormalizationConfig.default()
    section = SectionKind("other", "cli")
    params = SimilarityParams(tau=tau, delta=delta, gamma=gamma, cluster_gamma=cluster_gamma)
    try:
        a = normalize_sentence(RawSentence(text_a, "a", section, 0), config)
        b = normalize_sentence(RawSentence(text_b, "b", section, 0), config)
    except LabelForgeError as e:
        raise _fail(e)
    score = similarity(a, b, params)
    click.echo(f"tokens a:  {a.surface_text}")
    click.echo(f"tokens b:  {b.surface_text}")
    click.echo(f"unordered: {score.unordered:.4f}")
    click.echo(f"ordered:   {score.ordered:.4f}")
    click.echo(f"combined:  {score.combined:.4f}")
    click.echo(f"match at gamma={params.gamma:g}: {'yes' if score.combined >= params.gamma else 'no'}")
    if dump_table:
        rows = lcf_table(a, b, params)
        labels = [""] + [t.render() for t in a.tokens]
        click.echo("\t" + "\t".join([""] + [t.render() for t in b.tokens]))
        for label, row in zip(labels, rows):
            click.echo(label + "\t" + "\t".join(f"{v:.4f}" for v in row))


@main.command()
@click.argument("sentences", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--reports", type=click.Path(exists=True, dir_okay=False),
              help="reports file, for image linkage in the cluster export")
@_sim_options
def cluster(sentences, out, reports, tau, delta, gamma, cluster_gamma):
    """Cluster a sentences snapshot and write the cluster export."""
    params = SimilarityParams(tau=tau, delta=delta, gamma=gamma, cluster_gamma=cluster_gamma)
    try:
        sents, _ = storage.read_sentences(sentences)
        images = _load_reports(reports).images_by_report() if reports else {}
    except LabelForgeError as e:
        raise _fail(e)
    cluster_set = cluster_corpus(sents, params)
    storage.write_clusters(cluster_set, images, out)
    click.echo(
        f"{cluster_set.counts.unique_sentences} unique sentences -> "
        f"{cluster_set.counts.n_clusters} clusters -> {out}"
    )


def _point_record(point) -> dict:
    return {
        "tau": point.params.tau,
        "delta": point.params.delta,
        "gamma": point.params.gamma,
        "precision": point.precision,
        "recall": point.recall,
        "f1": point.f1,
        "tp": point.tp,
        "fp": point.fp,
        "fn": point.fn,
        "tn": point.tn,
        "vacuous_precision": point.vacuous_precision,
        "no_positives": point.no_positives,
    }


@main.command()
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="labeled pairs file: one {a, b, same_meaning} record per line")
@click.option("--tau-grid", default="0.6,0.7,0.75,0.8,0.9", show_default=True)
@click.option("--delta-grid", default="0.05,0.1,0.2", show_default=True)
@click.option("--gamma-grid", default="0.5..0.9:0.05", show_default=True)
@click.option("--min-precision", type=float, default=0.0, show_default=True)
@click.option("--min-recall", type=float, default=0.0, show_default=True)
@click.option("--out", "-o", type=click.Path(dir_okay=False), help="write the sweep as JSON")
def tune(pairs, tau_grid, delta_grid, gamma_grid, min_precision, min_recall, out):
    """Sweep thresholds against labeled pairs; pick an operating point."""
    try:
        labeled = load_labeled_pairs(pairs)
        result = sweep(
            labeled, parse_grid(tau_grid), parse_grid(delta_grid), parse_grid(gamma_grid)
        )
        selected = select_operating_point(result, min_precision, min_recall)
    except (LabelForgeError, ValueError) as e:
        raise _fail(e)
    best = evaluate_params(labeled, selected)
    click.echo(
        f"selected tau={selected.tau:g} delta={selected.delta:g} gamma={selected.gamma:g} "
        f"(precision {best.precision:.3f}, recall {best.recall:.3f}, f1 {best.f1:.3f} "
        f"on {len(labeled)} pairs)"
    )
    if out:
        storage.write_json(
            {
                "pairs": len(labeled),
                "grid": [_point_record(p) for p in result.grid],
                "pareto": [_point_record(p) for p in result.pareto_front],
                "selected": _point_record(best),
            },
            out,
        )
        click.echo(f"sweep -> {out}")


@main.command()
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--decisions", type=click.Path(dir_okay=False),
              help="decision log; omit for a no-merge export")
@click.option("--min-support", type=int, default=50, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--dense", is_flag=True, help="also write the dense matrix")
def export(clusters, decisions, min_support, out_dir, dense):
    """Apply decisions to a cluster export; write labels.csv and matrix.csv."""
    try:
        cluster_set, images = storage.read_clusters(clusters)
        decision_list = (
            list(storage.read_decision_log(decisions).decisions) if decisions else []
        )
        groups = apply_merges(cluster_set, decision_list, images)
    except LabelForgeError as e:
        raise _fail(e)
    result = filter_min_support(groups, min_support)
    matrix = export_label_matrix(images, result.labels)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    storage.write_labels_csv(result.labels, out / "labels.csv")
    storage.write_matrix_csv(matrix, out / "matrix.csv")
    if dense:
        storage.write_matrix_dense_csv(matrix, out / "matrix_dense.csv")
    storage.write_json(
        {
            "min_support": min_support,
            "clusters": cluster_set.counts.n_clusters,
            "groups": len(groups),
            "labels": len(result.labels),
            "dropped_groups": [
                {
                    "group_id": g.group_id,
                    "label_text": g.label_text,
                    "image_support": g.image_support,
                }
                for g in result.dropped
            ],
            "mixed_section_groups": list(result.mixed_section_group_ids),
            "images_without_labels": list(matrix.zero_rows()),
        },
        out / "audit.json",
    )
    click.echo(
        f"{cluster_set.counts.n_clusters} clusters -> {len(groups)} groups -> "
        f"{len(result.labels)} labels (min_support {min_support}) -> {out}"
    )


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def run(config_path):
    """Run the full pipeline from a TOML config."""
    try:
        config = PipelineConfig.from_toml(config_path)
        report = run_pipeline(config)
    except (LabelForgeError, OSError, ValueError) as e:
        raise _fail(e)
    click.echo(json.dumps(asdict(report), indent=2, sort_keys=True))


@main.command()
@click.option("--clusters", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--decisions", required=True, type=click.Path(dir_okay=False))
@click.option("--bind", default="127.0.0.1:8080", show_default=True,
              help="host:port; port 0 picks a free port")
@click.option("--min-support", type=int, default=50, show_default=True)
@click.option("--export-dir", type=click.Path(file_okay=False))
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False),
              help="static review UI directory to serve at /")
@click.option("--ready-file", type=click.Path(dir_okay=False),
              help="write host:port here once the socket is listening")
def serve(clusters, decisions, bind, min_support, export_dir, ui_dir, ready_file):
    """Serve the review API (and optionally the UI) over HTTP."""
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.ClickException(f"--bind must be host:port, got {bind!r}")
    try:
        session = ReviewSession(
            clusters, decisions, min_support=min_support, export_dir=export_dir
        )
    except LabelForgeError as e:
        raise _fail(e)
    click.echo(f"review session {session.session_id} (backend: {BACKEND})")
    try:
        serve_service(
            session,
            host=host,
            port=int(port_text),
            ui_dir=ui_dir,
            ready_file=ready_file,
            log_level=_log_level_name(),
        )
    except BindError as e:
        raise _fail(e)


@main.command("synth-reports")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--reports", "n_reports", type=int, default=40, show_default=True)
@click.option("--groups", type=int, default=8, show_default=True)
@click.option("--variants", type=int, default=6, show_default=True)
def synth_reports(out, seed, n_reports, groups, variants):
    """Generate a synthetic reports file with planted paraphrase groups."""
    corpus = synthetic_reports(
        seed, n_reports=n_reports, n_groups=groups, variants_per_group=variants
    )
    dump_reports_jsonl(corpus, out)
    click.echo(f"{len(corpus.documents)} reports -> {out}")


@main.command("synth-pairs")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--pairs", "n_pairs", type=int, default=200, show_default=True)
@click.option("--groups", type=int, default=20, show_default=True)
@click.option("--variants", type=int, default=10, show_default=True)
def synth_pairs(out, seed, n_pairs, groups, variants):
    """Generate labeled sentence pairs from a planted corpus."""
    planted = planted_corpus(seed=seed, n_groups=groups, variants_per_group=variants)
    with open(out, "w", encoding="utf-8") as fh:
        for a, b, same in planted_pair_indices(planted, n_pairs=n_pairs, seed=seed + 1):
            fh.write(
                json.dumps(
                    {
                        "a": planted.raw_texts[a],
                        "b": planted.raw_texts[b],
                        "same_meaning": same,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    click.echo(f"{n_pairs} labeled pairs -> {out}")


if __name__ == "__main__":
    main()
