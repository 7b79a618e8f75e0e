"""End-to-end run: ingest, normalize, cluster, export label artifacts.

All outputs are deterministic functions of the inputs, so two runs over
the same files produce byte-identical artifacts.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import storage
from .clustering import cluster_corpus
from .ingest import load_corpus
from .labelset import apply_merges, export_label_matrix, filter_min_support
from .normalize import (
    NormalizationConfig,
    load_abbreviations,
    load_stopwords,
    normalize_corpus,
)
from .similarity import SimilarityParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    reports_path: Path
    out_dir: Path
    params: SimilarityParams = field(default_factory=SimilarityParams)
    normalization: NormalizationConfig = field(
        default_factory=NormalizationConfig.default
    )
    min_support: int = 50
    dense_matrix: bool = False

    @classmethod
    def from_toml(cls, path) -> "PipelineConfig":
        """Load a TOML config; relative paths resolve against the file."""
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        base = path.parent

        def resolve(p) -> Path:
            p = Path(p)
            return p if p.is_absolute() else base / p

        try:
            reports = resolve(raw["input"]["reports"])
        except KeyError:
            raise ValueError("pipeline config: [input] reports is required") from None
        if not reports.exists():
            raise FileNotFoundError(f"reports file not found: {reports}")

        norm_raw = raw.get("normalize", {})
        norm_kwargs = dict(
            typo_folding=bool(norm_raw.get("typo_folding", False)),
            typo_min_vocab_freq=int(norm_raw.get("typo_min_vocab_freq", 5)),
        )
        if "stopwords" in norm_raw:
            sp = resolve(norm_raw["stopwords"])
            if not sp.exists():
                raise FileNotFoundError(f"stopwords file not found: {sp}")
            norm_kwargs["stopwords"] = load_stopwords(sp)
        else:
            norm_kwargs["stopwords"] = NormalizationConfig.default().stopwords
        if "abbreviations" in norm_raw:
            ap = resolve(norm_raw["abbreviations"])
            if not ap.exists():
                raise FileNotFoundError(f"abbreviations file not found: {ap}")
            norm_kwargs["abbreviations"] = load_abbreviations(ap)
        normalization = NormalizationConfig(**norm_kwargs)

        sim_raw = raw.get("similarity", {})
        params = SimilarityParams(
            tau=float(sim_raw.get("tau", 0.75)),
            delta=float(sim_raw.get("delta", 0.1)),
            gamma=float(sim_raw.get("gamma", 0.7)),
            cluster_gamma=(
                float(sim_raw["cluster_gamma"])
                if "cluster_gamma" in sim_raw else None
            ),
        )

        exp_raw = raw.get("export", {})
        return cls(
            reports_path=reports,
            out_dir=resolve(exp_raw.get("out_dir", "out")),
            params=params,
            normalization=normalization,
            min_support=int(exp_raw.get("min_support", 50)),
            dense_matrix=bool(exp_raw.get("dense_matrix", False)),
        )


@dataclass(frozen=True)
class PipelineReport:
    reports: int
    images: int
    raw_sentences: int
    normalized_sentences: int
    dropped_empty: int
    unique_sentences: int
    n_clusters: int
    n_groups: int
    n_labels: int
    dropped_groups: int

    def chain(self) -> tuple[int, int, int, int, int]:
        """The reduction stages: raw, unique, clusters, groups, labels."""
        return (
            self.raw_sentences,
            self.unique_sentences,
            self.n_clusters,
            self.n_groups,
            self.n_labels,
        )


@contextmanager
def _stage(name: str):
    """Tag escaping exceptions with the pipeline stage that raised them."""
    try:
        yield
    except Exception as e:
        if not hasattr(e, "stage"):
            try:
                e.stage = name
            except AttributeError:
                pass
        raise


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Run every stage and write the artifacts into config.out_dir.

    An empty corpus short-circuits to an all-zero report with no files
    written.
    """
    with _stage("ingest"):
        corpus = load_corpus(config.reports_path)
    if not corpus.documents:
        logger.warning("empty corpus: %s; writing no outputs", config.reports_path)
        return PipelineReport(0, 0, 0, 0, 0, 0, 0, 0, 0, 0)

    images_by_report = corpus.images_by_report()
    n_images = len({img for imgs in images_by_report.values() for img in imgs})

    with _stage("normalize"):
        sentences, norm_stats = normalize_corpus(corpus, config.normalization)
    with _stage("cluster"):
        cluster_set = cluster_corpus(sentences, config.params)
    with _stage("labels"):
        groups = apply_merges(cluster_set, [], images_by_report)
        result = filter_min_support(groups, config.min_support)
        matrix = export_label_matrix(images_by_report, result.labels)

    report = PipelineReport(
        reports=len(corpus.documents),
        images=n_images,
        raw_sentences=norm_stats.raw_sentences,
        normalized_sentences=norm_stats.normalized_sentences,
        dropped_empty=norm_stats.dropped_empty,
        unique_sentences=norm_stats.unique_sentences,
        n_clusters=cluster_set.counts.n_clusters,
        n_groups=len(groups),
        n_labels=len(result.labels),
        dropped_groups=len(result.dropped),
    )

    with _stage("write"):
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        storage.write_sentences(sentences, norm_stats, out / "sentences.jsonl")
        storage.write_clusters(cluster_set, images_by_report, out / "clusters.json")
        storage.write_labels_csv(result.labels, out / "labels.csv")
        storage.write_matrix_csv(matrix, out / "matrix.csv")
        if config.dense_matrix:
            storage.write_matrix_dense_csv(matrix, out / "matrix_dense.csv")
        storage.write_json(
            {
                **asdict(report),
                "audit": {
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
            },
            out / "report.json",
        )

    logger.info(
        "pipeline: %d reports, %d raw -> %d unique -> %d clusters -> "
        "%d groups -> %d labels",
        report.reports, report.raw_sentences, report.unique_sentences,
        report.n_clusters, report.n_groups, report.n_labels,
    )
    return report
