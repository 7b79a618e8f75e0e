"""labelforge: curate sentence-level labels from templated free-text reports.

The pipeline turns raw report text into a reviewed label vocabulary:
ingest, normalize, similarity-based clustering, threshold tuning, human
semantic merging over HTTP, support filtering, and export.
"""

from ._backend import BACKEND, available_backends
from .clustering import Cluster, ClusterSet, cluster_corpus, cluster_section
from .errors import LabelForgeError
from .ingest import Corpus, ReportDocument, SectionKind, load_corpus
from .labelset import (
    DeleteDecision,
    LabelDefinition,
    LabelMatrix,
    MergeDecision,
    SemanticGroup,
    apply_merges,
    export_label_matrix,
    filter_min_support,
)
from .normalize import NormalizationConfig, NormalizedSentence, Token, normalize_corpus
from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .similarity import (
    SimilarityParams,
    SimilarityScore,
    combined_similarity,
    is_match,
    similarity,
)
from .tuning import (
    LabeledPair,
    OperatingPoint,
    SweepResult,
    select_operating_point,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "available_backends",
    "Cluster",
    "ClusterSet",
    "cluster_corpus",
    "cluster_section",
    "LabelForgeError",
    "Corpus",
    "ReportDocument",
    "SectionKind",
    "load_corpus",
    "DeleteDecision",
    "LabelDefinition",
    "LabelMatrix",
    "MergeDecision",
    "SemanticGroup",
    "apply_merges",
    "export_label_matrix",
    "filter_min_support",
    "NormalizationConfig",
    "NormalizedSentence",
    "Token",
    "normalize_corpus",
    "PipelineConfig",
    "PipelineReport",
    "run_pipeline",
    "SimilarityParams",
    "SimilarityScore",
    "combined_similarity",
    "is_match",
    "similarity",
    "LabeledPair",
    "OperatingPoint",
    "SweepResult",
    "select_operating_point",
    "sweep",
    "__version__",
]
