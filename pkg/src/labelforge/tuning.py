"""Grid sweep of the matching thresholds against labeled sentence pairs.

Scores depend only on (tau, delta); gamma is a cut on the combined score,
so each (tau, delta) cell is scored once and re-thresholded per gamma.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._backend import kernel
from .errors import EmptyGrid, EmptyPairSet, NoFeasiblePoint
from .ingest import RawSentence, SectionKind
from .normalize import NormalizationConfig, NormalizedSentence, normalize_sentence
from .similarity import SimilarityParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledPair:
    a: NormalizedSentence
    b: NormalizedSentence
    same_meaning: bool

    def __post_init__(self):
        if self.a.tokens == self.b.tokens:
            raise ValueError("labeled pair with identical token sequences")


@dataclass(frozen=True)
class OperatingPoint:
    params: SimilarityParams
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    vacuous_precision: bool = False
    no_positives: bool = False

    @property
    def true_positive_rate(self) -> float:
        return self.recall

    @property
    def false_positive_rate(self) -> float:
        negatives = self.fp + self.tn
        return self.fp / negatives if negatives else 0.0


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[OperatingPoint, ...]
    pareto_front: tuple[OperatingPoint, ...]


def load_labeled_pairs(
    path, config: NormalizationConfig | None = None
) -> list[LabeledPair]:
    """Read {a, b, same_meaning} records; identical-after-normalization
    pairs carry no signal and are dropped with a warning."""
    config = config or NormalizationConfig.default()
    section = SectionKind("other", "labeled_pairs")
    pairs: list[LabeledPair] = []
    dropped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            a = normalize_sentence(
                RawSentence(record["a"], f"pair{line_no}a", section, 0), config
            )
            b = normalize_sentence(
                RawSentence(record["b"], f"pair{line_no}b", section, 0), config
            )
            if a.tokens == b.tokens:
                dropped += 1
                continue
            pairs.append(LabeledPair(a, b, bool(record["same_meaning"])))
    if dropped:
        logger.warning("dropped %d identical labeled pairs", dropped)
    return pairs


def _confusion(scores: Sequence[float], truths: Sequence[bool], gamma: float):
    tp = fp = fn = tn = 0
    for score, truth in zip(scores, truths):
        predicted = score >= gamma
        if predicted and truth:
            tp += 1
        elif predicted:
            fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def _point(params: SimilarityParams, tp, fp, fn, tn) -> OperatingPoint:
    vacuous = (tp + fp) == 0
    precision = 1.0 if vacuous else tp / (tp + fp)
    no_positives = (tp + fn) == 0
    recall = 0.0 if no_positives else tp / (tp + fn)
    denom = precision + recall
    f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
    return OperatingPoint(
        params=params,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        vacuous_precision=vacuous,
        no_positives=no_positives,
    )


def _pair_scores(pairs: Sequence[LabeledPair], tau: float, delta: float) -> list[float]:
    return [
        kernel.pair_combined(p.a.words, p.a.negs, p.b.words, p.b.negs, tau, delta)
        for p in pairs
    ]


def evaluate_params(
    pairs: Sequence[LabeledPair], params: SimilarityParams
) -> OperatingPoint:
    if not pairs:
        raise EmptyPairSet("no labeled pairs")
    scores = _pair_scores(pairs, params.tau, params.delta)
    truths = [p.same_meaning for p in pairs]
    return _point(params, *_confusion(scores, truths, params.gamma))


def sweep(
    pairs: Sequence[LabeledPair],
    tau_values: Sequence[float],
    delta_values: Sequence[float],
    gamma_values: Sequence[float],
) -> SweepResult:
    if not pairs:
        raise EmptyPairSet("no labeled pairs")
    if not tau_values or not delta_values or not gamma_values:
        raise EmptyGrid("every parameter list must be non-empty")
    truths = [p.same_meaning for p in pairs]
    grid: list[OperatingPoint] = []
    for tau in tau_values:
        for delta in delta_values:
            scores = _pair_scores(pairs, tau, delta)
            for gamma in gamma_values:
                params = SimilarityParams(tau=tau, delta=delta, gamma=gamma)
                grid.append(_point(params, *_confusion(scores, truths, gamma)))
    return SweepResult(grid=tuple(grid), pareto_front=pareto_front(grid))


def _dominates(p: OperatingPoint, q: OperatingPoint) -> bool:
    return (
        p.precision >= q.precision
        and p.recall >= q.recall
        and (p.precision > q.precision or p.recall > q.recall)
    )


def pareto_front(grid: Iterable[OperatingPoint]) -> tuple[OperatingPoint, ...]:
    points = list(grid)
    front = [
        p
        for p in points
        if not any(_dominates(q, p) for q in points)
    ]
    front.sort(key=lambda p: (-p.precision, -p.recall, -p.params.gamma))
    return tuple(front)


def select_operating_point(
    result: SweepResult, min_precision: float = 0.0, min_recall: float = 0.0
) -> SimilarityParams:
    """Best feasible point by F1; ties prefer stricter matching."""
    feasible = [
        p
        for p in result.grid
        if p.precision >= min_precision and p.recall >= min_recall
    ]
    if not feasible:
        raise NoFeasiblePoint(
            f"no point with precision >= {min_precision} and recall >= {min_recall}"
        )
    best = max(
        feasible,
        key=lambda p: (p.f1, p.params.gamma, p.params.tau, -p.params.delta),
    )
    return best.params


def parse_grid(text: str) -> list[float]:
    """Parse a value list: '0.6,0.75,0.9' or inclusive range '0.5..0.95:0.05'."""
    text = text.strip()
    if ".." in text:
        bounds, _, step_text = text.partition(":")
        if not step_text:
            raise ValueError(f"range grid needs a step: {text!r}")
        start_text, _, stop_text = bounds.partition("..")
        start, stop, step = float(start_text), float(stop_text), float(step_text)
        if step <= 0:
            raise ValueError(f"grid step must be positive: {text!r}")
        values = []
        k = 0
        while True:
            v = round(start + k * step, 9)
            if v > stop + 1e-9:
                break
            values.append(v)
            k += 1
        return values
    return [float(part) for part in text.split(",") if part.strip()]
