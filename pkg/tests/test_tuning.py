import itertools
import json
import logging

import pytest

from labelforge.errors import EmptyGrid, EmptyPairSet, NoFeasiblePoint
from labelforge.similarity import SimilarityParams, combined_similarity
from labelforge.tuning import (
    LabeledPair,
    evaluate_params,
    load_labeled_pairs,
    parse_grid,
    pareto_front,
    select_operating_point,
    sweep,
)

from conftest import sent


def _pair(a_text, b_text, same):
    return LabeledPair(sent(a_text), sent(b_text), same)


def separation_fixture():
    """Ten pairs whose combined scores split cleanly at 0.7: six positives
    at or above it, four negatives well below."""
    positives = [
        _pair("alphaword bravoword charword deltword", "alphaword bravoword charword deltwords", True),
        _pair("echoword foxtword golfword hotlword", "echoword foxtword golfword hotlwords", True),
        _pair("indigowd juliett kilowrd limawrd", "indigowd juliett kilowrd limawrds", True),
        _pair("mikeword novword oscword papword", "mikeword novword oscword papwords", True),
        _pair("quebword romword sierword tangword", "quebword romword sierword tangwords", True),
        _pair("unifword victword whisword xrayword", "unifword victword whisword xraywords", True),
    ]
    negatives = [
        _pair("alphaword bravoword", "yankword zuluword", False),
        _pair("echoword foxtword", "wombword vexword", False),
        _pair("indigowd juliett", "quizword jinxword", False),
        _pair("mikeword novword", "huskword glyphwrd", False),
    ]
    return positives + negatives


GRID_PARAMS = SimilarityParams(tau=0.6, delta=0.1, gamma=0.7)


class TestFixtureSeparation:
    def test_planted_split_at_gamma(self):
        pairs = separation_fixture()
        for p in pairs:
            score = combined_similarity(p.a, p.b, GRID_PARAMS)
            if p.same_meaning:
                assert score >= 0.7
            else:
                assert score < 0.7

    def test_perfect_point_at_planted_threshold(self):
        point = evaluate_params(separation_fixture(), GRID_PARAMS)
        assert (point.tp, point.fp, point.fn, point.tn) == (6, 0, 0, 4)
        assert point.precision == 1.0
        assert point.recall == 1.0
        assert point.f1 == 1.0
        assert not point.vacuous_precision
        assert not point.no_positives


class TestSweep:
    def test_grid_size_and_front_membership(self):
        pairs = separation_fixture()
        result = sweep(pairs, [0.5, 0.6, 0.75], [0.05, 0.1, 0.2], [0.5, 0.6, 0.7, 0.8, 0.9])
        assert len(result.grid) == 3 * 3 * 5
        # the planted separation point must survive to the front
        front_keys = {
            (p.params.tau, p.params.gamma, p.precision, p.recall)
            for p in result.pareto_front
        }
        assert any(p == 1.0 and r == 1.0 for _, _, p, r in front_keys)

    def test_recall_non_increasing_in_gamma(self):
        pairs = separation_fixture()
        gammas = [0.3, 0.5, 0.7, 0.9, 1.0]
        result = sweep(pairs, [0.6], [0.1], gammas)
        recalls = [p.recall for p in result.grid]
        assert recalls == sorted(recalls, reverse=True)

    def test_front_is_non_dominated(self):
        pairs = separation_fixture()
        result = sweep(pairs, [0.5, 0.75, 1.0], [0.05, 0.2], [0.4, 0.6, 0.8])
        for p in result.pareto_front:
            for q in result.grid:
                assert not (
                    q.precision >= p.precision
                    and q.recall >= p.recall
                    and (q.precision > p.precision or q.recall > p.recall)
                )

    def test_empty_inputs_rejected(self):
        with pytest.raises(EmptyPairSet):
            sweep([], [0.6], [0.1], [0.7])
        with pytest.raises(EmptyGrid):
            sweep(separation_fixture(), [], [0.1], [0.7])
        with pytest.raises(EmptyPairSet):
            evaluate_params([], GRID_PARAMS)


class TestSelect:
    def test_matches_exhaustive_max_f1(self):
        pairs = separation_fixture()
        taus, deltas, gammas = [0.5, 0.6, 0.75], [0.05, 0.1], [0.4, 0.55, 0.7, 0.85]
        result = sweep(pairs, taus, deltas, gammas)
        selected = select_operating_point(result)

        best = None
        for tau, delta, gamma in itertools.product(taus, deltas, gammas):
            point = evaluate_params(pairs, SimilarityParams(tau=tau, delta=delta, gamma=gamma))
            key = (point.f1, gamma, tau, -delta)
            if best is None or key > best[0]:
                best = (key, point.params)
        assert selected == best[1]
        assert evaluate_params(pairs, selected).f1 == best[0][0]

    def test_tie_prefers_stricter_gamma(self):
        pairs = separation_fixture()
        result = sweep(pairs, [0.6], [0.1], [0.5, 0.6, 0.7])
        selected = select_operating_point(result)
        # all three gammas hit F1 = 1.0 on this fixture; strictest wins
        assert selected.gamma == 0.7

    def test_feasibility_floor(self):
        pairs = separation_fixture()
        result = sweep(pairs, [0.6], [0.1], [0.2, 0.7])
        selected = select_operating_point(result, min_precision=1.0)
        assert selected.gamma == 0.7
        with pytest.raises(NoFeasiblePoint):
            select_operating_point(result, min_recall=1.1)


class TestDegenerateCounts:
    def test_vacuous_precision_above_all_scores(self):
        pairs = separation_fixture()
        point = evaluate_params(
            pairs, SimilarityParams(tau=0.6, delta=0.1, gamma=1.0)
        )
        assert point.tp == 0 and point.fp == 0
        assert point.precision == 1.0
        assert point.vacuous_precision
        assert point.recall == 0.0
        assert point.f1 == 0.0

    def test_no_positive_pairs_flags_recall(self):
        negatives = [p for p in separation_fixture() if not p.same_meaning]
        point = evaluate_params(negatives, GRID_PARAMS)
        assert point.no_positives
        assert point.recall == 0.0
        assert point.false_positive_rate == 0.0
        assert point.true_positive_rate == point.recall

    def test_all_correct_is_perfect(self):
        pairs = separation_fixture()
        point = evaluate_params(pairs, GRID_PARAMS)
        assert point.precision == point.recall == 1.0


class TestParetoFront:
    def test_single_point(self):
        point = evaluate_params(separation_fixture(), GRID_PARAMS)
        assert pareto_front([point]) == (point,)

    def test_sorted_by_precision_then_recall(self):
        pairs = separation_fixture()
        result = sweep(pairs, [0.6], [0.1], [0.3, 0.7])
        precisions = [p.precision for p in result.pareto_front]
        assert precisions == sorted(precisions, reverse=True)


class TestLabeledPair:
    def test_identical_tokens_rejected(self):
        with pytest.raises(ValueError):
            _pair("same words", "same words", True)

    def test_load_jsonl(self, tmp_path):
        path = tmp_path / "pairs.jsonl"
        records = [
            {"a": "Blunting of the left costophrenic angle.", "b": "Left costophrenic angle blunting.", "same_meaning": True},
            {"a": "Clear lungs.", "b": "Pleural effusion.", "same_meaning": False},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in records))
        pairs = load_labeled_pairs(path)
        assert [p.same_meaning for p in pairs] == [True, False]
        # default normalization strips the stopwords
        assert pairs[0].a.words == ("blunting", "left", "costophrenic", "angle")

    def test_load_drops_identical_pairs_with_warning(self, tmp_path, caplog):
        path = tmp_path / "pairs.jsonl"
        records = [
            {"a": "Clear lungs.", "b": "clear lungs", "same_meaning": True},
            {"a": "Clear lungs.", "b": "Effusion.", "same_meaning": False},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in records))
        with caplog.at_level(logging.WARNING, logger="labelforge.tuning"):
            pairs = load_labeled_pairs(path)
        assert len(pairs) == 1
        assert any("identical" in r.message for r in caplog.records)


class TestParseGrid:
    def test_comma_list(self):
        assert parse_grid("0.6, 0.75,0.9") == [0.6, 0.75, 0.9]

    def test_range_inclusive_endpoint(self):
        values = parse_grid("0.5..0.95:0.05")
        assert values[0] == 0.5
        assert values[-1] == 0.95
        assert len(values) == 10

    def test_range_endpoint_not_on_step_stops_short(self):
        assert parse_grid("0.5..0.61:0.05") == [0.5, 0.55, 0.6]

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            parse_grid("0.5..0.9:0")
        with pytest.raises(ValueError):
            parse_grid("0.5..0.9")

    def test_bad_number_rejected(self):
        with pytest.raises(ValueError):
            parse_grid("a,b")
