import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lesionfusion.errors import DegenerateLabels, NoPositives
from lesionfusion.metrics import (
    EvalReport,
    auc_pair_count,
    auc_trapezoid,
    average_precision,
    evaluate,
    mean_auc,
    roc_points,
    write_roc_csv,
)


def pairs(pos, neg):
    return [(s, True) for s in pos] + [(s, False) for s in neg]


def test_roc_perfect_and_wrong():
    assert roc_points(pairs([0.8], [0.2])).points == [(0, 0), (0, 1), (1, 1)]
    assert roc_points(pairs([0.2], [0.8])).points == [(0, 0), (1, 0), (1, 1)]


def test_roc_four_samples():
    curve = roc_points(pairs([0.8, 0.3], [0.6, 0.1]))
    assert curve.points == [(0, 0), (0, 0.5), (0.5, 0.5), (0.5, 1), (1, 1)]
    assert curve.thresholds.tolist() == [0.8, 0.6, 0.3, 0.1]
    assert auc_trapezoid(curve) == 0.75


def test_roc_ties_single_diagonal_step():
    curve = roc_points(pairs([0.5, 0.9], [0.5, 0.1]))
    assert curve.points == [(0, 0), (0, 0.5), (0.5, 1), (1, 1)]
    assert auc_trapezoid(curve) == auc_pair_count(pairs([0.5, 0.9], [0.5, 0.1])) == 0.875


def test_auc_extremes():
    assert auc_trapezoid(roc_points(pairs([0.8], [0.2]))) == 1.0
    assert auc_trapezoid(roc_points(pairs([0.2], [0.8]))) == 0.0


def test_pair_count_examples():
    assert auc_pair_count(pairs([0.8, 0.3], [0.6, 0.1])) == 0.75
    assert auc_pair_count(pairs([0.5], [0.5])) == 0.5
    assert auc_pair_count(pairs([0.9, 0.8], [0.1])) == 1.0


@pytest.mark.parametrize("fn", [roc_points, auc_pair_count])
def test_degenerate(fn):
    with pytest.raises(DegenerateLabels):
        fn(pairs([0.1, 0.2], []))
    with pytest.raises(DegenerateLabels):
        fn(pairs([], [0.3]))


def step_ap(labels_ranked):
    """Reference AP: sum over ranks of recall increment times precision."""
    n_pos = sum(labels_ranked)
    ap, hits, prev_recall = 0.0, 0, 0.0
    for k, y in enumerate(labels_ranked, start=1):
        if y:
            hits += 1
            recall = hits / n_pos
            ap += (recall - prev_recall) * hits / k
            prev_recall = recall
    return ap


def test_ap_examples():
    assert average_precision([(0.8, True), (0.6, False), (0.3, True), (0.1, False)]) == \
        pytest.approx(5 / 6, abs=1e-15)
    assert average_precision(pairs([0.9, 0.8], [0.2, 0.1])) == 1.0
    assert average_precision([(0.9, False), (0.8, False), (0.7, False), (0.1, True)]) == 0.25
    with pytest.raises(NoPositives):
        average_precision(pairs([], [0.5]))


def test_ap_ties_follow_input_order():
    # equal scores: the earlier pair (lower id) ranks first
    assert average_precision([(0.5, True), (0.5, False)]) == 1.0
    assert average_precision([(0.5, False), (0.5, True)]) == 0.5


def test_mean_auc():
    assert mean_auc(0.924, 0.993) == 0.9585
    assert round(mean_auc(0.924, 0.993), 3) in (0.958, 0.959)
    assert mean_auc(1.0, 1.0) == 1.0
    assert mean_auc(0.0, 1.0) == 0.5


scored = st.lists(st.tuples(st.integers(0, 20).map(lambda k: k / 20), st.booleans()),
                  min_size=2, max_size=60).filter(
    lambda ps: any(y for _, y in ps) and not all(y for _, y in ps))


@settings(max_examples=300, deadline=None)
@given(scored)
def test_trapezoid_equals_pair_count(ps):
    assert abs(auc_trapezoid(roc_points(ps)) - auc_pair_count(ps)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(scored)
def test_roc_curve_invariants(ps):
    curve = roc_points(ps)
    assert curve.points[0] == (0, 0) and curve.points[-1] == (1, 1)
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    assert np.all(np.diff(curve.thresholds) < 0)


@settings(max_examples=200, deadline=None)
@given(scored)
def test_monotone_transform_invariance(ps):
    g = [(np.exp(3 * s) - 7.0, y) for s, y in ps]
    assert abs(auc_pair_count(g) - auc_pair_count(ps)) <= 1e-12
    assert abs(average_precision(g) - average_precision(ps)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(scored)
def test_complement_symmetry(ps):
    flipped = [(s, not y) for s, y in ps]
    assert abs(auc_pair_count(flipped) + auc_pair_count(ps) - 1.0) <= 1e-12
    assert abs(auc_trapezoid(roc_points(flipped)) + auc_trapezoid(roc_points(ps)) - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(scored)
def test_ap_matches_reference_and_range(ps):
    order = sorted(range(len(ps)), key=lambda i: -ps[i][0])
    ap = average_precision(ps)
    assert ap == pytest.approx(step_ap([ps[i][1] for i in order]), abs=1e-12)
    assert 0.0 <= ap <= 1.0


def test_report_json_and_roc_csv(tmp_path):
    mm = pairs([0.9, 0.4], [0.5, 0.1])
    sk = pairs([0.8], [0.2, 0.3])
    report = evaluate(mm, sk, {"MM": 2, "SK": 1, "NCN": 1})
    assert report.mean_auc == (report.auc_mm + report.auc_sk) / 2
    report.write(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["ap_definition"] == "stepwise"
    assert data["auc_sk"] == 1.0 and data["auc_mm"] == 0.75
    assert EvalReport(**data) == report

    write_roc_csv(roc_points(mm), tmp_path / "roc.csv")
    lines = (tmp_path / "roc.csv").read_text().splitlines()
    assert lines[0] == "fpr,tpr,threshold"
    assert lines[1] == "0.0,0.0,inf"
    assert lines[-1] == "1.0,1.0,0.1"
