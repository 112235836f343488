import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmlkit.metrics import binary_metrics, f1_score, mae, pr_curve_auc, threshold_report


def brute_pr(scores, labels):
    """Points (threshold, precision, recall) by direct counting."""
    s, y = np.asarray(scores), np.asarray(labels, dtype=bool)
    out = []
    for t in sorted(set(s)):
        pred = s >= t
        tp = np.sum(pred & y)
        out.append((t, tp / pred.sum(), tp / y.sum()))
    return out


def brute_auc(points):
    pts = sorted(points, key=lambda r: -r[0])  # descending threshold = ascending recall
    r = [0.0] + [p[2] for p in pts]
    p = [pts[0][1]] + [p[1] for p in pts]
    return sum((r[i + 1] - r[i]) * (p[i + 1] + p[i]) / 2 for i in range(len(pts)))


def test_f1_example():
    assert f1_score(0.844, 0.950) == pytest.approx(0.894, abs=5e-4)
    assert f1_score(0.0, 0.0) == 0.0


def test_perfect_and_all_negative():
    y = np.array([1, 0, 1, 0])
    assert binary_metrics([0.9, 0.1, 0.8, 0.2], y, 0.5) == (1.0, 1.0, 1.0, 1.0)
    p, r, f1, acc = binary_metrics([0.1, 0.1, 0.1, 0.1], y, 0.5)
    assert (p, r, f1, acc) == (0.0, 0.0, 0.0, 0.5)


def test_length_mismatch_and_bad_labels():
    with pytest.raises(ValueError):
        binary_metrics([0.1, 0.2], [1], 0.5)
    with pytest.raises(ValueError):
        binary_metrics([0.1, 0.2], [1, 2], 0.5)
    with pytest.raises(ValueError):
        mae([0.1], [0.1, 0.2])


def test_four_point_hand_case():
    s, y = [0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0]
    curve, auc, thr = pr_curve_auc(s, y)
    expect = brute_pr(s, y)
    assert [c[0] for c in curve] == [e[0] for e in expect]
    np.testing.assert_allclose([c[1:] for c in curve], [e[1:] for e in expect])
    # recall path 0 -> .5 -> .5 -> 1 -> 1 with precision 1, 1, .5, .667, .5
    assert auc == pytest.approx(0.5 * 1.0 + 0.5 * (0.5 + 2 / 3) / 2 + 0.0)
    assert auc == pytest.approx(brute_auc(expect))
    assert thr == 0.7


def test_perfect_separation_auc_one():
    _, auc, _ = pr_curve_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert auc == pytest.approx(1.0)


def test_random_scores_auc_near_half():
    rng = np.random.default_rng(0)
    y = np.arange(10000) % 2
    _, auc, _ = pr_curve_auc(rng.random(10000), y)
    assert abs(auc - 0.5) < 0.05


def test_no_positive_raises():
    with pytest.raises(ValueError):
        pr_curve_auc([0.1, 0.2], [0, 0])


def test_mae_examples():
    assert mae([0.2, 0.4], [0.2, 0.4]) == 0.0
    assert mae([0.3, 0.5], [0.2, 0.4]) == pytest.approx(0.1)
    assert mae([0, 1], [1, 0]) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.booleans()), min_size=2, max_size=25))
def test_curve_invariants(pairs):
    s = np.array([p[0] / 8 for p in pairs])
    y = np.array([p[1] for p in pairs])
    if not y.any():
        y[0] = True
    curve, auc, thr = pr_curve_auc(s, y)
    rec = [c[2] for c in curve]
    assert all(a >= b for a, b in zip(rec, rec[1:]))
    f1s = {c[0]: f1_score(c[1], c[2]) for c in curve}
    assert f1s[thr] >= max(f1s.values()) - 1e-12
    assert thr == min(t for t, f in f1s.items() if f >= max(f1s.values()) - 1e-12)
    assert auc == pytest.approx(brute_auc(brute_pr(s, y)))
    # monotone transform keeps the area
    _, auc2, _ = pr_curve_auc(np.exp(3 * s), y)
    assert auc2 == pytest.approx(auc)


def test_threshold_report():
    rep = threshold_report([0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0])
    assert rep.extras["threshold"] == 0.7
    assert rep.recall == 1.0 and rep.precision == pytest.approx(2 / 3)
    assert "pr_curve" not in rep.to_dict()
