import numpy as np
import pytest

from dmlkit.autodiff import Tape
from dmlkit.scenarios import temporal as tm
from dmlkit.simgen import BACKGROUND, EVENT_NAMES, ROOT_CAUSE, SYMPTOMS, traces


@pytest.fixture(scope="module")
def data():
    return traces(42)


@pytest.fixture(scope="module")
def result(data):
    return tm.run(data)


def model_with(scores):
    s = np.clip(np.asarray(scores, dtype=float), 1e-12, 1 - 1e-12)
    return tm.CausalModel(np.log(s / (1 - s)))


def test_trace_loss_examples():
    one = np.zeros(13, dtype=bool)
    one[0] = True
    m = model_with([1.0] + [0.0] * 12)
    assert tm.trace_loss(m, one, True).item() == pytest.approx(0.0, abs=1e-9)
    assert tm.trace_loss(model_with(np.zeros(13)), one, True).item() == pytest.approx(1.0)
    two = np.zeros(13, dtype=bool)
    two[[3, 4]] = True
    s = np.zeros(13)
    s[[3, 4]] = [0.3, 0.2]
    assert tm.trace_loss(model_with(s), two, False).item() == pytest.approx(0.5)
    with pytest.raises(ValueError):
        tm.trace_loss(m, [], True)


def test_trace_loss_gradient_matches_fd():
    rng = np.random.default_rng(0)
    present = rng.random((20, 13)) < 0.5
    crash = rng.random(20) < 0.5
    x0 = rng.normal(0, 1, 13)

    def f(x):
        return tm.dataset_loss(tm.CausalModel(x), present, crash).item()

    tape = Tape()
    z = tape.variable(x0)
    g = tape.backward(tm.dataset_loss(tm.CausalModel(x0), present, crash, z.sigmoid()))[z]
    h = 1e-6
    fd = np.array([(f(x0 + h * e) - f(x0 - h * e)) / (2 * h) for e in np.eye(13)])
    np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-8)


def test_dropout_rates_and_edges(data):
    P = np.ones((10000, 13), dtype=bool)
    np.testing.assert_array_equal(tm.apply_dropout(P, np.random.default_rng(0), 0.0), P)
    out = tm.apply_dropout(P, np.random.default_rng(0), 1.0)
    assert not out[:, list(SYMPTOMS)].any()
    out = tm.apply_dropout(P, np.random.default_rng(1), 0.4)
    assert out[:, list(SYMPTOMS)].mean() == pytest.approx(0.6, abs=0.02)
    others = [i for i in range(13) if i not in SYMPTOMS]
    assert out[:, others].all()
    # with crash flags only crash rows are masked
    masked = tm.apply_dropout(data.present, np.random.default_rng(2), 1.0, data.crash)
    np.testing.assert_array_equal(masked[~data.crash], data.present[~data.crash])
    with pytest.raises(ValueError):
        tm.apply_dropout(P, np.random.default_rng(0), 1.5)


def test_train_requires_both_classes(data):
    only_crash = type(data)(data.present[data.crash], data.timestamps[data.crash], data.crash[data.crash])
    with pytest.raises(ValueError):
        tm.train(only_crash, epochs=1)


def test_untrained_attention_is_uniform():
    _, att, _ = tm.explain(tm.CausalModel())
    np.testing.assert_allclose(att, 1 / 13)


def test_trained_scores(result):
    s = result.model.scores()
    assert s[ROOT_CAUSE] >= 0.95
    assert all(s[i] <= 0.65 for i in SYMPTOMS)
    assert all(s[ROOT_CAUSE] > s[i] for i in SYMPTOMS)
    assert s[list(BACKGROUND)].max() < 0.45
    _, att, ranked = tm.explain(result.model)
    assert ranked[0] == ROOT_CAUSE and att[ROOT_CAUSE] >= 0.99
    assert att.sum() == pytest.approx(1.0)


def test_loss_curve(result):
    losses = result.train.losses
    assert len(losses) == 1000 and losses[-1] < 0.01
    assert np.mean(losses[-50:]) < np.mean(losses[:50])
    assert EVENT_NAMES[result.train.top_cause[-1]] == EVENT_NAMES[ROOT_CAUSE]


def test_counterfactuals(result, data):
    ev = result.eval_present
    f, c, r = tm.counterfactual(result.model, ev, data.crash, ROOT_CAUSE)
    assert r >= 20
    for e in SYMPTOMS + (BACKGROUND[0],):
        f, c, _ = tm.counterfactual(result.model, ev, data.crash, e)
        assert abs(c - f) < 0.01


def test_counterfactual_redundant_cause_and_absent_event():
    m = model_with([1.0, 1.0] + [0.0] * 11)
    P = np.zeros((1, 13), dtype=bool)
    P[0, [0, 1]] = True
    f, c, r = tm.counterfactual(m, P, [True], 0)
    assert c == pytest.approx(f, abs=1e-9)
    with pytest.raises(ValueError):
        tm.counterfactual(m, P, [True], 5)


def test_tables(result):
    t = tm.tables(result)
    assert len(t["causality_scores.csv"][1]) == 13
    assert t["loss_curve.csv"][0] == ("epoch", "loss", "top_cause")
    assert [r[0] for r in t["counterfactual.csv"][1]] == [EVENT_NAMES[i] for i in (ROOT_CAUSE, *SYMPTOMS)]
