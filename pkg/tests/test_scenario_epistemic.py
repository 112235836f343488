import numpy as np
import pytest

from dmlkit.autodiff import Tape
from dmlkit.scenarios import epistemic as ep
from dmlkit.simgen import diplomacy


@pytest.fixture(scope="module")
def result():
    return ep.run(diplomacy(42))


def idx(name):
    return ep.TrustModel().agents.index(name)


def test_initial_trust():
    assert ep.TrustModel().trust() == pytest.approx(np.full((5, 5), 0.924), abs=1e-3)


@pytest.mark.parametrize(
    "intent,reality,expect",
    [(0.95, 1.0, 0.0), (0.95, 0.0, 0.874), (0.0, 0.0, 0.0), (0.0, 1.0, 0.0)],
)
def test_event_loss_examples(intent, reality, expect):
    loss, trust = ep.event_loss(ep.TrustModel(), idx("Turkey"), idx("England"), intent, reality)
    assert trust.item() == pytest.approx(0.9241, abs=1e-4)
    assert loss.item() == pytest.approx(expect, abs=1e-3)


def test_event_loss_gradient_flows_to_the_one_logit():
    m = ep.TrustModel()
    tape = Tape()
    z = tape.variable(m.logits[idx("England"), idx("Turkey")])
    loss, _ = ep.event_loss(m, idx("Turkey"), idx("England"), 0.95, 0.0, logit=z)
    s = 1 / (1 + np.exp(-2.5))
    assert tape.backward(loss)[z] == pytest.approx(s * (1 - s))


def test_event_loss_rejects_self_and_bad_truth():
    m = ep.TrustModel()
    with pytest.raises(ValueError):
        ep.event_loss(m, 1, 1, 0.9, 1.0)
    with pytest.raises(ValueError):
        ep.event_loss(m, 0, 1, 1.2, 1.0)


def test_first_lie_collapses_trust():
    m = ep.TrustModel()
    u = ep.observe(m, 0, idx("Turkey"), idx("England"), 0.95, 0.0, True)
    assert u.before == pytest.approx(0.924, abs=1e-3)
    assert u.after < 0.05 and u.loss < 1e-3
    # a second lie to the same receiver barely moves it
    u2 = ep.observe(m, 1, idx("Turkey"), idx("England"), 0.95, 0.0, True)
    assert abs(u2.delta) <= 0.01


def test_honest_message_changes_nothing():
    m = ep.TrustModel()
    before = m.logits.copy()
    u = ep.observe(m, 0, idx("France"), idx("Italy"), 0.95, 1.0)
    assert u.delta == 0.0 and u.iterations == 0
    np.testing.assert_array_equal(m.logits, before)


def test_default_run_matrix(result):
    T = result.trust
    tur = idx("Turkey")
    for name in ("France", "Germany", "England"):
        assert T[idx(name), tur] < 0.05
    assert T[idx("Italy"), tur] == pytest.approx(0.924, abs=1e-3)
    deceived = {(idx(n), tur) for n in ("France", "Germany", "England")}
    for i in range(5):
        for j in range(5):
            if (i, j) not in deceived:
                assert 0.87 <= T[i, j] <= 0.97


def test_trace_invariants(result):
    for u in result.trace:
        assert u.after <= u.before + 1e-15  # never increases
        if not u.is_lie:
            assert u.delta == 0.0
    np.testing.assert_array_equal(np.diag(result.model.logits), ep.INIT_LOGIT)


def test_lie_only_touches_receiver_row():
    m = ep.TrustModel()
    before = m.trust()
    ep.observe(m, 0, idx("Turkey"), idx("England"), 0.95, 0.0, True)
    after = m.trust()
    changed = np.argwhere(after != before)
    assert changed.tolist() == [[idx("England"), idx("Turkey")]]


def test_no_lies_keeps_matrix_uniform():
    res = ep.run(diplomacy(42, lie_prob=0.0))
    np.testing.assert_allclose(res.trust, 1 / (1 + np.exp(-2.5)))


def test_tables_and_headline(result):
    t = ep.tables(result)
    header, rows = t["trust_matrix.csv"]
    assert header[0] == "truster" and len(rows) == 5
    header, rows = t["trust_trace.csv"]
    assert header == ("step", "sender", "receiver", "is_lie", "before", "after") and len(rows) == 50
    h = ep.headline(result)
    assert set(h["trust_in_turkey"]) == {"France", "Germany", "Italy", "England"}
    assert h["first_lie"]["after"] < 0.05
