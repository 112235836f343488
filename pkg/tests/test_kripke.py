import itertools
import json

import numpy as np
import pytest

from dmlkit.autodiff import ShapeError, Tape, Tensor
from dmlkit.kripke import KripkeStructure, axiom_loss, box, diamond


def box_loops(A, phi):
    n = len(phi)
    return np.array([min(min(1.0, 1.0 - A[w, v] + phi[v]) for v in range(n)) for w in range(n)])


def diamond_loops(A, phi):
    n = len(phi)
    return np.array([max(A[w, v] * phi[v] for v in range(n)) for w in range(n)])


def test_box_diamond_two_world_example():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    phi = np.array([0.3, 0.8])
    np.testing.assert_allclose(box(A, phi).value, [0.8, 1.0])
    np.testing.assert_allclose(diamond(A, phi).value, [0.8, 0.0])


def test_vacuous_and_empty_access():
    phi = np.array([0.1, 0.6, 0.9])
    np.testing.assert_array_equal(box(np.zeros((3, 3)), phi).value, np.ones(3))
    np.testing.assert_array_equal(diamond(np.zeros((3, 3)), phi).value, np.zeros(3))


def test_self_loop_identity():
    phi = np.array([0.1, 0.6, 0.9])
    np.testing.assert_allclose(box(np.eye(3), phi).value, phi)


def test_diamond_of_true_is_row_max():
    A = np.random.default_rng(1).random((4, 4))
    np.testing.assert_allclose(diamond(A, np.ones(4)).value, A.max(axis=1))


def test_brute_force_oracle():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(1, 5))
        A, phi = rng.random((n, n)), rng.random(n)
        assert np.max(np.abs(box(A, phi).value - box_loops(A, phi))) <= 1e-12
        assert np.max(np.abs(diamond(A, phi).value - diamond_loops(A, phi))) <= 1e-12


def test_crisp_duality_on_quarter_grid():
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    vals = [np.array(v) for v in itertools.product(grid, repeat=3)]
    for bits in itertools.product((0.0, 1.0), repeat=9):
        A = np.array(bits).reshape(3, 3)
        for phi in vals:
            np.testing.assert_allclose(box(A, phi).value, 1.0 - diamond(A, 1.0 - phi).value, atol=1e-12)


def test_duality_not_claimed_for_fractional_access():
    # box gives min(1, 0.5 + 0.5) = 1, while 1 - diamond(not phi) = 1 - 0.25
    A = np.full((2, 2), 0.5)
    phi = np.array([0.5, 0.5])
    np.testing.assert_allclose(box(A, phi).value, [1.0, 1.0])
    assert not np.allclose(box(A, phi).value, 1.0 - diamond(A, 1.0 - phi).value)


def test_monotone_in_valuation():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        A, phi = rng.random((n, n)), rng.random(n)
        up = phi.copy()
        j = rng.integers(n)
        up[j] = min(1.0, up[j] + rng.random() * 0.5)
        assert np.all(box(A, up).value >= box(A, phi).value - 1e-15)
        assert np.all(diamond(A, up).value >= diamond(A, phi).value - 1e-15)


def test_more_access_to_false_world_cannot_raise_necessity():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = 4
        A, phi = rng.random((n, n)), rng.random(n)
        w = int(rng.integers(n))
        tape = Tape()
        At = tape.variable(A)
        g = tape.backward(box(At, Tensor(phi))[w])[At]
        assert np.all(g[w] <= 0.0)
        assert np.all(np.delete(g, w, axis=0) == 0.0)


def test_accessibility_full_examples():
    k = KripkeStructure.full(["a", "b"], ["p"], [[0.2], [0.7]])
    np.testing.assert_array_equal(k.accessibility().value, np.full((2, 2), 0.5))
    k = KripkeStructure.full(["a", "b"], ["p"], [[0.2], [0.7]], init=2.5)
    np.testing.assert_allclose(k.accessibility().value, 1.0 / (1.0 + np.exp(-2.5)))
    assert k.accessibility().value[0, 0] == pytest.approx(0.924, abs=1e-3)


def test_embedding_symmetry_and_range():
    k = KripkeStructure.embedding(["a", "b", "c"], ["p"], [[0.1], [0.5], [0.9]], dim=4, hidden=6, rng=np.random.default_rng(0))
    A = k.accessibility().value
    assert A.shape == (3, 3) and np.all((A >= 0) & (A <= 1))
    # identical embeddings and a symmetric scorer give symmetric access
    p = k.params
    p["embed"][1] = p["embed"][0]
    p["w_dst"] = p["w_src"].copy()
    A = k.accessibility().value
    assert A[0, 1] == pytest.approx(A[1, 0])
    assert A[0, 2] == pytest.approx(A[2, 0])


def test_embedding_is_trainable():
    k = KripkeStructure.embedding(["a", "b"], ["p"], [[0.0], [1.0]], rng=np.random.default_rng(2))
    tape = Tape()
    params = {name: tape.variable(v) for name, v in k.params.items()}
    loss = k.accessibility(params).sum()
    g = tape.backward(loss)
    assert any(np.any(g[t] != 0) for t in params.values())


def test_necessity_possibility_by_label():
    k = KripkeStructure.full(["a", "b"], ["p", "q"], [[0.3, 1.0], [0.8, 0.0]], logits=[[-50.0, 50.0], [-50.0, -50.0]])
    np.testing.assert_allclose(k.necessity("p").value, [0.8, 1.0], atol=1e-12)
    np.testing.assert_allclose(k.possibility(0).value, [0.8, 0.0], atol=1e-12)
    with pytest.raises(KeyError):
        k.necessity("r")
    with pytest.raises(IndexError):
        k.possibility(2)


def test_validation():
    with pytest.raises(ValueError):
        KripkeStructure.full(["a", "a"], ["p"], [[0.1], [0.2]])
    with pytest.raises(ValueError):
        KripkeStructure.full(["a"], ["p"], [[1.5]])
    with pytest.raises(ShapeError):
        KripkeStructure.full(["a", "b"], ["p"], [[0.1]])


def test_axiom_loss_examples():
    k = KripkeStructure.full(["a", "b"], ["p"], [[0.0], [0.0]])
    assert axiom_loss(k, [0.2, 0.3], [0.5, 0.9]).item() == 0.0
    assert axiom_loss(k, [0.9, 0.9], [0.0, 0.0], weight=0.0).item() == 0.0
    assert axiom_loss(k, [0.6, 0.4], [0.1, 0.3], weight=2.0).item() == pytest.approx(0.6)
    with pytest.raises(ShapeError):
        axiom_loss(k, [0.1, 0.2, 0.3], [0.0, 0.0])
    with pytest.raises(ValueError):
        axiom_loss(k, [0.1, 0.2], [0.0, 0.0], weight=-1.0)


def test_axiom_loss_with_modal_callable_trains_access():
    # diamond p -> q at every world; b is the only p-world and q is false everywhere
    k = KripkeStructure.full(["a", "b"], ["p", "q"], [[0.0, 0.0], [1.0, 0.0]])
    tape = Tape()
    params = {"logits": tape.variable(k.params["logits"])}
    loss = axiom_loss(k, lambda kk, p: kk.possibility("p", p), lambda kk, p: kk.column("q"), params=params)
    g = tape.backward(loss)[params["logits"]]
    # only links into the p-true world b carry gradient, and they push access down
    assert np.all(g[:, 1] > 0) and np.all(g[:, 0] == 0)


def test_json_round_trip():
    k = KripkeStructure.full(["a", "b"], ["p"], [[0.2], [0.7]], logits=[[1.0, -1.0], [0.5, 0.0]])
    d = json.loads(k.to_json())
    assert d["worlds"] == ["a", "b"] and d["kind"] == "full"
    np.testing.assert_allclose(d["accessibility"], k.accessibility().value)
    k2 = KripkeStructure.from_dict(d)
    np.testing.assert_array_equal(k2.accessibility().value, k.accessibility().value)
