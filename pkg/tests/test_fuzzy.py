import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmlkit.autodiff import Tape
from dmlkit.fuzzy import TruthRangeError, and_l, contradiction_loss, implies_l, not_l

GRID = [k / 20 for k in range(21)]
unit = st.floats(0.0, 1.0)


@pytest.mark.parametrize("a,b,expect", [(0.7, 1.0, 0.7), (0.3, 0.4, 0.0), (0.95, 0.92, 0.87)])
def test_and_examples(a, b, expect):
    assert and_l(a, b).item() == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("a,b,expect", [(0.5, 0.5, 1.0), (1.0, 0.0, 0.0), (0.8, 0.5, 0.7)])
def test_implies_examples(a, b, expect):
    assert implies_l(a, b).item() == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("a,expect", [(0.0, 1.0), (0.5, 0.5), (0.75, 0.25)])
def test_not_examples(a, expect):
    assert not_l(a).item() == expect


@pytest.mark.parametrize("a,c,expect", [(0.3, 0.9, 0.0), (1.0, 0.0, 1.0), (0.87, 0.0, 0.87)])
def test_contradiction_examples(a, c, expect):
    assert contradiction_loss(a, c).item() == pytest.approx(expect)


def test_out_of_range_rejected():
    for bad in (-0.01, 1.01, float("nan")):
        with pytest.raises(TruthRangeError):
            and_l(bad, 0.5)
        with pytest.raises(TruthRangeError):
            implies_l(0.5, bad)
    # tiny overshoot from floating point noise is tolerated
    assert and_l(1.0 + 1e-12, 1.0).item() == pytest.approx(1.0)


def test_associativity_on_grid():
    for a, b, c in itertools.product(GRID, repeat=3):
        lhs = and_l(and_l(a, b).item(), c).item()
        rhs = and_l(a, and_l(b, c).item()).item()
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_contradiction_is_one_minus_implication_on_grid():
    A, B = np.meshgrid(GRID, GRID, indexing="ij")
    np.testing.assert_allclose(contradiction_loss(A, B).value, 1.0 - implies_l(A, B).value, atol=1e-12)


@given(unit, unit)
def test_results_stay_in_unit_interval(a, b):
    for v in (and_l(a, b).item(), implies_l(a, b).item(), not_l(a).item()):
        assert 0.0 <= v <= 1.0


@given(unit, unit)
def test_implication_is_one_when_antecedent_below(a, b):
    lo, hi = min(a, b), max(a, b)
    assert implies_l(lo, hi).item() == 1.0


def test_contradiction_gradient():
    tape = Tape()
    a, c = tape.variable(0.8), tape.variable(0.3)
    g = tape.backward(contradiction_loss(a, c))
    assert (g[a], g[c]) == (1.0, -1.0)
    tape = Tape()
    a, c = tape.variable(0.2), tape.variable(0.3)
    g = tape.backward(contradiction_loss(a, c))
    assert (g[a], g[c]) == (0.0, 0.0)
