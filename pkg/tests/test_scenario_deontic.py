import numpy as np
import pytest

from dmlkit.autodiff import Tape, Tensor
from dmlkit.scenarios import deontic as dn
from dmlkit.simgen import make_rng, orderbook


@pytest.fixture(scope="module")
def data():
    return orderbook(42)


@pytest.fixture(scope="module")
def result(data):
    return dn.run(data)


def test_hinge_examples():
    cfg = dn.HingeConfig()
    assert dn.hinge_loss(Tensor([1.0]), [1]).item() == 0.0
    assert dn.hinge_loss(Tensor([1.0]), [-1], cfg).item() == pytest.approx(100.0)
    assert dn.hinge_loss(Tensor([1.0, -1.0, 0.5]), [1, -1, 1]).item() == pytest.approx(0.5 / 3)
    with pytest.raises(ValueError):
        dn.hinge_loss(Tensor([0.1]), [0])


def test_config_validation():
    with pytest.raises(ValueError):
        dn.HingeConfig(weight_sanction=0.0)


def test_margin_satisfied_samples_have_zero_gradient():
    tape = Tape()
    s = tape.variable([1.0, -1.2, 0.3, -0.4])
    g = tape.backward(dn.hinge_loss(s, [1, -1, 1, -1]))[s]
    assert g[0] == 0.0 and g[1] == 0.0
    assert g[2] == pytest.approx(-0.25) and g[3] == pytest.approx(50 / 4)


def test_output_bounded_and_verdict_tie():
    net = dn.DeonticNet.init(make_rng(0, "t"))
    x = np.random.default_rng(0).uniform(-5, 5, (200, 2))
    out = net(x)
    assert np.all(np.abs(out) <= 1.0)
    assert dn.verdict(0.0) == dn.PERMITTED and dn.verdict(-1e-9) == dn.PROHIBITED


def test_training_outcome(result):
    assert result.recall == 1.0
    assert result.precision >= 0.80
    assert result.log.loss[-1] < 0.1
    assert result.log.epoch[0] == 0 and result.log.epoch[-1] == 1000


def test_probe_verdicts(result):
    expect = {(0.5, 0.5): dn.PERMITTED, (0.9, 0.9): dn.PERMITTED, (0.05, 0.1): dn.PERMITTED, (0.05, 0.9): dn.PROHIBITED}
    assert {(d, s): v for d, s, _, v in result.probes} == expect


def test_boundary_sweeps(result):
    rows = dn.probe_boundary(result.net, "duration", 0.05, [0.1, 0.3, 0.5, 0.7, 0.9])
    assert [r[3] for r in rows] == [dn.PERMITTED] * 4 + [dn.PROHIBITED]
    assert dn.probe_boundary(result.net, "size", 0.9, [0.5])[0][3] == dn.PERMITTED
    with pytest.raises(ValueError):
        dn.probe_boundary(result.net, "price", 0.5, [0.1])
    with pytest.raises(ValueError):
        dn.probe_boundary(result.net, "size", 0.5, [1.5])


def test_prohibited_region_is_the_fast_large_corner(result):
    grid = dn.boundary_grid(result.net)
    assert len(grid) == 441
    bad = [(d, s) for d, s, _, v in grid if v == dn.PROHIBITED]
    assert bad and all(d < 0.3 and s > 0.6 for d, s in bad)


@pytest.mark.slow
def test_sanction_weight_is_needed(data):
    # degraded: a missed spoof, or F1 below what recall 1 at precision 0.8 gives
    floor = 2 * 0.8 / 1.8
    flat = [dn.run(data, seed=s, config=dn.HingeConfig(weight_sanction=1.0)) for s in range(5)]
    assert sum(r.recall < 1.0 or r.f1 < floor for r in flat) >= 3


def test_tables(result):
    t = dn.tables(result)
    assert t["deontic_log.csv"][0] == ("epoch", "loss", "recall")
    assert len(t["boundary_grid.csv"][1]) == 441
    assert dn.headline(result)["recall"] == 1.0
