"""Learning a legal/illegal boundary for spoofing under heavy class imbalance.

A small tanh-output network scores each order ``x = [duration, size]`` with a
legality value in [-1, 1]; negative means Prohibited. Training minimizes a
class-weighted hinge loss where a sanctioned order weighs as much as fifty
normal ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, as_tensor
from ..metrics import confusion_metrics
from ..optim import Adam
from ..simgen import OrderBookDataset, make_rng
from . import value_and_grad

PERMITTED = "Permitted"
PROHIBITED = "Prohibited"
PROBE_POINTS = ((0.5, 0.5), (0.9, 0.9), (0.05, 0.1), (0.05, 0.9))


@dataclass(frozen=True)
class HingeConfig:
    weight_normal: float = 1.0
    weight_sanction: float = 50.0
    margin: float = 1.0

    def __post_init__(self):
        if not (self.weight_normal > 0 and self.weight_sanction > 0):
            raise ValueError("class weights must be positive")


def _layer(rng: np.random.Generator, fan_in: int, fan_out: int):
    b = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-b, b, (fan_in, fan_out)), rng.uniform(-b, b, fan_out)


@dataclass
class DeonticNet:
    params: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def init(cls, rng: np.random.Generator, hidden: int = 32) -> "DeonticNet":
        p = {}
        for name, (i, o) in (("1", (2, hidden)), ("2", (hidden, hidden)), ("3", (hidden, 1))):
            p["w" + name], p["b" + name] = _layer(rng, i, o)
        return cls(p)

    def forward(self, x, params=None) -> Tensor:
        p = params if params is not None else {k: Tensor(v) for k, v in self.params.items()}
        # inputs are rescaled from [0, 1] to [-1, 1] before the first layer
        X = as_tensor(2.0 * np.asarray(x, dtype=np.float64).reshape(-1, 2) - 1.0)
        n = X.shape[0]

        def dense(h, w, b):
            return h @ p[w] + p[b].reshape(1, -1).broadcast_to((n, p[b].shape[0]))

        h = dense(X, "w1", "b1").relu()
        h = dense(h, "w2", "b2").relu()
        return dense(h, "w3", "b3").tanh().reshape(n)

    def __call__(self, x) -> np.ndarray:
        return self.forward(x).value


def legality(net: DeonticNet, duration: float, size: float) -> float:
    return float(net([[duration, size]])[0])


def verdict(score: float) -> str:
    return PERMITTED if score >= 0 else PROHIBITED


def hinge_loss(scores: Tensor, labels, config: HingeConfig = HingeConfig()) -> Tensor:
    """Mean of ``w_i * max(0, margin - y_i * score_i)``."""
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +1 or -1")
    w = np.where(y < 0, config.weight_sanction, config.weight_normal)
    return (as_tensor(w) * (config.margin - as_tensor(y) * scores).relu()).mean()


@dataclass
class TrainLog:
    epoch: list[int] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    recall: list[float] = field(default_factory=list)


def detection(net: DeonticNet, dataset: OrderBookDataset) -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy) of Prohibited verdicts against true spoofs."""
    return confusion_metrics(net(dataset.features) < 0, dataset.true_spoof)


def train(
    dataset: OrderBookDataset,
    config: HingeConfig = HingeConfig(),
    epochs: int = 1000,
    lr: float = 0.003,
    batch_size: int | None = None,
    hidden: int = 32,
    seed: int = 42,
    log_every: int = 10,
) -> tuple[DeonticNet, TrainLog]:
    """Full-batch Adam by default; an integer ``batch_size`` trains on shuffled mini-batches."""
    net = DeonticNet.init(make_rng(seed, "deontic-init"), hidden)
    rng = make_rng(seed, "deontic-batches")
    X, y = dataset.features, dataset.labels
    n = len(y)
    bs = n if batch_size is None else int(batch_size)
    opt = Adam(lr)
    log = TrainLog()
    log.epoch.append(0)
    log.loss.append(hinge_loss(net.forward(X), y, config).item())
    log.recall.append(detection(net, dataset)[1])
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n) if bs < n else np.arange(n)
        total = 0.0
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            loss, grads = value_and_grad(net.params, lambda p: hinge_loss(net.forward(X[idx], p), y[idx], config))
            total += loss * len(idx)
            opt.step(net.params, grads)
        if epoch % log_every == 0 or epoch == epochs:
            log.epoch.append(epoch)
            log.loss.append(total / n)
            log.recall.append(detection(net, dataset)[1])
    return net, log


def probe_boundary(net: DeonticNet, fixed_axis: str, fixed_value: float, grid) -> list[tuple[float, float, float, str]]:
    """Fix one input and sweep the other; rows are ``(duration, size, score, verdict)``."""
    if fixed_axis not in ("duration", "size"):
        raise ValueError("fixed_axis must be 'duration' or 'size'")
    g = np.asarray(grid, dtype=np.float64)
    if g.min() < 0 or g.max() > 1 or not 0 <= fixed_value <= 1:
        raise ValueError("probe inputs must lie in [0, 1]")
    fv = np.full_like(g, fixed_value)
    pts = np.stack([fv, g] if fixed_axis == "duration" else [g, fv], axis=1)
    s = net(pts)
    return [(float(d), float(z), float(v), verdict(v)) for (d, z), v in zip(pts, s)]


def boundary_grid(net: DeonticNet, steps: int = 21) -> list[tuple[float, float, float, str]]:
    g = np.linspace(0.0, 1.0, steps)
    D, S = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([D.ravel(), S.ravel()], axis=1)
    s = net(pts)
    return [(float(d), float(z), float(v), verdict(v)) for (d, z), v in zip(pts, s)]


@dataclass
class DeonticResult:
    net: DeonticNet
    log: TrainLog
    precision: float
    recall: float
    f1: float
    accuracy: float
    probes: list[tuple[float, float, float, str]]


def run(dataset: OrderBookDataset, seed: int = 42, config: HingeConfig = HingeConfig(), **kw) -> DeonticResult:
    net, log = train(dataset, config, seed=seed, **kw)
    p, r, f1, acc = detection(net, dataset)
    probes = [(d, s, legality(net, d, s), verdict(legality(net, d, s))) for d, s in PROBE_POINTS]
    return DeonticResult(net, log, p, r, f1, acc, probes)


def tables(result: DeonticResult) -> dict:
    log = (("epoch", "loss", "recall"), list(zip(result.log.epoch, result.log.loss, result.log.recall)))
    grid = (("duration", "size", "score", "verdict"), boundary_grid(result.net))
    return {"deontic_log.csv": log, "boundary_grid.csv": grid}


def headline(result: DeonticResult) -> dict:
    return {
        "precision": result.precision,
        "recall": result.recall,
        "f1": result.f1,
        "accuracy": result.accuracy,
        "final_loss": result.log.loss[-1],
        "probes": [{"duration": d, "size": s, "score": v, "verdict": t} for d, s, v, t in result.probes],
    }
