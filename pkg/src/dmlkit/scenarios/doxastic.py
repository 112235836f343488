"""Per-agent confidence calibration and hallucination detection.

Each agent ``a`` has a calibration factor ``theta_a = 2 * sigmoid(raw_a)`` that
rescales its reported confidence into a belief::

    B = sigmoid(log(c + eps) + log(theta + eps))

Training penalizes strong belief in wrong answers, rewards belief overall and
pulls every theta toward the neutral value 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, as_tensor
from ..metrics import MetricsReport, binary_metrics, confusion_metrics, pr_curve_auc
from ..optim import Adam
from ..simgen import QA_PROFILES, QADataset, make_rng
from . import value_and_grad

EPS = 1e-6
NAIVE_THRESHOLD = 0.7


@dataclass(frozen=True)
class DoxasticLossConfig:
    lambda_correct: float = 1.0
    lambda_reg: float = 0.1

    def __post_init__(self):
        if self.lambda_correct < 0 or self.lambda_reg < 0:
            raise ValueError("loss weights must be non-negative")


@dataclass
class CalibrationModel:
    raw: np.ndarray = field(default_factory=lambda: np.zeros(5))

    @classmethod
    def neutral(cls, n_agents: int) -> "CalibrationModel":
        return cls(np.zeros(n_agents))

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * as_tensor(self.raw).sigmoid().value


def _theta(raw: Tensor) -> Tensor:
    return 2.0 * raw.sigmoid()


def calibrated_belief(theta, confidence) -> Tensor:
    """Belief for confidence ``c`` under calibration ``theta`` (elementwise)."""
    c = as_tensor(confidence)
    if np.any(c.value < 0) or np.any(c.value > 1):
        raise ValueError("confidence must lie in [0, 1]")
    return ((c + EPS).log() + (as_tensor(theta) + EPS).log()).sigmoid()


def belief(model: CalibrationModel, agent, confidence) -> np.ndarray:
    return calibrated_belief(model.theta[np.asarray(agent)], confidence).value


def interaction_loss(theta, confidence, truth, config: DoxasticLossConfig = DoxasticLossConfig()) -> Tensor:
    """Per-interaction loss terms, summed elementwise (not reduced).

    ``relu(B + (1 - phi) - 1) + lambda_c * relu(1 - B - phi + 1) + lambda_r * |theta - 1|``
    """
    phi = np.asarray(truth, dtype=np.float64)
    if not np.isin(phi, (0.0, 1.0)).all():
        raise ValueError("truth values must be 0 or 1")
    theta = as_tensor(theta)
    B = calibrated_belief(theta, confidence)
    halluc = (B - phi).relu()
    keep = (2.0 - B - phi).relu()
    return halluc + config.lambda_correct * keep + config.lambda_reg * (theta - 1.0).abs()


def train(
    dataset: QADataset,
    config: DoxasticLossConfig = DoxasticLossConfig(),
    epochs: int = 200,
    lr: float = 0.01,
    batch_size: int = 50,
    seed: int = 42,
) -> CalibrationModel:
    """Adam over shuffled mini-batches of interactions, mean loss per batch."""
    model = CalibrationModel.neutral(dataset.n_agents)
    params = {"raw": model.raw}
    rng = make_rng(seed, "doxastic-shuffle")
    agent = np.asarray(dataset.agent)
    conf = np.asarray(dataset.confidence, dtype=np.float64)
    phi = np.asarray(dataset.correct, dtype=np.float64)
    opt = Adam(lr)
    n = len(dataset)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]

            def loss_fn(p, idx=idx):
                return interaction_loss(_theta(p["raw"])[agent[idx]], conf[idx], phi[idx], config).mean()

            _, grads = value_and_grad(params, loss_fn)
            opt.step(params, grads)
    model.raw = params["raw"]
    return model


def hallucination_scores(model: CalibrationModel, dataset: QADataset, kind: str = "halluc") -> np.ndarray:
    """Detection scores per interaction.

    ``"halluc"`` is the hallucination loss component (belief on wrong answers,
    0 on correct ones) and needs verified correctness. ``"belief"`` is the
    calibrated belief alone, usable before correctness is known.
    """
    B = belief(model, dataset.agent, dataset.confidence)
    if kind == "belief":
        return B
    if kind == "halluc":
        return np.maximum(B - dataset.correct.astype(np.float64), 0.0)
    raise ValueError(f"unknown score kind {kind!r}")


def detect(model: CalibrationModel, dataset: QADataset, kind: str = "halluc") -> MetricsReport:
    scores = hallucination_scores(model, dataset, kind)
    curve, auc, thr = pr_curve_auc(scores, dataset.hallucination)
    p, r, f1, acc = binary_metrics(scores, dataset.hallucination, thr)
    return MetricsReport(p, r, f1, acc, curve, auc, extras={"threshold": thr, "score": kind})


def naive_baseline(dataset: QADataset, threshold: float = NAIVE_THRESHOLD) -> tuple[float, float, float, float]:
    """Flag every interaction whose raw confidence exceeds ``threshold``."""
    return confusion_metrics(dataset.confidence > threshold, dataset.hallucination)


def reliability_bins(dataset: QADataset, agent: int | None = None, n_bins: int = 10):
    """Rows ``(bin, mean_confidence, accuracy, count)``; empty bins report NaN."""
    if n_bins < 2:
        raise ValueError("need at least two bins")
    mask = np.ones(len(dataset), dtype=bool) if agent is None else dataset.agent == agent
    c = dataset.confidence[mask]
    ok = dataset.correct[mask]
    b = np.minimum((c * n_bins).astype(int), n_bins - 1)
    rows = []
    for k in range(n_bins):
        sel = b == k
        n = int(sel.sum())
        rows.append((k, float(c[sel].mean()) if n else float("nan"), float(ok[sel].mean()) if n else float("nan"), n))
    return rows


@dataclass
class DoxasticResult:
    model: CalibrationModel
    report: MetricsReport
    baseline: tuple[float, float, float, float]
    dataset: QADataset


def run(dataset: QADataset, seed: int = 42, config: DoxasticLossConfig = DoxasticLossConfig(), score: str = "halluc", **kw) -> DoxasticResult:
    model = train(dataset, config, seed=seed, **kw)
    return DoxasticResult(model, detect(model, dataset, score), naive_baseline(dataset), dataset)


def tables(result: DoxasticResult) -> dict:
    th = result.model.theta
    theta = (("agent", "profile", "theta"), [(a, QA_PROFILES[a] if a < len(QA_PROFILES) else "", float(t)) for a, t in enumerate(th)])
    pr = (("threshold", "precision", "recall"), list(result.report.pr_curve))
    rel = []
    for a in range(result.dataset.n_agents):
        rel += [(a,) + r for r in reliability_bins(result.dataset, a)]
    rel += [("all",) + r for r in reliability_bins(result.dataset)]
    return {
        "theta.csv": theta,
        "pr_curve.csv": pr,
        "reliability.csv": (("agent", "bin", "confidence", "accuracy", "count"), rel),
    }


def headline(result: DoxasticResult) -> dict:
    r = result.report
    bp, br, bf, _ = result.baseline
    return {
        "theta": [float(t) for t in result.model.theta],
        "precision": r.precision,
        "recall": r.recall,
        "f1": r.f1,
        "pr_auc": r.pr_auc,
        "threshold": r.extras["threshold"],
        "baseline": {"precision": bp, "recall": br, "f1": bf},
    }
