"""Root-cause analysis with learnable per-event-type causal attention.

Crash traces must be explained by at least one present cause, non-crash traces
should not contain causes at all::

    crash:      relu(1 - sum_e present[e] * score[e])
    non-crash:  sum_e present[e] * score[e]

Randomly masking the proximate symptoms during training (observability
dropout) leaves the always-present root cause as the only invariant
explanation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, as_tensor, softmax
from ..optim import Adam
from ..simgen import CANONICAL_TIME, EVENT_NAMES, ROOT_CAUSE, SYMPTOMS, TraceDataset, make_rng
from . import value_and_grad

ATTENTION_TEMPERATURE = 0.05


@dataclass
class CausalModel:
    logits: np.ndarray = field(default_factory=lambda: np.zeros(len(EVENT_NAMES)))
    event_names: list[str] = field(default_factory=lambda: list(EVENT_NAMES))

    def scores(self) -> np.ndarray:
        return as_tensor(self.logits).sigmoid().value


def _loss(scores: Tensor, present, crash) -> Tensor:
    P = np.asarray(present, dtype=np.float64)
    crash = np.asarray(crash, dtype=bool)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("need at least one trace")
    total = as_tensor(0.0)
    if crash.any():
        total = total + (1.0 - as_tensor(P[crash]) @ scores).relu().mean()
    if (~crash).any():
        total = total + (as_tensor(P[~crash]) @ scores).mean()
    return total


def trace_loss(model: CausalModel, present, crash: bool, scores: Tensor | None = None) -> Tensor:
    """Loss of a single trace given its (post-dropout) present flags."""
    p = np.asarray(present, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ValueError("empty trace")
    s = as_tensor(model.logits).sigmoid() if scores is None else scores
    return _loss(s, p.reshape(1, -1), [crash])


def dataset_loss(model: CausalModel, present, crash, scores: Tensor | None = None) -> Tensor:
    """Mean crash term plus mean non-crash term over a batch of traces."""
    s = as_tensor(model.logits).sigmoid() if scores is None else scores
    return _loss(s, present, crash)


def apply_dropout(present, rng: np.random.Generator, p: float = 0.4, crash=None) -> np.ndarray:
    """Clear each symptom flag independently with probability ``p``.

    Accepts one trace or a ``(n_traces, n_events)`` batch. When ``crash`` is
    given only those rows are masked.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("dropout probability must lie in [0, 1]")
    out = np.array(present, dtype=bool, copy=True)
    view = out.reshape(-1, out.shape[-1])
    rows = np.ones(view.shape[0], dtype=bool) if crash is None else np.asarray(crash, dtype=bool).reshape(-1)
    keep = rng.random((view.shape[0], len(SYMPTOMS))) >= p
    cols = list(SYMPTOMS)
    view[:, cols] = np.where(rows[:, None], view[:, cols] & keep, view[:, cols])
    return out


@dataclass
class TrainResult:
    model: CausalModel
    losses: list[float]
    top_cause: list[int]
    dropout: float


def train(
    dataset: TraceDataset,
    epochs: int = 1000,
    lr: float = 0.05,
    dropout: float = 0.4,
    seed: int = 42,
    model: CausalModel | None = None,
) -> TrainResult:
    if not (dataset.crash.any() and (~dataset.crash).any()):
        raise ValueError("training needs both crash and non-crash traces")
    model = model or CausalModel()
    rng = make_rng(seed, "temporal-dropout")
    opt = Adam(lr)
    params = {"logits": model.logits}
    losses, top = [], []
    for _ in range(epochs):
        present = apply_dropout(dataset.present, rng, dropout, dataset.crash)
        top.append(int(np.argmax(model.scores())))
        loss, grads = value_and_grad(params, lambda p: dataset_loss(model, present, dataset.crash, p["logits"].sigmoid()))
        losses.append(loss)
        opt.step(params, grads)
    model.logits = params["logits"]
    return TrainResult(model, losses, top, dropout)


def explain(model: CausalModel, present=None, temperature: float = ATTENTION_TEMPERATURE):
    """Scores, attention over present events, and event indices ranked by score."""
    scores = model.scores()
    present = np.ones_like(scores, dtype=bool) if present is None else np.asarray(present, dtype=bool)
    idx = np.flatnonzero(present)
    att = np.zeros_like(scores)
    att[idx] = softmax(as_tensor(scores[idx] / temperature)).value
    ranked = [int(i) for i in idx[np.argsort(-scores[idx], kind="stable")]]
    return scores, att, ranked


def counterfactual(model: CausalModel, present, crash, removed: int) -> tuple[float, float, float]:
    """Loss with and without event type ``removed`` in the crash traces.

    ``present`` is a batch of traces (typically a masked evaluation set). The
    ratio divides by the factual loss floored at 1e-12.
    """
    P = np.array(present, dtype=bool, copy=True)
    if P.ndim == 1:
        P = P[None, :]
        crash = [crash]
    crash = np.asarray(crash, dtype=bool).reshape(-1)
    if not P[crash, removed].any():
        raise ValueError(f"event type {removed} does not occur in the crash traces")
    factual = dataset_loss(model, P, crash).item()
    P[crash, removed] = False
    cf = dataset_loss(model, P, crash).item()
    return factual, cf, cf / max(factual, 1e-12)


def evaluation_set(dataset: TraceDataset, seed: int, dropout: float) -> np.ndarray:
    """Logged crash traces as seen at evaluation time: symptoms masked at the training rate."""
    return apply_dropout(dataset.present, make_rng(seed, "temporal-eval"), dropout, dataset.crash)


@dataclass
class TemporalResult:
    train: TrainResult
    eval_present: np.ndarray
    crash: np.ndarray
    counterfactuals: list[tuple[str, float, float, float]]

    @property
    def model(self) -> CausalModel:
        return self.train.model


def run(dataset: TraceDataset, seed: int = 42, epochs: int = 1000, lr: float = 0.05, dropout: float = 0.4) -> TemporalResult:
    tr = train(dataset, epochs=epochs, lr=lr, dropout=dropout, seed=seed)
    ev = evaluation_set(dataset, seed, dropout)
    cfs = []
    for e in (ROOT_CAUSE, *SYMPTOMS):
        f, c, r = counterfactual(tr.model, ev, dataset.crash, e)
        cfs.append((EVENT_NAMES[e], f, c, r))
    return TemporalResult(tr, ev, dataset.crash, cfs)


def tables(result: TemporalResult) -> dict:
    m = result.model
    s = m.scores()
    scores = (
        ("event_type", "event_name", "timestamp_canonical", "score"),
        [(i, n, CANONICAL_TIME.get(i, ""), float(s[i])) for i, n in enumerate(m.event_names)],
    )
    curve = (
        ("epoch", "loss", "top_cause"),
        [(i, l, m.event_names[t]) for i, (l, t) in enumerate(zip(result.train.losses, result.train.top_cause))],
    )
    cf = (("removed", "factual_loss", "counterfactual_loss", "ratio"), [tuple(r) for r in result.counterfactuals])
    return {"causality_scores.csv": scores, "loss_curve.csv": curve, "counterfactual.csv": cf}


def headline(result: TemporalResult) -> dict:
    s = result.model.scores()
    _, att, ranked = explain(result.model)
    return {
        "root_cause_score": float(s[ROOT_CAUSE]),
        "symptom_scores": [float(s[i]) for i in SYMPTOMS],
        "max_background_score": float(np.delete(s, [ROOT_CAUSE, *SYMPTOMS]).max()),
        "root_cause_attention": float(att[ROOT_CAUSE]),
        "top_cause": result.model.event_names[ranked[0]],
        "final_loss": float(result.train.losses[-1]) if result.train.losses else None,
        "counterfactual_ratio_root": float(result.counterfactuals[0][3]),
        "counterfactual_delta_symptoms": [float(c - f) for _, f, c, _ in result.counterfactuals[1:]],
    }
