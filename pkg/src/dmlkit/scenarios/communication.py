"""Trust-weighted swarm consensus with a Say-Do tolerance band.

Each agent's trust is ``sigmoid(logit)``. A claim further than ``tau`` from the
verified truth costs its trust times the excess error, so agents inside the
band receive no gradient and persistently wrong agents are muted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, as_tensor
from ..fuzzy import check_truth
from ..metrics import MetricsReport, mae
from ..optim import SGD
from ..simgen import SwarmDataset, make_rng, swarm
from . import value_and_grad

INIT_LOGIT = 3.0
CONSENSUS_EPS = 1e-8


@dataclass
class SwarmTrustModel:
    logits: np.ndarray = field(default_factory=lambda: np.full(16, INIT_LOGIT))
    tau: float = 0.10

    @classmethod
    def fresh(cls, n_agents: int = 16, tau: float = 0.10) -> "SwarmTrustModel":
        return cls(np.full(n_agents, INIT_LOGIT), tau)

    @property
    def trust(self) -> np.ndarray:
        return as_tensor(self.logits).sigmoid().value


def consensus(trust, claims) -> np.ndarray:
    """Trust-weighted mean of the claims along the last axis."""
    t = np.asarray(trust, dtype=np.float64)
    c = check_truth(claims, "claims").value
    return (c * t).sum(axis=-1) / (t.sum() + CONSENSUS_EPS)


def cycle_loss(trust: Tensor, claims, truth: float, tau: float) -> Tensor:
    """``sum_i trust_i * relu(|claim_i - truth| - tau)``."""
    c = check_truth(claims, "claims")
    check_truth(truth, "truth")
    return (as_tensor(trust) * ((c - float(truth)).abs() - tau).relu()).sum()


@dataclass
class TrainResult:
    model: SwarmTrustModel
    trajectory: np.ndarray  # (epochs + 1, n_agents), row 0 before training


def train(
    dataset: SwarmDataset,
    epochs: int = 100,
    lr: float = 0.05,
    tau: float = 0.10,
    seed: int = 42,
) -> TrainResult:
    """Plain SGD, one step per cycle; each epoch visits every cycle once in shuffled order."""
    model = SwarmTrustModel.fresh(dataset.claims.shape[1], tau)
    params = {"logits": model.logits}
    rng = make_rng(seed, "swarm-shuffle")
    opt = SGD(lr)
    traj = [model.trust]
    for _ in range(epochs):
        for c in rng.permutation(len(dataset)):
            _, grads = value_and_grad(
                params, lambda p: cycle_loss(p["logits"].sigmoid(), dataset.claims[c], dataset.truth[c], tau)
            )
            opt.step(params, grads)
        traj.append(as_tensor(params["logits"]).sigmoid().value)
    model.logits = params["logits"]
    return TrainResult(model, np.array(traj))


def evaluate(model: SwarmTrustModel, heldout: SwarmDataset) -> MetricsReport:
    """MAE of weighted consensus against raw averaging, plus an oracle weighting."""
    weighted = consensus(model.trust, heldout.claims)
    raw = heldout.claims.mean(axis=1)
    oracle = consensus((~heldout.broken).astype(np.float64), heldout.claims)
    m_w, m_r, m_o = mae(weighted, heldout.truth), mae(raw, heldout.truth), mae(oracle, heldout.truth)
    return MetricsReport(
        mae=m_w,
        extras={"raw_mae": m_r, "oracle_mae": m_o, "mae_reduction": 1.0 - m_w / m_r if m_r > 0 else 0.0},
    )


def phase_annotate(trajectory: np.ndarray, broken, drop: float = 0.9, settle: float = 0.002):
    """Return ``(transition_start, converged)`` epochs, either may be None.

    Transition starts the first epoch a broken agent's trust falls below
    ``drop`` times its initial value; convergence is the first later epoch
    whose per-agent trust changes all stay under ``settle``.
    """
    T = np.asarray(trajectory)
    b = np.asarray(broken, dtype=bool)
    if not b.any():
        return None, None
    below = np.flatnonzero((T[:, b] < drop * T[0, b]).any(axis=1))
    if below.size == 0:
        return None, None
    start = int(below[0])
    delta = np.abs(np.diff(T, axis=0)).max(axis=1)
    later = np.flatnonzero(delta[start:] < settle)
    return start, (int(start + later[0] + 1) if later.size else None)


@dataclass
class CommunicationResult:
    train: TrainResult
    report: MetricsReport
    heldout: SwarmDataset
    broken: np.ndarray

    @property
    def trust(self) -> np.ndarray:
        return self.train.model.trust


def heldout_set(seed: int, cycles: int = 50) -> SwarmDataset:
    return swarm(seed, cycles=cycles, stream="swarm-heldout")


def run(dataset: SwarmDataset, seed: int = 42, **kw) -> CommunicationResult:
    tr = train(dataset, seed=seed, **kw)
    ho = heldout_set(seed)
    return CommunicationResult(tr, evaluate(tr.model, ho), ho, dataset.broken)


def tables(result: CommunicationResult) -> dict:
    T = result.train.trajectory
    traj = (("epoch", "agent", "trust"), [(e, a, float(T[e, a])) for e in range(T.shape[0]) for a in range(T.shape[1])])
    ho = result.heldout
    w = consensus(result.trust, ho.claims)
    raw = ho.claims.mean(axis=1)
    ev = (
        ("cycle", "truth", "raw_mean", "weighted_consensus"),
        [(c, float(ho.truth[c]), float(raw[c]), float(w[c])) for c in range(len(ho))],
    )
    return {"swarm_trust_trajectories.csv": traj, "consensus_eval.csv": ev}


def headline(result: CommunicationResult) -> dict:
    t = result.trust
    rel, brk = t[~result.broken], t[result.broken]
    start, conv = phase_annotate(result.train.trajectory, result.broken)
    return {
        "reliable_mean": float(rel.mean()),
        "reliable_spread": float(rel.max() - rel.min()),
        "broken_max": float(brk.max()),
        "separation_ratio": float(rel.mean() / brk.mean()),
        "mae_weighted": result.report.mae,
        "mae_raw": result.report.extras["raw_mae"],
        "mae_reduction": result.report.extras["mae_reduction"],
        "transition_start": start,
        "converged": conv,
    }
