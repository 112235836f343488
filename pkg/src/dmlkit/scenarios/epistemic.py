"""Online trust learning from Say-Do contradictions (diplomacy game).

Each observed message-action pair is scored with the Say-Do axiom

    intent AND_L trust(receiver -> sender)  ->  reality

and the violated degree drives gradient descent on that single trust logit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tape, Tensor, as_tensor
from ..fuzzy import check_truth
from ..simgen import AGENTS, DiplomacyDataset

INIT_LOGIT = 2.5


@dataclass
class TrustModel:
    agents: list[str] = field(default_factory=lambda: list(AGENTS))
    logits: np.ndarray | None = None
    lr: float = 5.0
    tol: float = 1e-3
    max_steps: int = 50

    def __post_init__(self):
        n = len(self.agents)
        if self.logits is None:
            self.logits = np.full((n, n), INIT_LOGIT)

    def trust(self) -> np.ndarray:
        return as_tensor(self.logits).sigmoid().value


@dataclass
class TrustUpdate:
    step: int
    sender: str
    receiver: str
    is_lie: bool
    before: float
    after: float
    loss: float
    iterations: int

    @property
    def delta(self) -> float:
        return self.after - self.before


def event_loss(model: TrustModel, sender: int, receiver: int, intent, reality, logit: Tensor | None = None):
    """Say-Do contradiction for one message; returns ``(loss, trust)`` tensors."""
    if sender == receiver:
        raise ValueError("an agent does not message itself")
    intent = check_truth(intent, "intent")
    reality = check_truth(reality, "reality")
    z = as_tensor(model.logits[receiver, sender]) if logit is None else logit
    trust = z.sigmoid()
    antecedent = (intent + trust - 1.0).relu()
    return (antecedent - reality).relu(), trust


def observe(model: TrustModel, step: int, sender: int, receiver: int, intent, reality, is_lie: bool = False) -> TrustUpdate:
    """Gradient descent on the receiver's trust logit until the event is explained."""
    before = float(as_tensor(model.logits[receiver, sender]).sigmoid().value)
    z = float(model.logits[receiver, sender])
    it = 0
    loss_val = 0.0
    for it in range(model.max_steps + 1):
        tape = Tape()
        zt = tape.variable(z)
        loss, _ = event_loss(model, sender, receiver, intent, reality, logit=zt)
        loss_val = loss.item()
        if loss_val < model.tol or it == model.max_steps:
            break
        z -= model.lr * float(tape.backward(loss)[zt])
    model.logits[receiver, sender] = z
    after = float(as_tensor(z).sigmoid().value)
    return TrustUpdate(step, model.agents[sender], model.agents[receiver], bool(is_lie), before, after, loss_val, it)


@dataclass
class EpistemicResult:
    model: TrustModel
    trace: list[TrustUpdate]

    @property
    def trust(self) -> np.ndarray:
        return self.model.trust()


def run(dataset: DiplomacyDataset, model: TrustModel | None = None) -> EpistemicResult:
    model = model or TrustModel(list(dataset.agents))
    trace = [
        observe(
            model,
            int(dataset.step[i]),
            int(dataset.sender[i]),
            int(dataset.receiver[i]),
            float(dataset.intent[i]),
            float(dataset.reality[i]),
            bool(dataset.is_lie[i]),
        )
        for i in range(len(dataset))
    ]
    return EpistemicResult(model, trace)


def tables(result: EpistemicResult) -> dict:
    agents = result.model.agents
    T = result.trust
    matrix = (("truster",) + tuple(agents), [(a,) + tuple(float(x) for x in T[i]) for i, a in enumerate(agents)])
    trace = (
        ("step", "sender", "receiver", "is_lie", "before", "after"),
        [(u.step, u.sender, u.receiver, int(u.is_lie), u.before, u.after) for u in result.trace],
    )
    return {"trust_matrix.csv": matrix, "trust_trace.csv": trace}


def headline(result: EpistemicResult) -> dict:
    agents = result.model.agents
    T = result.trust
    tur = agents.index("Turkey")
    first_lie = next((u for u in result.trace if u.is_lie), None)
    return {
        "trust_in_turkey": {a: float(T[i, tur]) for i, a in enumerate(agents) if i != tur},
        "first_lie": None if first_lie is None else {"step": first_lie.step, "before": first_lie.before, "after": first_lie.after},
    }
