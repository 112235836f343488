"""Drone task assignment by gradient descent on a compound modal loss.

A softmax over 16 logits assigns the task. The loss adds travel distance to
penalties for crossing the no-fly zone, for untrusted drones and for drones
with schedule conflicts, all weighted by ``lam``::

    L = sum_i M_i * d_i + lam * sum_i M_i * (deontic_i + (1 - trust_i) + conflict_i)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, as_tensor, softmax
from ..optim import Adam
from ..simgen import DroneLayout, drones, path_clearance
from . import value_and_grad

TRACKED = (0, 1, 2, 15)


@dataclass
class OrchestrationEnv:
    layout: DroneLayout = field(default_factory=drones)
    lam: float = 15.0
    path_samples: int | None = 10
    lam_deontic: float | None = None
    lam_epistemic: float | None = None
    lam_temporal: float | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("constraint weight must be non-negative")
        if self.path_samples is not None and self.path_samples < 2:
            raise ValueError("need at least two path samples")

    @property
    def n(self) -> int:
        return len(self.layout.positions)

    def penetration(self) -> np.ndarray:
        """Depth each straight-line path reaches inside the no-fly zone."""
        L = self.layout
        clear = np.array([path_clearance(p, L.target, L.no_fly_center, self.path_samples) for p in L.positions])
        return np.maximum(L.no_fly_radius - clear, 0.0)

    def weights(self) -> tuple[float, float, float]:
        pick = lambda v: self.lam if v is None else float(v)
        return pick(self.lam_deontic), pick(self.lam_epistemic), pick(self.lam_temporal)


@dataclass
class Orchestrator:
    logits: np.ndarray = field(default_factory=lambda: np.zeros(16))

    def assignment(self) -> np.ndarray:
        return softmax(as_tensor(self.logits)).value


def losses(env: OrchestrationEnv, M) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    """(efficiency, deontic, epistemic, temporal) for assignment ``M``."""
    M = as_tensor(M)
    if M.shape != (env.n,):
        raise ValueError(f"assignment must have {env.n} entries")
    L = env.layout
    eff = (M * as_tensor(L.distances)).sum()
    deo = (M * as_tensor(env.penetration())).sum()
    epi = (M * as_tensor(1.0 - L.trust)).sum()
    tmp = (M * as_tensor(L.conflicts)).sum()
    return eff, deo, epi, tmp


def total_loss(env: OrchestrationEnv, M) -> Tensor:
    eff, deo, epi, tmp = losses(env, M)
    wd, we, wt = env.weights()
    return eff + wd * deo + we * epi + wt * tmp


@dataclass
class OrchestrationResult:
    env: OrchestrationEnv
    trajectory: np.ndarray  # (steps + 1, 16), row 0 before any update
    losses: list[float]

    @property
    def final(self) -> np.ndarray:
        return self.trajectory[-1]

    @property
    def winner(self) -> int:
        return int(np.argmax(self.final))


def optimize(env: OrchestrationEnv, steps: int = 200, lr: float = 0.1, orch: Orchestrator | None = None) -> OrchestrationResult:
    orch = orch or Orchestrator(np.zeros(env.n))
    params = {"logits": orch.logits}
    opt = Adam(lr)
    traj = [orch.assignment()]
    hist = []
    for _ in range(steps):
        loss, grads = value_and_grad(params, lambda p: total_loss(env, softmax(p["logits"])))
        hist.append(loss)
        opt.step(params, grads)
        traj.append(softmax(as_tensor(params["logits"])).value)
    orch.logits = params["logits"]
    return OrchestrationResult(env, np.array(traj), hist)


def semantic_boundary_check(env: OrchestrationEnv, reference: int = 15, traps=(0, 1, 2)):
    """Rows ``(drone, penalty, margin, rejected)``.

    ``penalty`` is the weighted constraint cost of sending trap drone ``i`` and
    ``margin`` is the extra distance ``d_ref - d_i`` it would save; the trap is
    rejected when the penalty exceeds the margin.
    """
    d = env.layout.distances
    pen = env.penetration()
    wd, we, wt = env.weights()
    rows = []
    for i in traps:
        penalty = wd * pen[i] + we * (1.0 - env.layout.trust[i]) + wt * env.layout.conflicts[i]
        margin = d[reference] - d[i]
        rows.append((int(i), float(penalty), float(margin), bool(penalty > margin)))
    return rows


def phases(trajectory: np.ndarray) -> list[tuple[int, int, str]]:
    """Split the trajectory at leader changes.

    Steps before the first leader change are exploration, the span up to the
    last change is transition, and the rest is convergence. Returns
    ``(start, end, name)`` rows with inclusive bounds.
    """
    lead = np.argmax(trajectory, axis=1)
    changes = np.flatnonzero(np.diff(lead)) + 1
    last = len(trajectory) - 1
    if changes.size == 0:
        return [(0, last, "convergence")]
    out = [(0, int(changes[0]) - 1, "exploration")]
    if changes[-1] > changes[0]:
        out.append((int(changes[0]), int(changes[-1]) - 1, "transition"))
    out.append((int(changes[-1]), last, "convergence"))
    return out


def run(env: OrchestrationEnv | None = None, steps: int = 200, lr: float = 0.1) -> OrchestrationResult:
    return optimize(env or OrchestrationEnv(), steps, lr)


def tables(result: OrchestrationResult) -> dict:
    rows = [(s, i, float(p)) for s, M in enumerate(result.trajectory) for i, p in enumerate(M)]
    ph = {}
    for a, b, name in phases(result.trajectory):
        for s in range(a, b + 1):
            ph[s] = name
    traj = (("step", "drone", "probability", "phase"), [r + (ph[r[0]],) for r in rows])
    return {"assignment_trajectory.csv": traj}


def headline(result: OrchestrationResult) -> dict:
    M = result.final
    return {
        "winner": result.winner,
        "winner_probability": float(M[result.winner]),
        "tracked": {str(i): float(M[i]) for i in TRACKED},
        "step0": [float(x) for x in result.trajectory[0]],
        "phases": [{"start": a, "end": b, "phase": n} for a, b, n in phases(result.trajectory)],
        "boundary": [
            {"drone": i, "penalty": p, "margin": m, "rejected": r} for i, p, m, r in semantic_boundary_check(result.env)
        ],
        "final_loss": result.losses[-1] if result.losses else None,
    }
