"""Seeded synthetic datasets for the six scenarios.

Randomness comes from numpy's PCG64 generator seeded with
``SeedSequence([seed, crc32(stream_id)])``, so every scenario draws from its own
stream and the same ``(seed, stream_id)`` pair always yields the same data.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

AGENTS = ["France", "Germany", "Italy", "Turkey", "England"]
LIE_TARGETS = ("England", "France", "Germany")

EVENT_NAMES = [
    "Gateway: Retry x3",
    "Gateway: CPU Spike",
    "DB: Connection Reset",
    "User Login",
    "Search Indexing",
    "Cache Refresh",
    "Session Heartbeat",
    "Metrics Flush",
    "Config Poll",
    "Log Rotation",
    "Cron: Cleanup",
    "Health Check",
    "Backup Snapshot",
]
RETRY, CPU_SPIKE, DB_RESET = 0, 1, 2
SYMPTOMS = (RETRY, CPU_SPIKE)
ROOT_CAUSE = DB_RESET
BACKGROUND = tuple(range(3, 13))
CANONICAL_TIME = {RETRY: -7.0, CPU_SPIKE: -6.0, DB_RESET: -15.0}

QA_ACCURACY = (0.90, 0.85, 0.55, 0.88, 0.40)
QA_CONF_WRONG = (0.30, 0.25, 0.75, 0.35, 0.88)
QA_CONF_CORRECT = (0.60, 0.55, 0.75, 0.60, 0.88)
QA_PROFILES = (
    "Well-Calibrated A",
    "Under-Confident",
    "Moderate Hallucinator",
    "Well-Calibrated B",
    "Severe Hallucinator",
)

SCENARIOS = ("diplomacy", "traces", "orderbook", "qa", "drones", "swarm")


def make_rng(seed: int, stream: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(stream.encode())])
    return np.random.Generator(np.random.PCG64(ss))


# -- diplomacy -----------------------------------------------------------


@dataclass
class DiplomacyDataset:
    agents: list[str]
    step: np.ndarray
    sender: np.ndarray
    receiver: np.ndarray
    intent: np.ndarray
    reality: np.ndarray
    is_lie: np.ndarray

    header = ("step", "sender", "receiver", "intent", "reality", "is_lie")

    def __len__(self) -> int:
        return len(self.step)

    def rows(self):
        for i in range(len(self)):
            yield (
                int(self.step[i]),
                self.agents[self.sender[i]],
                self.agents[self.receiver[i]],
                float(self.intent[i]),
                float(self.reality[i]),
                int(self.is_lie[i]),
            )


def diplomacy(seed: int = 42, rounds: int = 10, lie_prob: float = 0.9) -> DiplomacyDataset:
    """Every agent messages one random peer per round; Turkey lies to its targets."""
    rng = make_rng(seed, "diplomacy")
    n = len(AGENTS)
    turkey = AGENTS.index("Turkey")
    targets = {AGENTS.index(a) for a in LIE_TARGETS}
    rec = []
    for _ in range(rounds):
        for s in range(n):
            others = [a for a in range(n) if a != s]
            r = others[rng.integers(len(others))]
            lie = s == turkey and r in targets and rng.random() < lie_prob
            rec.append((s, r, 0.95, 0.0 if lie else 1.0, lie))
    arr = np.array(rec, dtype=np.float64)
    return DiplomacyDataset(
        agents=list(AGENTS),
        step=np.arange(len(rec)),
        sender=arr[:, 0].astype(int),
        receiver=arr[:, 1].astype(int),
        intent=arr[:, 2],
        reality=arr[:, 3],
        is_lie=arr[:, 4].astype(bool),
    )


# -- traces ----------------------------------------------------------------


@dataclass
class TraceDataset:
    timestamps: np.ndarray  # (n_traces, 13) seconds before the reference event
    present: np.ndarray  # (n_traces, 13) bool, before any dropout
    crash: np.ndarray  # (n_traces,) bool
    event_names: list[str] = field(default_factory=lambda: list(EVENT_NAMES))

    header = ("trace", "crash", "event_type", "event_name", "timestamp", "present")

    def __len__(self) -> int:
        return len(self.crash)

    def rows(self):
        for i in range(len(self)):
            for e in range(self.present.shape[1]):
                yield (i, int(self.crash[i]), e, self.event_names[e], float(self.timestamps[i, e]), int(self.present[i, e]))


def traces(seed: int = 42, n_crash: int = 200, n_normal: int = 200, background_rate: float = 0.5) -> TraceDataset:
    rng = make_rng(seed, "traces")
    n = n_crash + n_normal
    k = len(EVENT_NAMES)
    ts = np.empty((n, k))
    for e, t0 in CANONICAL_TIME.items():
        ts[:, e] = t0 + rng.uniform(-0.3, 0.3, n)
    ts[:, list(BACKGROUND)] = rng.uniform(-20.0, -1.0, (n, len(BACKGROUND)))
    present = np.zeros((n, k), dtype=bool)
    present[:, list(BACKGROUND)] = rng.random((n, len(BACKGROUND))) < background_rate
    crash = np.zeros(n, dtype=bool)
    crash[:n_crash] = True
    present[:n_crash, ROOT_CAUSE] = True
    present[:n_crash, list(SYMPTOMS)] = True
    order = rng.permutation(n)
    return TraceDataset(ts[order], present[order], crash[order])


# -- order book ------------------------------------------------------------


@dataclass
class OrderBookDataset:
    duration: np.ndarray
    size: np.ndarray
    true_spoof: np.ndarray
    sanctioned: np.ndarray

    header = ("duration", "size", "true_spoof", "sanctioned", "label")

    @property
    def features(self) -> np.ndarray:
        return np.column_stack([self.duration, self.size])

    @property
    def labels(self) -> np.ndarray:
        return np.where(self.sanctioned, -1.0, 1.0)

    def __len__(self) -> int:
        return len(self.duration)

    def rows(self):
        y = self.labels
        for i in range(len(self)):
            yield (float(self.duration[i]), float(self.size[i]), int(self.true_spoof[i]), int(self.sanctioned[i]), int(y[i]))


def is_spoof_region(duration, size):
    return (np.asarray(duration) < 0.15) & (np.asarray(size) > 0.8)


def orderbook(seed: int = 42, n: int = 5000, spoof_rate: float = 0.02, sanction_rate: float = 0.7) -> OrderBookDataset:
    rng = make_rng(seed, "orderbook")
    n_spoof = int(round(spoof_rate * n))
    spoof = np.column_stack([rng.uniform(0.0, 0.15, n_spoof), rng.uniform(0.8, 1.0, n_spoof)])
    normal = np.empty((0, 2))
    while len(normal) < n - n_spoof:
        cand = rng.uniform(0.0, 1.0, (n, 2))
        cand = cand[~is_spoof_region(cand[:, 0], cand[:, 1])]
        normal = np.vstack([normal, cand])
    normal = normal[: n - n_spoof]
    x = np.vstack([spoof, normal])
    true = np.zeros(n, dtype=bool)
    true[:n_spoof] = True
    sanctioned = np.zeros(n, dtype=bool)
    sanctioned[rng.choice(n_spoof, int(round(sanction_rate * n_spoof)), replace=False)] = True
    order = rng.permutation(n)
    return OrderBookDataset(x[order, 0], x[order, 1], true[order], sanctioned[order])


# -- question answering ----------------------------------------------------


@dataclass
class QADataset:
    agent: np.ndarray
    correct: np.ndarray
    confidence: np.ndarray
    accuracy_profile: tuple[float, ...] = QA_ACCURACY
    conf_wrong_profile: tuple[float, ...] = QA_CONF_WRONG

    header = ("interaction", "agent", "correct", "confidence")

    @property
    def n_agents(self) -> int:
        return len(self.accuracy_profile)

    @property
    def hallucination(self) -> np.ndarray:
        return (~self.correct) & (self.confidence > 0.6)

    def __len__(self) -> int:
        return len(self.agent)

    def rows(self):
        for i in range(len(self)):
            yield (i, int(self.agent[i]), int(self.correct[i]), float(self.confidence[i]))


def qa(
    seed: int = 42,
    per_agent: int = 100,
    accuracy=QA_ACCURACY,
    conf_wrong=QA_CONF_WRONG,
    conf_correct=QA_CONF_CORRECT,
    sigma: float = 0.05,
) -> QADataset:
    """Each agent answers ``per_agent`` questions with exactly round(acc * n) correct."""
    rng = make_rng(seed, "qa")
    agent, correct, conf = [], [], []
    for a, acc in enumerate(accuracy):
        k = int(round(acc * per_agent))
        ok = np.zeros(per_agent, dtype=bool)
        ok[:k] = True
        rng.shuffle(ok)
        mu = np.where(ok, conf_correct[a], conf_wrong[a])
        c = np.clip(rng.normal(mu, sigma), 0.01, 0.99)
        agent.append(np.full(per_agent, a))
        correct.append(ok)
        conf.append(c)
    order = rng.permutation(per_agent * len(accuracy))
    return QADataset(
        np.concatenate(agent)[order],
        np.concatenate(correct)[order],
        np.concatenate(conf)[order],
        tuple(accuracy),
        tuple(conf_wrong),
    )


# -- drones ----------------------------------------------------------------


@dataclass
class DroneLayout:
    positions: np.ndarray
    target: np.ndarray
    no_fly_center: np.ndarray
    no_fly_radius: float
    trust: np.ndarray
    conflicts: np.ndarray

    header = ("drone", "x", "y", "distance", "trust", "conflict")

    @property
    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.positions - self.target, axis=1)

    def rows(self):
        d = self.distances
        for i, (x, y) in enumerate(self.positions):
            yield (i, float(x), float(y), float(d[i]), float(self.trust[i]), float(self.conflicts[i]))


def drones() -> DroneLayout:
    target = np.array([8.0, 8.0])
    pos = np.zeros((16, 2))
    pos[0] = (2.0, 2.0)
    pos[1] = (7.8, 7.8)
    pos[2] = (7.5, 7.3)
    angles = np.deg2rad(np.linspace(250.0, 340.0, 12))
    pos[3:15] = target + 10.5 * np.column_stack([np.cos(angles), np.sin(angles)])
    pos[15] = (8.0, -1.2)
    trust = np.ones(16)
    trust[1] = 0.01
    conflicts = np.zeros(16)
    conflicts[2] = 1.0
    return DroneLayout(pos, target, np.array([5.0, 5.0]), 1.5, trust, conflicts)


def path_clearance(start, target, center, samples: int | None = 1000) -> float:
    """Min distance from ``center`` to the segment start->target.

    ``samples=None`` gives the exact segment distance; otherwise the minimum over
    ``samples`` evenly spaced points with both endpoints included.
    """
    start, target, center = (np.asarray(v, dtype=np.float64) for v in (start, target, center))
    seg = target - start
    if samples is None:
        denom = float(seg @ seg)
        t = 0.0 if denom == 0 else float(np.clip((center - start) @ seg / denom, 0.0, 1.0))
        return float(np.linalg.norm(start + t * seg - center))
    t = np.linspace(0.0, 1.0, samples)[:, None]
    return float(np.linalg.norm(start + t * seg - center, axis=1).min())


# -- swarm -----------------------------------------------------------------


@dataclass
class SwarmDataset:
    claims: np.ndarray  # (cycles, 16)
    truth: np.ndarray  # (cycles,)
    broken: np.ndarray  # (16,) bool

    header = ("cycle", "agent", "claim", "truth", "broken")

    def __len__(self) -> int:
        return len(self.truth)

    def rows(self):
        for c in range(len(self)):
            for a in range(self.claims.shape[1]):
                yield (c, a, float(self.claims[c, a]), float(self.truth[c]), int(self.broken[a]))


def swarm(
    seed: int = 42,
    cycles: int = 100,
    stream: str = "swarm",
    n_reliable: int = 12,
    n_broken: int = 4,
    noise: float = 0.03,
    bias: float = 0.75,
) -> SwarmDataset:
    rng = make_rng(seed, stream)
    truth = rng.uniform(0.0, 1.0, cycles)
    truth[::10] = 0.0
    n = n_reliable + n_broken
    claims = np.empty((cycles, n))
    claims[:, :n_reliable] = truth[:, None] + rng.normal(0.0, noise, (cycles, n_reliable))
    claims[:, n_reliable:] = bias + rng.normal(0.0, noise, (cycles, n_broken))
    broken = np.zeros(n, dtype=bool)
    broken[n_reliable:] = True
    return SwarmDataset(np.clip(claims, 0.0, 1.0), truth, broken)


_GENERATORS = {
    "diplomacy": diplomacy,
    "traces": traces,
    "orderbook": orderbook,
    "qa": qa,
    "swarm": swarm,
}


def generate(scenario: str, seed: int = 42):
    """Dataset for a scenario id; ``drones`` ignores the seed (fixed layout)."""
    if scenario == "drones":
        return drones()
    try:
        gen = _GENERATORS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}") from None
    return gen(seed)
