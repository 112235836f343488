"""Scenario registry: data generation, training, tables, headline metrics and bound checks.

Every scenario is driven by a flat dict of hyperparameters. ``DEFAULTS`` lists
the keys each one accepts; overrides are parsed against the default's type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import simgen
from .scenarios import communication, deontic, doxastic, epistemic, orchestration, temporal

SCENARIOS = ("epistemic", "temporal", "deontic", "doxastic", "orchestrate", "swarm")

DEFAULTS: dict[str, dict] = {
    "epistemic": {"lr": 5.0, "tol": 1e-3, "max_steps": 50, "lie_prob": 0.9, "rounds": 10},
    "temporal": {"epochs": 1000, "lr": 0.05, "dropout": 0.4},
    "deontic": {
        "epochs": 1000,
        "lr": 0.003,
        "batch_size": None,
        "hidden": 32,
        "weight_sanction": 50.0,
        "weight_normal": 1.0,
        "margin": 1.0,
    },
    "doxastic": {"epochs": 200, "lr": 0.01, "batch_size": 50, "lambda_correct": 1.0, "lambda_reg": 0.1, "score": "halluc"},
    "orchestrate": {"steps": 200, "lr": 0.1, "lam": 15.0, "path_samples": 10},
    "swarm": {"epochs": 100, "lr": 0.05, "tau": 0.10},
}

# keys whose default is None still need a value type
_NULLABLE_INT = {("deontic", "batch_size"), ("orchestrate", "path_samples")}


class ConfigError(ValueError):
    """Bad scenario name or override."""


def parse_override(scenario: str, text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = (s.strip() for s in text.split("=", 1))
    if key not in DEFAULTS[scenario]:
        raise ConfigError(f"unknown override {key!r} for {scenario}; known: {', '.join(sorted(DEFAULTS[scenario]))}")
    default = DEFAULTS[scenario][key]
    try:
        if (scenario, key) in _NULLABLE_INT:
            value = None if raw.lower() in ("none", "full", "") else int(raw)
        elif isinstance(default, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(default, int):
            value = int(raw)
        elif isinstance(default, float):
            value = float(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"cannot parse {key}={raw!r}") from None
    return key, value


def resolve(scenario: str, overrides: list[str] | None = None) -> dict:
    """Defaults for ``scenario`` updated with ``key=value`` overrides.

    With several scenarios (``all``) an override applies to every scenario
    that knows the key and must be known to at least one of them.
    """
    if scenario not in DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    cfg = dict(DEFAULTS[scenario])
    for text in overrides or []:
        k, v = parse_override(scenario, text)
        cfg[k] = v
    return cfg


def resolve_all(scenarios, overrides: list[str] | None = None) -> dict[str, dict]:
    out = {s: dict(DEFAULTS[s]) for s in scenarios}
    for text in overrides or []:
        hit = False
        for s in scenarios:
            try:
                k, v = parse_override(s, text)
            except ConfigError as e:
                if "unknown override" in str(e):
                    continue
                raise
            out[s][k] = v
            hit = True
        if not hit:
            raise ConfigError(f"override {text!r} matches no selected scenario")
    return out


# -- runners ---------------------------------------------------------------


def _epistemic(seed, c):
    data = simgen.diplomacy(seed, rounds=c["rounds"], lie_prob=c["lie_prob"])
    model = epistemic.TrustModel(list(data.agents), lr=c["lr"], tol=c["tol"], max_steps=c["max_steps"])
    return data, epistemic.run(data, model)


def _temporal(seed, c):
    data = simgen.traces(seed)
    return data, temporal.run(data, seed=seed, epochs=c["epochs"], lr=c["lr"], dropout=c["dropout"])


def _deontic(seed, c):
    data = simgen.orderbook(seed)
    cfg = deontic.HingeConfig(c["weight_normal"], c["weight_sanction"], c["margin"])
    res = deontic.run(data, seed=seed, config=cfg, epochs=c["epochs"], lr=c["lr"], batch_size=c["batch_size"], hidden=c["hidden"])
    return data, res


def _doxastic(seed, c):
    data = simgen.qa(seed)
    cfg = doxastic.DoxasticLossConfig(c["lambda_correct"], c["lambda_reg"])
    res = doxastic.run(data, seed=seed, config=cfg, score=c["score"], epochs=c["epochs"], lr=c["lr"], batch_size=c["batch_size"])
    return data, res


def _orchestrate(seed, c):
    # the drone layout is fixed; the seed has nothing to randomize
    data = simgen.drones()
    env = orchestration.OrchestrationEnv(data, lam=c["lam"], path_samples=c["path_samples"])
    return data, orchestration.run(env, steps=c["steps"], lr=c["lr"])


def _swarm(seed, c):
    data = simgen.swarm(seed)
    return data, communication.run(data, seed=seed, epochs=c["epochs"], lr=c["lr"], tau=c["tau"])


# -- bounds for --check -----------------------------------------------------


def _epistemic_checks(res, data):
    T = res.trust
    agents = res.model.agents
    tur = agents.index("Turkey")
    lied = {agents.index(u.receiver) for u in res.trace if u.is_lie}
    others = [T[i, j] for i in range(len(agents)) for j in range(len(agents)) if i != j and not (j == tur and i in lied)]
    first = next((u for u in res.trace if u.is_lie), None)
    return [
        ("deceived trust in Turkey < 0.05", all(T[i, tur] < 0.05 for i in lied) and len(lied) > 0),
        ("never-deceived pairs in [0.87, 0.97]", all(0.87 <= x <= 0.97 for x in others)),
        ("first lie drops trust below 0.05", first is not None and first.after < 0.05),
    ]


def _temporal_checks(res, data):
    h = temporal.headline(res)
    return [
        ("root-cause score >= 0.9", h["root_cause_score"] >= 0.9),
        ("symptom scores <= 0.7", max(h["symptom_scores"]) <= 0.7),
        ("background scores < 0.45", h["max_background_score"] < 0.45),
        ("final loss < 0.02", h["final_loss"] is not None and h["final_loss"] < 0.02),
        ("root removal ratio >= 20", h["counterfactual_ratio_root"] >= 20),
        ("symptom removal changes loss < 0.02", max(abs(d) for d in h["counterfactual_delta_symptoms"]) < 0.02),
    ]


_PROBE_VERDICTS = {(0.5, 0.5): "Permitted", (0.9, 0.9): "Permitted", (0.05, 0.1): "Permitted", (0.05, 0.9): "Prohibited"}


def _deontic_checks(res, data):
    return [
        ("spoof recall = 1", res.recall == 1.0),
        ("precision >= 0.80", res.precision >= 0.80),
        ("probe verdicts match", all(_PROBE_VERDICTS[(d, s)] == v for d, s, _, v in res.probes)),
    ]


def _doxastic_checks(res, data):
    th = res.model.theta
    bf = res.baseline[2]
    return [
        ("theta agents 0,1,3 >= 1.8", all(th[i] >= 1.8 for i in (0, 1, 3))),
        ("theta agent 2 in [1.1, 1.6]", 1.1 <= th[2] <= 1.6),
        ("theta agent 4 <= 1.2", th[4] <= 1.2),
        ("detection F1 >= 0.85", res.report.f1 >= 0.85),
        ("PR-AUC >= 0.93", res.report.pr_auc >= 0.93),
        ("naive baseline F1 within 0.05 of 0.667", abs(bf - 0.667) <= 0.05),
    ]


def _orchestrate_checks(res, data):
    M0, M = res.trajectory[0], res.final
    return [
        ("step-0 uniform", bool(abs(M0 - 1.0 / len(M0)).max() <= 1e-6)),
        ("drone 15 > 0.99", M[15] > 0.99),
        ("drones 0, 1, 2 < 0.01", all(M[i] < 0.01 for i in (0, 1, 2))),
    ]


def _swarm_checks(res, data):
    h = communication.headline(res)
    rel = res.trust[~res.broken]
    return [
        ("reliable trust in [0.89, 0.99]", bool(rel.min() >= 0.89 and rel.max() <= 0.99)),
        ("reliable spread <= 0.05", h["reliable_spread"] <= 0.05),
        ("broken trust <= 0.15", h["broken_max"] <= 0.15),
        ("separation ratio >= 8", h["separation_ratio"] >= 8),
        ("held-out MAE reduction >= 70%", h["mae_reduction"] >= 0.70),
    ]


@dataclass(frozen=True)
class Scenario:
    name: str
    dataset_file: str
    runner: Callable
    module: object
    checks: Callable


REGISTRY = {
    "epistemic": Scenario("epistemic", "diplomacy.csv", _epistemic, epistemic, _epistemic_checks),
    "temporal": Scenario("temporal", "traces.csv", _temporal, temporal, _temporal_checks),
    "deontic": Scenario("deontic", "orderbook.csv", _deontic, deontic, _deontic_checks),
    "doxastic": Scenario("doxastic", "qa.csv", _doxastic, doxastic, _doxastic_checks),
    "orchestrate": Scenario("orchestrate", "drones.csv", _orchestrate, orchestration, _orchestrate_checks),
    "swarm": Scenario("swarm", "swarm.csv", _swarm, communication, _swarm_checks),
}


@dataclass
class Outcome:
    scenario: str
    dataset: object
    result: object
    tables: dict
    metrics: dict
    checks: list[tuple[str, bool]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


def execute(scenario: str, seed: int = 42, config: dict | None = None) -> Outcome:
    entry = REGISTRY[scenario]
    cfg = dict(DEFAULTS[scenario]) if config is None else config
    data, res = entry.runner(seed, cfg)
    tables = {entry.dataset_file: (data.header, list(data.rows()))}
    tables.update(entry.module.tables(res))
    checks = [(name, bool(ok)) for name, ok in entry.checks(res, data)]
    return Outcome(scenario, data, res, tables, entry.module.headline(res), checks)
