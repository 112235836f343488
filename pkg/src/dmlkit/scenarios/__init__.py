"""Scenario suites: each module generates, trains and evaluates one experiment."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from ..autodiff import Tape, Tensor


def track(tape: Tape, params: Mapping[str, np.ndarray]) -> dict[str, Tensor]:
    return {k: tape.variable(v, name=k) for k, v in params.items()}


def value_and_grad(
    params: Mapping[str, np.ndarray], fn: Callable[[dict[str, Tensor]], Tensor]
) -> tuple[float, dict[str, np.ndarray]]:
    """Evaluate ``fn`` on tracked copies of ``params`` and return its gradients."""
    tape = Tape()
    tracked = track(tape, params)
    loss = fn(tracked)
    value = loss.item()
    if not np.isfinite(value):
        raise FloatingPointError("loss is not finite")
    grads = tape.backward(loss)
    return value, {k: grads[t] for k, t in tracked.items()}
