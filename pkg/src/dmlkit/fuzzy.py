"""Łukasiewicz connectives over truth degrees in [0, 1].

Every function accepts plain floats, numpy arrays or tracked
:class:`~dmlkit.autodiff.Tensor` values and returns a Tensor, so the same
code serves both evaluation and training.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, as_tensor

TOL = 1e-9


class TruthRangeError(ValueError):
    """A truth degree fell outside [0, 1]."""


def check_truth(x, name: str = "operand") -> Tensor:
    t = as_tensor(x)
    v = t.value
    if v.size and (np.any(v < -TOL) or np.any(v > 1 + TOL) or not np.all(np.isfinite(v))):
        raise TruthRangeError(f"{name} outside [0, 1]: min={v.min():.6g}, max={v.max():.6g}")
    return t


def and_l(a, b) -> Tensor:
    """Łukasiewicz t-norm, max(0, a + b - 1)."""
    a, b = check_truth(a, "a"), check_truth(b, "b")
    return (a + b - 1.0).relu()


def implies_l(a, b) -> Tensor:
    """Residuum of the t-norm, min(1, 1 - a + b)."""
    a, b = check_truth(a, "a"), check_truth(b, "b")
    return (1.0 - a + b).clamp_max(1.0)


def not_l(a) -> Tensor:
    return 1.0 - check_truth(a, "a")


def contradiction_loss(antecedent, consequent) -> Tensor:
    """Degree to which ``antecedent -> consequent`` is violated: relu(a - c)."""
    a = check_truth(antecedent, "antecedent")
    c = check_truth(consequent, "consequent")
    return (a - c).relu()
