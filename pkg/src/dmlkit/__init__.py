"""Differentiable modal logic toolkit: learnable Kripke structures, Łukasiewicz
connectives and contradiction losses, plus six reproducible scenario suites."""

from .autodiff import Tape, Tensor, matmul, softmax
from .fuzzy import and_l, contradiction_loss, implies_l, not_l
from .kripke import KripkeStructure, axiom_loss, box, diamond

__version__ = "0.1.0"

__all__ = [
    "KripkeStructure",
    "Tape",
    "Tensor",
    "and_l",
    "axiom_loss",
    "box",
    "contradiction_loss",
    "diamond",
    "implies_l",
    "matmul",
    "not_l",
    "softmax",
]
