"""Learnable Kripke structures with differentiable modal operators.

Necessity uses the Łukasiewicz residuum and a min over worlds; possibility uses
a product and a max::

    box(phi)(w)     = min_w' min(1, (1 - A[w, w']) + phi(w'))
    diamond(phi)(w) = max_w' A[w, w'] * phi(w')

The accessibility matrix ``A`` is either the sigmoid of a free |W| x |W| logit
matrix or the output of a small pairwise scoring network over per-world
embeddings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .autodiff import ShapeError, Tensor, as_tensor
from .fuzzy import check_truth, contradiction_loss

FULL = "full"
EMBEDDING = "embedding"

Params = Mapping[str, Tensor]


def box(access, phi) -> Tensor:
    """Necessity of ``phi`` at every world given accessibility ``access``."""
    A, phi = as_tensor(access), as_tensor(phi)
    n = _square(A)
    if phi.shape != (n,):
        raise ShapeError(f"valuation column has shape {phi.shape}, expected ({n},)")
    row = phi.reshape(1, n).broadcast_to((n, n))
    return ((1.0 - A) + row).clamp_max(1.0).min(axis=1)


def diamond(access, phi) -> Tensor:
    """Possibility of ``phi`` at every world given accessibility ``access``."""
    A, phi = as_tensor(access), as_tensor(phi)
    n = _square(A)
    if phi.shape != (n,):
        raise ShapeError(f"valuation column has shape {phi.shape}, expected ({n},)")
    row = phi.reshape(1, n).broadcast_to((n, n))
    return (A * row).max(axis=1)


def _square(A: Tensor) -> int:
    if A.value.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"accessibility must be square, got {A.shape}")
    return A.shape[0]


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class KripkeStructure:
    """Worlds, a learnable accessibility parameterization and a valuation.

    ``params`` holds raw numpy arrays. Methods that compute differentiable
    quantities accept an optional ``params`` mapping of (possibly tracked)
    tensors, so a training loop can register the arrays on a tape and pass
    them through.
    """

    worlds: list[str]
    props: list[str]
    valuation: np.ndarray
    kind: str = FULL
    params: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.valuation = np.asarray(self.valuation, dtype=np.float64)
        n, p = len(self.worlds), len(self.props)
        if n == 0:
            raise ValueError("a Kripke structure needs at least one world")
        if len(set(self.worlds)) != n or len(set(self.props)) != p:
            raise ValueError("world and proposition labels must be unique")
        if self.valuation.shape != (n, p):
            raise ShapeError(f"valuation shape {self.valuation.shape} != ({n}, {p})")
        check_truth(self.valuation, "valuation")
        if self.kind not in (FULL, EMBEDDING):
            raise ValueError(f"unknown accessibility parameterization {self.kind!r}")
        if self.kind == FULL and "logits" not in self.params:
            self.params["logits"] = np.zeros((n, n))

    @classmethod
    def full(cls, worlds, props, valuation, logits=None, init: float = 0.0) -> "KripkeStructure":
        n = len(worlds)
        raw = np.full((n, n), float(init)) if logits is None else np.array(logits, dtype=np.float64)
        if raw.shape != (n, n):
            raise ShapeError(f"logits shape {raw.shape} != ({n}, {n})")
        return cls(list(worlds), list(props), valuation, FULL, {"logits": raw})

    @classmethod
    def embedding(
        cls,
        worlds,
        props,
        valuation,
        dim: int = 8,
        hidden: int = 16,
        rng: np.random.Generator | None = None,
    ) -> "KripkeStructure":
        rng = rng if rng is not None else np.random.default_rng(0)
        n = len(worlds)
        params = {
            "embed": rng.normal(0.0, 1.0, size=(n, dim)),
            # pair scorer: relu(e_w @ w_src + e_w' @ w_dst + b1) @ w2 + b2, i.e. a
            # linear layer over the concatenated pair
            "w_src": _uniform(rng, 2 * dim, (dim, hidden)),
            "w_dst": _uniform(rng, 2 * dim, (dim, hidden)),
            "b1": _uniform(rng, 2 * dim, (hidden,)),
            "w2": _uniform(rng, hidden, (hidden,)),
            "b2": _uniform(rng, hidden, ()),
        }
        return cls(list(worlds), list(props), valuation, EMBEDDING, params)

    # ------------------------------------------------------------------

    @property
    def n_worlds(self) -> int:
        return len(self.worlds)

    def tensors(self, params: Params | None = None) -> dict[str, Tensor]:
        if params is not None:
            return dict(params)
        return {k: Tensor(v) for k, v in self.params.items()}

    def accessibility(self, params: Params | None = None) -> Tensor:
        p = self.tensors(params)
        if self.kind == FULL:
            return p["logits"].sigmoid()
        n = self.n_worlds
        hidden = p["w_src"].shape[1]
        src = p["embed"] @ p["w_src"]
        dst = p["embed"] @ p["w_dst"]
        pre = (
            src.reshape(n, 1, hidden).broadcast_to((n, n, hidden))
            + dst.reshape(1, n, hidden).broadcast_to((n, n, hidden))
            + p["b1"].reshape(1, 1, hidden).broadcast_to((n, n, hidden))
        )
        h = pre.relu().reshape(n * n, hidden)
        score = h @ p["w2"] + p["b2"]
        return score.sigmoid().reshape(n, n)

    def prop_index(self, prop: int | str) -> int:
        if isinstance(prop, str):
            try:
                return self.props.index(prop)
            except ValueError:
                raise KeyError(f"unknown proposition {prop!r}") from None
        if not 0 <= int(prop) < len(self.props):
            raise IndexError(f"proposition index {prop} out of range")
        return int(prop)

    def column(self, prop: int | str, valuation=None) -> Tensor:
        j = self.prop_index(prop)
        V = as_tensor(self.valuation if valuation is None else valuation)
        return V[:, j]

    def necessity(self, prop: int | str, params: Params | None = None, valuation=None) -> Tensor:
        return box(self.accessibility(params), self.column(prop, valuation))

    def possibility(self, prop: int | str, params: Params | None = None, valuation=None) -> Tensor:
        return diamond(self.accessibility(params), self.column(prop, valuation))

    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "props": list(self.props),
            "kind": self.kind,
            "params": {k: np.asarray(v).tolist() for k, v in self.params.items()},
            "valuation": self.valuation.tolist(),
            "accessibility": self.accessibility().value.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "KripkeStructure":
        params = {k: np.array(v, dtype=np.float64) for k, v in d["params"].items()}
        return cls(list(d["worlds"]), list(d["props"]), np.array(d["valuation"]), d["kind"], params)


Expr = Callable[[KripkeStructure, Params | None], Tensor]


def axiom_loss(
    k: KripkeStructure,
    antecedent: Expr | Sequence[float] | Tensor,
    consequent: Expr | Sequence[float] | Tensor,
    weight: float = 1.0,
    params: Params | None = None,
) -> Tensor:
    """Weighted mean contradiction of ``antecedent -> consequent`` over worlds.

    Either expression may be a per-world truth vector or a callable
    ``expr(k, params)`` returning one.
    """
    if weight < 0:
        raise ValueError("axiom weight must be non-negative")
    ante = antecedent(k, params) if callable(antecedent) else as_tensor(antecedent)
    cons = consequent(k, params) if callable(consequent) else as_tensor(consequent)
    n = k.n_worlds
    if ante.shape != (n,) or cons.shape != (n,):
        raise ShapeError(f"axiom expressions must be per-world vectors of length {n}, got {ante.shape} and {cons.shape}")
    return contradiction_loss(ante, cons).mean() * float(weight)
