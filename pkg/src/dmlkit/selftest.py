"""Property suites that double as an installation check.

Each suite returns a ``SuiteResult``; ``run_all`` collects them. The suites
use the public API only, so a broken primitive (for instance a wrong relu
gradient patched in by a test) shows up as a failing suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tape, Tensor, elementwise, matmul, reduce, softmax
from .fuzzy import and_l, implies_l, not_l
from .kripke import box, diamond
from .simgen import DroneLayout, drones, path_clearance

GRID_STEP = 0.05
FD_POINTS = 100
FD_RTOL = 1e-4
ORACLE_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checks > 0 and not self.failures

    def expect(self, ok: bool, what: str) -> None:
        self.checks += 1
        if not ok and len(self.failures) < 20:
            self.failures.append(what)
        elif not ok:
            self.failures.append("...")


# -- fuzzy laws ------------------------------------------------------------


def fuzzy_laws(step: float = GRID_STEP) -> SuiteResult:
    """Commutativity, boundary and residuation laws on a full grid."""
    r = SuiteResult("fuzzy-laws")
    g = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    A, B = np.meshgrid(g, g, indexing="ij")
    ab, ba = and_l(A, B).value, and_l(B, A).value
    r.expect(np.array_equal(ab, ba), "and is not commutative")
    r.expect(np.allclose(and_l(g, np.ones_like(g)).value, g, atol=1e-12), "a and 1 != a")
    r.expect(np.all(and_l(g, np.zeros_like(g)).value == 0.0), "a and 0 != 0")
    r.expect(np.all(implies_l(np.zeros_like(g), g).value == 1.0), "0 -> b != 1")
    r.expect(np.all(implies_l(g, np.ones_like(g)).value == 1.0), "a -> 1 != 1")
    r.expect(np.allclose(implies_l(np.ones_like(g), g).value, g, atol=1e-12), "1 -> b != b")
    r.expect(np.allclose(not_l(not_l(g)).value, g, atol=1e-12), "double negation")
    r.expect(np.all((ab >= 0) & (ab <= 1)), "and leaves [0, 1]")
    r.expect(np.all(ab <= np.minimum(A, B) + 1e-12), "and exceeds min")
    # residuation: (a and b) <= c  iff  a <= (b -> c)
    tol = 1e-9
    for c in g:
        left = and_l(A, B).value <= c + tol
        right = A <= implies_l(B, np.full_like(B, c)).value + tol
        bad = np.argwhere(left != right)
        r.expect(bad.size == 0, f"residuation fails at c={c:.2f}, {len(bad)} cells")
    return r


# -- finite differences ----------------------------------------------------


def _fd_check(r: SuiteResult, name: str, f, x0: np.ndarray, h: float = 1e-5) -> None:
    tape = Tape()
    x = tape.variable(x0)
    out = f(x)
    g = tape.backward(out.sum() if out.size != 1 else out)[x]
    fd = np.zeros_like(x0)
    flat = x0.reshape(-1)
    for i in range(flat.size):
        up, dn = flat.copy(), flat.copy()
        up[i] += h
        dn[i] -= h
        fu = float(np.sum(f(Tensor(up.reshape(x0.shape))).value))
        fl = float(np.sum(f(Tensor(dn.reshape(x0.shape))).value))
        fd.reshape(-1)[i] = (fu - fl) / (2 * h)
    err = np.abs(g - fd) / np.maximum(np.maximum(np.abs(g), np.abs(fd)), 1.0)
    r.expect(bool(err.max() <= FD_RTOL), f"{name}: max rel error {err.max():.2e}")


def _away(rng, n, kinks=(0.0,), lo=-3.0, hi=3.0, gap=1e-3):
    x = rng.uniform(lo, hi, n)
    for k in kinks:
        x = np.where(np.abs(x - k) < gap, np.where(x < k, k - 2 * gap, k + 2 * gap), x)
    return x


def gradient_checks(points: int = FD_POINTS, seed: int = 0) -> SuiteResult:
    """Central-difference check of every primitive at ``points`` random inputs."""
    r = SuiteResult("autodiff-fd")
    rng = np.random.default_rng(seed)
    unary = {
        "relu": (lambda x: elementwise("relu", x), _away(rng, points)),
        "sigmoid": (lambda x: elementwise("sigmoid", x), rng.uniform(-6, 6, points)),
        "tanh": (lambda x: elementwise("tanh", x), rng.uniform(-3, 3, points)),
        "exp": (lambda x: elementwise("exp", x), rng.uniform(-3, 3, points)),
        "log": (lambda x: elementwise("log", x), rng.uniform(0.1, 5, points)),
        "abs": (lambda x: elementwise("abs", x), _away(rng, points)),
        "neg": (lambda x: elementwise("neg", x), rng.uniform(-3, 3, points)),
        "clamp_max": (lambda x: elementwise("clamp_max", x, 1.0), _away(rng, points, kinks=(1.0,))),
    }
    for name, (f, xs) in unary.items():
        _fd_check(r, name, f, xs)
    y = rng.uniform(0.5, 2.0, points) * rng.choice([-1.0, 1.0], points)
    binary = {
        "add": lambda x: elementwise("add", x, y),
        "sub": lambda x: elementwise("sub", x, y),
        "mul": lambda x: elementwise("mul", x, y),
        "div": lambda x: elementwise("div", x, y),
        "rdiv": lambda x: elementwise("div", y, x),
    }
    xs = rng.uniform(0.5, 2.0, points) * rng.choice([-1.0, 1.0], points)
    for name, f in binary.items():
        _fd_check(r, name, f, xs)
    M = rng.normal(size=(points // 10, 10))
    w = rng.normal(size=(10, 3))
    # distinct entries keep min/max away from ties
    for kind in ("sum", "mean", "min", "max"):
        _fd_check(r, kind, lambda x, kind=kind: reduce(kind, x), M.reshape(-1))
        _fd_check(r, f"{kind}-axis1", lambda x, kind=kind: reduce(kind, x, axis=1), M)
    _fd_check(r, "matmul", lambda x: matmul(x, w), M)
    _fd_check(r, "softmax", lambda x: softmax(x) * np.arange(points), rng.normal(size=points))
    mix = rng.normal(size=(4, 10))
    _fd_check(r, "broadcast_to", lambda x: x.reshape(1, 10).broadcast_to((4, 10)) * mix, M[0])
    _fd_check(r, "getitem", lambda x: x[np.array([0, 3, 3, 7])] * 2.0, M[0])
    return r


# -- kripke brute force ----------------------------------------------------


def _box_oracle(A, phi):
    n = len(phi)
    return [min(min(1.0, (1.0 - A[w][v]) + phi[v]) for v in range(n)) for w in range(n)]


def _diamond_oracle(A, phi):
    n = len(phi)
    return [max(A[w][v] * phi[v] for v in range(n)) for w in range(n)]


def kripke_oracle(trials: int = 200, max_worlds: int = 4, seed: int = 0) -> SuiteResult:
    """Operators against nested-loop definitions on random small structures."""
    r = SuiteResult("kripke-oracle")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        n = int(rng.integers(1, max_worlds + 1))
        A = rng.random((n, n))
        phi = rng.random(n)
        b = box(A, phi).value
        d = diamond(A, phi).value
        r.expect(np.max(np.abs(b - _box_oracle(A.tolist(), phi.tolist()))) <= ORACLE_TOL, f"box mismatch n={n}")
        r.expect(np.max(np.abs(d - _diamond_oracle(A.tolist(), phi.tolist()))) <= ORACLE_TOL, f"diamond mismatch n={n}")
    return r


def crisp_duality(n: int = 3) -> SuiteResult:
    """With 0/1 accessibility and valuations, box p == not diamond not p everywhere."""
    r = SuiteResult("crisp-duality")
    for bits in itertools.product((0.0, 1.0), repeat=n * n):
        A = np.array(bits).reshape(n, n)
        for val in itertools.product((0.0, 1.0), repeat=n):
            phi = np.array(val)
            lhs = box(A, phi).value
            rhs = 1.0 - diamond(A, 1.0 - phi).value
            r.expect(np.array_equal(lhs, rhs), f"duality fails for A={bits}, phi={val}")
    return r


# -- drone layout ----------------------------------------------------------


def layout_oracle(layout: DroneLayout | None = None) -> SuiteResult:
    """Geometric facts the orchestration scenario relies on."""
    L = layout if layout is not None else drones()
    r = SuiteResult("drone-layout")
    d = L.distances
    c, rad = L.no_fly_center, L.no_fly_radius
    clear = np.array([path_clearance(p, L.target, c, None) for p in L.positions])
    feasible = (clear >= rad) & (L.trust >= 1.0) & (L.conflicts == 0)
    r.expect(len(L.positions) == 16, "expected 16 drones")
    r.expect(int(np.argmin(d)) == 1, "drone 1 should be nearest to the target")
    r.expect(clear[0] <= 1e-9, "drone 0 path should cross the no-fly center")
    r.expect(L.trust[1] < 0.5 and feasible[0] == 0, "trap drones 0 and 1 must be infeasible")
    r.expect(L.conflicts[2] > 0 and clear[2] >= rad, "drone 2 must be a schedule trap with a clear path")
    r.expect(bool(feasible[15]), "drone 15 path must clear the no-fly zone")
    r.expect(bool(np.all(feasible[3:16])), "drones 3-15 must be feasible")
    r.expect(int(np.flatnonzero(feasible)[np.argmin(d[feasible])]) == 15, "drone 15 must be the nearest feasible drone")
    r.expect(bool(np.all(d[[0, 1, 2]] < d[15])), "trap drones must be nearer than drone 15")
    # sampled clearance never undercuts the exact segment distance
    for i, p in enumerate(L.positions):
        for s in (2, 10, 1000):
            r.expect(path_clearance(p, L.target, c, s) >= clear[i] - 1e-12, f"sampled clearance below exact for drone {i}")
    return r


SUITES = {
    "fuzzy-laws": fuzzy_laws,
    "autodiff-fd": gradient_checks,
    "kripke-oracle": kripke_oracle,
    "crisp-duality": crisp_duality,
    "drone-layout": layout_oracle,
}


def run_all() -> list[SuiteResult]:
    return [f() for f in SUITES.values()]
