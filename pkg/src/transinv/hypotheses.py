"""Hypothesis classes with ERM: finite tables, 1-d thresholds, halfspaces,
the lower-bound family h_P, and a trainable two-layer network.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .core import (Constant, LabeledSample, PreconditionError, Predictor,
                   WeightedExampleSet, as_labels, as_points)


class HypothesisSpace:
    kind = "finite-table"
    enumerable = True

    def predictors(self) -> list[Predictor]:
        raise NotImplementedError

    def __len__(self):
        return len(self.predictors())

    def __iter__(self):
        return iter(self.predictors())

    def describe(self) -> dict:
        return {"kind": self.kind, "size": len(self)}


class FiniteTable(HypothesisSpace):
    """An explicitly listed family of predictors; tags must be unique."""

    def __init__(self, predictors):
        self._preds = list(predictors)
        tags = [h.tag for h in self._preds]
        if len(set(tags)) != len(tags):
            raise PreconditionError("predictor tags must be unique")

    def predictors(self):
        return list(self._preds)


class ThresholdPredictor(Predictor):
    """+1 strictly left of the threshold, -1 from it onwards."""

    def __init__(self, threshold: float, tag: str):
        self.threshold = threshold
        self.tag = tag

    def predict(self, X):
        if X.shape[1] != 1:
            raise PreconditionError(f"thresholds act on d=1, got d={X.shape[1]}")
        return np.where(X[:, 0] < self.threshold, 1, -1)


class Thresholds1D(HypothesisSpace):
    """Thresholds over a finite grid g_1 < ... < g_n of locations.

    Predictor j (j = 0..n) labels exactly the j leftmost grid cells +1; its
    threshold sits midway between g_j and g_{j+1}, at -inf for j = 0 and
    +inf for j = n, so the two extremes are the constants.
    """

    kind = "threshold-1d"

    def __init__(self, grid):
        g = np.unique(np.asarray(grid, dtype=float))
        if g.size == 0:
            raise PreconditionError("threshold grid is empty")
        self.grid = g
        mids = (g[:-1] + g[1:]) / 2
        self.thresholds = np.concatenate([[-np.inf], mids, [np.inf]])

    def predictors(self):
        return [ThresholdPredictor(c, tag=f"thr{j}") for j, c in enumerate(self.thresholds)]

    def describe(self):
        return {"kind": self.kind, "grid": self.grid.tolist()}


class HalfspacePredictor(Predictor):
    def __init__(self, w, b: float, tag: str):
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)
        self.tag = tag

    def predict(self, X):
        if X.shape[1] != self.w.shape[0]:
            raise PreconditionError(f"halfspace in d={self.w.shape[0]}, point d={X.shape[1]}")
        return np.where(X @ self.w + self.b >= 0, 1, -1)


def separate(X, y):
    """Return (w, b) with y_i (w.x_i + b) >= 1 for all i, or None if no halfspace exists.

    Strict separability with margin 1 is equivalent to realisability of the
    labelling by some sign(w.x + b) on a finite point set.
    """
    X = as_points(X)
    y = as_labels(y, X.shape[0])
    n, d = X.shape
    # variables z = (w, b); constraints -y_i (x_i, 1).z <= -1
    A = -y[:, None] * np.column_stack([X, np.ones(n)])
    res = linprog(np.zeros(d + 1), A_ub=A, b_ub=-np.ones(n), bounds=[(None, None)] * (d + 1),
                  method="highs")
    if res.status == 0:
        z = res.x
        if np.all(y * (X @ z[:d] + z[d]) > 0):
            return z[:d], z[d]
    elif res.status != 2:
        raise RuntimeError(f"linear feasibility solver failed: {res.message}")
    return None


def separable(X, y) -> bool:
    return separate(X, y) is not None


def _separable_patterns(X):
    """Yield (labelling, (w, b)) for every halfspace-realisable labelling of X, in
    lexicographic order over (+1, -1)^n.

    A labelling of the first k rows is realisable only if its prefixes are,
    so depth-first extension with pruning visits O(n * #patterns) candidates.
    """
    n = X.shape[0]
    stack = [((), (np.zeros(X.shape[1]), 1.0))]
    while stack:
        y, sol = stack.pop()
        if len(y) == n:
            yield y, sol
            continue
        for v in (-1, 1):          # pushed in reverse so +1 is expanded first
            z = y + (v,)
            nxt = separate(X[:len(z)], z)
            if nxt is not None:
                stack.append((z, nxt))


def halfspace_dichotomies(X) -> list[tuple]:
    """All labellings of the rows of X realisable by a halfspace, in lexicographic order
    over (+1, -1)^n. Repeated points receive equal labels."""
    X = as_points(X)
    return [y for y, _ in _separable_patterns(X)]


class Halfspaces(HypothesisSpace):
    """Affine halfspaces in R^d, one representative per realisable sign pattern
    on a declared query point set."""

    kind = "halfspace"

    def __init__(self, query_points):
        self.query = as_points(query_points)
        self.d = self.query.shape[1]
        self._preds = None

    def predictors(self):
        if self._preds is None:
            self._preds = [HalfspacePredictor(*sol, tag="hs[" + "".join("+" if v > 0 else "-" for v in y) + "]")
                           for y, sol in _separable_patterns(self.query)]
        return list(self._preds)

    def describe(self):
        return {"kind": self.kind, "d": self.d, "query_points": len(self.query)}


class LowerBoundPredictor(Predictor):
    """h_P: negative exactly on the image points (p, i) with i in P."""

    def __init__(self, p: int, subset):
        self.p = p
        self.subset = tuple(subset)
        self._neg = np.zeros(max(self.subset) + 1 if self.subset else 0, dtype=bool)
        self._neg[list(self.subset)] = True
        self.tag = "h_P(" + ",".join(str(i + 1) for i in self.subset) + ")"

    def predict(self, X):
        if X.shape[1] != 2:
            raise PreconditionError("lower-bound points have two coordinates (tag, index)")
        i = X[:, 1].astype(int)
        in_p = np.zeros(X.shape[0], dtype=bool)
        ok = (i >= 0) & (i < len(self._neg))
        in_p[ok] = self._neg[i[ok]]
        return np.where((X[:, 0] == self.p) & in_p, -1, 1)


class LowerBoundFamily(HypothesisSpace):
    """{h_P : P a k-subset of [3k]}, lexicographic in P; pairs with LowerBoundTransforms."""

    kind = "lowerbound-hP"

    def __init__(self, k: int):
        if k < 1:
            raise PreconditionError("k must be positive")
        self.k = k
        self.subsets = list(itertools.combinations(range(3 * k), k))

    def predictors(self):
        return [LowerBoundPredictor(p, P) for p, P in enumerate(self.subsets)]

    def describe(self):
        return {"kind": self.kind, "k": self.k}


def enumerate_hypotheses(H) -> list[Predictor]:
    if not getattr(H, "enumerable", False):
        raise PreconditionError(f"hypothesis space {getattr(H, 'kind', H)!r} is oracle-only")
    return H.predictors()


def _as_weighted(data) -> WeightedExampleSet:
    if isinstance(data, WeightedExampleSet):
        return data
    if isinstance(data, LabeledSample):
        if data.m == 0:
            raise PreconditionError("ERM on an empty sample")
        return data.uniform_weights()
    raise PreconditionError(f"cannot run ERM on {type(data).__name__}")


def weighted_errors(preds, data: WeightedExampleSet) -> np.ndarray:
    """Weighted error of each predictor (correctly rounded sums, so equal
    error sets tie exactly)."""
    return np.array([math.fsum(data.w[h(data.X) != data.y]) for h in preds])


def erm(H, data, **train_kw) -> Predictor:
    """Minimise (weighted) empirical error over H.

    Enumerable spaces return an exact minimiser, lowest enumeration index on
    ties. ``TwoLayerNetSpace`` returns an SGD-trained network flagged
    ``heuristic``.
    """
    if len(data) == 0:
        raise PreconditionError("ERM on an empty sample")
    if isinstance(H, TwoLayerNetSpace):
        return H.train(data, **train_kw)
    data = _as_weighted(data)
    preds = enumerate_hypotheses(H)
    errs = weighted_errors(preds, data)
    return preds[int(np.argmin(errs))]


# ---------------------------------------------------------------- two-layer net

class DivergenceError(FloatingPointError):
    pass


@dataclass
class NetParams:
    """f(x) = w2 . act(W1 x + b1) + b2."""

    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    activation: str = "relu"

    @property
    def width(self):
        return self.W1.shape[0]

    @property
    def d(self):
        return self.W1.shape[1]

    def copy(self) -> "NetParams":
        return replace(self, W1=self.W1.copy(), b1=self.b1.copy(), w2=self.w2.copy())

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.w2, [self.b2]])

    @classmethod
    def from_flat(cls, v, width: int, d: int, activation="relu") -> "NetParams":
        v = np.asarray(v, dtype=float)
        n1 = width * d
        if v.shape != (n1 + 2 * width + 1,):
            raise PreconditionError("flat parameter vector has the wrong length")
        return cls(v[:n1].reshape(width, d).copy(), v[n1:n1 + width].copy(),
                   v[n1 + width:n1 + 2 * width].copy(), float(v[-1]), activation)

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.flat()).all())


_ACTS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(float)),
    "identity": (lambda z: z, lambda z: np.ones_like(z)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
}


def init_net(d: int, width: int = 512, rng: np.random.Generator | None = None,
             activation: str = "relu") -> NetParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias."""
    if activation not in _ACTS:
        raise PreconditionError(f"unknown activation {activation!r}")
    rng = rng if rng is not None else np.random.default_rng(0)
    a1, a2 = 1 / math.sqrt(d), 1 / math.sqrt(width)
    return NetParams(rng.uniform(-a1, a1, (width, d)), rng.uniform(-a1, a1, width),
                     rng.uniform(-a2, a2, width), float(rng.uniform(-a2, a2)), activation)


def net_forward(p: NetParams, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    act = _ACTS[p.activation][0]
    return act(X @ p.W1.T + p.b1) @ p.w2 + p.b2


def squared_loss(p: NetParams, X, y) -> float:
    """Mean of (f(x) - y)^2 over the batch."""
    out = net_forward(p, X)
    return float(np.mean((out - np.atleast_1d(y)) ** 2))


def loss_gradient(p: NetParams, X, y):
    """Gradient of the mean squared loss; returns (dW1, db1, dw2, db2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    act, dact = _ACTS[p.activation]
    Z = X @ p.W1.T + p.b1
    A = act(Z)
    g = 2.0 * (A @ p.w2 + p.b2 - y) / X.shape[0]
    dZ = np.outer(g, p.w2) * dact(Z)
    return dZ.T @ X, dZ.sum(axis=0), A.T @ g, float(g.sum())


def sgd_step(p: NetParams, x, y, lr: float, inplace: bool = False) -> NetParams:
    """One gradient step on the squared loss of (x, y); x may be a batch."""
    with np.errstate(invalid="ignore", over="ignore"):
        dW1, db1, dw2, db2 = loss_gradient(p, x, y)
    if not (np.isfinite(dW1).all() and np.isfinite(dw2).all() and math.isfinite(db2)):
        raise DivergenceError("non-finite gradient in sgd_step")
    q = p if inplace else p.copy()
    if lr:
        q.W1 -= lr * dW1
        q.b1 -= lr * db1
        q.w2 -= lr * dw2
        q.b2 -= lr * db2
    return q


class NetPredictor(Predictor):
    heuristic = True

    def __init__(self, params: NetParams, tag: str = "net"):
        self.params = params
        self.tag = tag

    def predict(self, X):
        # an output of exactly 0 counts as -1 here; training treats it as a mistake
        return np.where(net_forward(self.params, X) > 0, 1, -1)


class TwoLayerNetSpace(HypothesisSpace):
    """Oracle-only class of width-``width`` two-layer networks trained by SGD."""

    kind = "two-layer-net"
    enumerable = False

    def __init__(self, d: int, width: int = 512, activation: str = "relu", lr: float = 0.01,
                 steps: int = 1000, seed: int = 0):
        self.d, self.width, self.activation = d, width, activation
        self.lr, self.steps, self.seed = lr, steps, seed

    def predictors(self):
        raise PreconditionError("two-layer-net is oracle-only")

    def __len__(self):
        raise PreconditionError("two-layer-net is oracle-only")

    def train(self, data, steps: int | None = None, seed: int | None = None) -> NetPredictor:
        data = _as_weighted(data)
        rng = np.random.default_rng(self.seed if seed is None else seed)
        p = init_net(self.d, self.width, rng, self.activation)
        for _ in range(self.steps if steps is None else steps):
            i = rng.choice(data.m, p=data.w)
            sgd_step(p, data.X[i], data.y[i], self.lr, inplace=True)
        return NetPredictor(p, tag=f"net(seed={self.seed if seed is None else seed})")

    def describe(self):
        return {"kind": self.kind, "d": self.d, "width": self.width, "activation": self.activation}


def constants() -> FiniteTable:
    return FiniteTable([Constant(1), Constant(-1)])
