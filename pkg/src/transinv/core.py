"""Datasets, finite-support distributions, predictors, transforms and errors.

Points are rows of a float array of shape ``(n, d)``. Labels are integer
arrays with entries in ``{+1, -1}``. Predictors and transforms are callables
acting on whole batches of points, so evaluating a predictor on a sample is
a single vectorised call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class PreconditionError(ValueError):
    """An operation was called outside its declared domain."""


class InvariantViolation(AssertionError):
    """A property that holds by proof failed; this signals a bug."""


def as_points(X, d: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if d in (None, 1) else X.reshape(1, -1)
    if X.ndim != 2:
        raise PreconditionError(f"points must be a 2-d array, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise PreconditionError(
            f"dimension mismatch: points have d={X.shape[1]}, expected d={d}")
    if not np.all(np.isfinite(X)):
        raise PreconditionError("points contain non-finite coordinates")
    return X


def as_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y).astype(int).ravel()
    if y.shape[0] != n:
        raise PreconditionError(f"{y.shape[0]} labels for {n} points")
    if not np.all((y == 1) | (y == -1)):
        raise PreconditionError("labels must be +1 or -1")
    return y


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def is_hypercube(X) -> bool:
    X = np.asarray(X)
    return bool(np.all((X == 1) | (X == -1)))


@dataclass(frozen=True)
class LabeledSample:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = as_points(self.X)
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(as_labels(self.y, X.shape[0])))

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.m

    def __iter__(self):
        return zip(self.X, self.y)

    def uniform_weights(self) -> "WeightedExampleSet":
        return WeightedExampleSet(self.X, self.y, np.full(self.m, 1.0 / self.m))


@dataclass(frozen=True)
class WeightedExampleSet:
    """Examples with non-negative weights summing to one."""

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        X = as_points(self.X)
        w = np.asarray(self.w, dtype=float).ravel()
        if w.shape[0] != X.shape[0]:
            raise PreconditionError(f"{w.shape[0]} weights for {X.shape[0]} points")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-9:
            raise PreconditionError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(as_labels(self.y, X.shape[0])))
        object.__setattr__(self, "w", _frozen(w))

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.m


@dataclass(frozen=True)
class FiniteDistribution:
    """A distribution over X x Y with finitely many atoms.

    Atoms are (point, label) pairs; the same point may carry both labels
    (label noise), but each (point, label) pair appears once.
    """

    X: np.ndarray
    y: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        X = as_points(self.X)
        y = as_labels(self.y, X.shape[0])
        mass = np.asarray(self.mass, dtype=float).ravel()
        if mass.shape[0] != X.shape[0]:
            raise PreconditionError(f"{mass.shape[0]} masses for {X.shape[0]} atoms")
        if np.any(mass < 0) or abs(math.fsum(mass) - 1.0) > 1e-9:
            raise PreconditionError("masses must be non-negative and sum to 1")
        atoms = np.column_stack([X, y])
        if np.unique(atoms, axis=0).shape[0] != atoms.shape[0]:
            raise PreconditionError("support atoms must be pairwise distinct")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "mass", _frozen(mass))

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @classmethod
    def uniform(cls, s: LabeledSample) -> "FiniteDistribution":
        """Empirical distribution of a sample (duplicates merged)."""
        atoms, counts = np.unique(np.column_stack([s.X, s.y]), axis=0, return_counts=True)
        return cls(atoms[:, :-1], atoms[:, -1], counts / counts.sum())

    def sample(self, m: int, rng: np.random.Generator) -> LabeledSample:
        idx = rng.choice(len(self.mass), size=m, p=self.mass)
        return LabeledSample(self.X[idx], self.y[idx])


class Predictor:
    """A map from points to {+1, -1}.

    Subclasses implement ``predict`` on an ``(n, d)`` array. ``tag`` identifies
    the predictor inside its space; ``heuristic`` marks outputs of
    approximate training (SGD) rather than exact ERM.
    """

    tag = "h"
    heuristic = False

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, X) -> np.ndarray:
        X = as_points(X)
        return np.asarray(self.predict(X), dtype=int)

    def __repr__(self):
        return f"{type(self).__name__}({self.tag!r})"


class Constant(Predictor):
    def __init__(self, label: int, tag: str | None = None):
        if label not in (1, -1):
            raise PreconditionError("constant label must be +1 or -1")
        self.label = label
        self.tag = tag or ("const+" if label == 1 else "const-")

    def predict(self, X):
        return np.full(X.shape[0], self.label)


class FunctionPredictor(Predictor):
    """Wraps a vectorised function ``fn(X) -> labels``."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], tag: str):
        self.fn = fn
        self.tag = tag

    def predict(self, X):
        return self.fn(X)


class TablePredictor(Predictor):
    """Lookup-table predictor on the integer domain {0, ..., n-1} (d = 1)."""

    def __init__(self, labels, tag: str):
        self.labels = _frozen(as_labels(labels, len(labels)))
        self.tag = tag

    def predict(self, X):
        idx = X[:, 0].astype(int)
        if X.shape[1] != 1 or np.any(idx != X[:, 0]) or np.any(idx < 0) or np.any(idx >= len(self.labels)):
            raise PreconditionError(
                f"{self.tag}: points outside the integer domain of size {len(self.labels)}")
        return self.labels[idx]


class Transform:
    """A dimension-preserving map on points, applied row-wise."""

    index = 0
    name = "T"

    def apply(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, X) -> np.ndarray:
        X = as_points(X)
        Z = np.asarray(self.apply(X), dtype=float)
        if Z.shape != X.shape:
            raise InvariantViolation(f"{self.name} changed the shape {X.shape} -> {Z.shape}")
        return Z

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class Identity(Transform):
    def __init__(self, index: int = 0, name: str = "id"):
        self.index = index
        self.name = name

    def apply(self, X):
        return X


class FunctionTransform(Transform):
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], index: int = 0, name: str | None = None):
        self.fn = fn
        self.index = index
        self.name = name or f"T{index + 1}"

    def apply(self, X):
        return self.fn(X)


class TableTransform(Transform):
    """Map on the integer domain {0, ..., n-1} given by its value table."""

    def __init__(self, table, index: int = 0, name: str | None = None):
        self.table = _frozen(np.asarray(table, dtype=int))
        self.index = index
        self.name = name or f"T{index + 1}"

    def apply(self, X):
        idx = X[:, 0].astype(int)
        if X.shape[1] != 1 or np.any(idx < 0) or np.any(idx >= len(self.table)):
            raise PreconditionError(f"{self.name}: points outside the integer domain")
        return self.table[idx].astype(float).reshape(-1, 1)


class ComposedPredictor(Predictor):
    """x -> h(t(x))."""

    def __init__(self, h: Predictor, t: Transform):
        self.h = h
        self.t = t
        self.tag = f"{h.tag}@{t.name}"
        self.heuristic = h.heuristic

    def predict(self, X):
        return self.h(self.t(X))


def _check_dims(t: Transform, X: np.ndarray, d: int | None):
    if d is not None and X.shape[1] != d:
        raise PreconditionError(f"dimension mismatch: data d={X.shape[1]}, expected d={d}")


def mistakes(h: Predictor, t: Transform, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean vector of points misclassified after transforming."""
    return h(t(X)) != y


def empirical_error(h: Predictor, t: Transform, s: LabeledSample, d: int | None = None) -> float:
    """Fraction of the sample misclassified by h after applying t."""
    if s.m == 0:
        raise PreconditionError("empirical error of an empty sample")
    _check_dims(t, s.X, d)
    return int(np.count_nonzero(mistakes(h, t, s.X, s.y))) / s.m


def weighted_error(h: Predictor, data: WeightedExampleSet, t: Transform | None = None) -> float:
    X = data.X if t is None else t(data.X)
    return math.fsum(data.w[h(X) != data.y])


def population_error(h: Predictor, t: Transform, dist: FiniteDistribution, d: int | None = None) -> float:
    """Exact probability that h(t(x)) != y under a finite distribution."""
    _check_dims(t, dist.X, d)
    return math.fsum(dist.mass[mistakes(h, t, dist.X, dist.y)])


@dataclass(frozen=True)
class ErrorMatrix:
    """Errors of every (predictor, transform) pair; rows are predictors."""

    values: np.ndarray
    row_tags: tuple = field(default=())
    col_names: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise PreconditionError(f"error matrix must be a non-empty 2-d array, got {v.shape}")
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise PreconditionError("error matrix entries must lie in [0, 1]")
        rows = tuple(self.row_tags) or tuple(f"h{i + 1}" for i in range(v.shape[0]))
        cols = tuple(self.col_names) or tuple(f"T{j + 1}" for j in range(v.shape[1]))
        if len(rows) != v.shape[0] or len(cols) != v.shape[1]:
            raise PreconditionError("row/column labels do not match the matrix shape")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "row_tags", rows)
        object.__setattr__(self, "col_names", cols)

    @property
    def shape(self):
        return self.values.shape


def error_matrix(H, T, source) -> ErrorMatrix:
    """Tabulate err(h, T(source)) for every h in H and T in T.

    ``source`` is a LabeledSample (empirical errors) or a FiniteDistribution
    (population errors). H must be enumerable.
    """
    predictors = _enumerate_predictors(H)
    transforms = list(T)
    if isinstance(source, FiniteDistribution):
        err = population_error
    elif isinstance(source, LabeledSample):
        err = empirical_error
    else:
        raise PreconditionError(f"unsupported error source {type(source).__name__}")
    # transform once per column, then score every predictor on it
    vals = np.empty((len(predictors), len(transforms)))
    for j, t in enumerate(transforms):
        Z = t(source.X)
        for i, h in enumerate(predictors):
            wrong = h(Z) != source.y
            if err is empirical_error:
                vals[i, j] = int(np.count_nonzero(wrong)) / source.X.shape[0]
            else:
                vals[i, j] = math.fsum(source.mass[wrong])
    return ErrorMatrix(vals, tuple(h.tag for h in predictors), tuple(t.name for t in transforms))


def _enumerate_predictors(H) -> list[Predictor]:
    if isinstance(H, Predictor):
        return [H]
    if hasattr(H, "enumerable"):
        if not H.enumerable:
            raise PreconditionError(
                f"hypothesis space {H.kind!r} is not enumerable; use an oracle-based learner")
        return list(H.predictors())
    return list(H)


def realize_error_table(table: Sequence[Sequence[float]], resolution: int):
    """Build (predictors, transforms, distribution) whose population errors equal ``table``.

    Every entry must be a multiple of ``1/resolution``. The distribution is
    uniform over ``resolution`` base points labelled +1; transform j sends the
    k-th base point to a fresh point tagged (j, k), and predictor i labels
    (j, k) negative for the first ``table[i][j] * resolution`` values of k.
    Points are encoded in two coordinates (tag, k) with base points at tag -1.
    """
    A = np.asarray(table, dtype=float)
    counts = np.rint(A * resolution).astype(int)
    if np.any(np.abs(counts - A * resolution) > 1e-9):
        raise PreconditionError(f"table entries are not multiples of 1/{resolution}")
    n_h, n_t = A.shape
    base = np.column_stack([np.full(resolution, -1.0), np.arange(resolution, dtype=float)])
    dist = FiniteDistribution(base, np.ones(resolution, dtype=int), np.full(resolution, 1.0 / resolution))

    def shift(j):
        def fn(X):
            if np.any(X[:, 0] != -1):
                raise PreconditionError("realised transforms act on base points only")
            return np.column_stack([np.full(X.shape[0], float(j)), X[:, 1]])
        return fn

    transforms = [FunctionTransform(shift(j), index=j, name=f"T{j + 1}") for j in range(n_t)]

    def labeler(row):
        row = row.copy()

        def fn(X):
            tag = X[:, 0].astype(int)
            k = X[:, 1]
            out = np.ones(X.shape[0], dtype=int)
            img = tag >= 0
            out[img] = np.where(k[img] < row[tag[img]], -1, 1)
            return out
        return fn

    predictors = [FunctionPredictor(labeler(counts[i]), tag=f"h{i + 1}") for i in range(n_h)]
    return predictors, transforms, dist
