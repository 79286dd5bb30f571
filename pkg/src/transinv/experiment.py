"""Baseline vs. transformation-augmented SGD on Boolean-cube targets.

Targets are full parity and majority-of-subparities on {+1,-1}^d under the
uniform distribution. The augmented learner replaces each correctly
classified training example by a randomly transformed copy (from a group
under which the target is invariant) before taking the SGD step.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PreconditionError, is_hypercube
from .hypotheses import DivergenceError, init_net, net_forward
from .transforms import AllPermutations, BlockPermutations, TransformSpace

log = logging.getLogger(__name__)

METHODS = ("baseline", "augmented")


@dataclass(frozen=True)
class TargetFunction:
    kind: str
    d: int
    blocks: int = 3

    def __post_init__(self):
        if self.kind not in ("parity-full", "majority-of-subparities"):
            raise PreconditionError(f"unknown target {self.kind!r}")
        if self.d < 1:
            raise PreconditionError("d must be positive")
        if self.kind == "majority-of-subparities" and self.d % self.blocks:
            raise PreconditionError(f"majority-of-subparities needs {self.blocks} | d, got d={self.d}")

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X))
        if X.shape[1] != self.d or not is_hypercube(X):
            raise PreconditionError(f"target is defined on {{+1,-1}}^{self.d}")
        if self.kind == "parity-full":
            return np.prod(X, axis=1).astype(int)
        b = self.d // self.blocks
        s = sum(np.prod(X[:, j * b:(j + 1) * b], axis=1) for j in range(self.blocks))
        return np.sign(s).astype(int)

    def invariance_group(self) -> TransformSpace:
        if self.kind == "parity-full":
            return AllPermutations(self.d)
        return BlockPermutations(self.d, self.blocks)


def eval_target(f: TargetFunction, x) -> int | np.ndarray:
    x = np.asarray(x)
    out = f(x)
    return int(out[0]) if x.ndim == 1 else out


FULL_SCALE_CONFIGS = {
    "full-parity": dict(d=18, target="parity-full", train_size=7000, test_size=1000),
    "full-majority": dict(d=21, target="majority-of-subparities", train_size=5000, test_size=1000),
}


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 10
    target: str = "parity-full"
    train_size: int = 2000
    test_size: int = 1000
    transforms: str = "auto"
    steps: int = 30000
    lr: float = 0.01
    batch_size: int = 1
    width: int = 512
    seeds: tuple = (0, 1, 2, 3, 4)
    eval_interval: int = 1000
    activation: str = "relu"

    def __post_init__(self):
        for name in ("d", "train_size", "test_size", "batch_size", "width", "eval_interval"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive")
        if self.steps < 0 or self.lr < 0:
            raise PreconditionError("steps and lr must be non-negative")
        if not self.seeds:
            raise PreconditionError("at least one seed is required")
        if self.transforms not in ("auto", "permutations-all", "permutations-block"):
            raise PreconditionError(f"unknown transform space {self.transforms!r}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        self.target_function()

    @classmethod
    def full_scale(cls, name: str, **kw) -> "ExperimentConfig":
        """Preset dimension, target and data sizes; they win over conflicting ``kw``."""
        if name not in FULL_SCALE_CONFIGS:
            raise PreconditionError(f"unknown full-scale config {name!r}")
        preset = FULL_SCALE_CONFIGS[name]
        for k in preset:
            if k in kw and kw[k] != preset[k]:
                log.warning("%s: %s=%r replaced by preset value %r", name, k, kw[k], preset[k])
        return cls(**{**kw, **preset})

    def target_function(self) -> TargetFunction:
        return TargetFunction(self.target, self.d)

    def transform_space(self) -> TransformSpace:
        if self.transforms == "permutations-all":
            return AllPermutations(self.d)
        if self.transforms == "permutations-block":
            return BlockPermutations(self.d)
        return self.target_function().invariance_group()


@dataclass(frozen=True)
class RunRecord:
    seed: int
    method: str
    step: int
    train_err: float
    test_err: float
    diverged: bool = False


def _streams(seed: int):
    """Independent generators: data, init, baseline run, augmented run."""
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(c) for c in ss.spawn(4)]


def sample_cube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=(n, d))


def classification_error(params, X, y) -> float:
    # zero output is a mistake
    out = net_forward(params, X)
    return float(np.mean(np.sign(out) != y))


def _train(cfg, params, Xtr, ytr, Xte, yte, rng, method, f, T, seed):
    """SGD loop shared by both methods; ``params`` is mutated."""
    records = []
    W1, b1, w2 = params.W1, params.b1, params.w2
    b2 = np.array([params.b2])
    lr, bs = cfg.lr, cfg.batch_size
    augmented = method == "augmented"

    def emit(step, diverged=False):
        params.b2 = float(b2[0])
        records.append(RunRecord(seed, method, step, classification_error(params, Xtr, ytr),
                                 classification_error(params, Xte, yte), diverged))

    emit(0)
    for step in range(1, cfg.steps + 1):
        idx = rng.integers(len(ytr), size=bs)
        X = Xtr[idx].copy()
        y = ytr[idx].astype(float)
        Z = X @ W1.T + b1
        A = np.maximum(Z, 0.0)
        out = A @ w2 + b2[0]
        if augmented:
            hit = np.sign(out) == y
            if hit.any():
                for i in np.flatnonzero(hit):
                    X[i] = T.sample(rng)(X[i:i + 1])[0]
                fx = f(X[hit])
                if np.any(fx != y[hit]):
                    raise AssertionError("transformed example changed its label")
                Z = X @ W1.T + b1
                A = np.maximum(Z, 0.0)
                out = A @ w2 + b2[0]
        g = 2.0 * (out - y) / bs
        dZ = np.outer(g, w2) * (Z > 0)
        gW1 = dZ.T @ X
        gw2 = A.T @ g
        if not (np.isfinite(gW1).all() and np.isfinite(gw2).all()):
            log.warning("seed %d %s diverged at step %d", seed, method, step)
            emit(step, diverged=True)
            return records
        W1 -= lr * gW1
        b1 -= lr * dZ.sum(axis=0)
        w2 -= lr * gw2
        b2 -= lr * g.sum()
        if step % cfg.eval_interval == 0 or step == cfg.steps:
            emit(step)
    return records


def run_experiment(cfg: ExperimentConfig, seed: int, methods=METHODS) -> list[RunRecord]:
    """Train baseline and augmented networks from the same initialisation.

    The two methods draw from disjoint child streams of ``seed``, so either
    run is reproducible on its own.
    """
    if cfg.activation != "relu":
        raise PreconditionError("the experiment loop is specialised to ReLU")
    f = cfg.target_function()
    T = cfg.transform_space()
    data_rng, init_rng, *run_rngs = _streams(seed)
    Xtr = sample_cube(cfg.train_size, cfg.d, data_rng)
    Xte = sample_cube(cfg.test_size, cfg.d, data_rng)
    ytr, yte = f(Xtr), f(Xte)
    p0 = init_net(cfg.d, cfg.width, init_rng, cfg.activation)
    records = []
    for method, rng in zip(METHODS, run_rngs):
        if method in methods:
            # overflow is caught by the finiteness check in _train
            with np.errstate(over="ignore", invalid="ignore"):
                records += _train(cfg, p0.copy(), Xtr, ytr, Xte, yte, rng, method, f, T, seed)
    return records


def run_all(cfg: ExperimentConfig) -> list[RunRecord]:
    out = []
    for s in cfg.seeds:
        out += run_experiment(cfg, s)
    return out


@dataclass(frozen=True)
class SummaryRow:
    method: str
    step: int
    mean_test_err: float
    std_test_err: float
    n_seeds: int = field(default=0, compare=False)


def aggregate(records) -> list[SummaryRow]:
    """Per-(method, step) mean and population std of test error over seeds."""
    grid = {}
    for r in records:
        grid.setdefault(r.method, {}).setdefault(r.seed, {})[r.step] = r.test_err
    rows = []
    for method in sorted(grid, key=lambda m: (METHODS.index(m) if m in METHODS else len(METHODS), m)):
        by_seed = grid[method]
        steps = {tuple(sorted(v)) for v in by_seed.values()}
        if len(steps) != 1:
            raise PreconditionError(f"ragged step grids across seeds for {method!r}")
        for step in steps.pop():
            vals = np.array([by_seed[s][step] for s in sorted(by_seed)])
            rows.append(SummaryRow(method, step, float(vals.mean()), float(vals.std()), len(vals)))
    return rows


def final_test_errors(records) -> dict:
    """{(seed, method): test error at the last recorded step}."""
    last = {}
    for r in records:
        k = (r.seed, r.method)
        if k not in last or r.step >= last[k].step:
            last[k] = r
    return {k: v.test_err for k, v in last.items()}


RECORD_FIELDS = ("seed", "method", "step", "train_err", "test_err")
SUMMARY_FIELDS = ("method", "step", "mean_test_err", "std_test_err")


def records_to_csv(records, header_comment: str = "") -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(header_comment)
    for r in records:
        if r.diverged:
            buf.write(f"# diverged seed={r.seed} method={r.method} step={r.step}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([r.seed, r.method, r.step, repr(r.train_err), repr(r.test_err)])
    return buf.getvalue()


def summary_to_csv(rows, header_comment: str = "") -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(header_comment)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in rows:
        w.writerow([r.method, r.step, repr(r.mean_test_err), repr(r.std_test_err)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rd = csv.DictReader(lines)
    return [RunRecord(int(r["seed"]), r["method"], int(r["step"]), float(r["train_err"]),
                      float(r["test_err"])) for r in rd]


def gnuplot_script(summary_file: str, title: str = "") -> str:
    """A gnuplot description plotting mean test error per method."""
    return "\n".join([
        "# gnuplot script; run: gnuplot -p <this file>",
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel 'SGD step'",
        "set ylabel 'test error'",
        "set key top right",
        f"plot '< grep ^baseline {summary_file}' using 2:3 with lines title 'baseline', \\",
        f"     '< grep ^augmented {summary_file}' using 2:3 with lines title 'augmented'",
        "",
    ])


def invariance_identity(h, f: TargetFunction, transforms=None) -> dict:
    """err(h, t(cube)) versus err(h, cube) under the uniform distribution on the full cube,
    for every enumerated member t of the target's invariance group (d <= 8).

    Returns {transform name: err(h, t(cube))} and the untransformed error under key None.
    """
    from .transforms import cube

    if f.d > 8:
        raise PreconditionError("full-cube check requires d <= 8")
    C = cube(f.d)
    y = f(C)
    out = {None: float(np.mean(h(C) != y))}
    for t in (transforms if transforms is not None else f.invariance_group()):
        out[t.name] = float(np.mean(h(t(C)) != y))
    return out
