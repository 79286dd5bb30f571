"""Learning rules over (H, T): worst-case risk, coverage, worst-case regret,
and their Multiplicative-Weights reductions to an ERM oracle.

Every rule comes in two forms: on an ErrorMatrix (rows = predictors,
columns = transforms) and on a sample, where the matrix is first tabulated
with :func:`transinv.core.error_matrix`.

Tie-breaking is uniform across rules: objective value first, then the
worst-case error, then the lowest enumeration index.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (ErrorMatrix, InvariantViolation, LabeledSample,
                   PreconditionError, Predictor, WeightedExampleSet,
                   error_matrix)
from .hypotheses import HypothesisSpace, enumerate_hypotheses, erm
from .transforms import inflate

log = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 100_000


@dataclass
class GameReport:
    rule: str
    opt_inf_hat: float
    opt_t_hat: tuple
    selected: int | None
    selected_tag: str
    worst_case_risk: float
    worst_case_regret: float
    objective: tuple = ()
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "rule": self.rule,
            "selected": self.selected_tag,
            "selected_index": self.selected,
            "opt_inf_hat": self.opt_inf_hat,
            "opt_t_hat": list(self.opt_t_hat),
            "worst_case_risk": self.worst_case_risk,
            "worst_case_regret": self.worst_case_regret,
            "objective": list(self.objective),
        }
        out.update(self.extra)
        return out


def _matrix(M) -> ErrorMatrix:
    return M if isinstance(M, ErrorMatrix) else ErrorMatrix(M)


def _select(primary, worst, maximize=False) -> int:
    """Index by (primary, worst-case error, index); primary maximised if asked."""
    keys = [((-p if maximize else p), w, i) for i, (p, w) in enumerate(zip(primary, worst))]
    return min(keys)[2]


def _report(rule, E: ErrorMatrix, i: int, objective) -> GameReport:
    V = E.values
    opt_t = V.min(axis=0)
    rowmax = V.max(axis=1)
    return GameReport(
        rule=rule,
        opt_inf_hat=float(rowmax.min()),
        opt_t_hat=tuple(float(v) for v in opt_t),
        selected=i,
        selected_tag=E.row_tags[i],
        worst_case_risk=float(rowmax[i]),
        worst_case_regret=float((V[i] - opt_t).max()),
        objective=tuple(float(v) for v in objective),
    )


def _tabulate(H, T, s, matrix):
    if matrix is not None:
        return _matrix(matrix), None
    if H is None or T is None or s is None:
        raise PreconditionError("pass either an error matrix or (H, T, s)")
    preds = enumerate_hypotheses(H) if isinstance(H, HypothesisSpace) else list(H)
    return error_matrix(preds, T, s), preds


def _attach(report: GameReport, preds):
    if preds is not None:
        report.extra["predictor"] = preds[report.selected]
    return report


# --------------------------------------------------------------- worst-case risk

def minmax_erm(H=None, T=None, s=None, *, matrix=None) -> GameReport:
    """argmin over h of max over T of the empirical error err(h, T(S))."""
    E, preds = _tabulate(H, T, s, matrix)
    rowmax = E.values.max(axis=1)
    i = _select(rowmax, rowmax)
    return _attach(_report("minmax", E, i, rowmax), preds)


@dataclass
class InflationResult:
    predictor: Predictor | None
    selected: int | None
    realizable: bool
    errors: tuple


def realizable_inflation(H=None, T=None, s: LabeledSample | None = None, *, matrix=None) -> InflationResult:
    """One ERM call on the inflated sample T(S).

    ``realizable`` is true when the returned predictor has zero error on
    every T(S). On a matrix, ERM over T(S) is the row of least mean error.
    """
    if matrix is not None:
        E = _matrix(matrix)
        # all T(S) have the same size, so the inflated error is the row mean
        means = np.array([math.fsum(r) / len(r) for r in E.values])
        i = int(np.argmin(means))
        errs = tuple(float(v) for v in E.values[i])
        return InflationResult(None, i, all(v == 0 for v in errs), errs)
    big = inflate(T, s)
    h = erm(H, big)
    errs = []
    for t in T:
        errs.append(int(np.count_nonzero(h(t(s.X)) != s.y)) / s.m)
    idx = None
    if getattr(H, "enumerable", False):
        tags = [g.tag for g in enumerate_hypotheses(H)]
        idx = tags.index(h.tag)
    return InflationResult(h, idx, all(v == 0 for v in errs), tuple(errs))


# ---------------------------------------------------------------- coverage

def coverage_select(H=None, T=None, s=None, *, matrix=None, eps: float, w=None) -> GameReport:
    """argmax over h of the (w-weighted) number of transforms with err(h, T(S)) <= eps."""
    if not 0 < eps <= 1:
        raise PreconditionError("eps must lie in (0, 1]")
    E, preds = _tabulate(H, T, s, matrix)
    V = E.values
    if w is None:
        w = getattr(T, "weights", None)
    ok = V <= eps
    if w is None:
        counts = ok.sum(axis=1).astype(float)
    else:
        w = np.asarray(w, dtype=float)
        if w.shape != (V.shape[1],) or np.any(w < 0) or math.fsum(w) > 1 + 1e-9:
            raise PreconditionError("weights must be non-negative, one per transform, sum <= 1")
        counts = np.array([math.fsum(w[row]) for row in ok])
    rowmax = V.max(axis=1)
    i = _select(counts, rowmax, maximize=True)
    rep = _report("coverage", E, i, counts)
    rep.extra.update(eps=eps, count=float(counts[i]), weighted=w is not None)
    return _attach(rep, preds)


# ---------------------------------------------------------------- worst-case regret

def regret_minmax(H=None, T=None, s=None, *, matrix=None) -> GameReport:
    """argmin over h of max over T of err(h, T(S)) - OPT_T_hat, with OPT_T_hat the
    column-wise ERM error."""
    E, preds = _tabulate(H, T, s, matrix)
    V = E.values
    regret = (V - V.min(axis=0)).max(axis=1)
    i = _select(regret, V.max(axis=1))
    return _attach(_report("regret", E, i, regret), preds)


# ---------------------------------------------------------------- MW machinery

class MixtureClassifier:
    """Uniform mixture of component predictors; errors are exact expectations."""

    def __init__(self, components):
        self.components = list(components)
        if not self.components:
            raise PreconditionError("a mixture needs at least one component")

    def __len__(self):
        return len(self.components)

    def error(self, t, s: LabeledSample) -> float:
        errs = [np.count_nonzero(h(t(s.X)) != s.y) / s.m for h in self.components]
        return math.fsum(errs) / len(errs)

    def sample(self, rng) -> Predictor:
        return self.components[int(rng.integers(len(self.components)))]


@dataclass
class GameTrace:
    rule: str
    eta: float
    rounds: int
    Q: np.ndarray            # (R, |T|), Q[r] is the distribution used in round r+1
    tags: list               # h_r tags
    errors: np.ndarray       # (R, |T|), err(h_r, T_j(S))
    Z: np.ndarray            # normalisers
    offsets: np.ndarray      # OPT_T_hat for the regret game, zeros otherwise
    mixture: MixtureClassifier | None = None
    heuristic: bool = False
    capped: bool = False
    mode: str = "exact"
    transform_names: tuple = ()
    row_indices: list | None = None

    @property
    def n_transforms(self) -> int:
        return self.Q.shape[1]

    def mixture_errors(self) -> np.ndarray:
        """Per-transform error of the uniform mixture, mean over rounds."""
        return np.array([math.fsum(c) / self.rounds for c in self.errors.T])

    def mixture_risk(self) -> float:
        return float(self.mixture_errors().max())

    def mixture_regret(self) -> float:
        return float((self.mixture_errors() - self.offsets).max())


def rounds_for(n_transforms: int, eps: float, max_rounds: int = DEFAULT_MAX_ROUNDS):
    """R = ceil(8 ln|T| / eps^2), at least 1; returns (R, capped)."""
    if n_transforms < 1:
        raise PreconditionError("need at least one transform")
    if n_transforms == 1:
        return 1, False
    R = math.ceil(8 * math.log(n_transforms) / eps ** 2)
    if R > max_rounds:
        log.warning("R=%d exceeds the cap; running %d rounds", R, max_rounds)
        return max_rounds, True
    return R, False


def mw_eta(n_transforms: int, R: int) -> float:
    return math.sqrt(8 * math.log(n_transforms) / R)


def multiplicative_weights(choose: Callable, errors_of: Callable, n_transforms: int, rounds: int,
                           eta: float | None = None, offsets=None, rule="mw"):
    """Play the transform player against ``choose``.

    Each round calls ``h = choose(r, Q)`` and ``e = errors_of(h)`` (length
    |T|), then sets Q <- Q * exp(-eta * (1 - (e - offsets))) / Z. With zero
    offsets this is the worst-case-risk update; with offsets OPT_T_hat it is
    the regret update exp(eta * (e - OPT_T_hat)) up to normalisation.
    """
    eta = mw_eta(n_transforms, rounds) if eta is None else eta
    offsets = np.zeros(n_transforms) if offsets is None else np.asarray(offsets, dtype=float)
    Q = np.full(n_transforms, 1.0 / n_transforms)
    Qs, errs, Zs, comps = [], [], [], []
    for r in range(rounds):
        Qs.append(Q)
        h = choose(r, Q)
        e = np.asarray(errors_of(h), dtype=float)
        comps.append(h)
        errs.append(e)
        u = Q * np.exp(-eta * (1.0 - (e - offsets)))
        Z = u.sum()
        Zs.append(Z)
        Q = u / Z
        if abs(Q.sum() - 1) > 1e-9 or np.any(Q < 0):
            raise InvariantViolation(f"round {r + 1}: Q is not a distribution")
    return GameTrace(rule=rule, eta=eta, rounds=rounds, Q=np.array(Qs), tags=[getattr(h, "tag", str(h)) for h in comps],
                     errors=np.array(errs), Z=np.array(Zs), offsets=offsets,
                     mixture=MixtureClassifier(comps),
                     heuristic=any(getattr(h, "heuristic", False) for h in comps))


def _oracle(erm_oracle):
    if isinstance(erm_oracle, HypothesisSpace):
        H = erm_oracle
        return lambda data: erm(H, data)
    if callable(erm_oracle):
        return erm_oracle
    raise PreconditionError("erm_oracle must be a HypothesisSpace or a callable")


class _Game:
    """Inflated sample with per-transform error evaluation."""

    def __init__(self, T, s: LabeledSample):
        self.transforms = list(T)
        if not self.transforms:
            raise PreconditionError("need at least one transform")
        self.s = s
        self.big = inflate(self.transforms, s)
        self.nT, self.m = len(self.transforms), s.m

    def errors_of(self, h) -> np.ndarray:
        wrong = (h(self.big.X) != self.big.y).reshape(self.nT, self.m)
        return wrong.sum(axis=1) / self.m

    def chooser(self, oracle, mode, m_erm, rng, round_offset=0):
        if mode == "exact":
            def choose(r, Q):
                w = np.repeat(Q / self.m, self.m)
                try:
                    return oracle(WeightedExampleSet(self.big.X, self.big.y, w / w.sum()))
                except Exception as exc:
                    raise RuntimeError(f"ERM oracle failed in round {r + 1}: {exc}") from exc
        elif mode == "sampled":
            if not m_erm or m_erm < 1:
                raise PreconditionError("sampled mode needs m_erm >= 1")

            def choose(r, Q):
                tj = rng.choice(self.nT, size=m_erm, p=Q)
                xi = rng.integers(self.m, size=m_erm)
                rows = tj * self.m + xi
                try:
                    return oracle(LabeledSample(self.big.X[rows], self.big.y[rows]))
                except Exception as exc:
                    raise RuntimeError(f"ERM oracle failed in round {r + 1}: {exc}") from exc
        else:
            raise PreconditionError(f"unknown mode {mode!r}")
        return choose


def _check_eps(eps):
    if not 0 < eps < 0.5:
        raise PreconditionError("eps must lie in (0, 1/2)")


def mw_erm_reduction(erm_oracle, T, s: LabeledSample, eps: float, m_erm: int | None = None,
                     seed: int | None = None, mode: str = "exact", max_rounds: int = DEFAULT_MAX_ROUNDS,
                     eta: float | None = None) -> GameTrace:
    """ERM player against Multiplicative Weights over T, minimising worst-case risk.

    ``mode="exact"`` hands the full weighted set Q_r x Unif(S) to a weighted
    ERM; ``mode="sampled"`` draws ``m_erm`` i.i.d. transformed examples per
    round.
    """
    _check_eps(eps)
    game = _Game(T, s)
    R, capped = rounds_for(game.nT, eps, max_rounds)
    if mode == "sampled" and seed is None:
        raise PreconditionError("sampled mode requires a seed")
    rng = np.random.default_rng(seed)
    choose = game.chooser(_oracle(erm_oracle), mode, m_erm, rng)
    tr = multiplicative_weights(choose, game.errors_of, game.nT, R, eta=eta, rule="mw-erm")
    tr.capped, tr.mode = capped, mode
    tr.transform_names = tuple(t.name for t in game.transforms)
    return tr


def mw_regret_reduction(erm_oracle, T, s: LabeledSample, eps: float, m_erm: int | None = None,
                        seed: int | None = None, mode: str = "exact", max_rounds: int = DEFAULT_MAX_ROUNDS,
                        eta: float | None = None) -> GameTrace:
    """As :func:`mw_erm_reduction` but for worst-case regret: first fit h_T = ERM(T(S))
    per transform, then reweight by exp(eta * (err(h_r, T(S)) - err(h_T, T(S))))."""
    _check_eps(eps)
    game = _Game(T, s)
    oracle = _oracle(erm_oracle)
    offsets = []
    for t in game.transforms:
        ht = oracle(LabeledSample(t(s.X), s.y))
        offsets.append(np.count_nonzero(ht(t(s.X)) != s.y) / s.m)
    R, capped = rounds_for(game.nT, eps, max_rounds)
    if mode == "sampled" and seed is None:
        raise PreconditionError("sampled mode requires a seed")
    rng = np.random.default_rng(seed)
    choose = game.chooser(oracle, mode, m_erm, rng)
    tr = multiplicative_weights(choose, game.errors_of, game.nT, R, eta=eta, offsets=offsets,
                                rule="mw-regret")
    tr.capped, tr.mode = capped, mode
    tr.transform_names = tuple(t.name for t in game.transforms)
    return tr


def _matrix_game(E: ErrorMatrix, eps, offsets, rule, max_rounds, eta):
    V = E.values
    R, capped = rounds_for(V.shape[1], eps, max_rounds)
    rows = list(range(V.shape[0]))

    def choose(r, Q):
        # exact weighted ERM over the rows; fsum keeps equal sums tied
        scores = [math.fsum(Q * V[i]) for i in rows]
        return int(np.argmin(scores))

    tr = multiplicative_weights(choose, lambda i: V[i], V.shape[1], R, eta=eta, offsets=offsets, rule=rule)
    tr.row_indices = list(tr.mixture.components)
    tr.tags = [E.row_tags[i] for i in tr.row_indices]
    tr.mixture = None
    tr.capped = capped
    tr.transform_names = E.col_names
    return tr


def mw_erm_matrix(matrix, eps: float, max_rounds: int = DEFAULT_MAX_ROUNDS, eta=None) -> GameTrace:
    """Exact-mode worst-case-risk reduction played directly on an error matrix."""
    _check_eps(eps)
    return _matrix_game(_matrix(matrix), eps, None, "mw-erm", max_rounds, eta)


def mw_regret_matrix(matrix, eps: float, max_rounds: int = DEFAULT_MAX_ROUNDS, eta=None) -> GameTrace:
    _check_eps(eps)
    E = _matrix(matrix)
    return _matrix_game(E, eps, E.values.min(axis=0), "mw-regret", max_rounds, eta)


# ---------------------------------------------------------------- regret bound

class BoundViolation(InvariantViolation):
    pass


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    slack: float
    best_transform: int


def mw_regret_bound_check(trace: GameTrace) -> BoundCheck:
    """Recompute both sides of the MW regret inequality on a finished trace:

        (1/R) sum_r l(h_r, Q_r) <= min_T (1/R) sum_r l(h_r, T) + sqrt(ln|T| / (2R))

    with l(h, Q) = 1 - E_{T~Q}[err(h, T(S)) - offset_T]. Valid when eta has the
    default value sqrt(8 ln|T| / R) and every loss lies in [0, 1].
    """
    R, n = trace.rounds, trace.n_transforms
    if trace.Q.shape != (R, n) or trace.errors.shape != (R, n):
        raise PreconditionError("trace is incomplete")
    if n > 1 and not math.isclose(trace.eta, mw_eta(n, R), rel_tol=1e-12):
        raise PreconditionError("bound applies only to eta = sqrt(8 ln|T| / R)")
    L = 1.0 - (trace.errors - trace.offsets)
    if np.any(L < -1e-12) or np.any(L > 1 + 1e-12):
        raise PreconditionError("losses fall outside [0, 1]; the bound does not apply")
    lhs = math.fsum(math.fsum(q * l) for q, l in zip(trace.Q, L)) / R
    per_t = np.array([math.fsum(col) / R for col in L.T])
    j = int(np.argmin(per_t))
    rhs = float(per_t[j]) + math.sqrt(math.log(n) / (2 * R))
    slack = rhs - lhs
    if slack < -1e-9:
        raise BoundViolation(f"MW regret bound violated by {-slack:.3g}")
    return BoundCheck(lhs, rhs, slack, j)
