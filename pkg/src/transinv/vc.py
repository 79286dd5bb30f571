"""Exhaustive shattering, growth-function checks and sample-size calculators.

All VC values here are computed over an explicit finite candidate domain.
The search is level-wise: a set of size s+1 is only tried if every s-subset
is shattered, and candidate sets are visited in lexicographic order so the
reported witness is the lexicographically first shattered set of maximal size.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (ComposedPredictor, InvariantViolation, PreconditionError,
                   Predictor, as_points)
from .hypotheses import (FiniteTable, HypothesisSpace, LowerBoundFamily,
                         enumerate_hypotheses, halfspace_dichotomies)
from .transforms import (LowerBoundTransforms, base_points, cube,
                         lowerbound_domain)


class Composition:
    """The family {h o t : h in H, t in T}, h-major."""

    kind = "composition"
    enumerable = True

    def __init__(self, H, T):
        self.H = enumerate_hypotheses(H) if isinstance(H, HypothesisSpace) else list(H)
        self.T = list(T)

    def predictors(self):
        return [ComposedPredictor(h, t) for h in self.H for t in self.T]

    def __len__(self):
        return len(self.H) * len(self.T)

    def labels(self, P) -> np.ndarray:
        P = as_points(P)
        out = np.empty((len(self.H), len(self.T), P.shape[0]), dtype=int)
        for j, t in enumerate(self.T):
            Z = t(P)
            for i, h in enumerate(self.H):
                out[i, j] = h(Z)
        return out.reshape(-1, P.shape[0])


def compose(H, T) -> Composition:
    return Composition(H, T)


def label_matrix(family, P) -> np.ndarray:
    """Rows: functions of the family; columns: points of P; entries +-1."""
    if isinstance(family, Composition):
        return family.labels(P)
    if isinstance(family, np.ndarray):
        return family
    P = as_points(P)
    if isinstance(family, Predictor):
        preds = [family]
    elif isinstance(family, HypothesisSpace):
        preds = enumerate_hypotheses(family)
    else:
        preds = list(family)
    if not preds:
        raise PreconditionError("empty function family")
    return np.array([h(P) for h in preds], dtype=int)


@dataclass
class BehaviorSet:
    points: np.ndarray
    vectors: np.ndarray       # distinct label vectors, lexicographically sorted
    partial: bool = False

    def __len__(self):
        return self.vectors.shape[0]

    def as_set(self) -> set:
        return {tuple(v) for v in self.vectors}


def behaviors(family, P, max_points: int = 20) -> BehaviorSet:
    """Distinct label vectors realised by the family on P.

    More than ``max_points`` points: only the first ``max_points`` are used
    and the result is flagged partial.
    """
    P = as_points(P)
    partial = P.shape[0] > max_points
    if partial:
        P = P[:max_points]
    L = label_matrix(family, P)
    return BehaviorSet(P, np.unique(L, axis=0), partial)


def _codes(B: np.ndarray, S) -> np.ndarray:
    cols = B[:, list(S)]
    return cols @ (1 << np.arange(len(S), dtype=np.int64))


def is_shattered(L: np.ndarray, S) -> bool:
    """True when the rows of L restricted to columns S realise all 2^|S| patterns."""
    S = tuple(S)
    if not S:
        return L.shape[0] > 0
    B = (np.asarray(L) == 1).astype(np.int64)
    return np.unique(_codes(B, S)).size == 1 << len(S)


@dataclass
class VCReport:
    family: str
    value: int
    exact: bool
    witness: tuple
    max_size: int | None = None
    max_candidates: int | None = None
    candidates_checked: int = 0

    def describe(self) -> str:
        rel = "=" if self.exact else ">="
        return f"vc({self.family}) {rel} {self.value}, witness {list(self.witness)}"


def vc_of_labels(L, family: str = "F", max_size: int | None = None,
                 max_candidates: int = 2_000_000) -> VCReport:
    """VC dimension of the set system whose functions are the rows of L."""
    L = np.unique(np.asarray(L, dtype=int), axis=0)
    if L.shape[0] == 0:
        raise PreconditionError("VC dimension of an empty family is undefined")
    B = (L == 1).astype(np.int64)
    n = L.shape[1]
    n_fun = L.shape[0]
    limit = n if max_size is None else min(max_size, n)
    checked = 0

    def shatters(S):
        return np.unique(_codes(B, S)).size == 1 << len(S)

    level = []
    for i in range(n):
        checked += 1
        if shatters((i,)):
            level.append((i,))
    if not level:
        return VCReport(family, 0, True, (), max_size, max_candidates, checked)
    if limit < 1:
        return VCReport(family, 0, False, (), max_size, max_candidates, checked)
    size, best = 1, level[0]
    while True:
        if 1 << (size + 1) > n_fun or size >= n:
            exact = True
            break
        if size >= limit:
            exact = False
            break
        known = set(level)
        nxt = []
        over_budget = False
        for S in level:
            for j in range(S[-1] + 1, n):
                C = S + (j,)
                if not all(C[:k] + C[k + 1:] in known for k in range(size)):
                    continue
                checked += 1
                if checked > max_candidates:
                    over_budget = True
                    break
                if shatters(C):
                    nxt.append(C)
            if over_budget:
                break
        if over_budget:
            if nxt:
                size, best = size + 1, nxt[0]
            exact = False
            break
        if not nxt:
            exact = True
            break
        size, best, level = size + 1, nxt[0], nxt
    if not is_shattered(L, best):
        raise InvariantViolation(f"witness {best} is not shattered")
    return VCReport(family, size, exact, best, max_size, max_candidates, checked)


def vc_dimension(family, points, max_size: int | None = None, max_candidates: int = 2_000_000,
                 name: str | None = None) -> VCReport:
    """VC dimension of an enumerable family over the candidate domain ``points``.

    ``exact`` is False when a budget stopped the search; ``value`` is then a
    lower bound certified by ``witness``.
    """
    L = label_matrix(family, points)
    name = name or getattr(family, "kind", type(family).__name__)
    return vc_of_labels(L, name, max_size, max_candidates)


# ---------------------------------------------------------------- growth bounds

def sauer_phi(d: int, m: int) -> int:
    """Sauer-Shelah bound sum_{i<=d} C(m, i) on the number of behaviours."""
    return sum(math.comb(m, i) for i in range(0, min(d, m) + 1))


def sauer_closed_form(d: int, m: int) -> float:
    """(e m / d)^d, with the d = 0 case taken as 1."""
    return 1.0 if d == 0 else (math.e * m / d) ** d


@dataclass
class SauerReport:
    n_behaviors: int
    sum_over_t: int
    vc_h: int
    m: int
    n_transforms: int
    bound_phi: int
    bound_closed: float | None
    slack: float


def sauer_bound_check(H, T, P, domain=None) -> SauerReport:
    """Check |Pi_{H o T}(P)| <= sum_T |Pi_H(T(P))| <= |T| Phi_{vc(H)}(m) <= |T| (e m / vc(H))^vc(H).

    vc(H) is computed over ``domain`` (default: P together with every T(P)).
    The closed form only applies when m >= vc(H); below that it can fall
    short of 2^m and only the Phi bound is asserted.
    """
    P = as_points(P)
    preds = enumerate_hypotheses(H) if isinstance(H, HypothesisSpace) else list(H)
    Ts = list(T)
    if domain is None:
        domain = np.unique(np.concatenate([P] + [t(P) for t in Ts]), axis=0)
    vc_h = vc_of_labels(label_matrix(preds, domain), "H").value
    m = P.shape[0]
    n_beh = len(behaviors(Composition(preds, Ts), P, max_points=m))
    per_t = sum(len(behaviors(preds, t(P), max_points=m)) for t in Ts)
    phi = len(Ts) * sauer_phi(vc_h, m)
    closed = len(Ts) * sauer_closed_form(vc_h, m) if m >= vc_h else None
    if not n_beh <= per_t <= phi:
        raise InvariantViolation(f"growth bound violated: {n_beh} / {per_t} behaviours, bound {phi}")
    if closed is not None and phi > closed * (1 + 1e-12):
        raise InvariantViolation(f"Phi bound {phi} exceeds the closed form {closed}")
    ref = closed if closed is not None else phi
    return SauerReport(n_beh, per_t, vc_h, m, len(Ts), phi, closed, ref - n_beh)


@dataclass
class LinearClosureReport:
    d: int
    n_points: int
    n_base: int
    n_composed: int
    subset: bool
    vc_composed: int
    vc_bound: int
    per_map: list = field(default_factory=list)


def linear_closure_check(P, maps) -> LinearClosureReport:
    """Check that halfspaces composed with linear maps realise no labelling of P that
    halfspaces alone cannot, so vc of the composition on P is at most d + 1."""
    P = as_points(P)
    n, d = P.shape
    if d > 3 or n > 8:
        raise PreconditionError("linear closure check needs d <= 3 and at most 8 points")
    base = set(halfspace_dichotomies(P))
    composed = set()
    per_map = []
    for A in maps:
        A = getattr(A, "A", A)
        A = np.asarray(A, dtype=float)
        if A.shape != (d, d):
            raise PreconditionError(f"map of shape {A.shape} does not act on R^{d}")
        got = set(halfspace_dichotomies(P @ A.T))
        per_map.append(len(got))
        composed |= got
    subset = composed <= base
    vc_c = vc_of_labels(np.array(sorted(composed)), "H o T").value if composed else 0
    if not subset:
        raise InvariantViolation(f"{len(composed - base)} composed labellings are not halfspace labellings")
    if vc_c > d + 1:
        raise InvariantViolation(f"vc(H o T) on P is {vc_c} > d + 1 = {d + 1}")
    return LinearClosureReport(d, n, len(base), len(composed), subset, vc_c, d + 1, per_map)


@dataclass
class BooleanReport:
    d: int
    vc_h: int
    vc_ht: int
    vc_t: tuple
    ratio: float
    exact: bool


def boolean_composition_check(H, T, d: int, max_candidates: int = 500_000) -> BooleanReport:
    """Exact vc(H o T), vc(H) and vc(T_i) over {+1,-1}^d, with
    ratio = vc(H o T) / ((vc(H) + sum_i vc(T_i)) * log2 d).

    T_i is the family x -> T(x)_i. The ratio is reported, not bounded.
    """
    if not 2 <= d <= 6:
        raise PreconditionError("boolean composition check needs 2 <= d <= 6")
    C = cube(d)
    Ts = list(T)
    r_h = vc_dimension(H, C, max_candidates=max_candidates, name="H")
    r_ht = vc_of_labels(Composition(H, Ts).labels(C), "H o T", max_candidates=max_candidates)
    imgs = np.stack([t(C) for t in Ts])          # (|T|, 2^d, d)
    r_ti = [vc_of_labels(imgs[:, :, i].astype(int), f"T_{i + 1}", max_candidates=max_candidates)
            for i in range(d)]
    denom = (r_h.value + sum(r.value for r in r_ti)) * math.log2(d)
    ratio = r_ht.value / denom if denom > 0 else (0.0 if r_ht.value == 0 else math.inf)
    exact = r_h.exact and r_ht.exact and all(r.exact for r in r_ti)
    return BooleanReport(d, r_h.value, r_ht.value, tuple(r.value for r in r_ti), ratio, exact)


# ---------------------------------------------------------------- lower-bound construction

def lowerbound_instance(k: int):
    """(H, T, base points, full domain) of the vc(H) = 1, vc(H o T) >= k construction."""
    return LowerBoundFamily(k), LowerBoundTransforms(k), base_points(k), lowerbound_domain(k)


def lowerbound_assignment(k: int, labels) -> tuple:
    """The k-subset P (0-based) with h_P(T_P(x_i)) = labels[i] for i < k:
    the negatively labelled indices padded with k+1..2k-|I| (1-based)."""
    labels = list(labels)
    if len(labels) != k:
        raise PreconditionError(f"need {k} labels")
    neg = [i for i, v in enumerate(labels) if v == -1]
    return tuple(sorted(neg + list(range(k, 2 * k - len(neg)))))


@dataclass
class LowerBoundReport:
    k: int
    vc_h: VCReport
    vc_ht: VCReport
    witness_verified: bool


def lowerbound_check(k: int) -> LowerBoundReport:
    """vc(H) over the whole instance space and vc(H o T) over the base points, plus an
    explicit check that x_1..x_k are shattered via the constructed subsets."""
    H, T, base, domain = lowerbound_instance(k)
    r_h = vc_dimension(H, domain, name="H")
    comp = Composition(H, T)
    r_ht = vc_of_labels(comp.labels(base), "H o T")
    # the composed family is only defined on base points, so over X this is a lower bound
    r_ht.exact = False
    preds, trans = H.predictors(), T.members()
    index = {P: p for p, P in enumerate(H.subsets)}
    ok = True
    for y in itertools.product([1, -1], repeat=k):
        p = index[lowerbound_assignment(k, y)]
        got = preds[p](trans[p](base[:k]))
        ok &= bool(np.array_equal(got, np.array(y)))
    if not ok:
        raise InvariantViolation("constructed subsets fail to shatter x_1..x_k")
    return LowerBoundReport(k, r_h, r_ht, ok)


# ---------------------------------------------------------------- sample sizes

@dataclass
class ComplexityReport:
    shape: str
    vc: float
    eps: float
    delta: float
    c: float
    m_estimate: float
    B: float | None = None
    m_for_B: int | None = None


def optimistic_B(m: int, vc: float, delta: float) -> float:
    """B(m, delta) = (vc ln(2 e m / vc) + ln(4 / delta)) / m."""
    if vc < 1 or m < 1:
        raise PreconditionError("B(m, delta) needs vc >= 1 and m >= 1")
    return (vc * math.log(2 * math.e * m / vc) + math.log(4 / delta)) / m


def sample_size(vc: float, eps: float, delta: float, shape: str = "uniform", c: float = 1.0,
                m: int | None = None) -> ComplexityReport:
    """c * (vc + ln(1/delta)) / eps^2 ("uniform", uniform convergence) or
    c * (vc ln(1/eps) + ln(1/delta)) / eps ("optimistic", optimistic rate);
    natural logarithms throughout. With ``m`` given, also returns B(m, delta).
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise PreconditionError("eps and delta must lie in (0, 1)")
    if vc < 0 or c <= 0:
        raise PreconditionError("vc must be non-negative and c positive")
    if shape == "uniform":
        est = c * (vc + math.log(1 / delta)) / eps ** 2
    elif shape == "optimistic":
        est = c * (vc * math.log(1 / eps) + math.log(1 / delta)) / eps
    else:
        raise PreconditionError(f"unknown shape {shape!r}")
    B = optimistic_B(m, vc, delta) if m is not None else None
    return ComplexityReport(shape, vc, eps, delta, c, est, B, m)


def dictators(d: int, negations: bool = False) -> FiniteTable:
    """x -> x_i (and optionally -x_i) on {+1,-1}^d."""
    from .core import FunctionPredictor

    preds = [FunctionPredictor(lambda X, i=i: X[:, i].astype(int), tag=f"x{i + 1}") for i in range(d)]
    if negations:
        preds += [FunctionPredictor(lambda X, i=i: -X[:, i].astype(int), tag=f"-x{i + 1}") for i in range(d)]
    return FiniteTable(preds)
