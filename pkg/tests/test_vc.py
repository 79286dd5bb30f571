import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transinv.core import Constant, Identity, PreconditionError, TablePredictor, TableTransform
from transinv.hypotheses import LowerBoundFamily, Thresholds1D, constants
from transinv.transforms import (BooleanBitmaps, LinearMap, LowerBoundTransforms,
                                 base_points)
from transinv.vc import (Composition, behaviors, boolean_composition_check, dictators, is_shattered,
                         linear_closure_check, lowerbound_assignment, lowerbound_check,
                         optimistic_B, sample_size, sauer_bound_check, sauer_phi, vc_dimension,
                         vc_of_labels)


def brute_vc(L):
    """Largest shattered column subset, by trying every subset."""
    L = np.asarray(L)
    best = 0
    for r in range(1, L.shape[1] + 1):
        if any(is_shattered(L, S) for S in itertools.combinations(range(L.shape[1]), r)):
            best = r
    return best


def random_table_family(rng, n_fun, n_pts):
    L = rng.choice([-1, 1], size=(n_fun, n_pts))
    return [TablePredictor(L[i], tag=f"f{i}") for i in range(n_fun)], L


# ---------------------------------------------------------------- behaviours

def test_single_constant_one_behavior():
    P = np.random.default_rng(0).normal(size=(5, 2))
    assert len(behaviors(Constant(1), P)) == 1


def test_two_constants_two_behaviors():
    assert len(behaviors(constants(), np.zeros((3, 1)))) == 2


def test_thresholds_three_collinear_points():
    P = np.array([[1.0], [2.0], [3.0]])
    assert len(behaviors(Thresholds1D([1, 2, 3]), P)) == 4


def test_behaviors_budget_flags_partial():
    P = np.arange(25.0)[:, None]
    b = behaviors(Thresholds1D(np.arange(25.0)), P)
    assert b.partial and b.points.shape[0] == 20


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_composed_behaviors_bounded(seed):
    rng = np.random.default_rng(seed)
    n_pts = int(rng.integers(1, 6))
    H, _ = random_table_family(rng, int(rng.integers(1, 5)), 3 * n_pts)
    T = [TableTransform(rng.integers(0, 3 * n_pts, size=3 * n_pts), index=j) for j in range(int(rng.integers(1, 4)))]
    P = np.arange(n_pts, dtype=float)[:, None]
    n = len(behaviors(Composition(H, T), P))
    assert n <= len(H) * len(T) and n <= 2 ** n_pts


# ---------------------------------------------------------------- vc

def test_singleton_family_vc0():
    assert vc_dimension([Constant(1)], np.zeros((4, 1))).value == 0


def test_two_constants_vc1():
    r = vc_dimension(constants(), np.arange(3.0)[:, None])
    assert r.value == 1 and r.exact and r.witness == (0,)


def test_thresholds_vc1():
    P = np.arange(6.0)[:, None]
    assert vc_dimension(Thresholds1D(np.arange(6.0)), P).value == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_vc_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    L = rng.choice([-1, 1], size=(int(rng.integers(1, 20)), int(rng.integers(1, 7))))
    r = vc_of_labels(L)
    assert r.exact and r.value == brute_vc(L)
    assert is_shattered(L, r.witness)
    # witness is the lexicographically first shattered set of maximal size
    first = next(S for S in itertools.combinations(range(L.shape[1]), r.value) if is_shattered(L, S))
    assert r.witness == first


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_vc_monotone_in_family(seed):
    rng = np.random.default_rng(seed)
    L = rng.choice([-1, 1], size=(12, 6))
    vals = [vc_of_labels(L[:i]).value for i in range(1, 13)]
    assert vals == sorted(vals)


def test_vc_budget_gives_lower_bound():
    L = np.array(list(itertools.product([1, -1], repeat=6)))
    r = vc_of_labels(L, max_size=3)
    assert not r.exact and r.value == 3 and is_shattered(L, r.witness)


@pytest.mark.parametrize("k", [2, 3])
def test_lowerbound_construction(k):
    r = lowerbound_check(k)
    assert r.vc_h.value == 1 and r.vc_h.exact
    assert r.vc_ht.value >= k
    L = Composition(LowerBoundFamily(k), LowerBoundTransforms(k)).labels(base_points(k))
    assert is_shattered(L, range(k))
    assert r.witness_verified


def test_lowerbound_assignment_follows_padding_rule():
    k = 3
    # labels (-,+,-): I = {1,3}, padding {4} (1-based) -> 0-based (0, 2, 3)
    assert lowerbound_assignment(k, [-1, 1, -1]) == (0, 2, 3)
    assert lowerbound_assignment(k, [1, 1, 1]) == (3, 4, 5)
    assert lowerbound_assignment(k, [-1, -1, -1]) == (0, 1, 2)


# ---------------------------------------------------------------- Sauer

def test_sauer_identity_reduces_to_sauer_shelah():
    P = np.arange(5.0)[:, None]
    r = sauer_bound_check(Thresholds1D(np.arange(5.0)), [Identity()], P)
    assert r.n_behaviors == 6 and r.vc_h == 1 and r.bound_phi == sauer_phi(1, 5) == 6


def test_sauer_lowerbound_k2():
    P = base_points(2)[:4]
    r = sauer_bound_check(LowerBoundFamily(2), LowerBoundTransforms(2), P)
    assert r.n_behaviors <= r.sum_over_t <= r.bound_phi
    assert r.slack >= 0


@pytest.mark.parametrize("seed", range(100))
def test_sauer_random(seed):
    rng = np.random.default_rng(seed)
    n_dom = 12
    H, _ = random_table_family(rng, int(rng.integers(1, 9)), n_dom)
    T = [TableTransform(rng.integers(0, n_dom, size=n_dom), index=j) for j in range(int(rng.integers(1, 5)))]
    P = rng.choice(n_dom, size=int(rng.integers(1, 7)), replace=False).astype(float)[:, None]
    r = sauer_bound_check(H, T, P)
    assert r.n_behaviors <= len(T) * sauer_phi(r.vc_h, r.m)
    if r.m >= r.vc_h:
        assert r.n_behaviors <= r.bound_closed + 1e-9


def test_sauer_vc_zero_case():
    r = sauer_bound_check([Constant(-1)], [Identity(), Identity()], np.zeros((3, 1)))
    assert r.vc_h == 0 and r.bound_closed == 2


# ---------------------------------------------------------------- linear closure

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
SCALE = np.array([[2.0, 0.0], [0.0, 0.5]])
RANK1 = np.array([[1.0, 1.0], [0.0, 0.0]])


def test_linear_closure_identity():
    P = np.random.default_rng(0).normal(size=(5, 2))
    r = linear_closure_check(P, [np.eye(2)])
    assert r.subset and r.n_composed == r.n_base


def test_linear_closure_rotation_and_scaling():
    P = np.random.default_rng(1).normal(size=(6, 2))
    r = linear_closure_check(P, [ROT, SCALE])
    assert r.subset and r.vc_composed <= 3


def test_linear_closure_rank_deficient():
    P = np.random.default_rng(2).normal(size=(6, 2))
    r = linear_closure_check(P, [RANK1, LinearMap(np.zeros((2, 2)))])
    assert r.subset and r.vc_composed <= 3


def test_linear_closure_preconditions():
    with pytest.raises(PreconditionError):
        linear_closure_check(np.zeros((9, 2)), [np.eye(2)])
    with pytest.raises(PreconditionError):
        linear_closure_check(np.zeros((3, 4)), [np.eye(4)])


# ---------------------------------------------------------------- Boolean

def test_boolean_identity_d2():
    H = dictators(2)
    r = boolean_composition_check(H, [Identity()], 2)
    assert r.vc_ht == r.vc_h == 1
    assert r.vc_t == (0, 0)


def test_boolean_bitflips_dictators_d2():
    r = boolean_composition_check(dictators(2), BooleanBitmaps.all_flips(2), 2)
    # {+-x1, +-x2} on {+-1}^2 shatters two points, no three
    assert r.vc_h == 1 and r.vc_ht == 2 and r.vc_t == (1, 1)
    assert r.ratio == 2 / 3
    assert r.exact


@pytest.mark.parametrize("seed", range(5))
def test_boolean_random_d3(seed):
    rng = np.random.default_rng(seed)
    masks = rng.integers(0, 2, size=(3, 3))
    from transinv.transforms import bit_flip
    T = [bit_flip(m, index=j) for j, m in enumerate(masks)]
    r = boolean_composition_check(dictators(3, negations=True), T, 3)
    assert math.isfinite(r.ratio)


# ---------------------------------------------------------------- sample sizes

def test_uniform_shape_example():
    r = sample_size(1, 0.5, 0.5, "uniform", 1.0)
    assert abs(r.m_estimate - (1 + math.log(2)) / 0.25) < 1e-12
    assert abs(r.m_estimate - 6.77) < 5e-3


def test_B_example():
    assert abs(optimistic_B(100, 2, 0.05) - 0.1559) < 5e-5
    assert abs(optimistic_B(100, 2, 0.05) - (2 * math.log(100 * math.e) + math.log(80)) / 100) < 1e-12


def test_halving_eps_quadruples_uniform_shape():
    a = sample_size(3, 0.2, 0.1).m_estimate
    b = sample_size(3, 0.1, 0.1).m_estimate
    assert abs(b / a - 4) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.9), st.floats(0.01, 0.9), st.sampled_from(["uniform", "optimistic"]))
def test_sample_size_monotone(eps, delta, shape):
    base = sample_size(2, eps, delta, shape).m_estimate
    assert sample_size(2, eps * 1.05 if eps * 1.05 < 1 else eps, delta, shape).m_estimate <= base
    assert sample_size(2, eps, min(delta * 1.05, 0.99), shape).m_estimate <= base


def test_sample_size_preconditions():
    with pytest.raises(PreconditionError):
        sample_size(1, 0, 0.5)
    with pytest.raises(PreconditionError):
        optimistic_B(10, 0, 0.1)
