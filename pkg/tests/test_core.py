import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transinv.core import (Constant, ErrorMatrix, FiniteDistribution, FunctionPredictor,
                           Identity, LabeledSample, PreconditionError, WeightedExampleSet,
                           empirical_error, error_matrix, population_error, realize_error_table)
from transinv.hypotheses import FiniteTable, TwoLayerNetSpace
from transinv.transforms import swap

EX1 = [[0.01, 0.01, 0.49], [0.01, 0.49, 0.49], [0.49, 0.49, 0.49]]
EX2 = [[0, 1 / 8, 1 / 4, 1 / 2], [1 / 2, 1 / 2, 1 / 2, 1 / 2]]

parity2 = FunctionPredictor(lambda X: np.where(np.prod(X, axis=1) > 0, 1, -1), tag="parity")


def test_constant_on_all_positive_sample():
    s = LabeledSample(np.zeros((4, 2)), [1, 1, 1, 1])
    assert empirical_error(Constant(1), Identity(), s) == 0.0


def test_constant_with_one_negative():
    s = LabeledSample(np.zeros((4, 2)), [1, 1, -1, 1])
    assert empirical_error(Constant(1), Identity(), s) == 0.25


@pytest.mark.parametrize("seed", range(10))
def test_parity_under_swap_matches_per_point_count(seed):
    rng = np.random.default_rng(seed)
    X = rng.choice([-1.0, 1.0], size=(3, 2))
    y = rng.choice([-1, 1], size=3)
    t = swap(0, 1, 2)
    s = LabeledSample(X, y)
    wrong = 0
    for x, lab in zip(X, y):
        z = np.array([x[1], x[0]])
        pred = z[0] * z[1]
        wrong += pred != lab
    assert empirical_error(parity2, t, s) == wrong / 3


def test_dimension_mismatch_rejected():
    s = LabeledSample(np.zeros((2, 3)), [1, 1])
    with pytest.raises(PreconditionError, match="dimension"):
        empirical_error(Constant(1), Identity(), s, d=2)
    with pytest.raises(PreconditionError):
        swap(0, 1, 2)(s.X)


def test_population_uniform_two_points():
    D = FiniteDistribution([[0.0], [1.0]], [1, -1], [0.5, 0.5])
    assert population_error(Constant(1), Identity(), D) == 0.5


def test_population_weighted():
    D = FiniteDistribution([[0.0], [1.0]], [1, -1], [0.9, 0.1])
    assert abs(population_error(Constant(1), Identity(), D) - 0.1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_population_matches_replicated_sample(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    X = rng.integers(-3, 4, size=(n, 2)).astype(float)
    X[:, 0] += np.arange(n) * 10  # distinct atoms
    y = rng.choice([-1, 1], size=n)
    counts = rng.integers(1, 6, size=n)
    mass = counts / counts.sum()
    D = FiniteDistribution(X, y, mass)
    rep = LabeledSample(np.repeat(X, counts, axis=0), np.repeat(y, counts))
    w = rng.normal(size=2)
    h = FunctionPredictor(lambda Z: np.where(Z @ w >= 0, 1, -1), tag="lin")
    t = swap(0, 1, 2)
    assert abs(population_error(h, t, D) - empirical_error(h, t, rep)) < 1e-9


def test_example1_matrix_realised():
    H, T, D = realize_error_table(EX1, 100)
    E = error_matrix(H, T, D)
    assert np.abs(E.values - np.array(EX1)).max() < 1e-9
    assert E.values[2, 2] == 0.49


def test_example2_matrix_realised():
    H, T, D = realize_error_table(EX2, 8)
    E = error_matrix(H, T, D)
    assert np.array_equal(E.values, np.array(EX2))


def test_one_by_one_matrix():
    s = LabeledSample([[1.0], [2.0], [3.0]], [1, -1, -1])
    E = error_matrix([Constant(1)], [Identity()], s)
    assert E.shape == (1, 1)
    assert E.values[0, 0] == empirical_error(Constant(1), Identity(), s)


def test_error_matrix_rejects_oracle_space():
    s = LabeledSample([[1.0]], [1])
    with pytest.raises(PreconditionError, match="not enumerable"):
        error_matrix(TwoLayerNetSpace(1, width=2), [Identity()], s)


def test_error_matrix_deterministic():
    rng = np.random.default_rng(0)
    s = LabeledSample(rng.normal(size=(9, 2)), rng.choice([-1, 1], 9))
    H = FiniteTable([parity2, Constant(1), Constant(-1)])
    T = [Identity(), swap(0, 1, 2)]
    a, b = error_matrix(H, T, s), error_matrix(H, T, s)
    assert a.values.tobytes() == b.values.tobytes()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=30), st.integers(0, 999))
def test_empirical_error_is_count_over_m(labels, seed):
    rng = np.random.default_rng(seed)
    s = LabeledSample(rng.normal(size=(len(labels), 2)), labels)
    e = empirical_error(parity2, swap(0, 1, 2), s)
    assert 0 <= e <= 1
    assert Fraction(e).limit_denominator(s.m) * s.m == round(e * s.m)


def test_uniform_distribution_equals_empirical():
    rng = np.random.default_rng(3)
    s = LabeledSample(rng.normal(size=(7, 2)), rng.choice([-1, 1], 7))
    D = FiniteDistribution.uniform(s)
    assert abs(population_error(parity2, Identity(), D) - empirical_error(parity2, Identity(), s)) < 1e-9


def test_distribution_invariants():
    with pytest.raises(PreconditionError):
        FiniteDistribution([[0.0], [1.0]], [1, 1], [0.5, 0.6])
    with pytest.raises(PreconditionError, match="distinct"):
        FiniteDistribution([[0.0], [0.0]], [1, 1], [0.5, 0.5])
    # a point may carry both labels
    FiniteDistribution([[0.0], [0.0]], [1, -1], [0.5, 0.5])


def test_sample_rejects_bad_labels_and_ragged_points():
    with pytest.raises(PreconditionError):
        LabeledSample([[0.0], [1.0]], [1, 0])
    with pytest.raises(PreconditionError):
        LabeledSample([[0.0], [1.0]], [1])
    with pytest.raises(PreconditionError):
        WeightedExampleSet([[0.0], [1.0]], [1, 1], [0.5, 0.4])


def test_matrix_entries_checked():
    with pytest.raises(PreconditionError):
        ErrorMatrix([[0.1, 1.2]])
    E = ErrorMatrix([[0.1, 0.2]])
    assert E.row_tags == ("h1",) and E.col_names == ("T1", "T2")


def test_distribution_sampling_seeded():
    D = FiniteDistribution([[0.0], [1.0], [2.0]], [1, -1, 1], [0.2, 0.3, 0.5])
    a = D.sample(50, np.random.default_rng(5))
    b = D.sample(50, np.random.default_rng(5))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_immutable():
    s = LabeledSample([[0.0]], [1])
    with pytest.raises(ValueError):
        s.X[0, 0] = 3.0


def test_realize_rejects_off_grid():
    with pytest.raises(PreconditionError):
        realize_error_table([[0.333]], 8)


def test_realised_table_all_rationals_small():
    for vals in itertools.product(range(4), repeat=2):
        table = [[v / 3 for v in vals]]
        H, T, D = realize_error_table(table, 3)
        assert np.allclose(error_matrix(H, T, D).values, table, atol=1e-12)
