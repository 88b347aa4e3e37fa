import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdtl.boolean import (
    BooleanFunction,
    FourierSpectrum,
    Leaf,
    Node,
    Prefix,
    best_parity,
    eval_tree,
    inverse_wht,
    l1_norm,
    parity_eval,
    parity_table,
    prefix_weight,
    random_tree,
    tree_size,
    tree_to_function,
    validate_tree,
    wht,
)

from conftest import all_prefixes, brute_force_coefficients, random_function

bits = st.integers(min_value=1, max_value=8)


def test_constant_leaf_evaluates_to_its_label():
    assert all(eval_tree(Leaf(1), x, 3) == 1 for x in range(8))


def test_dictator_on_first_variable():
    tree = Node(0, Leaf(-1), Leaf(1))
    assert eval_tree(tree, 0b10, 2) == 1
    assert eval_tree(tree, 0b01, 2) == -1


def test_and_tree_enumerated(and_tree):
    expected = {0b00: -1, 0b01: -1, 0b10: -1, 0b11: 1}
    for x, label in expected.items():
        assert eval_tree(and_tree, x, 2) == label
    assert list(tree_to_function(and_tree, 2).values) == [-1, -1, -1, 1]


def test_truth_tables_of_small_trees():
    assert list(tree_to_function(Leaf(1), 2).values) == [1, 1, 1, 1]
    assert list(tree_to_function(Node(0, Leaf(1), Leaf(-1)), 1).values) == [1, -1]


@given(n=st.integers(2, 10), t=st.integers(1, 24), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_random_tree_shape_and_table(n, t, seed):
    t = min(t, 1 << n)
    tree = random_tree(n, t, np.random.default_rng(seed))
    assert tree_size(tree) == t
    validate_tree(tree, n)
    f = tree_to_function(tree, n)
    assert all(f.values[x] == eval_tree(tree, x, n) for x in range(1 << n))


def test_random_tree_small_shapes_and_determinism():
    assert isinstance(random_tree(4, 1, np.random.default_rng(0)), Leaf)
    two = random_tree(4, 2, np.random.default_rng(0))
    assert isinstance(two, Node) and isinstance(two.low, Leaf) and isinstance(two.high, Leaf)
    first = random_tree(8, 8, np.random.default_rng(42))
    assert first == random_tree(8, 8, np.random.default_rng(42))


@pytest.mark.parametrize("t", [0, 17])
def test_random_tree_rejects_size_out_of_range(t):
    with pytest.raises(ValueError):
        random_tree(4, t, np.random.default_rng(0))


def test_validate_tree_rejects_bad_trees():
    with pytest.raises(ValueError):
        validate_tree(Node(3, Leaf(1), Leaf(-1)), 2)
    with pytest.raises(ValueError):
        validate_tree(Node(0, Node(0, Leaf(1), Leaf(1)), Leaf(-1)), 2)


def test_boolean_function_validation():
    with pytest.raises(ValueError):
        BooleanFunction(2, [1, -1, 1])
    with pytest.raises(ValueError):
        BooleanFunction(1, [1, 0])
    with pytest.raises(ValueError):
        BooleanFunction(21, [1])


def test_wht_known_spectra(and_tree):
    assert list(wht(BooleanFunction.constant(2)).coeffs) == [1, 0, 0, 0]
    assert list(wht(BooleanFunction.parity(2, 0b10)).coeffs) == [0, 0, 1, 0]
    coeffs = wht(tree_to_function(and_tree, 2)).coeffs
    assert list(coeffs) == [-0.5, -0.5, -0.5, 0.5]


@given(n=st.integers(1, 7), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_wht_matches_direct_sums(n, seed):
    f = random_function(n, np.random.default_rng(seed))
    np.testing.assert_allclose(wht(f).coeffs, brute_force_coefficients(f.values), atol=1e-12)


@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_parseval_and_exact_inversion(n, seed):
    f = random_function(n, np.random.default_rng(seed))
    spectrum = wht(f)
    assert abs(np.sum(spectrum.coeffs**2) - 1) <= 1e-9
    assert np.array_equal(inverse_wht(spectrum), f.values.astype(float))


def test_parity_eval_examples():
    assert parity_eval(0, 0b1011) == 1
    assert parity_eval(0b11, 0b01) == -1
    assert parity_eval(0b11, 0b11) == 1


@given(n=st.integers(1, 10), mask=st.integers(0, 2**10 - 1))
def test_parity_table_matches_parity_eval(n, mask):
    mask %= 1 << n
    table = parity_table(mask, n)
    assert all(table[x] == parity_eval(mask, x) for x in range(1 << n))


def test_prefix_weight_examples(and_tree):
    spectrum = wht(tree_to_function(and_tree, 2))
    assert prefix_weight(spectrum, ()) == pytest.approx(1)
    assert prefix_weight(spectrum, "1") == pytest.approx(0.5)
    for mask in range(4):
        assert prefix_weight(spectrum, Prefix.from_value(mask, 2)) == spectrum.coeffs[mask] ** 2


@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_prefix_weight_recursion_and_monotonicity(n, seed):
    spectrum = wht(random_function(n, np.random.default_rng(seed)))
    for bits_ in all_prefixes(n):
        weight = prefix_weight(spectrum, bits_)
        direct = sum(spectrum.coeffs[s] ** 2 for s in range(1 << n)
                     if s >> (n - len(bits_)) == Prefix(bits_).value)
        assert weight == pytest.approx(direct, abs=1e-12)
        if len(bits_) < n:
            children = prefix_weight(spectrum, bits_ + (0,)) + prefix_weight(spectrum, bits_ + (1,))
            assert weight == pytest.approx(children, abs=1e-12)
            assert children <= weight + 1e-12


def test_level_weights_match_prefix_weight(rng):
    spectrum = wht(random_function(6, rng))
    for length in range(7):
        weights = spectrum.level_weights(length)
        for value in range(1 << length):
            assert weights[value] == pytest.approx(prefix_weight(spectrum, Prefix.from_value(value, length)))


def test_prefix_longer_than_n_rejected():
    with pytest.raises(ValueError):
        prefix_weight(wht(BooleanFunction.constant(2)), "101")


def test_l1_norm_examples(and_tree):
    assert l1_norm(wht(BooleanFunction.parity(3, 5))) == 1
    assert l1_norm(wht(BooleanFunction.constant(3))) == 1
    norm = l1_norm(wht(tree_to_function(and_tree, 2)))
    assert norm == 2 and norm <= tree_size(and_tree)


def test_best_parity_examples(and_tree):
    assert best_parity(wht(BooleanFunction.parity(4, 9))) == (9, 1.0)
    assert best_parity(wht(tree_to_function(and_tree, 2))) == (0, 0.5)
    coeffs = np.zeros(8)
    coeffs[0b101] = 0.6
    assert best_parity(FourierSpectrum(3, coeffs)) == (0b101, 0.6)


@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_best_parity_matches_double_loop(n, seed):
    f = random_function(n, np.random.default_rng(seed))
    size = 1 << n
    best_mask, best_value = 0, -1.0
    for s in range(size):
        value = abs(sum(f.values[x] * parity_eval(s, x) for x in range(size)) / size)
        if value > best_value + 1e-12:
            best_mask, best_value = s, value
    mask, value = best_parity(wht(f))
    assert mask == best_mask and value == pytest.approx(best_value)


@given(n=st.integers(6, 12), t=st.integers(2, 32), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_sparsity_bound_for_trees(n, t, seed):
    tree = random_tree(n, t, np.random.default_rng(seed))
    assert l1_norm(wht(tree_to_function(tree, n))) <= t + 1e-9
