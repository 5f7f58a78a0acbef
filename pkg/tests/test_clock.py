from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bclock.bernstein import p_vector_exact
from bclock.clock import (
    MultisetSpec,
    clock_walk,
    enumerate_joint,
    insertion_transitions,
    joint_recursion,
    multiset_permutations,
    p_vector_markov,
    q_matrix,
    scan_word,
    simulate_batch,
    simulate_clock,
)
from bclock.errors import DomainError
from bclock.sumdist import dist_D

F = Fraction


def test_four_pair_walk_example():
    assert scan_word((1, 1, 4, 2, 4, 3, 3, 2)) == ((1, 4, 6, 3), 1, 3)


def test_all_words_for_two_pairs():
    expected = {
        (1, 1, 2, 2): (3, 0),
        (1, 2, 1, 2): (2, 0),
        (1, 2, 2, 1): (2, 0),
        (2, 1, 1, 2): (4, 0),
        (2, 1, 2, 1): (3, 0),
        (2, 2, 1, 1): (1, 1),
    }
    words = list(multiset_permutations((1, 1, 2, 2)))
    assert words == sorted(expected)
    for w in words:
        idx, d, _ = scan_word(w)
        assert (idx[-1], d) == expected[w]


def test_general_multiset_run_length():
    # 1 4 4 1 4 2 4 3 3 2 2 over (2,3,2,4): 1, 2, 3 in order, then 4 needs a lap
    word = (1, 4, 4, 1, 4, 2, 4, 3, 3, 2, 2)
    _, d, run = scan_word(word)
    assert run == 3 and d == 1


def test_spec_validation():
    assert MultisetSpec.parse("2,3,1").multiplicities == (2, 3, 1)
    assert MultisetSpec((2, 2, 2)).count() == 90
    with pytest.raises(DomainError):
        MultisetSpec(())
    with pytest.raises(DomainError):
        MultisetSpec((2, 0))
    with pytest.raises(DomainError):
        MultisetSpec.parse("2,x")


@pytest.mark.parametrize("mult", [(1,), (2, 1), (1, 2, 2), (3, 1, 2), (2, 2, 2, 1)])
def test_multiset_permutations_are_distinct_and_sorted(mult):
    spec = MultisetSpec(mult)
    perms = list(multiset_permutations(spec.labels()))
    assert len(perms) == len(set(perms)) == spec.count()
    assert perms == sorted(perms)


def test_enumeration_small_tables():
    t2 = enumerate_joint(MultisetSpec.pairs(2))
    assert t2.laps_marginal() == (5, 1)
    assert t2.index_marginal() == (1, 2, 2, 1)
    # columns are I = 1..4; first entry is D = 0, second D = 1
    assert [row[0] for row in t2.counts] == [0, 2, 2, 1]
    assert [row[1] for row in t2.counts] == [1, 0, 0, 0]
    t3 = enumerate_joint(MultisetSpec.pairs(3))
    assert t3.laps_marginal() == (47, 42, 1)
    assert t3.index_marginal() == (15, 13, 14, 16, 17, 15)
    assert [row[0] for row in t3.counts] == [0, 0, 6, 12, 15, 14]
    assert [row[1] for row in t3.counts] == [14, 13, 8, 4, 2, 1]
    assert [row[2] for row in t3.counts] == [1, 0, 0, 0, 0, 0]
    assert t3.total() == 90


def test_enumeration_parallel_matches_serial():
    spec = MultisetSpec((2, 3, 2))
    assert enumerate_joint(spec, workers=3) == enumerate_joint(spec)


def test_enumeration_guard():
    with pytest.raises(DomainError):
        enumerate_joint(MultisetSpec((1,) * 17))


def test_q_matrix_examples():
    assert q_matrix(2).entries == ((1, 2, 2, 1), (2, 1, 1, 2))
    assert q_matrix(3).entries[1][3] == 4
    assert q_matrix(3).entries == (
        (1, 4, 4, 3, 2, 1),
        (2, 1, 3, 4, 3, 2),
        (3, 2, 1, 2, 4, 3),
        (4, 3, 2, 1, 1, 4),
    )
    assert q_matrix(4).entries[:5] == (
        (1, 6, 6, 5, 4, 3, 2, 1),
        (2, 1, 5, 6, 5, 4, 3, 2),
        (3, 2, 1, 4, 6, 5, 4, 3),
        (4, 3, 2, 1, 3, 6, 5, 4),
        (5, 4, 3, 2, 1, 2, 6, 5),
    )
    with pytest.raises(DomainError):
        q_matrix(1)


@pytest.mark.parametrize("n", range(2, 31))
def test_q_matrix_rows_and_symmetry(n):
    Q = q_matrix(n)
    assert Q.normalizer == comb(2 * n, 2)
    assert set(Q.row_sums()) == {comb(2 * n, 2)}
    E = Q.entries
    for i in range(1, 2 * n - 1):
        for j in range(1, 2 * n + 1):
            assert 2 * n - 1 - E[i - 1][j - 1] == E[2 * n - 1 - i - 1][2 * n + 1 - j - 1]


@pytest.mark.parametrize("n", range(2, 8))
def test_q_matrix_matches_brute_force_insertion(n):
    stay, wrap = insertion_transitions(n - 1)
    total = tuple(tuple(s + w for s, w in zip(rs, rw)) for rs, rw in zip(stay, wrap))
    assert total == q_matrix(n).entries
    # a lap is added exactly when the new index is at or before the old one
    for x, row in enumerate(wrap, start=1):
        assert all(c == 0 for y, c in enumerate(row, start=1) if y > x)
    for x, row in enumerate(stay, start=1):
        assert all(c == 0 for y, c in enumerate(row, start=1) if y <= x)


def test_markov_examples():
    assert p_vector_markov(1).values == (1, 0)
    assert p_vector_markov(3).values == tuple(F(x, 90) for x in (15, 13, 14, 16, 17, 15))
    assert p_vector_markov(4).values == tuple(F(x, 2520) for x in (322, 322, 312, 304, 304, 312, 322, 322))


@pytest.mark.parametrize("n", range(1, 11))
def test_markov_matches_closed_form(n):
    assert p_vector_markov(n) == p_vector_exact(n)


def test_joint_recursion_examples():
    t2 = joint_recursion(2)
    assert [row[0] for row in t2.counts] == [0, 2, 2, 1]
    assert [row[1] for row in t2.counts] == [1, 0, 0, 0]
    assert joint_recursion(3).laps_marginal() == (47, 42, 1)
    assert joint_recursion(4).laps_marginal() == (641, 1659, 219, 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_four_way_agreement(n):
    enum = enumerate_joint(MultisetSpec.pairs(n))
    rec = joint_recursion(n)
    assert enum.counts == rec.counts
    total = enum.total()
    assert tuple(F(c, total) for c in enum.index_marginal()) == p_vector_markov(n).values == p_vector_exact(n).values
    assert tuple(F(c, total) for c in enum.laps_marginal()) == dist_D(n)


# simulation --------------------------------------------------------------------


def test_single_symbol_clock():
    batch = simulate_batch(MultisetSpec((3,)), seed=1, trials=2000)
    assert set(batch.index[:, 0]) == {1}
    assert set(batch.laps) == {0}
    assert set(batch.run_length) == {1}


def test_two_pairs_frequencies():
    batch = simulate_batch(MultisetSpec.pairs(2), seed=2024, trials=10**6, workers=4)
    freq = batch.index_counts(4) / len(batch)
    exact = np.array([float(p) for p in p_vector_exact(2).values])
    assert np.max(np.abs(freq - exact)) < 0.005
    assert batch.redraws == 0


def test_determinism_across_workers():
    spec = MultisetSpec((2, 3, 1))
    a = simulate_batch(spec, seed=99, trials=100_000, workers=1, block_size=4096)
    b = simulate_batch(spec, seed=99, trials=100_000, workers=6, block_size=4096)
    assert np.array_equal(a.index, b.index) and np.array_equal(a.spacings, b.spacings)
    c = simulate_batch(spec, seed=100, trials=100_000, block_size=4096)
    assert not np.array_equal(a.index, c.index)


def test_stream_matches_batch():
    spec = MultisetSpec((2, 2, 2))
    batch = simulate_batch(spec, seed=5, trials=500)
    stream = list(simulate_clock(spec, 5, 500))
    assert stream == list(batch.samples())


def test_simulation_argument_errors():
    with pytest.raises(DomainError):
        simulate_batch(MultisetSpec((2,)), seed=0, trials=0)
    with pytest.raises(DomainError):
        simulate_batch(MultisetSpec((2,)), seed=-1, trials=5)
    with pytest.raises(DomainError):
        next(simulate_clock(MultisetSpec((2,)), 0, 0))


@pytest.mark.parametrize("mult", [(2, 2, 2, 2), (1, 3, 2, 5)])
def test_spacings_are_beta(mult):
    spec = MultisetSpec(mult)
    batch = simulate_batch(spec, seed=31, trials=100_000)
    for i, m in enumerate(mult):
        res = stats.kstest(batch.spacings[:, i], lambda x, m=m: 1 - (1 - np.clip(x, 0, 1)) ** m)
        assert res.pvalue > 1e-3, (i, m, res)


def test_laps_are_floor_of_spacing_sum_and_run_length_rule():
    spec = MultisetSpec((2, 3, 2, 1, 2))
    batch = simulate_batch(spec, seed=8, trials=50_000)
    S = np.cumsum(batch.spacings, axis=1)
    assert np.array_equal(np.floor(S[:, -1]).astype(int), batch.laps)
    assert np.array_equal((S <= 1).sum(axis=1), batch.run_length)
    assert np.array_equal(batch.run_length == spec.n, batch.laps == 0)


def test_final_index_independent_of_order_statistics():
    n = 4
    T = 200_000
    batch = simulate_batch(MultisetSpec.pairs(n), seed=77, trials=T, keep_order_stats=True)
    idx = batch.index[:, -1].astype(float)
    for k in (0, 3, 2 * n - 1):
        r = np.corrcoef(idx, batch.order_stats[:, k])[0, 1]
        assert abs(r) < 3 / np.sqrt(T)


def test_laps_distribution_matches_exact():
    batch = simulate_batch(MultisetSpec.pairs(3), seed=4, trials=200_000)
    freq = batch.laps_counts(3) / len(batch)
    assert np.max(np.abs(freq - np.array([float(p) for p in dist_D(3)]))) < 0.005


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.randoms(use_true_random=False))
def test_continuous_walk_agrees_with_word_scan(mult, rnd):
    spec = MultisetSpec(tuple(mult))
    labels = list(spec.labels())
    positions = [rnd.random() for _ in labels]
    if len(set(positions)) < len(positions) or min(positions) == 0:
        return
    sample = clock_walk(positions, labels)
    word = [lab for _, lab in sorted(zip(positions, labels))]
    idx, d, run = scan_word(word, spec.n)
    assert (sample.index_sequence, sample.laps, sample.run_length) == (idx, d, run)
    # S_n = (final position) + D with the position in [0, 1), so floor(S_n) = D
    final = sorted(positions)[sample.index_sequence[-1] - 1]
    assert abs(sum(sample.spacings) - (final + d)) < 1e-12
