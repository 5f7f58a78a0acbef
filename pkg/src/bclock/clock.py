"""The Bernoulli clock: simulation, exhaustive enumeration, Markov recursion.

A multiset 1^{m_1} ... n^{m_n} is laid around a clock with M = sum(m_i)
hours. Starting before hour 1 we walk clockwise to the first 1, then on to
the first 2, and so on. I_k is the hour where symbol k is found, D counts the
laps (descents of I_1, ..., I_n) and L is the number of symbols found before
the first lap.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
from typing import Iterator, Optional

import numpy as np

from .bernstein import DistributionVector
from .errors import DomainError

__all__ = [
    "MultisetSpec",
    "ClockSample",
    "ClockBatch",
    "JointTable",
    "TransitionMatrix",
    "scan_word",
    "clock_walk",
    "simulate_batch",
    "simulate_clock",
    "multiset_permutations",
    "enumerate_joint",
    "insertion_transitions",
    "q_matrix",
    "p_vector_markov",
    "joint_recursion",
]

ENUMERATION_LIMIT = 16
BLOCK_SIZE = 1 << 15


@dataclass(frozen=True)
class MultisetSpec:
    multiplicities: tuple

    def __post_init__(self):
        m = tuple(int(x) for x in self.multiplicities)
        if not m or any(x < 1 for x in m):
            raise DomainError(f"multiplicities must be a nonempty list of positive integers, got {m}")
        object.__setattr__(self, "multiplicities", m)

    @classmethod
    def parse(cls, text: str) -> "MultisetSpec":
        try:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise DomainError(f"bad multiplicity list {text!r}") from exc

    @classmethod
    def pairs(cls, n: int) -> "MultisetSpec":
        return cls((2,) * n)

    @property
    def n(self) -> int:
        return len(self.multiplicities)

    @property
    def M(self) -> int:
        return sum(self.multiplicities)

    def count(self) -> int:
        """Number of distinct permutations, M! / prod(m_i!)."""
        return factorial(self.M) // prod(factorial(m) for m in self.multiplicities)

    def labels(self) -> tuple:
        return tuple(s for s, m in enumerate(self.multiplicities, start=1) for _ in range(m))

    def prefix(self, k: int) -> "MultisetSpec":
        return MultisetSpec(self.multiplicities[:k])

    def __str__(self):
        return ",".join(map(str, self.multiplicities))


@dataclass(frozen=True)
class ClockSample:
    index_sequence: tuple
    laps: int
    run_length: int
    spacings: tuple = ()


def scan_word(word, n: Optional[int] = None):
    """Run the clock on a word over {1..n}; returns (I_1..I_n, D, L)."""
    word = list(word)
    n = max(word) if n is None else n
    cur = 0
    laps = 0
    run = n
    idx = []
    for s in range(1, n + 1):
        try:
            p = word.index(s, cur)
        except ValueError:
            p = word.index(s)
            if laps == 0:
                run = s - 1
            laps += 1
        idx.append(p + 1)
        cur = p + 1
    return tuple(idx), laps, run


def clock_walk(positions, labels) -> ClockSample:
    """Continuous clock for explicit positions in [0, 1) carrying labels."""
    positions = [float(p) for p in positions]
    order = sorted(range(len(positions)), key=positions.__getitem__)
    rank = {j: r + 1 for r, j in enumerate(order)}
    n = max(labels)
    cur, laps, run = 0.0, 0, n
    idx, spacings = [], []
    for s in range(1, n + 1):
        cols = [j for j, lab in enumerate(labels) if lab == s]
        ahead = [j for j in cols if positions[j] > cur or (s == 1 and positions[j] >= cur)]
        if ahead:
            j = min(ahead, key=positions.__getitem__)
            spacings.append(positions[j] - cur)
        else:
            j = min(cols, key=positions.__getitem__)
            spacings.append(positions[j] + 1.0 - cur)
            if laps == 0:
                run = s - 1
            laps += 1
        idx.append(rank[j])
        cur = positions[j]
    return ClockSample(tuple(idx), laps, run, tuple(spacings))


# Monte Carlo ---------------------------------------------------------------


@dataclass
class ClockBatch:
    """Columnar simulation output; row t is trial t."""

    index: np.ndarray  # (T, n) int, I_1..I_n
    laps: np.ndarray  # (T,) int
    run_length: np.ndarray  # (T,) int
    spacings: np.ndarray  # (T, n) float
    order_stats: Optional[np.ndarray] = None  # (T, M) sorted uniforms
    redraws: int = 0

    def __len__(self):
        return len(self.laps)

    def samples(self) -> Iterator[ClockSample]:
        for t in range(len(self)):
            yield ClockSample(
                tuple(int(v) for v in self.index[t]),
                int(self.laps[t]),
                int(self.run_length[t]),
                tuple(float(v) for v in self.spacings[t]),
            )

    def index_counts(self, M: int) -> np.ndarray:
        return np.bincount(self.index[:, -1] - 1, minlength=M)

    def laps_counts(self, n: int) -> np.ndarray:
        return np.bincount(self.laps, minlength=n)

    def run_length_counts(self, n: int) -> np.ndarray:
        return np.bincount(self.run_length - 1, minlength=n)


def block_rng(seed: int, block: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, block) so any split of the work
    # reproduces the serial result
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _simulate_block(spec: MultisetSpec, seed: int, block: int, size: int, keep: bool):
    rng = block_rng(seed, block)
    M, n = spec.M, spec.n
    U = rng.random((size, M))
    redraws = 0
    while True:
        sorted_u = np.sort(U, axis=1)
        bad = np.any(np.diff(sorted_u, axis=1) == 0, axis=1) | (sorted_u[:, 0] == 0.0)
        if not bad.any():
            break
        redraws += int(bad.sum())
        U[bad] = rng.random((int(bad.sum()), M))
    labels = np.array(spec.labels())
    rank = np.empty_like(U, dtype=np.int64)
    rows = np.arange(size)
    rank[rows[:, None], np.argsort(U, axis=1)] = np.arange(1, M + 1)
    cur = np.zeros(size)
    index = np.empty((size, n), dtype=np.int64)
    spacings = np.empty((size, n))
    laps = np.zeros(size, dtype=np.int64)
    run = np.full(size, n, dtype=np.int64)
    for s in range(n):
        cols = np.flatnonzero(labels == s + 1)
        P = U[:, cols]
        ahead = P > cur[:, None]
        first_ahead = np.where(ahead, P, np.inf).argmin(axis=1)
        wrapped = ~ahead.any(axis=1)
        pick = np.where(wrapped, P.argmin(axis=1), first_ahead)
        col = cols[pick]
        pos = U[rows, col]
        spacings[:, s] = pos - cur + wrapped
        index[:, s] = rank[rows, col]
        run = np.where(wrapped & (laps == 0), s, run)
        laps += wrapped
        cur = pos
    return ClockBatch(index, laps, run, spacings, np.sort(U, axis=1) if keep else None, redraws)


def simulate_batch(
    spec: MultisetSpec,
    seed: int,
    trials: int,
    workers: int = 1,
    keep_order_stats: bool = False,
    block_size: int = BLOCK_SIZE,
) -> ClockBatch:
    """Simulate ``trials`` independent clocks; deterministic given ``seed``.

    Work is cut into fixed blocks, each with its own random stream, so the
    result does not depend on ``workers``.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if seed < 0:
        raise DomainError("seed must be nonnegative")
    sizes = [min(block_size, trials - b * block_size) for b in range((trials + block_size - 1) // block_size)]
    jobs = [(spec, seed, b, size, keep_order_stats) for b, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _simulate_block(*a), jobs))
    else:
        parts = [_simulate_block(*a) for a in jobs]
    return ClockBatch(
        np.concatenate([p.index for p in parts]),
        np.concatenate([p.laps for p in parts]),
        np.concatenate([p.run_length for p in parts]),
        np.concatenate([p.spacings for p in parts]),
        np.concatenate([p.order_stats for p in parts]) if keep_order_stats else None,
        sum(p.redraws for p in parts),
    )


def simulate_clock(spec: MultisetSpec, rng_seed: int, trials: int) -> Iterator[ClockSample]:
    """Stream of per-trial samples; same draws as :func:`simulate_batch`."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    done = 0
    block = 0
    while done < trials:
        size = min(BLOCK_SIZE, trials - done)
        yield from _simulate_block(spec, rng_seed, block, size, False).samples()
        done += size
        block += 1


# Enumeration ---------------------------------------------------------------


def multiset_permutations(items) -> Iterator[tuple]:
    """Distinct permutations of ``items`` in lexicographic order."""
    a = sorted(items)
    n = len(a)
    while True:
        yield tuple(a)
        i = n - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1 :] = reversed(a[i + 1 :])


@dataclass(frozen=True)
class JointTable:
    """counts[i-1][d] = number of permutations with I_n = i and D_n = d."""

    spec: MultisetSpec
    counts: tuple
    run_length_counts: Optional[tuple] = None  # L = 1..n, enumeration only

    @property
    def n(self) -> int:
        return self.spec.n

    def total(self) -> int:
        return sum(sum(r) for r in self.counts)

    def index_marginal(self) -> tuple:
        return tuple(sum(r) for r in self.counts)

    def laps_marginal(self) -> tuple:
        return tuple(sum(r[d] for r in self.counts) for d in range(self.n))

    def complete_count(self) -> int:
        """Permutations containing 1, 2, ..., n as a subsequence (D = 0)."""
        return self.laps_marginal()[0]


def _enumerate_prefix(first: int, rest: tuple, n: int):
    table = Counter()
    runs = Counter()
    for tail in multiset_permutations(rest):
        idx, d, run = scan_word((first,) + tail, n)
        table[idx[-1], d] += 1
        runs[run] += 1
    return table, runs


def enumerate_joint(spec: MultisetSpec, workers: int = 1) -> JointTable:
    """Exhaustive count of (I_n, D_n) and L_n over all distinct permutations."""
    if spec.M > ENUMERATION_LIMIT:
        raise DomainError(f"enumeration is limited to M <= {ENUMERATION_LIMIT}, got M={spec.M}")
    labels = spec.labels()
    jobs = []
    for s in sorted(set(labels)):
        rest = list(labels)
        rest.remove(s)
        jobs.append((s, tuple(rest), spec.n))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_enumerate_prefix, *zip(*jobs)))
    else:
        parts = [_enumerate_prefix(*j) for j in jobs]
    table, runs = Counter(), Counter()
    for t, r in parts:
        table.update(t)
        runs.update(r)
    counts = tuple(tuple(table[i, d] for d in range(spec.n)) for i in range(1, spec.M + 1))
    return JointTable(spec, counts, tuple(runs[k] for k in range(1, spec.n + 1)))


# Markov chain of I_n for pairs ---------------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """Integer counts Q_n(x, y); P_n = Q_n / C(2n, 2)."""

    n: int
    entries: tuple
    normalizer: int

    def probabilities(self) -> tuple:
        return tuple(tuple(Fraction(q, self.normalizer) for q in row) for row in self.entries)

    def row_sums(self) -> tuple:
        return tuple(sum(r) for r in self.entries)


@lru_cache(maxsize=None)
def insertion_transitions(k: int):
    """Insert a new pair into a clock of 2k hours, by brute force over slots.

    Returns (stay, wrap): 2k x (2k+2) integer matrices. Entry [x-1][y-1]
    counts the slot pairs taking I = x to I' = y without / with a new lap.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    size = 2 * k + 2
    stay = [[0] * size for _ in range(2 * k)]
    wrap = [[0] * size for _ in range(2 * k)]
    for a in range(1, size + 1):
        for b in range(a + 1, size + 1):
            old_slots = [p for p in range(1, size + 1) if p != a and p != b]
            for x in range(1, 2 * k + 1):
                xp = old_slots[x - 1]
                if b > xp:
                    y = a if a > xp else b
                    stay[x - 1][y - 1] += 1
                else:
                    wrap[x - 1][a - 1] += 1
    return tuple(map(tuple, stay)), tuple(map(tuple, wrap))


def q_matrix(n: int) -> TransitionMatrix:
    """Q_n(x, y) for x in 1..2n-2 and y in 1..2n, by the three-case formula."""
    if n < 2:
        raise DomainError("q_matrix needs n >= 2")
    rows = []
    for x in range(1, 2 * n - 1):
        row = []
        for y in range(1, 2 * n + 1):
            if y <= x:
                row.append(x - y + 1)
            elif y == x + 1:
                row.append(2 * n - 1 - x)
            else:
                row.append(2 * n - y + x)
        rows.append(tuple(row))
    return TransitionMatrix(n, tuple(rows), comb(2 * n, 2))


def p_vector_markov(n: int) -> DistributionVector:
    """Law of I_n from the forward equations p_{k+1} = p_k P_{k+1}."""
    if n < 1:
        raise DomainError("n must be >= 1")
    p = [Fraction(1), Fraction(0)]
    for k in range(2, n + 1):
        P = q_matrix(k).probabilities()
        p = [sum((p[x] * P[x][y] for x in range(len(p))), Fraction(0)) for y in range(2 * k)]
    return DistributionVector(n, tuple(p), "p")


def joint_recursion(n: int) -> JointTable:
    """#(n; i, d) by dynamic programming over pair insertions.

    A lap is added exactly when both new symbols land before the current
    index, which is the case y <= x.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    counts = [[1], [0]]
    for k in range(1, n):
        stay, wrap = insertion_transitions(k)
        new = [[0] * (k + 1) for _ in range(2 * k + 2)]
        for x, row in enumerate(counts):
            for d, c in enumerate(row):
                if not c:
                    continue
                for y in range(2 * k + 2):
                    if stay[x][y]:
                        new[y][d] += c * stay[x][y]
                    if wrap[x][y]:
                        new[y][d + 1] += c * wrap[x][y]
        counts = new
    return JointTable(MultisetSpec.pairs(n), tuple(map(tuple, counts)))
