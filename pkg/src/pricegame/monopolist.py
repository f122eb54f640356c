"""The multi-item single-seller pricing problem.

With one seller owning everything, maximizing revenue reduces to an
optimization over sets: the best achievable take from a set S is
r(S) = sum_{i in S} v(i | S - i), realized by pricing each picked item at its
marginal and blocking the rest. Brute force solves it exactly at desk scale;
the harmonic sampler gets within 1/H_n of v(N) in expectation for any
valuation, and repetition lifts that to high probability for submodular ones.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np

from . import _kernels
from .bitsets import items_of, popcount
from .demand import PriceVector, decide, lex_key, maximal_lex, prices
from .errors import SizeLimit
from .rational import harmonic_number
from .valuation import Valuation

_EXACT_ENUM_LIMIT = 16


@dataclass(frozen=True)
class MonopolistResult:
    set: int
    revenue: Fraction
    prices: PriceVector  # marginal prices on the set, BLOCKED elsewhere
    samples_used: int
    realized: bool
    """Whether the maximal-map buyer actually takes `set` at these prices
    (guaranteed for submodular valuations)."""
    welfare_range: Optional[tuple[Fraction, Fraction]] = None
    """min/max buyer value among revenue-tied maximizers (brute force only)."""


def revenue_of_set(v: Valuation, s: int) -> Fraction:
    """r(S) = sum over i in S of v(i | S - i)."""
    total = Fraction(0)
    for i in items_of(s):
        total += v.table[s] - v.table[s ^ (1 << i)]
    return total


def realizing_prices(v: Valuation, s: int) -> PriceVector:
    """Price each item of S at its marginal, block everything else."""
    entries = []
    for i in range(v.n):
        if (s >> i) & 1:
            entries.append(v.table[s] - v.table[s ^ (1 << i)])
        else:
            entries.append(None)
    return prices(entries)


def _result_for_set(v: Valuation, s: int, samples: int,
                    welfare_range=None) -> MonopolistResult:
    rev = revenue_of_set(v, s)
    p = realizing_prices(v, s)
    realized = decide(v, p, maximal_lex(v.n)).chosen == s
    return MonopolistResult(
        set=s,
        revenue=rev,
        prices=p,
        samples_used=samples,
        realized=realized,
        welfare_range=welfare_range,
    )


def _revenue_table_ints(v: Valuation):
    scaled = v.scaled_ints()
    if scaled is None:
        return None
    table_ints, q = scaled
    return _kernels.revenue_table(table_ints, v.n), q


def brute_force_monopolist(v: Valuation) -> MonopolistResult:
    """Exact argmax of r(S) over all subsets; revenue-ties resolve to the
    lexicographically first set and the welfare spread across ties is
    reported."""
    n = v.n
    fast = _revenue_table_ints(v)
    if fast is not None:
        r_ints, q = fast
        best = int(r_ints.max())
        cands = np.nonzero(r_ints == best)[0]
        key = np.zeros(cands.shape[0], dtype=np.int64)
        for j in range(n):
            absent = 1 - ((cands >> j) & 1)
            key |= absent << (n - 1 - j)
        best_set = int(cands[int(np.argmin(key))])
        values = [v.table[int(s)] for s in cands]
        best_rev = Fraction(best, q)
    else:
        best_rev = Fraction(0)
        best_set = 0
        ties = [0]
        for s in range(1, 1 << n):
            rev = revenue_of_set(v, s)
            if rev > best_rev:
                best_rev, best_set, ties = rev, s, [s]
            elif rev == best_rev:
                ties.append(s)
                if lex_key(s, range(n)) < lex_key(best_set, range(n)):
                    best_set = s
        values = [v.table[s] for s in ties]
    if revenue_of_set(v, best_set) != best_rev:
        raise RuntimeError("internal: integer revenue table disagrees with exact")
    hn = harmonic_number(n)
    if best_rev < v.table[v.full_mask] / hn:
        raise RuntimeError("internal: brute-force revenue below v(N)/H_n")
    return _result_for_set(
        v, best_set, samples=0, welfare_range=(min(values), max(values))
    )


# ---------------------------------------------------------------------------
# randomized pricing
# ---------------------------------------------------------------------------


def _draw_set(v: Valuation, rng: random.Random) -> int:
    """Pick |S| = k with probability 1/(k * H_n), then a uniform k-set via a
    partial Fisher-Yates shuffle. Exact integer arithmetic throughout."""
    n = v.n
    scale = lcm(*range(1, n + 1)) if n > 1 else 1
    weights = [scale // k for k in range(1, n + 1)]
    ticket = rng.randrange(sum(weights))
    k = 1
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if ticket < acc:
            k = i + 1
            break
    pool = list(range(n))
    for i in range(k):
        j = rng.randrange(i, n)
        pool[i], pool[j] = pool[j], pool[i]
    mask = 0
    for i in pool[:k]:
        mask |= 1 << i
    return mask


def harmonic_sample(v: Valuation, rng_seed: int) -> MonopolistResult:
    """One draw of the size-biased random-set pricing scheme."""
    rng = random.Random(rng_seed)
    s = _draw_set(v, rng)
    return _result_for_set(v, s, samples=1)


def _child_seed(seed: int, index: int) -> int:
    return (seed * 6364136223846793005 + (index + 1) * 1442695040888963407) % (1 << 64)


def repeated_sample(v: Valuation, s: int, rng_seed: int) -> MonopolistResult:
    """Best of ceil(s * H_n) independent draws; the repetition count makes
    revenue >= v(N) / (2 H_n) hold with probability >= 1 - e^(-s/2) for
    submodular valuations."""
    if s < 1:
        raise ValueError("s must be >= 1")
    hn = harmonic_number(v.n)
    count = -((-s * hn.numerator) // hn.denominator)  # ceil(s * H_n)
    best_set = 0
    best_rev = Fraction(0)
    for t in range(count):
        rng = random.Random(_child_seed(rng_seed, t))
        cand = _draw_set(v, rng)
        rev = revenue_of_set(v, cand)
        if rev > best_rev:
            best_rev, best_set = rev, cand
    return _result_for_set(v, best_set, samples=count)


def exact_sampler_expectation(v: Valuation) -> Fraction:
    """Expected revenue of one draw, by full enumeration with exact weights.

    Telescopes to v(N)/H_n for every valuation, which makes the sampling
    scheme's guarantee checkable with zero sampling error.
    """
    n = v.n
    if n > _EXACT_ENUM_LIMIT:
        raise SizeLimit(f"exact enumeration capped at n <= {_EXACT_ENUM_LIMIT}")
    sums = _revenue_sums_by_size(v)
    hn = harmonic_number(n)
    total = Fraction(0)
    binom = 1  # C(n, k), updated incrementally
    for k in range(1, n + 1):
        binom = binom * (n - k + 1) // k
        total += sums[k] / (k * hn * binom)
    return total


def _revenue_sums_by_size(v: Valuation) -> list:
    """sum of r(S) over subsets of each size, exactly."""
    n = v.n
    sums = [Fraction(0)] * (n + 1)
    fast = _revenue_table_ints(v)
    if fast is not None:
        r_ints, q = fast
        acc = [0] * (n + 1)
        for s, r in enumerate(r_ints.tolist()):
            acc[popcount(s)] += r
        for k in range(n + 1):
            sums[k] = Fraction(acc[k], q)
    else:
        for s in range(1 << n):
            sums[popcount(s)] += revenue_of_set(v, s)
    return sums


# ---------------------------------------------------------------------------
# symmetrization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetrizationProfile:
    """Averages of v over each size class, their increments, and the size
    whose k * delta_k take is largest (it is never below v(N)/H_n)."""

    tilde: tuple[Fraction, ...]  # tilde[k] = average of v over |S| = k
    deltas: tuple[Fraction, ...]  # deltas[k-1] = tilde[k] - tilde[k-1]
    best_k: int
    best_take: Fraction  # max over k of k * delta_k


def symmetrize(v: Valuation) -> SymmetrizationProfile:
    n = v.n
    if n > _EXACT_ENUM_LIMIT:
        raise SizeLimit(f"exact enumeration capped at n <= {_EXACT_ENUM_LIMIT}")
    sums = [Fraction(0)] * (n + 1)
    for s in range(1 << n):
        sums[popcount(s)] += v.table[s]
    tilde = []
    binom = 1
    for k in range(n + 1):
        if k:
            binom = binom * (n - k + 1) // k
        tilde.append(sums[k] / binom)
    deltas = [tilde[k] - tilde[k - 1] for k in range(1, n + 1)]
    best_k, best_take = 1, deltas[0]
    for k in range(1, n + 1):
        take = k * deltas[k - 1]
        if take > best_take:
            best_k, best_take = k, take
    if best_take < v.table[v.full_mask] / harmonic_number(n):
        raise RuntimeError("internal: pigeonhole bound violated in symmetrize")
    return SymmetrizationProfile(
        tilde=tuple(tilde), deltas=tuple(deltas), best_k=best_k, best_take=best_take
    )
