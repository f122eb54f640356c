"""Shared test helpers: fixture paths, random valuation generators, and
independent oracles used to cross-check the library's fast paths."""

from __future__ import annotations

import json
import random
from fractions import Fraction
from itertools import permutations
from pathlib import Path

import pytest

from pricegame import (
    Valuation,
    additive,
    classify,
    demand,
    make_table,
    prices,
    symmetric_from_sizes,
    xos,
)
from pricegame.bitsets import items_of, popcount

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def all_fixture_paths() -> list[str]:
    return sorted(str(p) for p in FIXTURES.glob("*.json"))


def xos_example() -> Valuation:
    """Three items, v=2 up to pairs, 3 on the full set; XOS but not submodular."""
    return xos([[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 1]])


# ---------------------------------------------------------------------------
# random generators (explicit rng, coarse denominators so ties actually occur)
# ---------------------------------------------------------------------------


def random_monotone(n: int, rng: random.Random, den: int = 8, step_max: int = 3) -> Valuation:
    """Monotone table built level by level with nonnegative grid increments."""
    table: list = [Fraction(0)] * (1 << n)
    for s in range(1, 1 << n):
        floor = max(table[s ^ (1 << i)] for i in items_of(s))
        table[s] = floor + Fraction(rng.randint(0, step_max), den)
    return make_table(n, table, label=f"random_monotone(n={n})")


def random_profile(n: int, rng: random.Random, den: int, kmax: int) -> list:
    return [Fraction(rng.randint(0, kmax), den) for _ in range(n)]


def random_submodular(n: int, rng: random.Random, den: int = 8) -> Valuation:
    """Rejection-sample a submodular monotone table with v(N) <= 1."""
    while True:
        # concave-ish random increments keep the acceptance rate workable
        table: list = [Fraction(0)] * (1 << n)
        ok = True
        for s in range(1, 1 << n):
            lo = max(table[s ^ (1 << i)] for i in items_of(s))
            hi = min(
                (
                    table[s ^ (1 << i)] + table[s ^ (1 << j)] - table[s ^ (1 << i) ^ (1 << j)]
                    for i in items_of(s)
                    for j in items_of(s)
                    if i < j
                ),
                default=lo + Fraction(den, den),
            )
            hi = min(hi, Fraction(1))
            if hi < lo:
                ok = False
                break
            span = int((hi - lo) * den)
            table[s] = lo + Fraction(rng.randint(0, span), den)
        if not ok:
            continue
        v = make_table(n, table, label=f"random_submodular(n={n})")
        if classify(v).submodular:
            return v


def _matching_value(weights: list[list[Fraction]], items: tuple[int, ...]) -> Fraction:
    """Max-weight assignment of items to slots (each slot used once)."""
    slots = len(weights)
    best = Fraction(0)
    k = min(len(items), slots)
    for chosen in permutations(items, k):
        for slot_perm in permutations(range(slots), k):
            val = sum(
                (weights[t][i] for i, t in zip(chosen, slot_perm)), Fraction(0)
            )
            if val > best:
                best = val
    return best


def random_gs(n: int, rng: random.Random) -> Valuation:
    """Gross-substitutes valuation: additive, symmetric-concave, or an
    assignment (OXS) instance; verified by classify before returning."""
    kind = rng.choice(["additive", "concave", "oxs"])
    if kind == "additive":
        v = additive([Fraction(rng.randint(0, 12), 8) for _ in range(n)])
    elif kind == "concave":
        sizes = [Fraction(0)]
        inc = Fraction(rng.randint(4, 12), 8)
        for _ in range(n):
            sizes.append(sizes[-1] + inc)
            dec = Fraction(rng.randint(0, 2), 8)
            inc = max(Fraction(0), inc - dec)
        v = symmetric_from_sizes(sizes)
    else:
        slots = rng.randint(1, 3)
        weights = [
            [Fraction(rng.randint(0, 12), 8) for _ in range(n)] for _ in range(slots)
        ]
        table = [
            _matching_value(weights, items_of(s)) for s in range(1 << n)
        ]
        v = make_table(n, table, label=f"oxs(n={n},slots={slots})")
    report = classify(v)
    assert report.gross_substitutes, f"generator produced non-GS {v.label}"
    return v


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


def brute_force_demand(v: Valuation, p) -> tuple[Fraction, list[int]]:
    """Plain argmax loop, no subset-sum sharing; oracle for demand()."""
    best = None
    arg: list[int] = []
    free = p.free_mask
    for s in range(1 << v.n):
        if s & ~free:
            continue
        u = v.table[s] - sum((p.price(i) for i in items_of(s)), Fraction(0))
        if best is None or u > best:
            best, arg = u, [s]
        elif u == best:
            arg.append(s)
    return best, arg


def gs_definition_violation(v: Valuation, trials: int, seed: int, den: int = 4):
    """Sample p <= p' price pairs and hunt for a violation of the
    demand-theoretic substitutes property. Returns (p, p', S) or None."""
    rng = random.Random(seed)
    vmax = v.table[v.full_mask]
    kmax = int(vmax * den) + 1
    for _ in range(trials):
        base = random_profile(v.n, rng, den, kmax)
        raised = list(base)
        bump_mask = rng.randrange(1, 1 << v.n)
        for i in range(v.n):
            if (bump_mask >> i) & 1:
                raised[i] += Fraction(rng.randint(1, den), den)
        unchanged = [i for i in range(v.n) if raised[i] == base[i]]
        d_before = demand(v, prices(base)).demanded
        d_after = demand(v, prices(raised)).demanded
        for s in d_before:
            kept = 0
            for i in unchanged:
                kept |= s & (1 << i)
            if not any(t & kept == kept for t in d_after):
                return base, raised, s
    return None


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())
