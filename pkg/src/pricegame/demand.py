"""Demand correspondence D(v;p) and the tie-breaking decision maps.

The buyer facing prices p buys a subset maximizing v(S) - p(S). A decision
map picks one element out of the (typically tied) argmax. Three maps are
implemented:

* maximal_lex: lexicographically first among the inclusion-maximal demanded
  sets.
* lex_first: lexicographically first demanded set.
* gs_greedy: the greedy loop that keeps adding the best nonnegative-margin
  item; lands inside the demand correspondence exactly when the valuation is
  gross substitutes.

Set order: S precedes T iff the highest-priority item in the symmetric
difference lies in S, priorities given by a permutation. Under this order a
superset always precedes its subsets, so lex_first and maximal_lex pick the
same set; both are kept because callers state different intents (and the
up-consistency contract is phrased against lex_first).

Blocked items (sentinel BLOCKED) are excluded from every candidate set; this
replaces "price = infinity" constructions without extended arithmetic.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Iterable, Optional, Sequence, Union

from .bitsets import items_of, iter_submasks
from .errors import GreedyNotDemanded, InvalidPrice
from .rational import as_value
from .valuation import Valuation


class _Blocked:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BLOCKED"


BLOCKED = _Blocked()

PriceEntry = Union[Fraction, _Blocked]


@dataclass(frozen=True)
class PriceVector:
    """Per-item exact prices; an entry may be BLOCKED (item never offered)."""

    entries: tuple[PriceEntry, ...]

    def __post_init__(self):
        for i, e in enumerate(self.entries):
            if isinstance(e, _Blocked):
                continue
            if not isinstance(e, Fraction):
                raise InvalidPrice(f"entry {i} is {e!r}, not a Fraction or BLOCKED")
            if e < 0:
                raise InvalidPrice(f"entry {i} is negative: {e}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def free_mask(self) -> int:
        m = 0
        for i, e in enumerate(self.entries):
            if not isinstance(e, _Blocked):
                m |= 1 << i
        return m

    def is_blocked(self, i: int) -> bool:
        return isinstance(self.entries[i], _Blocked)

    def price(self, i: int) -> Fraction:
        e = self.entries[i]
        if isinstance(e, _Blocked):
            raise InvalidPrice(f"item {i} is blocked")
        return e

    def total(self, mask: int) -> Fraction:
        s = Fraction(0)
        for i in items_of(mask):
            s += self.price(i)
        return s

    def with_price(self, i: int, value) -> "PriceVector":
        e = BLOCKED if isinstance(value, _Blocked) else as_value(value)
        return PriceVector(self.entries[:i] + (e,) + self.entries[i + 1 :])


def prices(values: Iterable) -> PriceVector:
    """Build a PriceVector; None or BLOCKED entries mark blocked items."""
    out: list[PriceEntry] = []
    for x in values:
        if x is None or isinstance(x, _Blocked):
            out.append(BLOCKED)
        else:
            out.append(as_value(x))
    return PriceVector(tuple(out))


class MapKind(str, enum.Enum):
    MAXIMAL_LEX = "maximal_lex"
    LEX_FIRST = "lex_first"
    GS_GREEDY = "gs_greedy"


@dataclass(frozen=True)
class DecisionMapSpec:
    """Tie-breaking rule plus the item priority permutation it uses."""

    kind: MapKind
    order: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise InvalidPrice(f"order {self.order} is not a permutation")

    @property
    def n(self) -> int:
        return len(self.order)


def maximal_lex(n: int, order: Optional[Sequence[int]] = None) -> DecisionMapSpec:
    return DecisionMapSpec(MapKind.MAXIMAL_LEX, tuple(order or range(n)))


def lex_first(n: int, order: Optional[Sequence[int]] = None) -> DecisionMapSpec:
    return DecisionMapSpec(MapKind.LEX_FIRST, tuple(order or range(n)))


def gs_greedy(n: int, order: Optional[Sequence[int]] = None) -> DecisionMapSpec:
    return DecisionMapSpec(MapKind.GS_GREEDY, tuple(order or range(n)))


def lex_key(mask: int, order: Sequence[int]) -> int:
    """Rank of a set in the priority order; smaller = earlier."""
    key = 0
    for item in order:
        key = (key << 1) | (0 if (mask >> item) & 1 else 1)
    return key


@dataclass(frozen=True)
class DemandResult:
    """Outcome of a demand query: optimum, all argmax sets, optional choice."""

    best_utility: Fraction
    demanded: tuple[int, ...]
    chosen: Optional[int] = None


def utility_table(v: Valuation, p: PriceVector) -> tuple[Fraction, list]:
    """(best utility, per-submask utilities of the free items; None elsewhere)."""
    free = p.free_mask
    util: list = [None] * (1 << v.n)
    util[0] = Fraction(0)
    psum: list = [None] * (1 << v.n)
    psum[0] = Fraction(0)
    best = Fraction(0)
    # enumerate submasks ascending so psum[sub without lowest bit] exists
    sub = 0
    table = v.table
    entries = p.entries
    while True:
        sub = (sub - free) & free  # next submask of `free` in ascending order
        if sub == 0:
            break
        bit = sub & -sub
        psum[sub] = psum[sub ^ bit] + entries[bit.bit_length() - 1]
        u = table[sub] - psum[sub]
        util[sub] = u
        if u > best:
            best = u
    return best, util


def demand(v: Valuation, p: PriceVector) -> DemandResult:
    """Exhaustive scan of all subsets of non-blocked items."""
    if p.n != v.n:
        raise InvalidPrice(f"price vector has {p.n} entries for n={v.n}")
    best, util = utility_table(v, p)
    free = p.free_mask
    demanded = sorted(s for s in iter_submasks(free) if util[s] == best)
    return DemandResult(best_utility=best, demanded=tuple(demanded))


def _max_over_supersets(v: Valuation, p: PriceVector, base: int, util: list) -> Fraction:
    """max utility over demanded-candidate sets T with base <= T <= free."""
    free = p.free_mask
    rest = free & ~base
    best = util[base]
    for extra in iter_submasks(rest):
        u = util[base | extra]
        if u > best:
            best = u
    return best


def _lex_chosen(v: Valuation, p: PriceVector, order: Sequence[int], util: list,
                best: Fraction) -> int:
    """Lexicographically-first demanded set, built greedily in priority order.

    Because supersets precede subsets in the set order, the result is also
    the lex-first inclusion-maximal demanded set.
    """
    free = p.free_mask
    chosen = 0
    for item in order:
        bit = 1 << item
        if not free & bit:
            continue
        if _max_over_supersets(v, p, chosen | bit, util) == best:
            chosen |= bit
    return chosen


def greedy_set(v: Valuation, p: PriceVector, order: Sequence[int]) -> int:
    """Greedy loop: while some remaining item has v(i|S) - p_i >= 0, add the
    first (in priority order) item attaining the max margin."""
    free = p.free_mask
    s = 0
    table = v.table
    while True:
        best_gain = None
        best_item = -1
        for item in order:
            bit = 1 << item
            if s & bit or not free & bit:
                continue
            gain = table[s | bit] - table[s] - p.price(item)
            if best_gain is None or gain > best_gain:
                best_gain = gain
                best_item = item
        if best_item < 0 or best_gain < 0:
            return s
        s |= 1 << best_item


def decide(v: Valuation, p: PriceVector, spec: DecisionMapSpec) -> DemandResult:
    """Demand plus the set selected by the decision map.

    gs_greedy raises GreedyNotDemanded when the greedy set is not an argmax
    (the signature of a non-gross-substitutes valuation).
    """
    if p.n != v.n:
        raise InvalidPrice(f"price vector has {p.n} entries for n={v.n}")
    best, util = utility_table(v, p)
    demanded = tuple(sorted(s for s in iter_submasks(p.free_mask) if util[s] == best))
    if spec.kind is MapKind.GS_GREEDY:
        chosen = greedy_set(v, p, spec.order)
        got = v.table[chosen] - p.total(chosen)
        if got != best:
            raise GreedyNotDemanded(chosen, best, got)
    else:
        chosen = _lex_chosen(v, p, spec.order, util, best)
    return DemandResult(best_utility=best, demanded=demanded, chosen=chosen)


# ---------------------------------------------------------------------------
# property probes
# ---------------------------------------------------------------------------


@dataclass
class Counterexample:
    prices: PriceVector
    raised: PriceVector
    chosen_before: Optional[int]
    chosen_after: Optional[int]
    note: str = ""


@dataclass
class PropertyReport:
    """Sampled verdicts for maximality, up-consistency and GS-consistency."""

    trials: int
    maximality_passes: int = 0
    maximality_failures: int = 0
    up_consistency_passes: int = 0
    up_consistency_failures: int = 0
    gs_consistency_passes: int = 0
    gs_consistency_failures: int = 0
    membership_failures: int = 0
    first_counterexample: Optional[Counterexample] = None

    def all_passed(self) -> bool:
        return (
            self.maximality_failures
            + self.up_consistency_failures
            + self.gs_consistency_failures
            + self.membership_failures
        ) == 0


def _grid_price(rng: random.Random, kmax: int, q: int) -> Fraction:
    return Fraction(rng.randint(0, kmax), q)


def probe_map_properties(
    v: Valuation,
    spec: DecisionMapSpec,
    trials: int,
    rng_seed: int,
    grid_denominator: int = 16,
) -> PropertyReport:
    """Sample random price grids and check the decision-map properties.

    Prices are drawn from {k/q : 0 <= k <= q * v(N)} so ties are hit with
    positive probability. Deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(rng_seed)
    q = grid_denominator
    vmax = v.table[v.full_mask]
    kmax = int(ceil(vmax * q))
    report = PropertyReport(trials=trials)

    def record(counter: Counterexample):
        if report.first_counterexample is None:
            report.first_counterexample = counter

    for _ in range(trials):
        p = prices([_grid_price(rng, kmax, q) for _ in range(v.n)])
        try:
            res = decide(v, p, spec)
        except GreedyNotDemanded:
            report.membership_failures += 1
            record(Counterexample(p, p, None, None, "greedy outside demand"))
            continue
        chosen = res.chosen
        # maximality: no demanded strict superset of the chosen set
        if any(t != chosen and t & chosen == chosen for t in res.demanded):
            report.maximality_failures += 1
            record(Counterexample(p, p, chosen, None, "demanded strict superset"))
        else:
            report.maximality_passes += 1
        # up-consistency: raising one price keeps the set or drops that item
        i = rng.randrange(v.n)
        bump = Fraction(rng.randint(1, q), q)
        p_up = p.with_price(i, p.price(i) + bump)
        try:
            after_up = decide(v, p_up, spec).chosen
        except GreedyNotDemanded:
            report.membership_failures += 1
            record(Counterexample(p, p_up, chosen, None, "greedy outside demand"))
            continue
        if after_up == chosen or not (after_up >> i) & 1:
            report.up_consistency_passes += 1
        else:
            report.up_consistency_failures += 1
            record(Counterexample(p, p_up, chosen, after_up, "up-consistency"))
        # GS-consistency: X(p) inside the unchanged coordinates survives p' >= p
        raise_mask = rng.randrange(1, 1 << v.n)
        entries = list(p.entries)
        unchanged = 0
        for j in range(v.n):
            if (raise_mask >> j) & 1:
                entries[j] = entries[j] + Fraction(rng.randint(1, q), q)
            else:
                unchanged |= 1 << j
        p_raised = PriceVector(tuple(entries))
        try:
            after_raise = decide(v, p_raised, spec).chosen
        except GreedyNotDemanded:
            report.membership_failures += 1
            record(Counterexample(p, p_raised, chosen, None, "greedy outside demand"))
            continue
        kept = chosen & unchanged
        if kept & after_raise == kept:
            report.gs_consistency_passes += 1
        else:
            report.gs_consistency_failures += 1
            record(Counterexample(p, p_raised, chosen, after_raise, "gs-consistency"))
    return report
