"""The pricing game: seller utilities, best responses, equilibrium checks,
and the constructive equilibrium procedures.

A `GameSpec` bundles one or more weighted buyers, per-item service costs, a
decision map, and an ownership partition (singletons by default: seller i
owns item i). Sellers post item prices; each buyer buys the bundle the
decision map picks from their demand correspondence; seller utility is
(price - cost) per sale, weighted over buyers.

Everything is exact. Best responses are computed from breakpoints: for a
single-item seller i and buyer k, the threshold t = A - B with
A = max_{S contains i} v_k(S) - p(S - i), B = max_{S omits i} v_k(S) - p(S)
is the highest price at which buyer k still takes item i; the supremum of the
seller's utility is a max over finitely many such thresholds. The sup may be
unattained (first-price-style tie), in which case callers choose the delta
used to realize value - delta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import floor, lcm
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .bitsets import items_of, iter_submasks, popcount
from .demand import (
    DecisionMapSpec,
    MapKind,
    PriceVector,
    decide,
    lex_key,
    maximal_lex,
    prices,
    utility_table,
)
from .errors import (
    BudgetExceeded,
    InputNotEquilibrium,
    InvalidPrice,
    MapNotUpConsistent,
    MultiItemSeller,
    NotSubmodular,
    Unsupported,
)
from .rational import as_value
from .valuation import Valuation, _submodular_witness

_I64_SAFE = 1 << 61


@dataclass(frozen=True)
class GameSpec:
    """Buyers (weight, valuation), per-item costs, decision map, ownership."""

    buyers: tuple[tuple[Fraction, Valuation], ...]
    costs: tuple[Fraction, ...]
    map: DecisionMapSpec
    ownership: tuple[int, ...]  # per-seller item masks, disjoint cover of N

    def __post_init__(self):
        if not self.buyers:
            raise InvalidPrice("at least one buyer required")
        n = self.buyers[0][1].n
        for w, v in self.buyers:
            if v.n != n:
                raise InvalidPrice("all buyer valuations must share n")
            if w <= 0:
                raise InvalidPrice(f"buyer weight must be positive, got {w}")
        if len(self.costs) != n or any(c < 0 for c in self.costs):
            raise InvalidPrice("costs must be n nonnegative values")
        if self.map.n != n:
            raise InvalidPrice("decision map order has wrong length")
        union = 0
        for m in self.ownership:
            if m == 0 or m & union:
                raise InvalidPrice("ownership must be a disjoint cover")
            union |= m
        if union != (1 << n) - 1:
            raise InvalidPrice("ownership must cover all items")

    @property
    def n(self) -> int:
        return self.buyers[0][1].n

    @property
    def single_item_sellers(self) -> bool:
        return all(popcount(m) == 1 for m in self.ownership)

    def owner_of(self, item: int) -> int:
        for s, m in enumerate(self.ownership):
            if (m >> item) & 1:
                return s
        raise IndexError(item)


def game(
    valuation_or_buyers,
    map_spec: Optional[DecisionMapSpec] = None,
    costs: Optional[Sequence] = None,
    ownership: Optional[Sequence[int]] = None,
) -> GameSpec:
    """Convenience constructor; a bare Valuation means one unit-weight buyer."""
    if isinstance(valuation_or_buyers, Valuation):
        buyers = ((Fraction(1), valuation_or_buyers),)
    else:
        buyers = tuple((as_value(w), v) for w, v in valuation_or_buyers)
    n = buyers[0][1].n
    return GameSpec(
        buyers=buyers,
        costs=tuple(as_value(c) for c in costs) if costs else (Fraction(0),) * n,
        map=map_spec or maximal_lex(n),
        ownership=tuple(ownership) if ownership else tuple(1 << i for i in range(n)),
    )


_SCAN_VERIFY_SAMPLE = 50  # grid hits re-verified through the exact path


def _int_exact(x: Fraction) -> int:
    if x.denominator != 1:
        raise RuntimeError(f"internal: expected an integer after scaling, got {x}")
    return x.numerator


def _chosen_sets(g: GameSpec, p: PriceVector) -> tuple[int, ...]:
    return tuple(decide(v, p, g.map).chosen for _, v in g.buyers)


def _utilities_from_chosen(
    g: GameSpec, p: PriceVector, chosen: Sequence[int]
) -> tuple[Fraction, ...]:
    out = []
    for owned in g.ownership:
        u = Fraction(0)
        for (w, _), x in zip(g.buyers, chosen):
            for j in items_of(owned & x):
                u += w * (p.price(j) - g.costs[j])
        out.append(u)
    return tuple(out)


def seller_utilities(g: GameSpec, p: PriceVector) -> tuple[Fraction, ...]:
    """u_seller = sum over buyers of weight * sum_{owned & chosen} (p_j - c_j)."""
    return _utilities_from_chosen(g, p, _chosen_sets(g, p))


def welfare(g: GameSpec, chosen: Sequence[int]) -> Fraction:
    """Total welfare: buyer value minus seller costs, weighted over buyers."""
    total = Fraction(0)
    for (w, v), x in zip(g.buyers, chosen):
        total += w * (v.table[x] - sum((g.costs[j] for j in items_of(x)), Fraction(0)))
    return total


# ---------------------------------------------------------------------------
# best response
# ---------------------------------------------------------------------------


def _threshold(v: Valuation, p: PriceVector, item: int) -> Fraction:
    """A - B for one buyer: the price at which `item` falls out of demand."""
    p0 = p.with_price(item, 0)
    _, util = utility_table(v, p0)
    free = p0.free_mask
    bit = 1 << item
    a = None
    b = None
    for s in iter_submasks(free):
        u = util[s]
        if s & bit:
            if a is None or u > a:
                a = u
        else:
            if b is None or u > b:
                b = u
    return a - b


def _thresholds_all(v: Valuation, p: PriceVector) -> list[Fraction]:
    """Thresholds for every item from a single utility table.

    For a non-blocked item, A = max_{S contains i} (util(S)) + p_i and
    B = max_{S omits i} util(S); blocked items fall back to the per-item
    scan with their price zeroed.
    """
    n = v.n
    _, util = utility_table(v, p)
    free = p.free_mask
    a: list = [None] * n
    b: list = [None] * n
    for s in iter_submasks(free):
        u = util[s]
        for i in range(n):
            if (s >> i) & 1:
                if a[i] is None or u > a[i]:
                    a[i] = u
            else:
                if b[i] is None or u > b[i]:
                    b[i] = u
    out = []
    for i in range(n):
        if p.is_blocked(i):
            out.append(_threshold(v, p, i))
        else:
            out.append(a[i] + p.price(i) - b[i])
    return out


def _sup_from_thresholds(ts: Sequence[Fraction], weights: Sequence[Fraction], c: Fraction) -> Fraction:
    sup = Fraction(0)
    for t in ts:
        wsum = sum((w for w, tk in zip(weights, ts) if tk >= t), Fraction(0))
        val = (t - c) * wsum
        if val > sup:
            sup = val
    return sup


@dataclass(frozen=True)
class BestResponse:
    """sup of achievable utility, whether some price attains it, and a price
    realizing it (or value - delta when unattained)."""

    value: Fraction
    attained: bool
    witness_price: Fraction


def _best_response_parts(g: GameSpec, seller: int, p: PriceVector):
    """(item, cost, sup, thresholds per buyer, best threshold). The seller's
    own entry in p is ignored."""
    owned = g.ownership[seller]
    if popcount(owned) != 1:
        raise MultiItemSeller(f"seller {seller} owns {owned:#x}")
    item = owned.bit_length() - 1
    c = g.costs[item]
    ts = [_threshold(v, p, item) for _, v in g.buyers]
    weights = [w for w, _ in g.buyers]
    sup = Fraction(0)
    t_star = None
    for t in ts:
        wsum = sum((w for w, tk in zip(weights, ts) if tk >= t), Fraction(0))
        val = (t - c) * wsum
        if val > sup or (val == sup and val > 0 and (t_star is None or t > t_star)):
            sup = val
            t_star = t
    return item, c, sup, ts, t_star


def _exact_deviation_utility(g: GameSpec, item: int, p: PriceVector, x: Fraction) -> Fraction:
    px = p.with_price(item, x)
    total = Fraction(0)
    for (w, v), chosen in zip(g.buyers, _chosen_sets(g, px)):
        if (chosen >> item) & 1:
            total += w * (x - g.costs[item])
    return total


def best_response(
    g: GameSpec, seller: int, p: PriceVector, delta: Optional[Fraction] = None
) -> BestResponse:
    """Exact sup of seller's utility over own-price deviations.

    When the sup requires a tie resolved in the seller's favor and the map
    resolves it against him, attained is False and the witness realizes
    value - delta (delta defaults to value/2 if not supplied).
    """
    item, c, sup, ts, t_star = _best_response_parts(g, seller, p)
    if sup == 0:
        # pricing at cost yields exactly zero whether or not the buyer takes it
        return BestResponse(value=sup, attained=True, witness_price=c)
    # exact evaluation at every threshold achieving the sup
    weights = [w for w, _ in g.buyers]
    candidates = sorted(
        {t for t in ts if (t - c) * sum((w for w, tk in zip(weights, ts) if tk >= t), Fraction(0)) == sup},
        reverse=True,
    )
    for t in candidates:
        if _exact_deviation_utility(g, item, p, t) == sup:
            return BestResponse(value=sup, attained=True, witness_price=t)
    if delta is None:
        delta = sup / 2
    if delta <= 0:
        raise InvalidPrice("delta must be positive")
    # back off just enough: utility at t* - d is at least sup - d * W, and when
    # the price floor c binds, delta already exceeds the whole sup
    w_star = sum((w for w, tk in zip(weights, ts) if tk >= t_star), Fraction(0))
    step_down = min(delta / w_star, t_star - c)
    return BestResponse(value=sup, attained=False, witness_price=t_star - step_down)


# ---------------------------------------------------------------------------
# equilibrium verification
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    EXACT_NE = "exact"
    EPS_NE = "eps"
    NOT_NE = "not"


@dataclass(frozen=True)
class CharacterizationReport:
    """Two-condition characterization for the zero-cost single-buyer game.

    condition 1: every picked seller has a tied alternative bundle without him;
    condition 2: no unpicked seller could be picked at any positive price.
    """

    condition1_ok: bool
    condition1_witness: Optional[int]  # seller with no tied alternative
    condition2_ok: bool
    condition2_witness: Optional[tuple[int, int]]  # (seller, better set T)
    implies_equilibrium: bool


def _characterization(v: Valuation, p: PriceVector, chosen: int) -> CharacterizationReport:
    best, util = utility_table(v, p)
    full = v.full_mask
    c1_witness = None
    for i in items_of(chosen):
        b_i = max(util[s] for s in iter_submasks(full) if not (s >> i) & 1)
        if b_i != best:
            c1_witness = i
            break
    c2_witness = None
    for i in items_of(full ^ chosen):
        p0 = p.with_price(i, 0)
        _, util0 = utility_table(v, p0)
        for s in iter_submasks(full):
            if (s >> i) & 1 and util0[s] > best:
                c2_witness = (i, s)
                break
        if c2_witness:
            break
    ok1, ok2 = c1_witness is None, c2_witness is None
    return CharacterizationReport(
        condition1_ok=ok1,
        condition1_witness=c1_witness,
        condition2_ok=ok2,
        condition2_witness=c2_witness,
        implies_equilibrium=ok1 and ok2,
    )


@dataclass(frozen=True)
class SellerVerdict:
    utility: Fraction
    best_response_value: Fraction
    gain: Fraction
    deviation_price: Optional[Fraction]  # None when no improving deviation


@dataclass(frozen=True)
class EquilibriumReport:
    verdict: Verdict
    epsilon: Fraction
    sellers: tuple[SellerVerdict, ...]
    chosen: tuple[int, ...]  # per buyer
    welfare: Fraction
    characterization: Optional[CharacterizationReport]

    @property
    def utilities(self) -> tuple[Fraction, ...]:
        return tuple(s.utility for s in self.sellers)

    @property
    def worst_gain(self) -> Fraction:
        return max(s.gain for s in self.sellers)

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "epsilon": str(self.epsilon),
            "utilities": [str(s.utility) for s in self.sellers],
            "gains": [str(s.gain) for s in self.sellers],
            "deviations": [
                None if s.deviation_price is None else str(s.deviation_price)
                for s in self.sellers
            ],
            "chosen": list(self.chosen),
            "welfare": str(self.welfare),
            "characterization": None
            if self.characterization is None
            else {
                "condition1_ok": self.characterization.condition1_ok,
                "condition2_ok": self.characterization.condition2_ok,
                "implies_equilibrium": self.characterization.implies_equilibrium,
            },
        }

    def csv_row(self, p: PriceVector) -> list[str]:
        return [
            " ".join(str(e) for e in p.entries),
            self.verdict.value,
            " ".join(str(u) for u in self.utilities),
            str(self.welfare),
            str(self.worst_gain),
        ]


def check_equilibrium(g: GameSpec, p: PriceVector, epsilon=0) -> EquilibriumReport:
    """Verdict from exact best-response gains, plus two-condition diagnostics for the
    basic game.

    For the zero-cost single-buyer game under the maximal map, the
    best-response verdict and the two-condition verdict provably coincide;
    this is asserted on every call.
    """
    epsilon = as_value(epsilon)
    if epsilon < 0:
        raise InvalidPrice("epsilon must be >= 0")
    if not g.single_item_sellers:
        raise MultiItemSeller("check_equilibrium needs single-item sellers")
    chosen = _chosen_sets(g, p)
    weights = [w for w, _ in g.buyers]
    per_buyer_ts = [_thresholds_all(v, p) for _, v in g.buyers]
    sellers: list[SellerVerdict] = []
    for s, owned in enumerate(g.ownership):
        item = owned.bit_length() - 1
        u = Fraction(0)
        for (w, _), x in zip(g.buyers, chosen):
            if (x >> item) & 1:
                u += w * (p.price(item) - g.costs[item])
        ts = [row[item] for row in per_buyer_ts]
        value = _sup_from_thresholds(ts, weights, g.costs[item])
        gain = value - u
        deviation = None
        if gain > 0:
            slack = (gain - epsilon) / 2 if gain > epsilon else gain / 2
            br = best_response(g, s, p, delta=slack)
            deviation = br.witness_price
            if br.value != value:
                raise RuntimeError("internal: shared-table sup disagrees")
        sellers.append(
            SellerVerdict(
                utility=u,
                best_response_value=value,
                gain=gain,
                deviation_price=deviation,
            )
        )
    worst = max(s.gain for s in sellers)
    if worst <= 0:
        verdict = Verdict.EXACT_NE
    elif worst <= epsilon:
        verdict = Verdict.EPS_NE
    else:
        verdict = Verdict.NOT_NE
    characterization = None
    if (
        len(g.buyers) == 1
        and all(c == 0 for c in g.costs)
        and p.free_mask == (1 << g.n) - 1
    ):
        characterization = _characterization(g.buyers[0][1], p, chosen[0])
        if g.map.kind is MapKind.MAXIMAL_LEX and characterization.implies_equilibrium != (
            worst <= 0
        ):
            raise RuntimeError(
                "internal: characterization and best-response verdicts disagree "
                f"at {p.entries} (characterization={characterization.implies_equilibrium}, worst gain={worst})"
            )
    return EquilibriumReport(
        verdict=verdict,
        epsilon=epsilon,
        sellers=tuple(sellers),
        chosen=chosen,
        welfare=welfare(g, chosen),
        characterization=characterization,
    )


# ---------------------------------------------------------------------------
# constructive equilibria
# ---------------------------------------------------------------------------


def pareto_equilibrium(v: Valuation, order: Optional[Sequence[int]] = None) -> PriceVector:
    """Full-trade exact equilibrium of the zero-cost single-buyer game.

    One sequential pass raises each coordinate (in `order`) to the max value
    keeping p(T) <= v(T | N-T) for every T; the result is a Pareto point of
    that polytope, hence an equilibrium with the buyer taking everything.
    """
    n = v.n
    order = tuple(order) if order is not None else tuple(range(n))
    full = v.full_mask
    margin = [v.table[full] - v.table[full ^ t] for t in range(1 << n)]
    p = [Fraction(0)] * n
    for i in order:
        bit = 1 << i
        best = None
        for rest in iter_submasks(full ^ bit):
            t = bit | rest
            room = margin[t] - sum(p[j] for j in items_of(rest))
            if best is None or room < best:
                best = room
        p[i] = best
    out = prices(p)
    report = check_equilibrium(game(v), out, 0)
    if report.verdict is not Verdict.EXACT_NE or report.chosen[0] != full:
        raise RuntimeError(f"internal: pareto profile {p} failed verification")
    return out


@dataclass(frozen=True)
class SubmodularPrediction:
    """Predicted equilibrium prices p_i = v(i | N-i) plus the sellers whose
    price is not pinned down (zero marginal, zero utility)."""

    prices: PriceVector
    free_sellers: tuple[int, ...]
    report: EquilibriumReport


def submodular_prediction(v: Valuation) -> SubmodularPrediction:
    witness = _submodular_witness(v)
    if witness is not None:
        raise NotSubmodular(f"valuation is not submodular, witness {witness}")
    full = v.full_mask
    p = [v.marginal(1 << i, full ^ (1 << i)) for i in range(v.n)]
    out = prices(p)
    report = check_equilibrium(game(v), out, 0)
    if report.verdict is not Verdict.EXACT_NE:
        raise RuntimeError("internal: submodular prediction failed the exact check")
    return SubmodularPrediction(
        prices=out,
        free_sellers=tuple(i for i, x in enumerate(p) if x == 0),
        report=report,
    )


def epsilon_transfer(v: Valuation, p: PriceVector, epsilon) -> PriceVector:
    """Shift an exact maximal-map equilibrium to an eps-equilibrium that
    survives any tie-breaking rule: picked sellers give up eps/n.

    p must pass the exact check under the maximal map; welfare is preserved
    for every decision map.
    """
    epsilon = as_value(epsilon)
    if epsilon <= 0:
        raise InvalidPrice("epsilon must be > 0")
    g = game(v)
    report = check_equilibrium(g, p, 0)
    if report.verdict is not Verdict.EXACT_NE:
        raise InputNotEquilibrium(f"profile {p.entries} is not an exact equilibrium")
    chosen = report.chosen[0]
    shift = epsilon / v.n
    entries = [
        max(Fraction(0), p.price(i) - shift) if (chosen >> i) & 1 else p.price(i)
        for i in range(v.n)
    ]
    return prices(entries)


def cost_epsilon_equilibrium(g: GameSpec, epsilon) -> PriceVector:
    """eps-equilibrium of the game with costs: start at p = c, keep raising
    picked sellers while they stay picked. Requires an up-consistent map.

    The chosen set never moves (up-consistency), so the final profile trades
    the same set as pricing at cost: X(p) = X(c).
    """
    epsilon = as_value(epsilon)
    if epsilon <= 0:
        raise InvalidPrice("epsilon must be > 0")
    if g.map.kind not in (MapKind.LEX_FIRST, MapKind.MAXIMAL_LEX):
        raise MapNotUpConsistent(f"{g.map.kind.value} is not up-consistent")
    if len(g.buyers) != 1:
        raise Unsupported("cost_epsilon_equilibrium handles a single buyer")
    v = g.buyers[0][1]
    p = prices(list(g.costs))
    target = decide(v, p, g.map).chosen
    while True:
        raised = False
        for i in items_of(target):
            t = _threshold(v, p, i)
            if t < p.price(i) + epsilon:
                continue
            keeps_at_t = (decide(v, p.with_price(i, t), g.map).chosen >> i) & 1
            if keeps_at_t:
                new = t
            elif t > p.price(i) + epsilon:
                new = max(p.price(i) + epsilon, t - epsilon / 2)
            else:
                continue
            p = p.with_price(i, new)
            raised = True
            if decide(v, p, g.map).chosen != target:
                raise RuntimeError("internal: up-consistent raise moved the chosen set")
        if not raised:
            break
    return p


@dataclass(frozen=True)
class CostConditionsReport:
    """Necessary conditions on the traded set when costs are present."""

    chosen: int
    margin_ok: bool  # v(i | S-i) >= c_i for all picked i
    margin_witness: Optional[int]
    swap_ok: bool  # v(T+j) + c(S-T) - c_j <= v(S) for all T in S, j outside
    swap_witness: Optional[tuple[int, int]]

    @property
    def holds(self) -> bool:
        return self.margin_ok and self.swap_ok


def conditions_for_set(v: Valuation, costs: Sequence[Fraction], s: int) -> CostConditionsReport:
    margin_witness = None
    for i in items_of(s):
        if v.marginal(1 << i, s ^ (1 << i)) < costs[i]:
            margin_witness = i
            break
    swap_witness = None
    vs = v.table[s]
    cs = sum((costs[i] for i in items_of(s)), Fraction(0))
    full = v.full_mask
    for j in items_of(full ^ s):
        bj = 1 << j
        for t in iter_submasks(s):
            c_removed = cs - sum((costs[i] for i in items_of(t)), Fraction(0))
            if v.table[t | bj] + c_removed - costs[j] > vs:
                swap_witness = (t, j)
                break
        if swap_witness:
            break
    return CostConditionsReport(
        chosen=s,
        margin_ok=margin_witness is None,
        margin_witness=margin_witness,
        swap_ok=swap_witness is None,
        swap_witness=swap_witness,
    )


def cost_equilibrium_conditions(g: GameSpec, p: PriceVector) -> CostConditionsReport:
    """Evaluate the necessary equilibrium conditions at S = X(p)."""
    if len(g.buyers) != 1:
        raise Unsupported("conditions are defined for a single buyer")
    v = g.buyers[0][1]
    s = decide(v, p, g.map).chosen
    return conditions_for_set(v, g.costs, s)


# ---------------------------------------------------------------------------
# welfare search
# ---------------------------------------------------------------------------


def welfare_optimum(v: Valuation, costs: Sequence[Fraction]) -> tuple[Fraction, int]:
    """Brute-force max of v(S) - c(S); ties resolved to the lex-first set."""
    best = Fraction(0)
    best_set = 0
    csum = [Fraction(0)] * (1 << v.n)
    for s in range(1, 1 << v.n):
        bit = s & -s
        csum[s] = csum[s ^ bit] + costs[bit.bit_length() - 1]
        val = v.table[s] - csum[s]
        if val > best or (val == best and lex_key(s, range(v.n)) < lex_key(best_set, range(v.n))):
            best, best_set = val, s
    return best, best_set


@dataclass(frozen=True)
class LocalSearchResult:
    set: int
    value: Fraction
    steps: int
    optimum_value: Fraction
    optimum_set: int

    @property
    def is_global_optimum(self) -> bool:
        return self.value == self.optimum_value


def local_search_welfare(v: Valuation, costs: Sequence[Fraction], start: int) -> LocalSearchResult:
    """Hill-climb v(S) - c(S) with add/remove/swap moves; flags whether the
    local optimum reached is globally optimal."""
    costs = [as_value(c) for c in costs]

    def f(s: int) -> Fraction:
        return v.table[s] - sum((costs[i] for i in items_of(s)), Fraction(0))

    cur = start
    cur_val = f(cur)
    steps = 0
    full = v.full_mask
    while True:
        best_move = None
        best_val = cur_val
        candidates = []
        for i in items_of(full ^ cur):
            candidates.append(cur | (1 << i))
        for i in items_of(cur):
            candidates.append(cur ^ (1 << i))
            for j in items_of(full ^ cur):
                candidates.append((cur ^ (1 << i)) | (1 << j))
        for nxt in candidates:
            val = f(nxt)
            if val > best_val or (val == best_val and best_move is not None and nxt < best_move):
                best_val = val
                best_move = nxt
        if best_move is None:
            break
        cur, cur_val = best_move, best_val
        steps += 1
    opt_val, opt_set = welfare_optimum(v, costs)
    return LocalSearchResult(
        set=cur, value=cur_val, steps=steps, optimum_value=opt_val, optimum_set=opt_set
    )


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    prices: tuple[Fraction, ...]
    utilities: tuple[Fraction, ...]
    welfare: Fraction
    exact: bool


@dataclass(frozen=True)
class GridScanResult:
    step: Fraction
    epsilon: Fraction
    cap: Fraction
    points: tuple[GridPoint, ...]
    min_welfare: Optional[Fraction]
    max_welfare: Optional[Fraction]


def _scaled_scan_inputs(g: GameSpec, extra: Sequence[Fraction]):
    """Common-denominator int64 arrays for the kernels, or None on overflow."""
    n = g.n
    q = 1
    for _, v in g.buyers:
        for x in v.table:
            q = lcm(q, x.denominator)
    for c in g.costs:
        q = lcm(q, c.denominator)
    for x in extra:
        q = lcm(q, x.denominator)
    r = 1
    for w, _ in g.buyers:
        r = lcm(r, w.denominator)
    vmax = max(max(v.table) for _, v in g.buyers)
    pmax = max([*extra, Fraction(0)])
    cmax = max(g.costs)
    wsum = sum(w for w, _ in g.buyers)
    bound = (vmax + (n + 2) * pmax + cmax + 1) * q * wsum * r
    if bound >= _I64_SAFE:
        return None
    tables = np.asarray(
        [[int(x * q) for x in v.table] for _, v in g.buyers], dtype=np.int64
    )
    weights = np.asarray([int(w * r) for w, _ in g.buyers], dtype=np.int64)
    costs = np.asarray([int(c * q) for c in g.costs], dtype=np.int64)
    return tables, weights, costs, q, r


def _grid_values(step: Fraction, cap: Fraction) -> list[Fraction]:
    count = floor(cap / step) + 1
    return [k * step for k in range(count)]


def _profile_at(grid: Sequence[Fraction], n: int, idx: int) -> list[Fraction]:
    gcount = len(grid)
    out = []
    for i in range(n):
        power = gcount ** (n - 1 - i)
        out.append(grid[(idx // power) % gcount])
    return out


def scan_max_gains(
    g: GameSpec, step, epsilon, price_cap, cell_budget: int = 50_000_000,
    backend: Optional[str] = None,
):
    """Kernel pass over the whole grid; returns (grid, q, r, gains, sellers,
    thresholds, sups) in scaled integer units."""
    step, epsilon, price_cap = as_value(step), as_value(epsilon), as_value(price_cap)
    if step <= 0 or price_cap < 0 or epsilon < 0:
        raise InvalidPrice("need step > 0, cap >= 0, epsilon >= 0")
    if not g.single_item_sellers:
        raise MultiItemSeller("grid scans need single-item sellers")
    n = g.n
    grid = _grid_values(step, price_cap)
    if n * len(grid) ** n > cell_budget:
        raise BudgetExceeded(
            f"{len(grid)}^{n} grid profiles exceed the cell budget {cell_budget}"
        )
    scaled = _scaled_scan_inputs(g, [step, price_cap, epsilon])
    if scaled is None:
        raise BudgetExceeded("scaled values do not fit int64; shrink the instance")
    tables, weights, costs, q, r = scaled
    grid_ints = np.asarray([int(x * q) for x in grid], dtype=np.int64)
    greedy = g.map.kind is MapKind.GS_GREEDY
    gains, sellers, thresholds, sups = _kernels.scan_grid(
        tables, weights, costs, grid_ints, greedy, g.map.order, backend_name=backend
    )
    return grid, q, r, gains, sellers, thresholds, sups


def grid_equilibrium_scan(
    g: GameSpec, step, epsilon, price_cap, cell_budget: int = 50_000_000,
    backend: Optional[str] = None,
) -> GridScanResult:
    """Brute-force oracle: test every grid profile for eps-equilibrium.

    Hits found by the integer kernel are re-verified through the exact
    Fraction path (check_equilibrium); a disagreement raises, so a scaling
    bug cannot silently corrupt results.
    """
    step, epsilon, price_cap = as_value(step), as_value(epsilon), as_value(price_cap)
    grid, q, r, gains, _, _, _ = scan_max_gains(
        g, step, epsilon, price_cap, cell_budget, backend
    )
    eps_scaled = _int_exact(epsilon * q * r)
    hits = np.nonzero(gains <= eps_scaled)[0]
    points = []
    for pos, idx in enumerate(hits):
        p = prices(_profile_at(grid, g.n, int(idx)))
        exact = int(gains[idx]) <= 0
        if pos < _SCAN_VERIFY_SAMPLE:
            report = check_equilibrium(g, p, epsilon)
            if report.verdict is Verdict.NOT_NE or (
                report.verdict is Verdict.EXACT_NE
            ) != exact:
                raise RuntimeError(
                    f"internal: kernel and exact check disagree at {p.entries}"
                )
            utilities, w = report.utilities, report.welfare
        else:
            chosen = _chosen_sets(g, p)
            utilities = _utilities_from_chosen(g, p, chosen)
            w = welfare(g, chosen)
        points.append(
            GridPoint(prices=tuple(p.entries), utilities=utilities, welfare=w, exact=exact)
        )
    welfares = [pt.welfare for pt in points]
    return GridScanResult(
        step=step,
        epsilon=epsilon,
        cap=price_cap,
        points=tuple(points),
        min_welfare=min(welfares) if welfares else None,
        max_welfare=max(welfares) if welfares else None,
    )
