"""Price dynamics and non-existence certificates.

Sequential best-response dynamics simulate the competition the model is
about: sellers take turns moving to their current best response. Updates are
sequential round-robin (an artifact choice; the model itself fixes no
protocol), with exact-rational profiles so cycles are detected by equality,
not quantization.

`nonexistence_certificate` mechanizes "no eps-equilibrium exists" over a
price box: every grid profile must admit a deviation gaining strictly more
than eps plus a conservative Lipschitz margin L*step (L = total buyer
weight), which covers the continuum between grid points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .demand import DecisionMapSpec, PriceVector, maximal_lex, prices
from .errors import InvalidPrice, MultiItemSeller
from .game import (
    GameSpec,
    _chosen_sets,
    _int_exact,
    _profile_at,
    best_response,
    game,
    scan_max_gains,
    seller_utilities,
)
from .rational import as_value
from .valuation import make_table


@dataclass(frozen=True)
class DynamicsStep:
    seller: int
    old_price: Fraction
    new_price: Fraction
    chosen: tuple[int, ...]
    utilities: tuple[Fraction, ...]


@dataclass(frozen=True)
class DynamicsTrace:
    steps: tuple[DynamicsStep, ...]
    outcome: str  # "converged" | "cycle" | "budget"
    final: PriceVector
    cycle_start: Optional[int] = None
    cycle_period: Optional[int] = None

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for t, s in enumerate(self.steps):
            rows.append(
                [
                    str(t),
                    str(s.seller),
                    str(s.old_price),
                    str(s.new_price),
                    " ".join(str(x) for x in s.chosen),
                    " ".join(str(u) for u in s.utilities),
                ]
            )
        return rows


def best_response_dynamics(
    g: GameSpec,
    p0: PriceVector,
    delta,
    max_steps: int,
    order: Optional[Sequence[int]] = None,
) -> DynamicsTrace:
    """Round-robin best-response updates until a fixed point, an exact cycle,
    or the step budget runs out.

    Each seller in turn reprices to the best-response witness: the optimal
    price when the sup is attained, value - delta when the tie goes against
    him, cost when nothing is sellable. Fixed points are therefore
    delta-scaled approximate equilibria, not necessarily exact ones.
    """
    delta = as_value(delta)
    if delta <= 0:
        raise InvalidPrice("delta must be > 0")
    if not g.single_item_sellers:
        raise MultiItemSeller("dynamics need single-item sellers")
    k = len(g.ownership)
    order = tuple(order) if order is not None else tuple(range(k))
    p = p0
    steps: list[DynamicsStep] = []
    seen: dict[tuple[int, tuple], int] = {}
    streak = 0
    for step_no in range(max_steps):
        if streak >= k:
            return DynamicsTrace(tuple(steps), "converged", p)
        turn = step_no % k
        state = (turn, p.entries)
        if state in seen:
            start = seen[state]
            return DynamicsTrace(
                tuple(steps), "cycle", p, cycle_start=start, cycle_period=step_no - start
            )
        seen[state] = step_no
        seller = order[turn]
        item = g.ownership[seller].bit_length() - 1
        old = p.price(item)
        br = best_response(g, seller, p, delta=delta)
        new = br.witness_price
        p2 = p.with_price(item, new) if new != old else p
        streak = streak + 1 if new == old else 0
        chosen = _chosen_sets(g, p2)
        steps.append(
            DynamicsStep(
                seller=seller,
                old_price=old,
                new_price=new,
                chosen=chosen,
                utilities=seller_utilities(g, p2),
            )
        )
        p = p2
    if streak >= k:
        return DynamicsTrace(tuple(steps), "converged", p)
    return DynamicsTrace(tuple(steps), "budget", p)


# ---------------------------------------------------------------------------
# rule replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdateRule:
    """p_self <- coef * p_source + offset."""

    coef: Fraction
    source: int
    offset: Fraction = Fraction(0)


@dataclass(frozen=True)
class ReplayStep:
    seller: int
    old_price: Fraction
    new_price: Fraction


@dataclass(frozen=True)
class ReplayTrace:
    steps: tuple[ReplayStep, ...]
    outcome: str  # "converged" | "budget"
    final: PriceVector
    round_growth: tuple[tuple[Optional[Fraction], ...], ...]
    """Per full round, per seller: price ratio to the previous round (None
    where the previous price was zero)."""


def rule_replay(rules: Sequence[UpdateRule], p0: PriceVector, steps: int) -> ReplayTrace:
    """Replay affine price-update rules sequentially, round-robin.

    Rules that feed on each other with product of coefficients above one grow
    without bound; the per-round growth factors expose that exactly.
    """
    n = len(rules)
    if p0.n != n:
        raise InvalidPrice("need one rule per seller")
    for r in rules:
        if not 0 <= r.source < n:
            raise InvalidPrice(f"rule source {r.source} out of range")
        if r.coef < 0 or r.offset < 0:
            raise InvalidPrice("rule coefficients must be nonnegative")
    cur = [p0.price(i) for i in range(n)]
    trace: list[ReplayStep] = []
    growth: list[tuple[Optional[Fraction], ...]] = []
    round_start = list(cur)
    changed_in_round = False
    for step_no in range(steps):
        i = step_no % n
        rule = rules[i]
        new = rule.coef * cur[rule.source] + rule.offset
        trace.append(ReplayStep(seller=i, old_price=cur[i], new_price=new))
        if new != cur[i]:
            changed_in_round = True
        cur[i] = new
        if i == n - 1:
            growth.append(
                tuple(
                    None if before == 0 else after / before
                    for before, after in zip(round_start, cur)
                )
            )
            if not changed_in_round:
                return ReplayTrace(
                    tuple(trace), "converged", prices(cur), tuple(growth)
                )
            round_start = list(cur)
            changed_in_round = False
    return ReplayTrace(tuple(trace), "budget", prices(cur), tuple(growth))


# ---------------------------------------------------------------------------
# non-existence certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviationWitness:
    profile: tuple[Fraction, ...]
    seller: int
    price: Fraction
    gain: Fraction  # guaranteed achieved gain, strictly above epsilon


@dataclass(frozen=True)
class NonexistenceCertificate:
    epsilon: Fraction
    step: Fraction
    cap: Fraction
    lipschitz: Fraction  # total buyer weight
    witnesses: tuple[DeviationWitness, ...]


@dataclass(frozen=True)
class CounterFound:
    profile: tuple[Fraction, ...]
    max_gain: Fraction  # best deviation gain at that profile (sup-based)


def nonexistence_certificate(
    g: GameSpec, epsilon, step, cap, cell_budget: int = 50_000_000
) -> Union[NonexistenceCertificate, CounterFound]:
    """Certify that no grid profile in [0, cap]^n is close to an
    eps-equilibrium: every point must admit a deviation with gain above
    epsilon + L*step. Returns CounterFound at the first resisting profile.
    """
    epsilon, step, cap = as_value(epsilon), as_value(step), as_value(cap)
    if (cap / step).denominator != 1:
        raise InvalidPrice("step must divide cap")
    grid, q, r, gains, sellers, thresholds, sups = scan_max_gains(
        g, step, epsilon, cap, cell_budget
    )
    n = g.n
    lipschitz = sum((w for w, _ in g.buyers), Fraction(0))
    margin = epsilon + lipschitz * step
    margin_scaled = _int_exact(margin * q * r)
    bad = np.nonzero(gains <= margin_scaled)[0]
    if bad.size:
        idx = int(bad[0])
        profile = tuple(_profile_at(grid, n, idx))
        return CounterFound(profile=profile, max_gain=Fraction(int(gains[idx]), q * r))
    vmax = max(max(v.table) for _, v in g.buyers)
    witnesses = []
    for idx in range(gains.shape[0]):
        profile = tuple(_profile_at(grid, n, idx))
        seller = int(sellers[idx])
        gain = Fraction(int(gains[idx]), q * r)
        sup = Fraction(int(sups[idx]), q * r)
        if sup == 0:
            # best deviation is to stop selling: any price above every value
            witnesses.append(
                DeviationWitness(profile, seller, vmax + 1, gain)
            )
            continue
        t = Fraction(int(thresholds[idx]), q)
        item = g.ownership[seller].bit_length() - 1
        c = g.costs[item]
        back_off = min(step / 2, t / 2, (t - c) / 2)
        witnesses.append(
            DeviationWitness(
                profile, seller, t - back_off, gain - lipschitz * step / 2
            )
        )
    return NonexistenceCertificate(
        epsilon=epsilon,
        step=step,
        cap=cap,
        lipschitz=lipschitz,
        witnesses=tuple(witnesses),
    )


# ---------------------------------------------------------------------------
# network-of-substitutes builder
# ---------------------------------------------------------------------------


def bertrand_network(
    edges: Sequence[tuple[int, int, int]],
    n_sellers: Optional[int] = None,
    map_spec: Optional[DecisionMapSpec] = None,
) -> GameSpec:
    """Game where each edge (i, j, buyer_count) contributes one buyer of that
    weight who wants a single unit from either endpoint: v(S) = 1 iff S hits
    {i, j}."""
    if not edges:
        raise InvalidPrice("need at least one edge")
    n = n_sellers or (max(max(i, j) for i, j, _ in edges) + 1)
    buyers = []
    for i, j, count in edges:
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise InvalidPrice(f"bad edge ({i}, {j})")
        if count <= 0:
            raise InvalidPrice("edge buyer count must be positive")
        pair = (1 << i) | (1 << j)
        table = [Fraction(1) if s & pair else Fraction(0) for s in range(1 << n)]
        buyers.append(
            (Fraction(count), make_table(n, table, label=f"edge({i},{j})"))
        )
    return game(buyers, map_spec=map_spec or maximal_lex(n))
