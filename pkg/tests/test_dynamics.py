import random
from fractions import Fraction as F

import pytest

from pricegame import (
    CounterFound,
    NonexistenceCertificate,
    UpdateRule,
    Verdict,
    all_or_nothing,
    bertrand,
    bertrand_network,
    best_response_dynamics,
    check_equilibrium,
    coverage,
    game,
    grid_equilibrium_scan,
    make_table,
    nonexistence_certificate,
    prices,
    rule_replay,
    seller_utilities,
)
from pricegame.errors import InvalidPrice

from conftest import random_monotone


def two_buyer_game():
    wants_a = make_table(2, [0, 1, 0, 1], label="wants-A")
    wants_any = make_table(2, [0, 1, 1, 1], label="wants-any")
    return game([(1, wants_a), (1, wants_any)])


class TestBestResponseDynamics:
    def test_bertrand_descends_to_zero(self):
        tr = best_response_dynamics(game(bertrand(2, 5)), prices([5, 5]), F(1, 10), 10_000)
        assert tr.outcome == "converged"
        assert all(tr.final.price(i) == 0 for i in range(2))

    def test_two_buyer_game_cycles(self):
        tr = best_response_dynamics(two_buyer_game(), prices([1, 1]), F(1, 20), 10_000)
        assert tr.outcome == "cycle"
        assert tr.cycle_period and tr.cycle_period > 0
        # restarting on the cycle reproduces the same exact period
        again = best_response_dynamics(
            two_buyer_game(), tr.final, F(1, 20), 10_000
        )
        assert again.outcome == "cycle"
        assert again.cycle_period == tr.cycle_period

    def test_coverage_converges_to_marginals(self):
        g = game(coverage([["a", "b"], ["b", "c"]]))
        tr = best_response_dynamics(g, prices([0, 0]), F(1, 10), 100)
        assert tr.outcome == "converged"
        assert [tr.final.price(i) for i in range(2)] == [1, 1]
        assert len(tr.steps) <= 4  # n rounds

    def test_fixed_points_pass_scaled_eps_check(self):
        rng = random.Random(51)
        for _ in range(25):
            n = rng.randint(1, 3)
            v = random_monotone(n, rng, den=4)
            g = game(v)
            p0 = prices([F(rng.randint(0, 8), 4) for _ in range(n)])
            delta = F(1, rng.choice([5, 10, 20]))
            tr = best_response_dynamics(g, p0, delta, 2_000)
            if tr.outcome == "converged":
                rep = check_equilibrium(g, tr.final, delta * 1)  # L = one buyer
                assert rep.verdict in (Verdict.EXACT_NE, Verdict.EPS_NE)

    def test_budget_outcome(self):
        tr = best_response_dynamics(two_buyer_game(), prices([1, 1]), F(1, 20), 5)
        assert tr.outcome in ("cycle", "budget")
        assert len(tr.steps) <= 5


class TestRuleReplay:
    def eisen_rules(self):
        return [UpdateRule(F(499, 500), 1), UpdateRule(F(127, 100), 0)]

    def test_growth_factor_exact(self):
        tr = rule_replay(self.eisen_rules(), prices([10, 10]), 50)
        target = F(499, 500) * F(127, 100)
        assert target == F(63373, 50000) and target > 1
        for row in tr.round_growth[1:]:
            assert all(x == target for x in row)

    def test_price_after_2t_updates_closed_form(self):
        tr = rule_replay(self.eisen_rules(), prices([10, 10]), 20)
        target = F(499, 500) * F(127, 100)
        # seller 1's price after each full round grows geometrically
        p1 = [s.new_price for s in tr.steps if s.seller == 1]
        for t in range(1, len(p1)):
            assert p1[t] == p1[0] * target**t

    def test_contraction_decays(self):
        rules = [UpdateRule(F(1, 2), 1), UpdateRule(F(1, 2), 0)]
        tr = rule_replay(rules, prices([8, 8]), 40)
        assert tr.final.price(0) < F(1, 100)
        assert all(x <= F(1, 2) for row in tr.round_growth for x in row)

    def test_identity_fixed_point(self):
        rules = [UpdateRule(F(1), 1), UpdateRule(F(1), 0)]
        tr = rule_replay(rules, prices([8, 8]), 40)
        assert tr.outcome == "converged"
        assert tr.final.price(0) == 8

    def test_rejects_bad_source(self):
        with pytest.raises(InvalidPrice):
            rule_replay([UpdateRule(F(1), 5)], prices([1]), 10)


class TestNonexistenceCertificate:
    def test_two_buyer_example_certified(self):
        res = nonexistence_certificate(two_buyer_game(), F(1, 20), F(1, 100), F(6, 5))
        assert isinstance(res, NonexistenceCertificate)
        assert res.lipschitz == 2
        assert len(res.witnesses) == 121 * 121
        assert all(w.gain > F(1, 20) for w in res.witnesses)

    def test_witnesses_actually_achieve_gains(self):
        g = two_buyer_game()
        res = nonexistence_certificate(g, F(1, 20), F(1, 100), F(6, 5))
        rng = random.Random(3)
        for w in rng.sample(res.witnesses, 60):
            p = prices(list(w.profile))
            item = w.seller
            before = seller_utilities(g, p)[w.seller]
            after = seller_utilities(g, p.with_price(item, w.price))[w.seller]
            assert after - before >= w.gain > F(1, 20)

    def test_bertrand_has_counterexample(self):
        res = nonexistence_certificate(game(bertrand(2, 5)), F(1, 20), F(1, 20), F(5))
        assert isinstance(res, CounterFound)
        assert res.profile == (F(0), F(0))

    def test_large_eps_admits_equilibria(self):
        res = nonexistence_certificate(two_buyer_game(), F(1, 2), F(1, 100), F(6, 5))
        assert isinstance(res, CounterFound)

    def test_step_must_divide_cap(self):
        with pytest.raises(InvalidPrice):
            nonexistence_certificate(two_buyer_game(), F(1, 20), F(1, 7), F(6, 5))

    def test_no_eps_equilibrium_off_grid_either(self):
        # the certificate's margin is meant to cover the continuum between
        # grid points; spot-check random off-grid rational profiles
        g = two_buyer_game()
        rng = random.Random(17)
        for _ in range(200):
            p = prices([F(rng.randint(0, 480), 400) for _ in range(2)])
            rep = check_equilibrium(g, p, F(1, 20))
            assert rep.verdict == Verdict.NOT_NE

    def test_consistent_with_grid_scan(self):
        for g, eps, step, cap in (
            (two_buyer_game(), F(1, 20), F(1, 50), F(6, 5)),
            (game(bertrand(2, 5)), F(1, 20), F(1, 20), F(5)),
            (game(all_or_nothing(2, 1)), F(1, 50), F(1, 25), F(1)),
        ):
            scan = grid_equilibrium_scan(g, step, eps, cap)
            cert = nonexistence_certificate(g, eps, step, cap)
            assert (len(scan.points) == 0) == isinstance(cert, NonexistenceCertificate)


class TestBertrandNetwork:
    def test_single_edge_is_plain_competition(self):
        g = bertrand_network([(0, 1, 1)])
        tr = best_response_dynamics(g, prices([1, 1]), F(1, 10), 1_000)
        assert tr.outcome == "converged"
        assert all(tr.final.price(i) == 0 for i in range(2))

    def test_multi_buyer_fixed_point_scaled_check(self):
        # two buyers on the same pair of sellers: L = total weight = 2
        g = bertrand_network([(0, 1, 1), (0, 1, 1)])
        delta = F(1, 10)
        tr = best_response_dynamics(g, prices([1, 1]), delta, 2_000)
        assert tr.outcome == "converged"
        rep = check_equilibrium(g, tr.final, delta * 2)
        assert rep.verdict in (Verdict.EXACT_NE, Verdict.EPS_NE)

    def test_path_shape(self):
        g = bertrand_network([(0, 1, 1), (1, 2, 1)])
        assert g.n == 3
        assert len(g.buyers) == 2

    def test_buyer_valuations_valid(self):
        g = bertrand_network([(0, 1, 2), (1, 2, 3), (0, 2, 1)])
        for w, v in g.buyers:
            assert v(0) == 0
            for s in range(1, 1 << v.n):
                bit = s & -s
                assert v(s ^ bit) <= v(s)

    def test_rejects_loops(self):
        with pytest.raises(InvalidPrice):
            bertrand_network([(1, 1, 1)])
