"""Scenario-file front end.

Scenarios are JSON, exact by construction: numbers are parsed as exact
decimals and strings like "3/10" as rationals, so fixtures are human-diffable
and round-trip without loss. Reports are emitted as sorted-key JSON (plus
optional CSV) and are byte-deterministic given scenario and seed.

Exit codes: 0 success, 2 verdict-negative (NotNE under check-eq, CounterFound
under certify-nonexistence), 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import dynamics as dyn
from . import monopolist as mono
from .bitsets import items_of
from .demand import DecisionMapSpec, MapKind, PriceVector, decide, prices
from .errors import ParseError, PricegameError, ValidationError
from .game import (
    GameSpec,
    Verdict,
    check_equilibrium,
    cost_epsilon_equilibrium,
    epsilon_transfer,
    game,
    grid_equilibrium_scan,
    pareto_equilibrium,
    submodular_prediction,
)
from .rational import as_value
from .valuation import build_family, classify

SCHEMA = 1


def _parse_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text, parse_float=Fraction, parse_int=int)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def parse_scenario(path: str) -> dict:
    """Load and validate a scenario file; all values exact Fractions."""
    raw = _parse_json(path)
    if not isinstance(raw, dict):
        raise ValidationError("scenario must be a JSON object")
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise ValidationError(f"unsupported schema {raw.get('schema')}")
    try:
        scenario: dict[str, Any] = {"label": raw.get("label", "")}
        if "buyers" in raw:
            scenario["buyers"] = [
                (as_value(b.get("weight", 1)), build_family(b["valuation"]))
                for b in raw["buyers"]
            ]
        elif "valuation" in raw:
            scenario["buyers"] = [(Fraction(1), build_family(raw["valuation"]))]
        else:
            raise ValidationError("scenario needs 'valuation' or 'buyers'")
        n = scenario["buyers"][0][1].n
        scenario["costs"] = (
            [as_value(c) for c in raw["costs"]] if "costs" in raw else [Fraction(0)] * n
        )
        m = raw.get("map", {})
        kind = MapKind(m.get("kind", "maximal_lex"))
        order = tuple(m.get("order", range(n)))
        scenario["map"] = DecisionMapSpec(kind, order)
        if "prices" in raw:
            scenario["prices"] = prices(
                [None if x == "blocked" else as_value(x) for x in raw["prices"]]
            )
        for key in ("epsilon", "step", "cap", "delta"):
            if key in raw:
                scenario[key] = as_value(raw[key])
        for key in ("seed", "samples", "max_steps"):
            if key in raw:
                scenario[key] = int(raw[key])
        if "order" in raw:
            scenario["order"] = [int(i) for i in raw["order"]]
        if "rules" in raw:
            scenario["rules"] = [
                dyn.UpdateRule(
                    coef=as_value(r["coef"]),
                    source=int(r["source"]),
                    offset=as_value(r.get("offset", 0)),
                )
                for r in raw["rules"]
            ]
        return scenario
    except ValidationError:
        raise
    except PricegameError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad scenario field: {exc}") from exc


def _game_from(scenario: dict) -> GameSpec:
    return game(
        scenario["buyers"], map_spec=scenario["map"], costs=scenario["costs"]
    )


def _need(scenario: dict, key: str, flag: str):
    if key not in scenario:
        raise ValidationError(f"scenario needs {key!r} (or pass {flag})")
    return scenario[key]


def _single_valuation(scenario: dict):
    if len(scenario["buyers"]) != 1:
        raise ValidationError("this command needs a single-buyer scenario")
    return scenario["buyers"][0][1]


def _fmt(x) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, PriceVector):
        return ["blocked" if x.is_blocked(i) else str(x.price(i)) for i in range(x.n)]
    if isinstance(x, tuple):
        return [_fmt(e) for e in x]
    return x


def _emit(payload: dict, out: Optional[str]):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: list[str], rows: list[list[str]]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_classify(scenario, args):
    results = []
    for _, v in scenario["buyers"]:
        rep = classify(v)
        results.append(
            {
                "label": v.label,
                "monotone": rep.monotone,
                "subadditive": rep.subadditive,
                "submodular": rep.submodular,
                "gross_substitutes": rep.gross_substitutes,
                "witnesses": {k: list(w) for k, w in rep.witnesses.items()},
            }
        )
    return {"valuations": results}, 0


def _cmd_demand(scenario, args):
    p = _need(scenario, "prices", "--scenario with prices")
    out = []
    for _, v in scenario["buyers"]:
        res = decide(v, p, scenario["map"])
        out.append(
            {
                "best_utility": str(res.best_utility),
                "demanded": list(res.demanded),
                "chosen": res.chosen,
            }
        )
    return {"buyers": out}, 0


def _cmd_check_eq(scenario, args):
    g = _game_from(scenario)
    p = _need(scenario, "prices", "prices")
    eps = scenario.get("epsilon", Fraction(0))
    rep = check_equilibrium(g, p, eps)
    code = 2 if rep.verdict is Verdict.NOT_NE else 0
    payload = {"prices": _fmt(p), "report": rep.to_json_dict()}
    if args.csv:
        _write_csv(
            args.csv,
            ["profile", "verdict", "utilities", "welfare", "worst_gain"],
            [rep.csv_row(p)],
        )
    return payload, code


def _cmd_find_eq(scenario, args):
    v = _single_valuation(scenario)
    if args.method == "submodular":
        pred = submodular_prediction(v)
        p, extra = pred.prices, {"free_sellers": list(pred.free_sellers)}
    else:
        p = pareto_equilibrium(v, scenario.get("order"))
        extra = {}
    rep = check_equilibrium(game(v), p, 0)
    return {"prices": _fmt(p), "report": rep.to_json_dict(), **extra}, 0


def _cmd_transfer(scenario, args):
    v = _single_valuation(scenario)
    p = _need(scenario, "prices", "prices")
    eps = _need(scenario, "epsilon", "--epsilon")
    shifted = epsilon_transfer(v, p, eps)
    checks = {}
    for kind in MapKind:
        spec = DecisionMapSpec(kind, tuple(range(v.n)))
        try:
            rep = check_equilibrium(game(v, map_spec=spec), shifted, eps)
            checks[kind.value] = {
                "verdict": rep.verdict.value,
                "welfare": str(rep.welfare),
            }
        except PricegameError as exc:
            checks[kind.value] = {"error": type(exc).__name__}
    return {"prices": _fmt(shifted), "checks": checks}, 0


def _cmd_cost_eq(scenario, args):
    g = _game_from(scenario)
    eps = _need(scenario, "epsilon", "--epsilon")
    p = cost_epsilon_equilibrium(g, eps)
    rep = check_equilibrium(g, p, eps)
    return {"prices": _fmt(p), "report": rep.to_json_dict()}, 0


def _cmd_dynamics(scenario, args):
    g = _game_from(scenario)
    p0 = _need(scenario, "prices", "prices")
    delta = scenario.get("delta", Fraction(1, 100))
    max_steps = scenario.get("max_steps", 10_000)
    trace = dyn.best_response_dynamics(g, p0, delta, max_steps)
    payload = {
        "outcome": trace.outcome,
        "final": _fmt(trace.final),
        "steps": len(trace.steps),
        "cycle_start": trace.cycle_start,
        "cycle_period": trace.cycle_period,
    }
    if args.csv:
        _write_csv(
            args.csv,
            ["step", "seller", "old_price", "new_price", "chosen", "utilities"],
            trace.csv_rows(),
        )
    return payload, 0


def _cmd_replay(scenario, args):
    rules = _need(scenario, "rules", "rules")
    p0 = _need(scenario, "prices", "prices")
    steps = scenario.get("max_steps", 50)
    trace = dyn.rule_replay(rules, p0, steps)
    payload = {
        "outcome": trace.outcome,
        "final": _fmt(trace.final),
        "round_growth": [
            [None if x is None else str(x) for x in row] for row in trace.round_growth
        ],
    }
    if args.csv:
        _write_csv(
            args.csv,
            ["step", "seller", "old_price", "new_price"],
            [
                [str(i), str(s.seller), str(s.old_price), str(s.new_price)]
                for i, s in enumerate(trace.steps)
            ],
        )
    return payload, 0


def _cmd_certify(scenario, args):
    g = _game_from(scenario)
    eps = _need(scenario, "epsilon", "--epsilon")
    step = _need(scenario, "step", "--step")
    cap = _need(scenario, "cap", "--cap")
    res = dyn.nonexistence_certificate(g, eps, step, cap)
    if isinstance(res, dyn.CounterFound):
        return {
            "certified": False,
            "counterexample": _fmt(res.profile),
            "max_gain": str(res.max_gain),
        }, 2
    payload = {
        "certified": True,
        "epsilon": str(res.epsilon),
        "step": str(res.step),
        "cap": str(res.cap),
        "lipschitz": str(res.lipschitz),
        "witnesses": len(res.witnesses),
    }
    if args.csv:
        _write_csv(
            args.csv,
            ["profile", "seller", "deviation_price", "gain"],
            [
                [
                    " ".join(str(x) for x in w.profile),
                    str(w.seller),
                    str(w.price),
                    str(w.gain),
                ]
                for w in res.witnesses
            ],
        )
    return payload, 0


def _cmd_monopolist(scenario, args):
    v = _single_valuation(scenario)
    if args.mode == "expectation":
        val = mono.exact_sampler_expectation(v)
        return {"expected_revenue": str(val)}, 0
    if args.mode == "sample":
        seed = scenario.get("seed", 0)
        samples = scenario.get("samples")
        if samples:
            res = mono.repeated_sample(v, samples, seed)
        else:
            res = mono.harmonic_sample(v, seed)
    else:
        res = mono.brute_force_monopolist(v)
    payload = {
        "set": res.set,
        "items": list(items_of(res.set)),
        "revenue": str(res.revenue),
        "prices": _fmt(res.prices),
        "samples_used": res.samples_used,
        "realized": res.realized,
    }
    if res.welfare_range is not None:
        payload["welfare_range"] = [str(x) for x in res.welfare_range]
    return payload, 0


def _cmd_grid_scan(scenario, args):
    g = _game_from(scenario)
    eps = _need(scenario, "epsilon", "--epsilon")
    step = _need(scenario, "step", "--step")
    cap = _need(scenario, "cap", "--cap")
    res = grid_equilibrium_scan(g, step, eps, cap)
    payload = {
        "step": str(res.step),
        "epsilon": str(res.epsilon),
        "cap": str(res.cap),
        "count": len(res.points),
        "min_welfare": None if res.min_welfare is None else str(res.min_welfare),
        "max_welfare": None if res.max_welfare is None else str(res.max_welfare),
        "points": [
            {
                "prices": [str(x) for x in pt.prices],
                "utilities": [str(u) for u in pt.utilities],
                "welfare": str(pt.welfare),
                "exact": pt.exact,
            }
            for pt in res.points
        ],
    }
    if args.csv:
        _write_csv(
            args.csv,
            ["prices", "utilities", "welfare", "exact"],
            [
                [
                    " ".join(str(x) for x in pt.prices),
                    " ".join(str(u) for u in pt.utilities),
                    str(pt.welfare),
                    str(pt.exact),
                ]
                for pt in res.points
            ],
        )
    return payload, 0


_COMMANDS = {
    "classify": _cmd_classify,
    "demand": _cmd_demand,
    "check-eq": _cmd_check_eq,
    "find-eq": _cmd_find_eq,
    "transfer": _cmd_transfer,
    "cost-eq": _cmd_cost_eq,
    "dynamics": _cmd_dynamics,
    "replay": _cmd_replay,
    "certify-nonexistence": _cmd_certify,
    "monopolist": _cmd_monopolist,
    "grid-scan": _cmd_grid_scan,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pricegame", description="combinatorial pricing game toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", help="write the JSON report here (default stdout)")
        p.add_argument("--csv", help="write a CSV artifact where applicable")
        p.add_argument("--epsilon", help="override scenario epsilon (rational)")
        p.add_argument("--step", help="override scenario grid step (rational)")
        p.add_argument("--cap", help="override scenario price cap (rational)")
        p.add_argument("--delta", help="override dynamics delta (rational)")
        p.add_argument("--seed", type=int, help="override RNG seed")
        p.add_argument("--samples", type=int, help="override sample count")
        p.add_argument("--max-steps", type=int, dest="max_steps")
        if name == "monopolist":
            p.add_argument(
                "--mode", choices=["brute", "sample", "expectation"], default="brute"
            )
        if name == "find-eq":
            p.add_argument(
                "--method", choices=["pareto", "submodular"], default="pareto"
            )
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.scenario)
        for key in ("epsilon", "step", "cap", "delta"):
            flag = getattr(args, key, None)
            if flag is not None:
                scenario[key] = as_value(flag)
        for key in ("seed", "samples", "max_steps"):
            flag = getattr(args, key, None)
            if flag is not None:
                scenario[key] = flag
        payload, code = _COMMANDS[args.command](scenario, args)
    except PricegameError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    report = {"schema": SCHEMA, "command": args.command, "label": scenario["label"]}
    report.update(payload)
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
