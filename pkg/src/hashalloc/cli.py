"""Command-line interface.

Data goes to stdout or to files named by flags; status and warnings go to
stderr. Exit codes: 0 success, 1 usage error, 2 input data error, 3 domain
or precondition error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys

from . import analytics, ingest, oracle, sim
from .econ import equilibrium_allocation
from .errors import DomainError, InputDataError

log = logging.getLogger("hashalloc")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hashalloc",
                     description="Two-chain mining economics toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a block-generation scenario")
    p.add_argument("--scenario", required=True,
                   help=f"bundled name ({', '.join(sorted(sim.BUILTIN_SCENARIOS))}) "
                        "or a scenario file path")
    p.add_argument("--seed", type=int, help="override the scenario's RNG seed")
    p.add_argument("--seeds", help="comma-separated seed list; runs in parallel")
    p.add_argument("--out", help="trace CSV path (single seed); '-' for stdout")
    p.add_argument("--out-dir", help="directory for per-seed trace CSVs (--seeds)")
    p.add_argument("--engine", default="auto", choices=["auto", "python", "compiled"])

    p = sub.add_parser("metrics", help="convergence/oscillation metrics of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--warmup-days", type=float, default=90.0)
    p.add_argument("--within", type=float, default=0.05,
                   help="deviation bound for the fraction_within statistic")

    p = sub.add_parser("equilibrium", help="equilibrium allocation from block "
                                           "times and relative reward")
    p.add_argument("--ta", type=float, required=True)
    p.add_argument("--tb", type=float, required=True)
    p.add_argument("--r", type=float, help="relative reward of chain A")
    p.add_argument("--pa", type=float, help="price of coin A")
    p.add_argument("--pb", type=float, help="price of coin B")
    p.add_argument("--ca", type=float, help="coins per block, chain A")
    p.add_argument("--cb", type=float, help="coins per block, chain B")

    p = sub.add_parser("attack-cost", help="reorganization attack cost table")
    p.add_argument("--alpha", type=float, required=True, help="price ratio P_B/P_A")
    p.add_argument("--c", type=float, required=True, help="coins per block")
    p.add_argument("--pa", type=float, required=True)
    p.add_argument("--pb", type=float, required=True)
    p.add_argument("--gamma", type=float, help="single point: diverted multiple")
    p.add_argument("--beta", type=float, help="single point: retained multiple")
    p.add_argument("--budgets", help="curve: comma-separated beta+gamma totals")
    p.add_argument("--gammas", help="curve: gamma grid as start:stop:count")
    p.add_argument("--out", help="curve CSV path (default stdout)")

    p = sub.add_parser("issuance", help="issuance price dilution and the "
                                        "shifted equilibrium")
    p.add_argument("--market-cap", type=float)
    p.add_argument("--issued", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)

    p = sub.add_parser("oracle-verify", help="replay a header fixture and "
                                             "estimate the price ratio")
    p.add_argument("--b-headers", required=True,
                   help="chain-B header fixture (fully validated)")
    p.add_argument("--a-headers", required=True,
                   help="chain-A header fixture (trusted local chain)")
    p.add_argument("--height-a", type=int, required=True)
    p.add_argument("--height-b", type=int, required=True)
    p.add_argument("--ca", type=float, default=12.5)
    p.add_argument("--cb", type=float, default=12.5)
    p.add_argument("--ta", type=float, default=600.0)
    p.add_argument("--tb", type=float, default=600.0)

    p = sub.add_parser("ingest-compare", help="actual vs equilibrium allocation "
                                              "from price/difficulty CSVs")
    p.add_argument("--prices", required=True)
    p.add_argument("--difficulty", required=True)
    p.add_argument("--cadence", type=float, required=True, help="grid step, seconds")
    p.add_argument("--ta", type=float, default=600.0)
    p.add_argument("--tb", type=float, default=600.0)
    p.add_argument("--ca", type=float, default=12.5)
    p.add_argument("--cb", type=float, default=12.5)
    p.add_argument("--flag-threshold", type=float, default=ingest.DEFAULT_FLAG_THRESHOLD)
    p.add_argument("--out", help="output CSV path (default stdout)")

    return parser


def _load_scenario(name_or_path: str) -> sim.ScenarioConfig:
    if name_or_path in sim.BUILTIN_SCENARIOS:
        return sim.builtin_scenario(name_or_path)
    if not os.path.exists(name_or_path):
        raise InputDataError(
            f"{name_or_path!r} is neither a bundled scenario nor a file")
    return sim.load_scenario(name_or_path)


def _simulate_one(args: tuple) -> tuple[int, int, str]:
    scenario_ref, seed, engine, path = args
    config = sim.with_seed(_load_scenario(scenario_ref), seed)
    trace = sim.run(config, engine=engine)
    trace.write_csv(path)
    return seed, len(trace), path


def _cmd_simulate(args) -> int:
    config = _load_scenario(args.scenario)
    if args.seeds:
        if not args.out_dir:
            raise InputDataError("--seeds requires --out-dir")
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        os.makedirs(args.out_dir, exist_ok=True)
        jobs = [(args.scenario, seed, args.engine,
                 os.path.join(args.out_dir, f"trace_seed{seed}.csv"))
                for seed in seeds]
        with concurrent.futures.ProcessPoolExecutor() as pool:
            for seed, n, path in pool.map(_simulate_one, jobs):
                log.info("seed %d: %d events -> %s", seed, n, path)
        return 0
    if args.seed is not None:
        config = sim.with_seed(config, args.seed)
    trace = sim.run(config, engine=args.engine)
    log.info("%d events simulated (seed %d)", len(trace), config.rng_seed)
    if not args.out or args.out == "-":
        trace.write(sys.stdout)
    else:
        trace.write_csv(args.out)
    return 0


def _cmd_metrics(args) -> int:
    trace = sim.SimTrace.read_csv(args.trace)
    conv = sim.convergence_metrics(trace, args.warmup_days, within=args.within)
    osc = sim.oscillation_metrics(trace, args.warmup_days)
    for key, value in {**conv, **osc}.items():
        print(f"{key}={value:.12g}")
    return 0


def _cmd_equilibrium(args) -> int:
    if args.r is not None:
        rel = args.r
    else:
        needed = (args.pa, args.pb, args.ca, args.cb)
        if any(v is None for v in needed):
            raise InputDataError("provide --r, or all of --pa --pb --ca --cb")
        value_a = args.ca * args.pa
        value_b = args.cb * args.pb
        if value_a + value_b <= 0:
            raise DomainError("combined coinbase value is zero")
        rel = value_a / (value_a + value_b)
    allocation = equilibrium_allocation(args.ta, args.tb, rel)
    print(f"{allocation.share_a:.12g} {allocation.share_b:.12g}")
    return 0


def _cmd_attack_cost(args) -> int:
    single = args.gamma is not None
    if single:
        beta = args.beta if args.beta is not None else 0.0
        scenario = analytics.AttackScenario(
            alpha=args.alpha, beta=beta, gamma=args.gamma,
            coins_per_block=args.c, price_a=args.pa, price_b=args.pb)
        cost, during = analytics.reorg_attack_cost(scenario)
        log.info("during-attack allocation: (%.6g, %.6g)",
                 during.share_a, during.share_b)
        print(f"{cost:.12g}")
        return 0
    if not args.budgets or not args.gammas:
        raise InputDataError("provide --gamma [--beta], or --budgets and --gammas")
    budgets = [float(b) for b in args.budgets.split(",") if b.strip()]
    try:
        start, stop, count = args.gammas.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise InputDataError(f"--gammas must be start:stop:count ({exc})")
    if count < 1:
        raise InputDataError("--gammas count must be at least 1")
    step = (stop - start) / (count - 1) if count > 1 else 0.0
    gammas = [start + i * step for i in range(count)]
    rows = analytics.attack_cost_curve(args.alpha, args.c, args.pa, args.pb,
                                       budgets, gammas)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("budget,gamma,beta,cost_per_block\n")
        for budget, gamma, beta, cost in rows:
            out.write(f"{budget:.12g},{gamma:.12g},{beta:.12g},{cost:.12g}\n")
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_issuance(args) -> int:
    impact_args = (args.market_cap, args.issued, args.delta)
    shift_args = (args.k, args.alpha, args.beta, args.gamma)
    did_anything = False
    if all(v is not None for v in impact_args):
        delta_p = analytics.issuance_price_impact(args.market_cap, args.issued,
                                                  args.delta)
        print(f"delta_price={delta_p:.12g}")
        did_anything = True
    if all(v is not None for v in shift_args):
        allocation = analytics.issuance_equilibrium(args.k, args.alpha,
                                                    args.beta, args.gamma)
        print(f"w_A={allocation.share_a:.12g} w_B={allocation.share_b:.12g}")
        did_anything = True
    if not did_anything:
        raise InputDataError("provide --market-cap --issued --delta and/or "
                             "--k --alpha --beta --gamma")
    return 0


def _cmd_oracle_verify(args) -> int:
    local = oracle.load_chain(args.a_headers, validate=False)
    foreign = oracle.load_chain(args.b_headers, validate=True)
    log.info("replayed %d chain-B headers through validation", len(foreign))
    px = oracle.PriceOracle(local, foreign, args.ca, args.cb, args.ta, args.tb)
    estimate = px.query(args.height_a, args.height_b)
    print(f"{estimate:.12g}")
    return 0


def _cmd_ingest_compare(args) -> int:
    prices = ingest.read_price_csv(args.prices)
    difficulties = ingest.read_difficulty_csv(args.difficulty)
    rows = ingest.join_history(prices, difficulties, args.cadence,
                               t_a=args.ta, t_b=args.tb)
    result = ingest.compare_allocation(rows, args.ta, args.tb, args.ca,
                                       args.cb, flag_threshold=args.flag_threshold)
    flagged = sum(r.flagged for r in result)
    if flagged:
        log.warning("%d of %d rows deviate beyond %.3g",
                    flagged, len(result), args.flag_threshold)
    ingest.write_comparison_csv(args.out if args.out else sys.stdout, result)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "metrics": _cmd_metrics,
    "equilibrium": _cmd_equilibrium,
    "attack-cost": _cmd_attack_cost,
    "issuance": _cmd_issuance,
    "oracle-verify": _cmd_oracle_verify,
    "ingest-compare": _cmd_ingest_compare,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputDataError as exc:
        print(f"hashalloc: input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hashalloc: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"hashalloc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
