"""Command-line entry point: ``oimp <subcommand> [flags]``.

Every flag may also be given in a ``--config`` file as ``key = value``
(dashes or underscores); flags on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .. import __version__
from ..environments import (
    FatigueEnvironment,
    FatigueFunction,
    GraphEnvironment,
    ReplayEnvironment,
    StarEnvironment,
    read_cascade_log,
    read_star_spec,
)
from ..extraction import (
    extract_divrank,
    extract_greedy_max_cover,
    extract_max_degree,
    greedy_mc_im,
)
from ..graph import assign_tv_weights, assign_wc_weights, load_edge_list
from ..policies import POLICY_NAMES, make_policy
from .campaign import SETUP_KEY, CampaignConfig, run_experiment, stream
from .generators import (
    default_fatigue_profile,
    gen_calibrated_star,
    gen_fatigue_logbook,
    gen_powerlaw_digraph,
)
from .io import emit_csv, load_config, write_table
from .studies import (
    ESTIMATOR_COLUMNS,
    WAITING_COLUMNS,
    estimator_race,
    fatigue_study,
    waiting_rows,
    waiting_time_experiment,
)

log = logging.getLogger("oimp")

EXTRACT_METHODS = ("max-degree", "max-cover", "divrank", "greedy-im")
TIERS = (2000, 400, 60, 5)


def _graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file; a synthetic graph is generated if omitted")
    p.add_argument("--undirected", action="store_true", help="emit both directions of every edge")
    p.add_argument("--nodes", type=int, default=2000, help="synthetic graph size")
    p.add_argument("--mean-degree", type=float, default=10.0, help="synthetic graph mean out-degree")
    p.add_argument("--weights", choices=("wc", "tv"), default="wc")
    p.add_argument("--mc-samples", type=int, default=200)


def _shared_flags(p: argparse.ArgumentParser, **defaults) -> None:
    p.add_argument("--K", type=int, default=defaults.get("K", 20))
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--N", type=int, default=defaults.get("N", 200))
    p.add_argument("--runs", type=int, default=defaults.get("runs", 1))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.add_argument("--gamma", choices=("one", "inv", "invsqrt"), default=defaults.get("gamma", "one"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oimp", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value file supplying flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="select K influencer nodes from a graph")
    _graph_flags(p)
    p.add_argument("--method", choices=EXTRACT_METHODS, default="divrank")
    p.add_argument("--K", type=int, default=20)
    p.add_argument("--hops", type=int, default=1)
    p.add_argument("--divrank-alpha", type=float, default=0.85)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("run", help="run one policy for several replications")
    _shared_flags(p)
    _graph_flags(p)
    p.add_argument("--env", choices=("star", "ic", "lt", "replay"), default="star")
    p.add_argument("--policy", choices=POLICY_NAMES, default="gt-ucb")
    p.add_argument("--extract", choices=EXTRACT_METHODS, default="divrank",
                   help="influencer extraction for graph environments")
    p.add_argument("--star-spec", help="JSON star environment; calibrated synthetic one if omitted")
    p.add_argument("--support", type=int, default=50, help="synthetic star support size")
    p.add_argument("--log", help="cascade log for --env replay; synthetic logbook if omitted")
    p.add_argument("--cascades", type=int, default=50, help="synthetic cascades per influencer")
    p.add_argument("--oracle-ignores-fatigue", action="store_true")

    p = sub.add_parser("waiting-time", help="GT-UCB waiting time against the oracle bound")
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda-min", type=float, default=30.0)
    p.add_argument("--lambda-max", type=float, default=40.0)
    p.add_argument("--support", type=int, default=200)
    p.add_argument("--out", default="-")

    p = sub.add_parser("estimator-study", help="Good-Turing vs Bayesian remaining-potential estimates")
    p.add_argument("--nodes", type=int, default=50)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--N", type=int, default=20, help="pulls per run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("fatigue-study", help="Fat-GT-UCB vs GT-UCB vs Random on a fatigued logbook")
    _shared_flags(p, N=300, runs=50, gamma="inv")
    p.add_argument("--log", help="cascade log; synthetic tiered logbook if omitted")
    p.add_argument("--cascades", type=int, default=50)
    return parser


def _load_graph(args, rng):
    if args.graph:
        g = load_edge_list(args.graph, undirected=args.undirected)
    else:
        g = gen_powerlaw_digraph(args.nodes, args.mean_degree, rng)
    return assign_wc_weights(g) if args.weights == "wc" else assign_tv_weights(g, rng)


def _extract(method: str, g, K: int, args, rng):
    if method == "max-degree":
        return extract_max_degree(g, K)
    if method == "max-cover":
        return extract_greedy_max_cover(g, K, getattr(args, "hops", 1))
    if method == "divrank":
        return extract_divrank(g, K, getattr(args, "divrank_alpha", 0.85))
    return greedy_mc_im(g, K, "ic", args.mc_samples, None, rng)


def _tiered_profile(K: int) -> list[int]:
    if K == 20:
        return default_fatigue_profile()
    return [TIERS[k * len(TIERS) // K] for k in range(K)]


def _logbook_env(args, rng) -> ReplayEnvironment:
    if args.log:
        return ReplayEnvironment(read_cascade_log(args.log))
    return ReplayEnvironment(gen_fatigue_logbook(_tiered_profile(args.K), rng, args.cascades))


def build_environment(args, rng):
    if args.env == "star":
        return read_star_spec(args.star_spec) if args.star_spec else gen_calibrated_star(args.K, args.support, rng)
    if args.env in ("ic", "lt"):
        g = _load_graph(args, rng)
        chosen = _extract(args.extract, g, args.K, args, rng)
        return GraphEnvironment(g, chosen.influencers, args.env)
    return _logbook_env(args, rng)


def _cmd_extract(args) -> None:
    rng = stream(args.seed, *SETUP_KEY)
    g = _load_graph(args, rng)
    res = _extract(args.method, g, args.K, args, rng)
    if res.warning:
        log.warning("extraction padded its result with leftover nodes")
    text = "".join(f"{u}\n" for u in res.influencers)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


def _cmd_run(args) -> None:
    env = build_environment(args, stream(args.seed, *SETUP_KEY))
    if env.K != args.K:
        raise ValueError(f"environment provides {env.K} influencers but --K is {args.K}")
    gamma = FatigueFunction(args.gamma)
    if not gamma.is_constant_one:
        env = FatigueEnvironment(env, gamma)
    policy = make_policy(args.policy, env, gamma=gamma, mc_samples=args.mc_samples,
                         oracle_fatigue_aware=not args.oracle_ignores_fatigue)
    config = CampaignConfig(K=args.K, N=args.N, L=args.L, policy=args.policy, env=args.env,
                            gamma=args.gamma, runs=args.runs, seed=args.seed, out=args.out)
    emit_csv(run_experiment(config, env, policy), args.out)


def _cmd_waiting(args) -> None:
    reports = waiting_time_experiment(args.K, args.alpha, args.runs, args.seed,
                                      (args.lambda_min, args.lambda_max), args.support)
    write_table(waiting_rows(reports), WAITING_COLUMNS, args.out)


def _cmd_estimator(args) -> None:
    write_table(estimator_race(args.nodes, args.runs, args.N, args.seed), ESTIMATOR_COLUMNS, args.out)


def _cmd_fatigue(args) -> None:
    base = _logbook_env(args, stream(args.seed, *SETUP_KEY))
    if base.K != args.K:
        raise ValueError(f"logbook provides {base.K} influencers but --K is {args.K}")
    records = fatigue_study(base, FatigueFunction(args.gamma), args.N, args.runs, args.seed, args.L)
    emit_csv(records, args.out)


COMMANDS = {
    "extract": _cmd_extract,
    "run": _cmd_run,
    "waiting-time": _cmd_waiting,
    "estimator-study": _cmd_estimator,
    "fatigue-study": _cmd_fatigue,
}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = load_config(known.config)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            picked = {}
            for a in sp._actions:
                if a.dest not in values:
                    continue
                v = values[a.dest]
                if isinstance(a, argparse._StoreTrueAction):
                    v = v.strip().lower() in ("1", "true", "yes", "on")
                picked[a.dest] = v
            sp.set_defaults(**picked)


def cli_main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        print(f"oimp: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (OSError, ValueError, TypeError, RuntimeError) as exc:
        print(f"oimp: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())
