"""Command-line front door: experiment sweeps, one-off planning, extraction.

Subcommands:
  experiment  run a risk sweep from a config file and/or flags, write CSV
  plan        search one world map and print the best plan
  extract     extract a bounded plan set from a serialized tree (CSV)
  oracle      exhaustively enumerate a serialized tree's plans (CSV)

Exit codes: 0 success, 1 configuration error, 2 runtime fault.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .extraction import ExtractionConfig, brute_force_enumerate, extract_plans
from .gridworld import ACTION_NAMES, PlanningSimulator, parse_map, shortest_unobstructed_path
from .mcts import BanditConfig, SearchConfig, run_search
from .experiment import (
    CONFIG_KEYS,
    ConfigError,
    config_from_mapping,
    parse_config_file,
    render_summary,
    run_experiment,
    summarize,
)
from .tree import SearchTree, ValueMode


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2; config errors are 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="planset", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="run the risk-sweep experiment")
    exp.add_argument("--config", help="flat key = value config file")
    exp.add_argument("--profile", choices=("desk", "paper"), help="base profile")
    exp.add_argument("--out", help="output CSV path (same as output_path)")
    for key in CONFIG_KEYS:
        if key != "profile":
            exp.add_argument(f"--{key}", dest=f"key_{key}")

    plan = sub.add_parser("plan", help="search a world map and print the best plan")
    plan.add_argument("--world", required=True, help="map file ('.', 'E', 'S', 'G' rows)")
    plan.add_argument("--iterations", type=int, default=5000)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--exploration_c", type=float, default=0.02)
    plan.add_argument("--value_mode", choices=("average", "max"), default="max")

    ext = sub.add_parser("extract", help="extract a plan set from a serialized tree")
    ext.add_argument("--tree", required=True, help="serialized tree file")
    ext.add_argument("--k", type=float, default=float("inf"))
    ext.add_argument("--q", type=float, default=0.0)
    ext.add_argument("--d", type=float, default=0.0)
    ext.add_argument("--mode", choices=("average", "max"), help="override the tree's value mode")

    orc = sub.add_parser("oracle", help="exhaustively enumerate a serialized tree")
    orc.add_argument("--tree", required=True, help="serialized tree file")
    orc.add_argument("--mode", choices=("average", "max"), help="override the tree's value mode")
    return parser


def _load_tree(path: str, mode: str | None) -> SearchTree:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read tree file {path}: {exc}") from exc
    tree = SearchTree.from_text(text)
    if mode:
        tree.value_mode = ValueMode(mode)
    return tree


def _plan_lines(plans) -> list[str]:
    lines = ["rank,quality,actions"]
    for rank, (plan, quality) in enumerate(plans, start=1):
        actions = " ".join(str(a) for a in plan.actions)
        lines.append(f"{rank},{quality:.17g},{actions}")
    return lines


def _cmd_experiment(args) -> int:
    values: dict[str, str] = {}
    if args.config:
        values.update(parse_config_file(args.config))
    if args.profile:
        values["profile"] = args.profile
    for key in CONFIG_KEYS:
        flag = getattr(args, f"key_{key}", None)
        if flag is not None:
            values[key] = flag
    if args.out:
        values["output_path"] = args.out
    config = config_from_mapping(values)
    records = run_experiment(config)
    print(render_summary(summarize(records)))
    if config.output_path:
        print(f"records written to {config.output_path}")
    return 0


def _cmd_plan(args) -> int:
    try:
        world = parse_map(Path(args.world).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read world file {args.world}: {exc}") from exc
    config = SearchConfig(
        iterations=args.iterations,
        max_rollout_steps=60,
        value_mode=ValueMode(args.value_mode),
        bandit=BanditConfig(exploration_c=args.exploration_c),
        seed=args.seed,
    )
    tree = run_search(PlanningSimulator(world), config)
    plan = extract_plans(tree, ExtractionConfig(k=1)).plans[0]
    moves = "".join(ACTION_NAMES[a] for a in plan.actions)
    print(f"plan: {moves}")
    print(f"steps: {len(plan.actions)} (unobstructed shortest: {shortest_unobstructed_path(world)})")
    print(f"relative quality: {plan.relative_quality:.6f}  absolute: {plan.absolute_quality:.6f}")
    return 0


def _cmd_extract(args) -> int:
    tree = _load_tree(args.tree, args.mode)
    result = extract_plans(tree, ExtractionConfig(k=args.k, q=args.q, d=args.d))
    print("\n".join(_plan_lines((p, p.relative_quality) for p in result.plans)))
    return 0


def _cmd_oracle(args) -> int:
    tree = _load_tree(args.tree, args.mode)
    print("\n".join(_plan_lines(brute_force_enumerate(tree))))
    return 0


_COMMANDS = {
    "experiment": _cmd_experiment,
    "plan": _cmd_plan,
    "extract": _cmd_extract,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime fault
        print(f"fault: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
