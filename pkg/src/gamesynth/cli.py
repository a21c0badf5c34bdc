"""Command-line interface: synthesize, export/import, benchmark, serve."""

from __future__ import annotations

import argparse
import os
import sys

from .errors import GamesynthError
from .explicit_io import export_explicit, import_explicit
from .game import ProbTermination, RatioTurns, validate_game
from .reporting import render_bench_figures
from .solver import verify_strategy
from .scenarios import (
    bench_csv,
    builtin_registry,
    load_scenario_file,
    run_bench,
)
from .synthesis import synthesize_for


def _parse_range(text: str) -> list:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_turn_models(text: str) -> list:
    if text == "both":
        return [RatioTurns(1, 1), ProbTermination(0.05)]
    if text.startswith("ratio:"):
        _, r, h = text.split(":")
        return [RatioTurns(int(r), int(h))]
    if text.startswith("prob:"):
        return [ProbTermination(float(text.split(":", 1)[1]))]
    raise argparse.ArgumentTypeError(
        f"turn model must be ratio:R:H, prob:P, or both, got {text!r}"
    )


def cmd_synth(args) -> int:
    scenario = load_scenario_file(args.scenario)
    game = scenario.build()
    formula = args.formula or scenario.default_formula
    syn = synthesize_for(
        game,
        formula,
        eps=args.eps,
        maximizer=scenario.maximizer,
        method="gauss-seidel" if args.gauss_seidel else "jacobi",
        parallelism=args.parallel,
    )
    vv = syn.result.values
    print(f"value {syn.value_at_initial:.10g}")
    print(
        f"# product: {syn.product.num_states} states, "
        f"{syn.product.num_transitions} transitions; dfa: {syn.dfa.num_states} states; "
        f"iterations: {vv.iterations}; converged: {vv.converged}"
    )
    if args.verify:
        ok = verify_strategy(
            syn.product, syn.result.strategy, vv, args.eps,
            maximizer=scenario.maximizer,
        )
        print(f"# strategy verification: {'ok' if ok else 'FAILED'}")
        if not ok:
            return 1
    if args.out:
        bundle = export_explicit(syn.product, args.out, strategy=syn.result.strategy)
        print(f"# wrote {bundle.sta} {bundle.tra} {bundle.lab} {bundle.pla} {bundle.str_}")
    return 0


def cmd_export(args) -> int:
    scenario = load_scenario_file(args.scenario)
    game = scenario.build()
    if args.product:
        syn = synthesize_for(game, args.formula or scenario.default_formula,
                             eps=args.eps, maximizer=scenario.maximizer)
        bundle = export_explicit(syn.product, args.out, strategy=syn.result.strategy)
    else:
        bundle = export_explicit(game, args.out)
    print(f"# wrote explicit bundle under {args.out}")
    print(f"# {bundle.sta}")
    return 0


def cmd_import(args) -> int:
    game = import_explicit(args.dir, name=args.name)
    report = validate_game(game)
    print(
        f"imported {game.num_states} states, {game.num_choices} choices, "
        f"{game.num_transitions} transitions, initial {game.initial}"
    )
    if not report.ok:
        for violation in report.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return 1
    print("validation: ok")
    return 0


def cmd_bench(args) -> int:
    matrix = [
        (o, l, tm)
        for tm in _parse_turn_models(args.turn_model)
        for o in _parse_range(args.objects)
        for l in _parse_range(args.locations)
    ]
    results = run_bench(
        matrix, eps=args.eps,
        on_result=lambda r: print(
            f"# {r.scenario}: {r.states} states, {r.transitions} transitions, "
            f"value {r.value if r.value is not None else r.status}",
            file=sys.stderr,
        ),
    )
    text = bench_csv(results)
    with open(args.csv, "w", newline="\n") as fh:
        fh.write(text)
    print(f"# wrote {args.csv}")
    figures_dir = args.figures or os.path.dirname(os.path.abspath(args.csv))
    for path in render_bench_figures(results, figures_dir):
        print(f"# wrote {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .exec_service import SessionManager, create_app

    registry = builtin_registry()
    if args.scenarios:
        for entry in sorted(os.listdir(args.scenarios)):
            if entry.endswith(".json"):
                scenario = load_scenario_file(os.path.join(args.scenarios, entry))
                registry[scenario.scenario_id] = scenario
    static = args.static
    if static is None:
        candidate = os.path.join(os.getcwd(), "frontend")
        if os.path.isfile(os.path.join(candidate, "index.html")):
            static = candidate
    manager = SessionManager(registry, eps=args.eps, interruptible=args.interruptible)
    app = create_app(manager, static_dir=static)
    print(f"# serving {sorted(registry)} on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamesynth",
        description="Stochastic-game strategy synthesis for pick-and-place worlds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a strategy and print its value")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--formula", help="task formula (default: scenario's)")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out", help="directory for the explicit bundle + strategy")
    p.add_argument("--gauss-seidel", action="store_true")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--verify", action="store_true",
                   help="re-solve with the robot fixed and check the values")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("export", help="write explicit model files")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--product", action="store_true",
                   help="export the task product (with strategy) instead of the game")
    p.add_argument("--formula")
    p.add_argument("--eps", type=float, default=1e-6)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("import", help="read explicit model files and validate")
    p.add_argument("--dir", required=True)
    p.add_argument("--name", default="model")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("bench", help="run the scaling benchmark, write CSV + figures")
    p.add_argument("--objects", default="1..3")
    p.add_argument("--locations", default="5..8")
    p.add_argument("--turn-model", default="both")
    p.add_argument("--csv", required=True)
    p.add_argument("--figures", help="directory for PNG figures (default: next to CSV)")
    p.add_argument("--eps", type=float, default=1e-6)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="HTTP play service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--scenarios", help="directory of scenario JSON files")
    p.add_argument("--static", help="directory of UI assets to serve at /")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--interruptible", action="store_true",
                   help="accept human moves on the robot's turn")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GamesynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
