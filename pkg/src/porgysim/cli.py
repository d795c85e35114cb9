"""Command-line driver.

Subcommands: generate, run, step, metrics, compare, validate, serve.
Exit codes: 0 success, 1 domain error, 2 usage error. Domain errors are
printed to stderr as ``error <CODE>: message``.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import graphio, netgen
from .errors import ConfigError, EngineError
from .graph import LocatedGraph
from .models import (ModelConfig, builtin_rules, builtin_strategy_text,
                     load_model_config, setup_simulation)
from .rules import load_rules
from .strategy import Budget, parse_strategy, run_rounds
from .trace import DerivationTree


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="porgysim")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a random social network")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--edges-per-node", type=int, default=2)
    gen.add_argument("--attachment", choices=["preferential", "uniform"],
                     default="preferential")
    gen.add_argument("--triad", type=float, default=0.1)
    gen.add_argument("--rng", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run a full simulation and export traces")
    run.add_argument("--graph", required=True)
    run.add_argument("--config", help="TOML or JSON model config file")
    run.add_argument("--model", choices=["ic", "lt"])
    run.add_argument("--seeds", help="comma-separated node references")
    run.add_argument("--p", dest="p_init", help="const:X | uniform:LO,HI | file:PATH")
    run.add_argument("--theta", help="threshold init (LT)")
    run.add_argument("--rng", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--mode", choices=["random", "deterministic"])
    run.add_argument("--strict-sigma", action="store_true", default=None)
    run.add_argument("--strategy", help="custom strategy file (.strat)")
    run.add_argument("--rules", help="custom rule library (JSON)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--persist", help="save a resumable session here")
    run.set_defaults(func=cmd_run)

    step = sub.add_parser("step", help="advance a saved session by one round")
    step.add_argument("--session", required=True)
    step.set_defaults(func=cmd_step)

    met = sub.add_parser("metrics", help="recompute metrics from a saved session")
    met.add_argument("--session", required=True)
    met.add_argument("--leaf", type=int)
    met.add_argument("--out")
    met.set_defaults(func=cmd_metrics)

    cmp_ = sub.add_parser("compare", help="side-by-side step table of two traces")
    cmp_.add_argument("left")
    cmp_.add_argument("right")
    cmp_.set_defaults(func=cmd_compare)

    val = sub.add_parser("validate", help="check graph / rule / strategy files")
    val.add_argument("--graph")
    val.add_argument("--rules")
    val.add_argument("--strategy")
    val.set_defaults(func=cmd_validate)

    srv = sub.add_parser("serve", help="start the HTTP/WebSocket service")
    srv.add_argument("--addr", default=os.environ.get("PORGYSIM_ADDR", "127.0.0.1:8321"))
    srv.set_defaults(func=cmd_serve)
    return parser


def cmd_generate(args) -> int:
    config = netgen.GeneratorConfig(
        node_count=args.nodes, attachment=args.attachment,
        edges_per_new_node=args.edges_per_node,
        triad_closure_prob=args.triad, rng_seed=args.rng)
    graph = netgen.generate(config)
    graphio.save_file(args.out, graph)
    print(f"wrote {args.out}: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    return 0


def _load_graph(path):
    graph = graphio.load_file(path)
    return graph.graph if hasattr(graph, "graph") else graph


def _config_from_args(args) -> ModelConfig:
    overrides = {
        "model": args.model,
        "seeds": tuple(args.seeds.split(",")) if args.seeds else None,
        "p": args.p_init,
        "theta": args.theta,
        "rng_seed": args.rng,
        "max_rounds": args.rounds,
        "mode": args.mode,
        "strict_sigma": args.strict_sigma,
    }
    if args.config:
        return load_model_config(args.config, **overrides)
    if overrides["model"] is None:
        raise ConfigError("either --config or --model is required")
    fields = {k: v for k, v in overrides.items() if v is not None}
    fields.setdefault("seeds", ())
    fields.setdefault("max_rounds", 100)
    return ModelConfig(**fields)


def cmd_run(args) -> int:
    graph = _load_graph(args.graph)
    config = _config_from_args(args)

    # built-ins fill whichever of rules/strategy is not user-supplied
    library = (load_rules(Path(args.rules).read_text())
               if args.rules else builtin_rules(config.model))
    text = (Path(args.strategy).read_text()
            if args.strategy else builtin_strategy_text(config.model,
                                                        config.strict_sigma))
    program = parse_strategy(text)
    rng = random.Random(config.rng_seed)
    located = setup_simulation(graph, config, rng)
    tree = DerivationTree(located.graph)
    outcomes = run_rounds(program, located, library, rng, config.mode, tree,
                          config.max_rounds, budget=Budget(config.budget),
                          eps=config.eps)
    leaf = outcomes[-1].final_state

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_bytes(tree.export_metrics_csv(leaf))
    (out / "events.jsonl").write_bytes(tree.export_events_jsonl(leaf))
    (out / "tree.dot").write_bytes(tree.export_dot())
    graphio.save_file(out / "final.json", tree.state(leaf))

    if args.persist:
        _save_session(Path(args.persist), tree, config, leaf,
                      outcomes[-1].located, rng)

    total = sum(len(o.log) for o in outcomes)
    aborted = any(o.status == "aborted" for o in outcomes)
    print(f"{config.model} run: {len(outcomes)} rounds, {total} applications, "
          f"leaf state {leaf}")
    if aborted:
        print(f"error ABORTED: {outcomes[-1].error}", file=sys.stderr)
        return 1
    return 0


def _save_session(directory: Path, tree: DerivationTree, config: ModelConfig,
                  cursor: int, located, rng) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "tree.json").write_text(json.dumps(tree.to_json()))
    doc = {
        "model": config.model,
        "seeds": list(config.seeds),
        "p": config.p.describe(),
        "theta": config.theta.describe() if config.theta else None,
        "rng_seed": config.rng_seed,
        "max_rounds": config.max_rounds,
        "mode": config.mode,
        "strict_sigma": config.strict_sigma,
        "cursor": cursor,
        "position": sorted(located.position),
        "banned": sorted(located.banned),
        "rng_state": _rng_state_to_json(rng),
    }
    (directory / "session.json").write_text(json.dumps(doc))


def _rng_state_to_json(rng: random.Random) -> list:
    version, state, gauss = rng.getstate()
    return [version, list(state), gauss]


def _rng_state_from_json(doc) -> random.Random:
    rng = random.Random()
    rng.setstate((doc[0], tuple(doc[1]), doc[2]))
    return rng


def _load_session(directory: Path):
    sdoc = json.loads((directory / "session.json").read_text())
    tree = DerivationTree.from_json(json.loads((directory / "tree.json").read_text()))
    config = ModelConfig(model=sdoc["model"], seeds=tuple(sdoc["seeds"]),
                         p=sdoc["p"], theta=sdoc["theta"],
                         rng_seed=sdoc["rng_seed"], max_rounds=sdoc["max_rounds"],
                         mode=sdoc["mode"], strict_sigma=sdoc["strict_sigma"])
    return sdoc, tree, config


def cmd_step(args) -> int:
    directory = Path(args.session)
    sdoc, tree, config = _load_session(directory)
    cursor = sdoc["cursor"]
    rng = _rng_state_from_json(sdoc["rng_state"])
    located = LocatedGraph(tree.state(cursor), frozenset(sdoc["position"]),
                           frozenset(sdoc["banned"]))
    library = builtin_rules(config.model)
    program = parse_strategy(builtin_strategy_text(config.model, config.strict_sigma))
    outcomes = run_rounds(program, located, library, rng, config.mode, tree, 1,
                          cursor=cursor)
    outcome = outcomes[0]
    sdoc["cursor"] = outcome.final_state
    sdoc["position"] = sorted(outcome.located.position)
    sdoc["banned"] = sorted(outcome.located.banned)
    sdoc["rng_state"] = _rng_state_to_json(rng)
    (directory / "session.json").write_text(json.dumps(sdoc))
    (directory / "tree.json").write_text(json.dumps(tree.to_json()))
    print(f"step: {len(outcome.log)} applications, status {outcome.status}, "
          f"cursor {outcome.final_state}")
    return 0


def cmd_metrics(args) -> int:
    directory = Path(args.session)
    sdoc, tree, _config = _load_session(directory)
    leaf = args.leaf if args.leaf is not None else sdoc["cursor"]
    data = tree.export_metrics_csv(leaf)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def _read_metrics_csv(path):
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("step,"):
            raise ConfigError(f"{path} is not a metrics csv")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows[int(parts[0])] = parts[1:]
    return rows


def cmd_compare(args) -> int:
    left = _read_metrics_csv(args.left)
    right = _read_metrics_csv(args.right)
    steps = sorted(set(left) | set(right))
    print(f"{'step':>4}  {'active_a':>8} {'visited_a':>9}  {'active_b':>8} {'visited_b':>9}")
    for t in steps:
        la = left.get(t, ["", "", ""])
        rb = right.get(t, ["", "", ""])
        print(f"{t:>4}  {la[0]:>8} {la[1]:>9}  {rb[0]:>8} {rb[1]:>9}")
    return 0


def cmd_validate(args) -> int:
    checked = False
    if args.graph:
        graph = _load_graph(args.graph)
        print(f"graph ok: {len(graph.nodes)} nodes, {len(graph.ports)} ports, "
              f"{len(graph.edges)} edges")
        checked = True
    if args.rules:
        library = load_rules(Path(args.rules).read_text())
        print(f"rules ok: {', '.join(sorted(library))}")
        checked = True
    if args.strategy:
        program = parse_strategy(Path(args.strategy).read_text())
        print(f"strategy ok: {len(program)} instructions")
        checked = True
    if not checked:
        raise ConfigError("nothing to validate (pass --graph/--rules/--strategy)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    host, _, port = args.addr.rpartition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":
    sys.exit(main())
