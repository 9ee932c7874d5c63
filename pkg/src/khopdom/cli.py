"""Command-line entry point: ``khopdom {generate,run,verify,ratio,sweep,views}``.

Exit codes: 0 success, 1 correctness failure, 2 usage or input error,
3 construction failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .generators import FAMILIES, ConstructionError, Instance, gen_kroundlower_pair
from .graph_core import GraphError, girth, read_graph, write_graph
from .harness import ExperimentConfig, make_instance, run_algorithm, sweep, sweep_csv
from .simulator import view_classes, write_trace
from .verify import CSV_COLUMNS, is_k_dominating, ratio_report

log = logging.getLogger("khopdom")

EXIT_OK, EXIT_INCORRECT, EXIT_USAGE, EXIT_CONSTRUCTION = 0, 1, 2, 3


def sidecar_path(graph_path) -> Path:
    return Path(str(graph_path) + ".json")


def save_instance(inst: Instance, path) -> None:
    write_graph(inst.graph, path)
    with open(sidecar_path(path), "w") as fh:
        json.dump(inst.metadata(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(path, k: int | None = None, meta_path=None) -> Instance:
    graph = read_graph(path)
    meta_path = Path(meta_path) if meta_path else sidecar_path(path)
    if meta_path.exists():
        with open(meta_path) as fh:
            data = json.load(fh)
        if k is not None:
            data["k"] = k
        return Instance.from_metadata(graph, data)
    if k is None:
        raise GraphError(f"no metadata sidecar at {meta_path}; pass --k")
    return Instance(graph, k, graph.max_degree, girth(graph), family="file")


def read_node_set(path) -> set[int]:
    text = Path(path).read_text().strip()
    if text.startswith("[") or text.startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("selected", [])
        return {int(x) for x in data}
    return {int(tok) for tok in text.replace(",", " ").split()}


# commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    params = dict(delta=args.delta, k=args.k, m=args.m, g=args.g, n=args.n, seed=args.seed, edges=args.edges)
    if args.family == "kroundlower":
        pairs, star = gen_kroundlower_pair(args.delta or 3, args.k)
        save_instance(star, args.out)
        stem = str(args.out)
        for inst in pairs:
            save_instance(inst, f"{stem}.pair{inst.meta['color']}")
        print(f"wrote {args.out} (n={star.graph.n}) and {len(pairs)} pair graphs")
        return EXIT_OK
    inst = make_instance(args.family, **params)
    save_instance(inst, args.out)
    planted = len(inst.planted_ds) if inst.planted_ds is not None else "-"
    print(f"wrote {args.out} (n={inst.graph.n}, m={inst.graph.m}, planted_ds={planted})")
    return EXIT_OK


def cmd_run(args) -> int:
    inst = load_instance(args.graph, k=args.k, meta_path=args.meta)
    result, chosen = run_algorithm(inst, args.alg, args.k)
    if not chosen and args.alg in ("alg1", "alg3"):
        log.warning("V empty: pruning deleted every node")
    payload = {
        "alg": args.alg,
        "k": args.k,
        "rounds": result.rounds_executed,
        "selected": sorted(chosen),
        "outputs": {str(v): out for v, out in sorted(result.outputs.items())},
        "max_message_bits": result.max_message_bits,
        "total_messages": result.total_messages,
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w") as fh:
            write_trace(result, fh)
    return EXIT_OK


def cmd_verify(args) -> int:
    graph = read_graph(args.graph)
    nodes = read_node_set(args.set)
    ok = is_k_dominating(graph, nodes, args.k)
    print(f"{'dominating' if ok else 'NOT dominating'}: {len(nodes)} nodes, k={args.k}")
    return EXIT_OK if ok else EXIT_INCORRECT


def cmd_ratio(args) -> int:
    inst = load_instance(args.graph, k=args.k, meta_path=args.meta)
    _, chosen = run_algorithm(inst, args.alg, args.k)
    try:
        report = ratio_report(inst, args.alg, chosen, exact_cap=args.exact_cap)
    except AssertionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INCORRECT
    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerow(report.row())
    if args.json:
        Path(args.json).write_text(json.dumps(report.as_json(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    if args.exact_cap is not None:
        cfg.exact_cap = args.exact_cap
    rows = sweep(cfg)
    text = sweep_csv(rows, timing=args.timing)
    out = args.out
    if out is None and cfg.output_dir:
        os.makedirs(cfg.output_dir, exist_ok=True)
        out = os.path.join(cfg.output_dir, "sweep.csv")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.json:
        records = [dict(r.row(args.timing)) for r in rows]
        Path(args.json).write_text(json.dumps(records, indent=2) + "\n")
    failures = [r for r in rows if r.error]
    for r in failures:
        log.warning("row %s/%s seed %s failed: %s", r.params, r.alg, r.seed, r.error)
    return EXIT_OK


def cmd_views(args) -> int:
    graph = read_graph(args.graph)
    table: dict = {}
    classes = view_classes(graph, args.depth, table)
    report = {"graph": str(args.graph), "depth": args.depth, "classes": _group(classes)}
    if args.compare:
        other = read_graph(args.compare)
        other_classes = view_classes(other, args.depth, table)
        report["compare"] = str(args.compare)
        report["compare_classes"] = _group(other_classes)
        shared = sorted(set(classes) & set(other_classes))
        report["shared"] = [
            {"graph": [v for v, c in enumerate(classes) if c == s],
             "compare": [v for v, c in enumerate(other_classes) if c == s]}
            for s in shared
        ]
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _group(classes: list[int]) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for v, c in enumerate(classes):
        groups.setdefault(c, []).append(v)
    return sorted(groups.values())


# parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="khopdom", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a graph family instance")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--delta", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, help="planted trees (planted/symmetric); default: smallest admissible")
    p.add_argument("--g", type=int, help="cycle length (pseudoforest)")
    p.add_argument("--n", type=int, help="node count (altcycle/fuzz)")
    p.add_argument("--edges", type=int, help="edge budget (fuzz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="simulate an algorithm")
    p.add_argument("--graph", required=True)
    p.add_argument("--meta")
    p.add_argument("--alg", required=True, choices=["alg1", "alg2", "alg3", "pipeline3k"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--trace", help="write a JSON-lines message trace here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check k-hop domination of a node set")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--set", required=True, help="file with node ids (whitespace list or JSON)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ratio", help="run an algorithm and report its approximation ratio")
    p.add_argument("--graph", required=True)
    p.add_argument("--meta")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alg", required=True, choices=["alg1", "alg2", "pipeline3k"])
    p.add_argument("--exact-cap", type=int, default=30)
    p.add_argument("--json")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("sweep", help="run an experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--json")
    p.add_argument("--exact-cap", type=int)
    p.add_argument("--timing", action="store_true", help="fill the wall_time column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("views", help="group nodes by port-labeled view")
    p.add_argument("--graph", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--compare")
    p.set_defaults(func=cmd_views)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
