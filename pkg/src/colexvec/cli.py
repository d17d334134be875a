"""Command-line pipeline orchestration.

Subcommands cover the whole workflow: network inference, embedding
training, fusion, topology baselines, the three evaluations, t-SNE plots,
and a declarative multi-step pipeline. Every randomized command requires
--seed, and reports embed the seed, a config digest, and input file
hashes, so a report is reproducible from its own contents.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .baselines import (
    SimilarityProvider,
    cosine_adjacency_provider,
    embedding_provider,
    ppmi_provider,
    random_walk_provider,
    shortest_path_provider,
    similarity_matrix,
)
from .combine import combine, map_external_vectors
from .embeddings import load_embedding, save_embedding
from .errors import ColexvecError
from .evaluation import (
    eval_binary,
    eval_lsim,
    filter_association_pairs,
    load_concept_pairs,
    load_rated_pairs,
)
from .graph import load_graph, save_graph, to_undirected
from .node2vec import SkipGramConfig, WalkConfig, node2vec_embed
from .prone import ProneConfig, prone_embed
from .runtime import config_digest, file_sha256
from .viz import export_scatter, tsne_project
from .wordlist import ColexParams, infer_network, load_wordlist

BASELINE_METHODS = ("shortest-path", "cosine", "ppmi", "random-walk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> _Parser:
    parser = _Parser(prog="colexvec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"colexvec {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("colexify", help="infer a colexification network")
    p.add_argument("--wordlist", required=True)
    p.add_argument("--type", required=True, choices=("full", "affix", "overlap"))
    p.add_argument("--out", required=True)
    p.add_argument("--min-form-len", type=int, default=3)
    p.add_argument("--min-overlap-len", type=int, default=4)

    p = sub.add_parser("embed", help="train a concept embedding on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", required=True, choices=("node2vec", "prone"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--walks-per-node", type=int, default=5)
    p.add_argument("--walk-length", type=int, default=10)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--epochs", type=int, default=1500)
    p.add_argument("--validation-split", type=float, default=0.2)
    p.add_argument("--batch-size", type=int, default=512)
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--mu", type=float, default=0.2)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--exponent", type=float, default=0.75)
    p.add_argument("--shift", type=float, default=1.0)

    p = sub.add_parser("combine", help="fuse embeddings via concatenation + PCA")
    p.add_argument("--inputs", required=True, help="comma-separated embedding files")
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, required=True)

    p = sub.add_parser("map-external", help="map pretrained word vectors onto concepts")
    p.add_argument("--vectors", required=True)
    p.add_argument("--concept-map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, required=True)

    p = sub.add_parser("baseline", help="score pairs straight from graph topology")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", required=True, choices=BASELINE_METHODS)
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", help="pair TSV to score; omit to dump the full matrix")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=5)
    p.add_argument("--ppmi-mode", choices=("pairwise", "cosine_rows"), default="pairwise")

    p = sub.add_parser("eval-lsim", help="rank correlation against similarity ratings")
    p.add_argument("--sim", required=True, help="embedding file or '<method>:<graph.tsv>'")
    p.add_argument("--pairs", required=True)
    p.add_argument("--report", required=True)

    for name in ("eval-shift", "eval-links"):
        p = sub.add_parser(name, help="binary prediction with negative sampling")
        p.add_argument("--sim", required=True)
        p.add_argument("--pairs", required=True)
        p.add_argument("--report", required=True)
        p.add_argument("--runs", type=int, default=50)
        p.add_argument("--seed", type=int, required=True)
        if name == "eval-links":
            p.add_argument("--min-weight", type=int, default=5)

    p = sub.add_parser("viz", help="t-SNE projection and scatter export")
    p.add_argument("--embedding", required=True)
    p.add_argument("--concepts", help="file with one concept per line to plot")
    p.add_argument("--out", required=True)
    p.add_argument("--perplexity", type=float, default=15.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("pipeline", help="run a declared step sequence from JSON")
    p.add_argument("--config", required=True)

    return parser


def provider_from_spec(spec: str) -> SimilarityProvider:
    """'<method>:<graph.tsv>' for a topology baseline, else an embedding file."""
    method, sep, rest = spec.partition(":")
    if sep and method in BASELINE_METHODS:
        g = to_undirected(load_graph(rest))
        if method == "shortest-path":
            return shortest_path_provider(g)
        if method == "cosine":
            return cosine_adjacency_provider(g)
        if method == "ppmi":
            return ppmi_provider(g)
        return random_walk_provider(g)
    return embedding_provider(load_embedding(spec))


def _sim_input_paths(spec: str) -> list:
    method, sep, rest = spec.partition(":")
    if sep and method in BASELINE_METHODS:
        return [rest]
    return [spec]


def _write_report(path, command: str, config: dict, inputs: list, report: dict) -> dict:
    doc = {
        "command": command,
        "config": config,
        "config_digest": config_digest(config),
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "report": report,
    }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return doc


def cmd_colexify(args) -> dict:
    wordlist = load_wordlist(args.wordlist)
    params = ColexParams(
        min_form_len=args.min_form_len, min_overlap_len=args.min_overlap_len
    )
    g = infer_network(wordlist, args.type, params)
    save_graph(g, args.out)
    print(f"wrote {args.out}: {g.n_nodes} nodes, {g.n_edges} edges ({args.type})")
    return {"out": args.out, "nodes": g.n_nodes, "edges": g.n_edges}


def cmd_embed(args) -> dict:
    g = to_undirected(load_graph(args.graph))
    if args.method == "node2vec":
        walk_cfg = WalkConfig(
            walks_per_node=args.walks_per_node,
            walk_length=args.walk_length,
            p=args.p,
            q=args.q,
            seed=args.seed,
        )
        sg_cfg = SkipGramConfig(
            dim=args.dim,
            window=args.window,
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            validation_split=args.validation_split,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        es = node2vec_embed(g, walk_cfg, sg_cfg)
    else:
        cfg = ProneConfig(
            dim=args.dim,
            step=args.step,
            mu=args.mu,
            theta=args.theta,
            exponent=args.exponent,
            shift=args.shift,
            seed=args.seed,
        )
        es = prone_embed(g, cfg)
    save_embedding(es, args.out)
    uncovered = es.provenance.get("uncovered", ())
    print(
        f"wrote {args.out}: {len(es.vectors)} concepts, dim {es.dim}"
        + (f", {len(uncovered)} isolated concepts uncovered" if uncovered else "")
    )
    return {
        "out": args.out,
        "concepts": len(es.vectors),
        "dim": es.dim,
        "seed": args.seed,
        "config_digest": es.provenance.get("config_digest"),
    }


def cmd_combine(args) -> dict:
    paths = [p for p in args.inputs.split(",") if p]
    sets = [load_embedding(p) for p in paths]
    fused = combine(sets, args.dim)
    save_embedding(fused, args.out)
    print(f"wrote {args.out}: {len(fused.vectors)} concepts, dim {fused.dim}")
    return {"out": args.out, "concepts": len(fused.vectors), "dim": fused.dim}


def cmd_map_external(args) -> dict:
    es = map_external_vectors(args.vectors, args.concept_map, args.dim)
    save_embedding(es, args.out)
    excluded = es.provenance.get("excluded", ())
    print(
        f"wrote {args.out}: {len(es.vectors)} concepts, dim {es.dim}"
        + (f", {len(excluded)} concepts had no resolvable word" if excluded else "")
    )
    return {"out": args.out, "concepts": len(es.vectors), "excluded": len(excluded)}


def _baseline_provider(args, g) -> SimilarityProvider:
    if args.method == "shortest-path":
        return shortest_path_provider(g)
    if args.method == "cosine":
        return cosine_adjacency_provider(g)
    if args.method == "ppmi":
        return ppmi_provider(g, mode=args.ppmi_mode)
    return random_walk_provider(g, alpha=args.alpha, max_steps=args.max_steps)


def cmd_baseline(args) -> dict:
    g = to_undirected(load_graph(args.graph))
    provider = _baseline_provider(args, g)
    out = Path(args.out)
    if args.pairs:
        pairs = load_concept_pairs(args.pairs)
        lines = ["CONCEPT_A\tCONCEPT_B\tSCORE"]
        for pair in pairs:
            lines.append(f"{pair.a}\t{pair.b}\t{provider.score(pair.a, pair.b):.8g}")
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {out}: {len(pairs)} scored pairs ({args.method})")
        return {"out": args.out, "pairs": len(pairs)}
    order = g.sorted_nodes()
    matrix = similarity_matrix(provider, order)
    lines = ["CONCEPT\t" + "\t".join(order)]
    for node, row in zip(order, matrix.values):
        lines.append(node + "\t" + "\t".join(format(v, ".8g") for v in row))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}: {len(order)}x{len(order)} similarity matrix ({args.method})")
    return {"out": args.out, "nodes": len(order)}


def cmd_eval_lsim(args) -> dict:
    provider = provider_from_spec(args.sim)
    pairs = load_rated_pairs(args.pairs)
    report = eval_lsim(provider, pairs)
    config = {"sim": args.sim, "pairs": args.pairs}
    doc = _write_report(
        args.report, "eval-lsim", config,
        _sim_input_paths(args.sim) + [args.pairs], report.to_dict(),
    )
    print(report.table())
    return doc


def _binary_eval(args, task: str) -> dict:
    provider = provider_from_spec(args.sim)
    pairs = load_concept_pairs(args.pairs)
    config = {"sim": args.sim, "pairs": args.pairs, "runs": args.runs, "seed": args.seed}
    if task == "links":
        config["min_weight"] = args.min_weight
        pairs = filter_association_pairs(
            pairs, min_weight=args.min_weight, space=provider.covered
        )
        print(f"filtered association network: {_pair_stats(pairs)}")
    report = eval_binary(
        provider, pairs, runs=args.runs, seed=args.seed, task=task
    )
    doc = _write_report(
        args.report, f"eval-{task}", config,
        _sim_input_paths(args.sim) + [args.pairs], report.to_dict(),
    )
    print(report.table())
    return doc


def _pair_stats(pairs) -> str:
    concepts = set()
    for pair in pairs:
        concepts.add(pair.a)
        concepts.add(pair.b)
    return f"{len(concepts)} concepts, {len(pairs)} edges"


def cmd_viz(args) -> dict:
    es = load_embedding(args.embedding)
    if args.concepts:
        wanted = [
            line.strip()
            for line in Path(args.concepts).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        order = [c for c in wanted if c in es.vectors]
        missing = len(wanted) - len(order)
        if missing:
            print(f"skipping {missing} concepts not covered by the embedding")
    else:
        order = es.sorted_concepts()
    matrix = es.matrix(order)
    coords = tsne_project(
        matrix, perplexity=args.perplexity, iterations=args.iterations, seed=args.seed
    )
    tsv_path, svg_path = export_scatter(coords, order, args.out)
    print(f"wrote {tsv_path} and {svg_path}: {len(order)} concepts")
    return {"tsv": str(tsv_path), "svg": str(svg_path), "concepts": len(order)}


def _step_argv(command: str, step_args: dict) -> list:
    argv = [command]
    for key, value in step_args.items():
        argv.append("--" + str(key).replace("_", "-"))
        argv.append(str(value))
    return argv


def cmd_pipeline(args) -> dict:
    config_path = Path(args.config)
    config = json.loads(config_path.read_text(encoding="utf-8"))
    steps = config.get("steps")
    if not isinstance(steps, list) or not steps:
        raise ColexvecError("pipeline config needs a non-empty 'steps' list")
    report_path = config.get("report")
    if not report_path:
        raise ColexvecError("pipeline config needs a 'report' output path")

    input_keys = {"wordlist", "graph", "pairs", "embedding", "vectors",
                  "concept_map", "concepts", "sim", "inputs"}
    produced = set()
    for step in steps:
        for key in ("out", "report"):
            value = step.get("args", {}).get(key)
            if value:
                produced.add(str(value))
    external = {}
    for step in steps:
        for key, value in step.get("args", {}).items():
            if key not in input_keys:
                continue
            candidates = value.split(",") if key == "inputs" else _sim_input_paths(value) if key == "sim" else [value]
            for cand in candidates:
                # hash true externals only; files another step writes are
                # intermediates even if a previous run left them behind
                if cand not in produced and Path(cand).exists():
                    external[cand] = file_sha256(cand)

    parser = build_parser()
    summaries = []
    metrics = {}
    for step in steps:
        command = step.get("command")
        if command == "pipeline":
            raise ColexvecError("pipeline steps cannot nest pipelines")
        argv = _step_argv(command, step.get("args", {}))
        ns = parser.parse_args(argv)
        summary = HANDLERS[command](ns)
        summaries.append({"command": command, "args": step.get("args", {}),
                          "summary": summary})
        inner = summary.get("report")
        if isinstance(inner, dict) and "task" in inner:
            metrics[inner["task"]] = inner["metric"]

    doc = {
        "name": config.get("name", config_path.stem),
        "config": config,
        "config_digest": config_digest(config),
        "input_hashes": external,
        "steps": summaries,
        "metrics": metrics,
    }
    Path(report_path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {report_path}: {len(steps)} steps, metrics {metrics}")
    return doc


HANDLERS = {
    "colexify": cmd_colexify,
    "embed": cmd_embed,
    "combine": cmd_combine,
    "map-external": cmd_map_external,
    "baseline": cmd_baseline,
    "eval-lsim": cmd_eval_lsim,
    "eval-shift": lambda args: _binary_eval(args, "shift"),
    "eval-links": lambda args: _binary_eval(args, "links"),
    "viz": cmd_viz,
    "pipeline": cmd_pipeline,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            print(parser.format_usage(), file=sys.stderr)
            return 1
        HANDLERS[args.command](args)
        return 0
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ColexvecError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
