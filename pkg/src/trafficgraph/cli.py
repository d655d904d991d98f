"""Command-line entry point.

Every subcommand exits 0 on success. Failures print one line
``error: <Kind>: <message>`` to stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import oracles
from .dataset_io import SYNTH_LABELING, EdgeConstructionConfig, SynthConfig, build_edges_from_coords, load_sensors, synth_generate
from .embeddings import GraphWaveParams, NetMFParams, Node2VecParams, export_embedding_csv
from .errors import ConfigError, TrafficGraphError
from .features import LabelingConfig, assemble_features
from .graph import build_graph, graph_stats, read_edge_csv
from .pipeline import (
    CLASSIFIERS,
    EMBEDDINGS,
    FEATURE_SETS,
    DataSource,
    ExperimentConfig,
    ExternalScores,
    compute_embedding,
    emit_report,
    run_experiment,
)

SYNTH_KEYS = {
    "n": ("n_sensors", int),
    "n_sensors": ("n_sensors", int),
    "days": ("n_days", int),
    "n_days": ("n_days", int),
    "seed": ("seed", int),
    "rate": ("congestion_rate", float),
    "congestion_rate": ("congestion_rate", float),
    "districts": ("n_districts", int),
    "n_districts": ("n_districts", int),
    "highway": ("highway_fraction", float),
    "highway_fraction": ("highway_fraction", float),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors: synopsis + exit 2
        self.print_usage(sys.stderr)
        self.exit(2, f"error: UsageError: {message}\n")


def parse_synth_spec(text: str) -> SynthConfig:
    """``n=50,days=14,seed=7`` -> SynthConfig."""
    kwargs = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in SYNTH_KEYS:
            raise ConfigError(f"bad synth setting {item!r}; keys: {sorted(SYNTH_KEYS)}")
        name, cast = SYNTH_KEYS[key.strip()]
        try:
            kwargs[name] = cast(value.strip())
        except ValueError:
            raise ConfigError(f"synth setting {item!r} is not a number") from None
    try:
        return SynthConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def read_config_file(path: str | Path) -> dict[str, str]:
    """Plain-text ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--readings", help="readings CSV")
    g.add_argument("--sensors", help="sensors CSV")
    g.add_argument("--edges", help="edges CSV (src,dst); otherwise built from coordinates")
    g.add_argument("--edge-strategy", choices=("knn", "radius"), default="knn")
    g.add_argument("--knn-k", type=int, default=3)
    g.add_argument("--radius-m", type=float)
    g.add_argument("--synth", metavar="SPEC", help="synthetic data, e.g. n=50,days=14,seed=7")


def _add_label_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("labelling")
    g.add_argument("--label-mode", choices=("speed_only", "speed_volume"), default=SYNTH_LABELING.mode)
    g.add_argument("--tau", type=float, default=SYNTH_LABELING.tau)
    g.add_argument("--speed-scale", type=float, default=SYNTH_LABELING.speed_unit_scale)
    g.add_argument("--invert-label", action="store_true")


def _data_source(args) -> DataSource:
    if args.synth:
        return DataSource(synth=parse_synth_spec(args.synth))
    if not (args.readings and args.sensors):
        raise ConfigError("give --synth SPEC or both --readings and --sensors")
    edge_config = None
    if not args.edges:
        edge_config = EdgeConstructionConfig(strategy=args.edge_strategy, k=args.knn_k, radius_m=args.radius_m)
    return DataSource(args.readings, args.sensors, args.edges, edge_config)


def _labeling(args) -> LabelingConfig:
    return LabelingConfig(args.label_mode, args.tau, args.speed_scale, args.invert_label)


def _embedding_config(args, source: DataSource, embeddings: Sequence[str] = ("none",)) -> ExperimentConfig:
    n2v = Node2VecParams(
        p=args.p, q=args.q, walk_length=args.walk_length, walks_per_node=args.walks_per_node, dim=args.dim or 16
    )
    return ExperimentConfig(
        data=source,
        embeddings=tuple(embeddings),
        seed=args.seed,
        glee_dim=args.dim or 16,
        node2vec=n2v,
        netmf=NetMFParams(window=args.window, negatives=args.negatives, dim=args.dim or 16),
        graphwave=GraphWaveParams(scale=args.scale, n_points=args.n_points, t_max=args.t_max),
    )


def _add_embedding_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("embedding parameters")
    g.add_argument("--dim", type=int, help="embedding dimension (glee, node2vec, netmf); default 16")
    g.add_argument("--p", type=float, default=1.0, help="node2vec return parameter")
    g.add_argument("--q", type=float, default=1.0, help="node2vec in-out parameter")
    g.add_argument("--walk-length", type=int, default=40)
    g.add_argument("--walks-per-node", type=int, default=10)
    g.add_argument("--window", type=int, default=10, help="netmf window T")
    g.add_argument("--negatives", type=int, default=1, help="netmf negative samples b")
    g.add_argument("--scale", type=float, default=1.0, help="graphwave heat scale s")
    g.add_argument("--n-points", type=int, default=8, help="graphwave sample points")
    g.add_argument("--t-max", type=float, default=8.0, help="graphwave largest sample point")
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trafficgraph", description="Graph-embedding features for traffic congestion prediction.")
    parser.add_argument("--config", help="key = value file supplying defaults for the subcommand flags")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="graph statistics")
    _add_data_args(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", default="", help="e.g. n=400,days=90,seed=1")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("embed", help="compute and export one embedding")
    _add_data_args(p)
    p.add_argument("--method", required=True, choices=[e for e in EMBEDDINGS if e != "none"])
    _add_embedding_args(p)
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("features", help="build and export the feature table")
    _add_data_args(p)
    _add_label_args(p)
    p.add_argument("--embed", choices=EMBEDDINGS, default="none")
    _add_embedding_args(p)
    p.add_argument("--no-lags", action="store_true", help="omit the lag columns")
    p.add_argument("--offset-hours", type=int, default=1, help="hours between observation and label")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("bench", help="run the benchmark grid and print the report")
    _add_data_args(p)
    _add_label_args(p)
    _add_embedding_args(p)
    p.add_argument("--embed", default="none,glee", help=f"comma list from {','.join(EMBEDDINGS)}")
    p.add_argument("--clf", default="extra_trees", help=f"comma list from {','.join(CLASSIFIERS)}")
    p.add_argument("--feature-sets", default=",".join(FEATURE_SETS))
    p.add_argument("--split", choices=("temporal", "random"), default="temporal")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--n-trees", type=int, default=40)
    p.add_argument("--knn-neighbors", type=int, default=5)
    p.add_argument("--offset-hours", type=int, default=1)
    p.add_argument("--external", action="append", default=[], metavar="CLF=PATH[@EMB[@FS]]", help="ingest a row_key,score CSV")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", help="write the report here as well as to stdout")

    p = sub.add_parser("oracle", help="run the brute-force verification suite")
    p.add_argument("--quick", action="store_true", help="fewer walk steps and AUROC instances")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv`` with the config file's values installed as defaults
    (command-line flags still win)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if a in COMMANDS), None)
    if known.config and command:
        values = read_config_file(known.config)
        sub = parser._subparsers._group_actions[0].choices[command]  # noqa: SLF001
        actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
        defaults = {}
        for key, raw in values.items():
            action = actions.get(key)
            if action is None or key == "help":
                raise ConfigError(f"{known.config}: unknown key {key!r} for '{command}'")
            if isinstance(action, argparse._StoreTrueAction):  # noqa: SLF001
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._AppendAction):  # noqa: SLF001
                defaults[key] = _csv_list(raw)
            else:
                try:
                    value = action.type(raw) if action.type else raw
                except ValueError:
                    raise ConfigError(f"{known.config}: bad value for {key}: {raw!r}") from None
                if action.choices and value not in action.choices:
                    raise ConfigError(f"{known.config}: {key} must be one of {list(action.choices)}")
                defaults[key] = value
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _cmd_stats(args) -> None:
    if args.edges and not args.sensors and not args.synth:
        # edge list alone: nodes are the ids it mentions
        pairs = read_edge_csv(args.edges)
        graph = build_graph(pairs, sorted({x for e in pairs for x in e}))
    elif args.sensors and not args.readings and not args.synth:
        graph = _graph_from_sensors(args)
    else:
        _, _, graph = _data_source(args).load()
    s = graph_stats(graph)
    print(f"nodes {s.n_nodes}")
    print(f"edges {s.n_edges}")
    print(f"avg_degree {s.avg_degree:.4f}")
    print(f"components {s.n_components}")


def _graph_from_sensors(args):
    """Graph over a sensors file without loading readings."""
    meta = load_sensors(args.sensors)
    ids = sorted(meta["sensor_id"])
    if args.edges:
        return build_graph(read_edge_csv(args.edges), ids)
    cfg = EdgeConstructionConfig(strategy=args.edge_strategy, k=args.knn_k, radius_m=args.radius_m)
    return build_graph(build_edges_from_coords(meta, cfg), ids)


def _cmd_synth(args) -> None:
    ds = synth_generate(parse_synth_spec(args.spec))
    paths = ds.write(args.out)
    s = graph_stats(ds.graph)
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    print(f"sensors {s.n_nodes} edges {s.n_edges} avg_degree {s.avg_degree:.4f} readings {len(ds.readings)}")


def _cmd_embed(args) -> None:
    source = _data_source(args)
    _, _, graph = source.load()
    cfg = _embedding_config(args, source, (args.method,))
    emb = compute_embedding(args.method, graph, cfg, cfg.resolved_seed())
    export_embedding_csv(emb, args.out)
    print(f"wrote {args.out} ({emb.n_nodes} x {emb.dim})")


def _cmd_features(args) -> None:
    source = _data_source(args)
    readings, meta, graph = source.load()
    cfg = _embedding_config(args, source, (args.embed,))
    emb = None if args.embed == "none" else compute_embedding(args.embed, graph, cfg, cfg.resolved_seed())
    table = assemble_features(
        readings, meta, _labeling(args), emb, include_lags=not args.no_lags, observation_offset_hours=args.offset_hours
    )
    table.to_csv(args.out)
    print(f"wrote {args.out} ({len(table)} rows, {len(table.columns)} columns)")


def _parse_external(items: Sequence[str]) -> tuple[ExternalScores, ...]:
    out = []
    for item in items:
        clf, sep, rest = item.partition("=")
        if not sep or not clf or not rest:
            raise ConfigError(f"--external expects CLF=PATH[@EMB[@FS]], got {item!r}")
        path, *tags = rest.split("@")
        emb = tags[0] if len(tags) > 0 else "none"
        fs = tags[1] if len(tags) > 1 else "with_fe"
        out.append(ExternalScores(path, clf, emb, fs))
    return tuple(out)


def _cmd_bench(args) -> None:
    source = _data_source(args)
    base = _embedding_config(args, source)
    cfg = replace(
        base,
        labeling=_labeling(args),
        split=args.split,
        test_fraction=args.test_fraction,
        embeddings=tuple(_csv_list(args.embed)),
        classifiers=tuple(_csv_list(args.clf)),
        feature_sets=tuple(_csv_list(args.feature_sets)),
        n_trees=args.n_trees,
        knn_k=args.knn_neighbors,
        observation_offset_hours=args.offset_hours,
        external_scores=_parse_external(args.external),
    )
    report = emit_report(run_experiment(cfg), args.format)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    sys.stdout.write(report)


def _cmd_oracle(args) -> int:
    results = oracles.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"error: OracleFailure: {len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "stats": _cmd_stats,
    "synth": _cmd_synth,
    "embed": _cmd_embed,
    "features": _cmd_features,
    "bench": _cmd_bench,
    "oracle": _cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config_file(parser, argv)
        status = COMMANDS[args.command](args)
        return int(status or 0)
    except TrafficGraphError as exc:
        print(f"error: {exc.kind}: {str(exc).replace(chr(10), ' ')}", file=sys.stderr)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {str(exc).replace(chr(10), ' ')}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
