"""Command-line surface: register, query, generate, bench.

Exit codes: 0 success (also for queries with no answers), 1 I/O failure,
2 input parse error (reported as file:line), 3 invalid score weights.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import syngen
from .corpus import Corpus
from .errors import ConfigError, KweaveError, ParseError
from .extraction import Gazetteer
from .graph import Graph, NodeKind
from .indexing import Tokenizer, load_stopwords
from .ingestion import LoadMode, RegistrationConfig, SourceFormat
from .report import render_bench_figure
from .scoring import ScoreParams
from .search import Answer, Query, SearchResult, answer_to_dict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_PARAMS = 3


def read_config_file(path: str) -> dict[str, str]:
    """key=value settings file; '#' starts a comment, blanks are ignored."""
    settings: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            settings[key.strip()] = value.strip()
    return settings


def _registration_config(args: argparse.Namespace) -> tuple[RegistrationConfig, Tokenizer]:
    settings = read_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, default=None):
        if flag_value is not None:
            return flag_value
        return settings.get(key, default)

    mode = LoadMode(pick(args.mode, "mode", LoadMode.PER_TYPE.value))
    tau = float(pick(args.tau, "tau", 0.8))
    stemmer = pick(getattr(args, "stemmer", None), "stemmer", "plural")
    gazetteer_path = pick(args.gazetteer, "gazetteer")
    stopword_path = pick(args.stopwords, "stopwords")
    do_not_link_raw = pick(args.do_not_link, "do_not_link", "")
    do_not_link = frozenset(s.strip() for s in do_not_link_raw.split(",") if s.strip())
    gazetteer = Gazetteer.load(gazetteer_path) if gazetteer_path else None
    tokenizer = Tokenizer(load_stopwords(stopword_path), stemmer)
    config = RegistrationConfig(
        mode=mode, do_not_link=do_not_link, tau=tau, gazetteer=gazetteer
    )
    return config, tokenizer


def cmd_register(args: argparse.Namespace) -> int:
    try:
        config, tokenizer = _registration_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    graph_path = Path(args.graph)
    try:
        data = Path(args.input).read_text("utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    except UnicodeDecodeError as exc:
        print(f"error: {args.input} is not valid UTF-8: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        corpus = Corpus.open(graph_path, tokenizer) if graph_path.exists() else Corpus.new(tokenizer)
    except KweaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    name = args.name or Path(args.input).name
    started = time.monotonic()
    try:
        report = corpus.register(data, SourceFormat(args.format), config, name)
    except ParseError as exc:
        print(f"error: {args.input}:{exc.line or '?'}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    elapsed_ms = (time.monotonic() - started) * 1000.0
    try:
        corpus.save(graph_path)
    except OSError as exc:
        print(f"error: cannot write {graph_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"registered {name} (dataset {report.dataset}): "
        f"{report.nodes_added} nodes, {report.edges_added} edges, "
        f"{report.entities_added} entities, {report.similar_added} similar edges "
        f"in {elapsed_ms:.1f} ms"
    )
    print(
        f"graph now has {len(corpus.graph.nodes)} nodes / {len(corpus.graph.edges)} edges "
        f"-> {graph_path}"
    )
    return EXIT_OK


def _format_answer_text(graph: Graph, rank: int, answer: Answer) -> str:
    b = answer.breakdown
    lines = [
        f"#{rank} score={b.total:.6f} (ms={b.ms:.4f} conf={b.conf_prod:.4f} "
        f"spec={b.spec_prod:.6f}) edges={len(answer.edges)}"
    ]
    payload = answer_to_dict(graph, answer)
    for e in payload["edges"]:
        src = graph.node(e["src"]).label or f"#{e['src']}"
        tgt = graph.node(e["tgt"]).label or f"#{e['tgt']}"
        marker = "=" if e["kind"] == "sameas" else ("~" if e["kind"] == "similar" else "-")
        label = e["label"] or "(no label)"
        lines.append(f"    [{src}] {marker}-{label} ({e['conf']:.2f})-{marker} [{tgt}]")
    for kw, node_id in sorted(payload["matches"].items()):
        lines.append(f"    match {kw!r} -> node {node_id} [{graph.node(node_id).label}]")
    return "\n".join(lines)


_DOT_PALETTE = [
    "lightblue", "lightyellow", "lightpink", "lightgreen", "lavender",
    "mistyrose", "honeydew", "aliceblue", "seashell", "beige",
]


def answers_to_dot(graph: Graph, answers: list[Answer]) -> str:
    """One DOT digraph; each answer is a cluster, sameAs edges dashed."""
    datasets = sorted({graph.node(n).dataset for a in answers for n in a.nodes})
    color_of = {ds: _DOT_PALETTE[i % len(_DOT_PALETTE)] for i, ds in enumerate(datasets)}
    out = ["digraph answers {", "  node [style=filled, shape=box];"]
    for idx, answer in enumerate(answers):
        out.append(f"  subgraph cluster_{idx} {{")
        out.append(f'    label="answer {idx + 1} (score {answer.breakdown.total:.4f})";')
        for node_id in sorted(answer.nodes):
            node = graph.node(node_id)
            label = (node.label or f"#{node_id}").replace('"', '\\"')
            out.append(
                f'    a{idx}_n{node_id} [label="{label}", fillcolor={color_of[node.dataset]}];'
            )
        payload = answer_to_dict(graph, answer)
        for e in payload["edges"]:
            style = ' [style=dashed, label="sameAs"]' if e["kind"] == "sameas" else (
                f' [style=dotted, label="~{e["conf"]:.2f}"]' if e["kind"] == "similar"
                else f' [label="{e["label"]}"]'
            )
            out.append(f'    a{idx}_n{e["src"]} -> a{idx}_n{e["tgt"]}{style};')
        out.append("  }")
    out.append("}")
    return "\n".join(out)


def _print_result(graph: Graph, result: SearchResult, fmt: str, out=sys.stdout) -> None:
    for diagnostic in result.diagnostics:
        print(f"note: {diagnostic}", file=sys.stderr)
    if fmt == "json":
        payload = {
            "answers": [answer_to_dict(graph, a) for a in result.answers],
            "total_found": result.total_found,
            "trees_explored": result.trees_explored,
            "time_first_ms": result.time_first_ms,
            "time_total_ms": result.time_total_ms,
            "timed_out": result.timed_out,
        }
        print(json.dumps(payload, ensure_ascii=False, indent=2), file=out)
    elif fmt == "dot":
        print(answers_to_dot(graph, result.answers), file=out)
    else:
        if not result.answers:
            print("no answers", file=out)
        for rank, answer in enumerate(result.answers, start=1):
            print(_format_answer_text(graph, rank, answer), file=out)
        first = "-" if result.time_first_ms is None else f"{result.time_first_ms:.1f} ms"
        print(
            f"{result.total_found} answer(s), {result.trees_explored} trees explored, "
            f"first answer: {first}, total: {result.time_total_ms:.1f} ms"
            + (" [timed out]" if result.timed_out else ""),
            file=out,
        )


def cmd_query(args: argparse.Namespace) -> int:
    try:
        params = ScoreParams(args.alpha, args.beta)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    try:
        corpus = Corpus.open(args.graph)
    except OSError as exc:
        print(f"error: cannot open {args.graph}: {exc}", file=sys.stderr)
        return EXIT_IO
    except KweaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    def run_one(keyword_line: str) -> None:
        keywords = tuple(keyword_line.split())
        query = Query(
            keywords=keywords,
            k=args.k,
            timeout_ms=args.timeout_ms,
            max_answers=args.max_answers,
            params=params,
        )
        result = corpus.search(query)
        _print_result(corpus.graph, result, args.format)

    try:
        if args.repl:
            for line in sys.stdin:
                line = line.strip()
                if line:
                    run_one(line)
        else:
            if not args.keywords:
                print("error: --keywords is required without --repl", file=sys.stderr)
                return EXIT_PARAMS
            run_one(args.keywords)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    return EXIT_OK


def _generate(args: argparse.Namespace) -> Corpus:
    family = args.family
    if family == "line":
        return syngen.gen_line(args.n)
    if family == "chain":
        return syngen.gen_chain(args.n)
    if family == "star":
        return syngen.gen_star(args.branches, args.branch_len)
    return syngen.gen_ba(args.n, args.m0, args.seed, args.distance)


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        corpus = _generate(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    try:
        corpus.save(args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"generated {args.family}: {len(corpus.graph.nodes)} nodes, "
        f"{len(corpus.graph.edges)} edges -> {args.out}"
    )
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    """Accept "a..b" or a single integer."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        params = ScoreParams(args.alpha, args.beta)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    family = args.family
    rows: list[dict] = []
    if family == "ba":
        values = _parse_range(args.distances)
        xlabel = "distance between keyword nodes"
    elif family == "star":
        values = list(range(args.start, args.end + 1, args.step))
        xlabel = "number of branches"
    else:
        values = list(range(args.start, args.end + 1, args.step))
        xlabel = "number of nodes"
    try:
        for value in values:
            if family == "line":
                corpus = syngen.gen_line(value)
                keywords = ("kwstart", "kwend")
            elif family == "chain":
                corpus = syngen.gen_chain(value)
                keywords = ("kwstart", "kwend")
            elif family == "star":
                corpus = syngen.gen_star(value, args.branch_len)
                keywords = ("kw1", "kw2")
            else:
                try:
                    corpus = syngen.gen_ba(args.n, args.m0, args.seed, value)
                except ConfigError as exc:
                    logger.warning("skipping distance %s: %s", value, exc)
                    continue
                keywords = ("kwstart", "kwend")
            query = Query(
                keywords=keywords,
                k=args.k,
                timeout_ms=args.timeout_ms,
                max_answers=args.max_answers,
                params=params,
            )
            result = corpus.search(query)
            rows.append(
                {
                    "param": value,
                    "time_first_ms": result.time_first_ms,
                    "time_total_ms": result.time_total_ms,
                    "answers": result.total_found,
                    "trees_explored": result.trees_explored,
                }
            )
            print(
                f"{family} param={value}: {result.total_found} answers, "
                f"{result.trees_explored} trees, {result.time_total_ms:.1f} ms"
            )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["param", "time_first_ms", "time_total_ms", "answers", "trees_explored"])
            for row in rows:
                first = "" if row["time_first_ms"] is None else f"{row['time_first_ms']:.3f}"
                writer.writerow(
                    [row["param"], first, f"{row['time_total_ms']:.3f}",
                     row["answers"], row["trees_explored"]]
                )
        figure_path = args.figure or str(Path(args.out).with_suffix(".png"))
        render_bench_figure(rows, figure_path, xlabel, f"{family} graph execution time")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out} and {figure_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kweave",
        description="Keyword search over a graph integrating heterogeneous datasets.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_register = sub.add_parser("register", help="add a source document to a graph")
    p_register.add_argument("--input", required=True, help="source file")
    p_register.add_argument(
        "--format", required=True, choices=[f.value for f in SourceFormat]
    )
    p_register.add_argument("--graph", required=True, help="graph file to create or extend")
    p_register.add_argument("--mode", choices=[m.value for m in LoadMode], default=None)
    p_register.add_argument("--config", help="key=value settings file")
    p_register.add_argument("--tau", type=float, default=None, help="similarity threshold")
    p_register.add_argument("--gazetteer", help="entity gazetteer TSV")
    p_register.add_argument("--stopwords", help="stopword file")
    p_register.add_argument("--stemmer", choices=["plural", "none"], default=None)
    p_register.add_argument("--do-not-link", dest="do_not_link", default=None,
                            help="comma-separated labels never linked")
    p_register.add_argument("--name", help="dataset name (defaults to file name)")
    p_register.set_defaults(func=cmd_register)

    p_query = sub.add_parser("query", help="search a graph")
    p_query.add_argument("--graph", required=True)
    p_query.add_argument("--keywords", help="space-separated keywords")
    p_query.add_argument("--k", type=int, default=10)
    p_query.add_argument("--timeout-ms", dest="timeout_ms", type=float, default=120000.0)
    p_query.add_argument("--max-answers", dest="max_answers", type=int, default=None)
    p_query.add_argument("--alpha", type=float, default=1.0 / 3.0)
    p_query.add_argument("--beta", type=float, default=1.0 / 3.0)
    p_query.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p_query.add_argument("--repl", action="store_true",
                         help="read one query per stdin line")
    p_query.set_defaults(func=cmd_query)

    p_generate = sub.add_parser("generate", help="write a synthetic benchmark graph")
    p_generate.add_argument("family", choices=["line", "chain", "star", "ba"])
    p_generate.add_argument("--n", type=int, default=100)
    p_generate.add_argument("--branches", type=int, default=4)
    p_generate.add_argument("--branch-len", dest="branch_len", type=int, default=10)
    p_generate.add_argument("--m0", type=int, default=2)
    p_generate.add_argument("--seed", type=int, default=1)
    p_generate.add_argument("--distance", type=int, default=None,
                            help="place kwstart/kwend this far apart (ba only)")
    p_generate.add_argument("--out", required=True)
    p_generate.set_defaults(func=cmd_generate)

    p_bench = sub.add_parser("bench", help="time queries over synthetic graphs")
    p_bench.add_argument("family", choices=["line", "chain", "star", "ba"])
    p_bench.add_argument("--from", dest="start", type=int, default=2)
    p_bench.add_argument("--to", dest="end", type=int, default=10)
    p_bench.add_argument("--step", type=int, default=1)
    p_bench.add_argument("--branch-len", dest="branch_len", type=int, default=10)
    p_bench.add_argument("--n", type=int, default=2000)
    p_bench.add_argument("--m0", type=int, default=2)
    p_bench.add_argument("--seed", type=int, default=1)
    p_bench.add_argument("--distances", default="1..21", help='ba distances, e.g. "1..21"')
    p_bench.add_argument("--k", type=int, default=10)
    p_bench.add_argument("--timeout-ms", dest="timeout_ms", type=float, default=120000.0)
    p_bench.add_argument("--max-answers", dest="max_answers", type=int, default=None)
    p_bench.add_argument("--alpha", type=float, default=1.0 / 3.0)
    p_bench.add_argument("--beta", type=float, default=1.0 / 3.0)
    p_bench.add_argument("--out", required=True, help="CSV output path")
    p_bench.add_argument("--figure", help="figure path (default: CSV path with .png)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
