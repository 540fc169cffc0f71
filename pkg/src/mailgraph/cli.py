"""Command line front end.

Subcommands: ingest, centrality, rank, cluster, report, export-dot,
make-aliases. Run ``mailgraph <command> --help`` for per-command flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .centrality import (
    DEFAULT_EIGEN_TOLERANCE,
    DEFAULT_MAX_ITERS,
    betweenness,
    closeness,
    degree,
    eigencentrality,
    kappa,
    strength,
    tom_centrality,
)
from .cluster import LINKAGES, cluster_graph, export_dendrogram
from .errors import MailgraphError, MatrixFormatError
from .graph import (
    format_weight,
    load_matrix_csv,
    load_roster_csv,
    merge_roster_metadata,
    save_matrix_csv,
    symmetrize,
)
from .ingest import (
    DEFAULT_DOMAIN,
    AliasTable,
    IngestDiagnostics,
    default_alias_rules,
    ingest_corpus,
    load_alias_csv,
    save_alias_csv,
)
from .report import build_report, export_dot

SCORES_HEADER = ("canonical_id", "score", "rank")


def _write_scores_csv(result, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORES_HEADER)
        for node_id, score, rank in zip(result.ids, result.scores, result.ranks):
            writer.writerow((node_id, format_weight(score), int(rank)))


def _read_scores_csv(path) -> list[tuple[str, float, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or tuple(c.strip().lower() for c in rows[0]) != SCORES_HEADER:
        raise MatrixFormatError(f"{path}: expected header {','.join(SCORES_HEADER)}")
    out = []
    for r, row in enumerate(rows[1:]):
        if len(row) != 3:
            raise MatrixFormatError(f"{path} row {r + 2}: expected 3 cells, got {len(row)}")
        try:
            out.append((row[0], float(row[1]), int(row[2])))
        except ValueError:
            raise MatrixFormatError(f"{path} row {r + 2}: non-numeric score or rank") from None
    return out


def cmd_ingest(args) -> int:
    roster = load_roster_csv(args.roster)
    table = load_alias_csv(args.aliases, args.domain)
    diagnostics = IngestDiagnostics()
    g = ingest_corpus(
        args.input, table, roster, dedupe=not args.no_dedupe, diagnostics=diagnostics
    )
    save_matrix_csv(g, args.out)
    if args.log:
        diagnostics.write(args.log)
    print(diagnostics.summary(), file=sys.stderr)
    return 0


def cmd_centrality(args) -> int:
    g = load_matrix_csv(args.matrix)
    strict = not args.lenient
    if args.measure == "degree":
        result = degree(symmetrize(g))
    elif args.measure == "strength":
        result = strength(symmetrize(g))
    elif args.measure == "kappa":
        result = kappa(symmetrize(g), args.alpha)
    elif args.measure == "eigen_sent":
        result = eigencentrality(g, "sent", args.tol, args.max_iters)
    elif args.measure == "eigen_received":
        result = eigencentrality(g, "received", args.tol, args.max_iters)
    elif args.measure == "closeness":
        result = closeness(g, weighted=args.weighted)
    elif args.measure == "betweenness":
        result = betweenness(symmetrize(g))
    else:
        result = tom_centrality(symmetrize(g), args.variant, strict)
    _write_scores_csv(result, args.out)
    return 0


def cmd_rank(args) -> int:
    scores = _read_scores_csv(args.scores)
    if not 1 <= args.top <= len(scores):
        raise MailgraphError(f"--top must be in 1..{len(scores)}, got {args.top}")
    ordered = sorted(scores, key=lambda row: (-row[1], row[0]))
    print(",".join(SCORES_HEADER))
    for node_id, score, rank in ordered[: args.top]:
        print(f"{node_id},{format_weight(score)},{rank}")
    return 0


def cmd_cluster(args) -> int:
    g = load_matrix_csv(args.matrix)
    basis = "scaled_adjacency" if args.basis == "adjacency" else "tom"
    clusters, tree = cluster_graph(
        symmetrize(g),
        basis,
        args.cut,
        args.min_size,
        variant=args.variant,
        linkage=args.linkage,
        strict=not args.lenient,
    )
    payload = {
        "clusters": [list(c) for c in clusters.clusters],
        "unassigned": list(clusters.unassigned),
        "params": clusters.params,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.dendrogram:
        fmt = "json" if str(args.dendrogram).endswith(".json") else "newick"
        text = export_dendrogram(tree, g.roster, fmt)
        Path(args.dendrogram).write_text(text + ("\n" if not text.endswith("\n") else ""),
                                         encoding="utf-8")
    return 0


def cmd_report(args) -> int:
    g = load_matrix_csv(args.matrix)
    if args.roster:
        meta = load_roster_csv(args.roster)
        g = type(g)(merge_roster_metadata(g.roster, meta), g.m)
    report = build_report(
        g,
        top_k=args.top,
        alpha=args.alpha,
        tom_variant=args.tom_variant,
        correlate="scores" if args.score_corr else "ranks",
        strict=not args.lenient,
    )
    Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    return 0


def cmd_export_dot(args) -> int:
    g = load_matrix_csv(args.matrix)
    Path(args.out).write_text(export_dot(g, args.threshold), encoding="utf-8")
    return 0


def cmd_make_aliases(args) -> int:
    roster = load_roster_csv(args.roster)
    rules = default_alias_rules(roster)
    save_alias_csv(AliasTable(rules, args.domain), args.out)
    print(f"wrote {len(rules)} alias patterns to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mailgraph",
        description="Email corpora to weighted communication graphs: "
        "centrality measures and hierarchical clustering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus and write the weight matrix")
    p.add_argument("--input", required=True, help="message directory tree or from,to,cc CSV")
    p.add_argument("--aliases", required=True, help="pattern,canonical_id CSV")
    p.add_argument("--roster", required=True, help="canonical_id,display_name,department,title CSV")
    p.add_argument("--out", required=True, help="output adjacency CSV")
    p.add_argument("--no-dedupe", action="store_true", help="keep mailbox duplicates")
    p.add_argument("--domain", default=DEFAULT_DOMAIN, help="only addresses in this domain resolve")
    p.add_argument("--log", default=None, help="write the diagnostics log to this file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("centrality", help="score one measure and write a scores CSV")
    p.add_argument("--matrix", required=True)
    p.add_argument(
        "--measure",
        required=True,
        choices=[
            "degree",
            "strength",
            "kappa",
            "eigen_sent",
            "eigen_received",
            "closeness",
            "betweenness",
            "tom",
        ],
    )
    p.add_argument("--alpha", type=float, default=0.5, help="kappa blend parameter")
    p.add_argument("--variant", choices=["paper", "standard"], default="paper",
                   help="overlap denominator convention (tom only)")
    p.add_argument("--weighted", action="store_true",
                   help="closeness only: reciprocal-weight path lengths instead of hop counts")
    p.add_argument("--tol", type=float, default=DEFAULT_EIGEN_TOLERANCE,
                   help="eigenvector residual tolerance")
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--lenient", action="store_true",
                   help="clamp bad overlap entries instead of failing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("rank", help="print the top-k rows of a scores CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("cluster", help="agglomerative clusters from a weight matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--basis", choices=["adjacency", "tom"], default="adjacency")
    p.add_argument("--variant", choices=["paper", "standard"], default="paper")
    p.add_argument("--linkage", choices=list(LINKAGES), default="average")
    p.add_argument("--cut", type=float, required=True, help="maximum merge dissimilarity")
    p.add_argument("--min-size", type=int, required=True, help="minimum cluster membership")
    p.add_argument("--out", required=True, help="clusters JSON")
    p.add_argument("--dendrogram", default=None,
                   help="also write the merge tree (.json for JSON, anything else Newick)")
    p.add_argument("--lenient", action="store_true",
                   help="clamp out-of-range overlap entries instead of failing")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="all-measure comparison report as JSON")
    p.add_argument("--matrix", required=True)
    p.add_argument("--roster", default=None, help="adds names/departments/titles to the tables")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tom-variant", choices=["paper", "standard"], default="paper")
    p.add_argument("--score-corr", action="store_true",
                   help="correlate raw scores instead of tie-averaged ranks")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-dot", help="Graphviz digraph of the thresholded matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--threshold", type=float, default=0.0,
                   help="drop edges with weight below this value")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("make-aliases", help="generate a starter alias table from a roster")
    p.add_argument("--roster", required=True)
    p.add_argument("--domain", default=DEFAULT_DOMAIN)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_aliases)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MailgraphError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
