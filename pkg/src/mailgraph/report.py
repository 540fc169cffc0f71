"""Cross-measure comparison: top-k tables, pairwise rank correlations, JSON and DOT export."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .centrality import (
    DEFAULT_EIGEN_TOLERANCE,
    DEFAULT_MAX_ITERS,
    PATH_TIE_TOLERANCE,
    CentralityResult,
    betweenness,
    closeness,
    degree,
    eigencentrality,
    kappa,
    rank_of,
    strength,
    tom_centrality,
)
from .errors import MailgraphError
from .graph import WeightedDigraph, format_weight, symmetrize

MEASURE_ORDER = (
    "degree",
    "strength",
    "kappa",
    "eigen_sent",
    "eigen_received",
    "closeness",
    "betweenness",
    "tom",
)


def average_ranks(scores) -> np.ndarray:
    """Descending ranks with tied scores sharing the average of their positions."""
    return rankdata(-np.asarray(scores, dtype=np.float64), method="average")


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    x = x - x.mean()
    y = y - y.mean()
    sxx = float(x @ x)
    syy = float(y @ y)
    if sxx == 0.0 or syy == 0.0:
        return None
    if np.array_equal(x, y):
        return 1.0  # identical vectors correlate perfectly; skip the round-off
    r = float(x @ y) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rank_correlation(
    a: CentralityResult, b: CentralityResult, *, on_scores: bool = False
) -> float | None:
    """Pearson correlation of the two tie-averaged rank vectors.

    ``on_scores`` correlates the raw score vectors instead. Returns None when
    either vector is constant (the correlation is undefined).
    """
    if a.ids != b.ids:
        raise ValueError("results cover different rosters")
    va = a.scores if on_scores else average_ranks(a.scores)
    vb = b.scores if on_scores else average_ranks(b.scores)
    return _pearson(np.asarray(va, dtype=np.float64), np.asarray(vb, dtype=np.float64))


@dataclass(frozen=True)
class ComparisonReport:
    measures: tuple[str, ...]
    topk: dict[str, list[dict]]
    corr: tuple[tuple[float | None, ...], ...]
    params: dict

    def to_json(self) -> str:
        payload = {
            "measures": list(self.measures),
            "topk": self.topk,
            "corr": [list(row) for row in self.corr],
            "params": self.params,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        payload = json.loads(text)
        return cls(
            measures=tuple(payload["measures"]),
            topk=payload["topk"],
            corr=tuple(tuple(row) for row in payload["corr"]),
            params=payload["params"],
        )


def compute_all_measures(
    g: WeightedDigraph,
    *,
    alpha: float = 0.5,
    eigen_tolerance: float = DEFAULT_EIGEN_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
    tom_variant: str = "paper",
    strict: bool = True,
) -> dict[str, CentralityResult]:
    """Run the eight measures; any failure is re-raised naming the measure.

    Degree, strength, kappa, betweenness, and overlap run on the undirected
    fold; the eigenvector pair and closeness use the directed matrix.
    """
    u = symmetrize(g)
    jobs = {
        "degree": lambda: degree(u),
        "strength": lambda: strength(u),
        "kappa": lambda: kappa(u, alpha),
        "eigen_sent": lambda: eigencentrality(g, "sent", eigen_tolerance, max_iters),
        "eigen_received": lambda: eigencentrality(g, "received", eigen_tolerance, max_iters),
        "closeness": lambda: closeness(g),
        "betweenness": lambda: betweenness(u),
        "tom": lambda: tom_centrality(u, tom_variant, strict),
    }
    out: dict[str, CentralityResult] = {}
    for name in MEASURE_ORDER:
        try:
            out[name] = jobs[name]()
        except (MailgraphError, ValueError) as err:
            raise MailgraphError(f"measure '{name}' failed: {err}") from err
    return out


def build_report(
    g: WeightedDigraph,
    *,
    top_k: int = 10,
    alpha: float = 0.5,
    eigen_tolerance: float = DEFAULT_EIGEN_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
    tom_variant: str = "paper",
    correlate: str = "ranks",
    strict: bool = True,
) -> ComparisonReport:
    """Top-k tables for all eight measures plus their pairwise correlation matrix.

    Output is deterministic for fixed inputs and parameters; the params block
    records every policy that shaped the numbers.
    """
    if not 1 <= top_k <= g.n:
        raise ValueError(f"top_k must be in 1..{g.n}, got {top_k}")
    if correlate not in ("ranks", "scores"):
        raise ValueError(f"correlate must be 'ranks' or 'scores', got {correlate!r}")
    results = compute_all_measures(
        g,
        alpha=alpha,
        eigen_tolerance=eigen_tolerance,
        max_iters=max_iters,
        tom_variant=tom_variant,
        strict=strict,
    )

    topk: dict[str, list[dict]] = {}
    for name in MEASURE_ORDER:
        rows = []
        for node_id, score, rank in rank_of(results[name], top_k):
            entry = g.roster.entry(node_id)
            rows.append(
                {
                    "id": node_id,
                    "name": entry.display_name,
                    "department": entry.department,
                    "title": entry.title,
                    "score": score,
                    "rank": rank,
                }
            )
        topk[name] = rows

    on_scores = correlate == "scores"
    corr = tuple(
        tuple(
            rank_correlation(results[a], results[b], on_scores=on_scores)
            for b in MEASURE_ORDER
        )
        for a in MEASURE_ORDER
    )

    params = {
        "top_k": top_k,
        "alpha": alpha,
        "eigen_tolerance": eigen_tolerance,
        "tom_variant": tom_variant,
        "correlate": correlate,
        "rank_policy": "average_ties",
        "betweenness_pairs": "unordered",
        "path_tie_tolerance": PATH_TIE_TOLERANCE,
        "closeness_distance": "directed_hops",
        "tie_order": "canonical_id",
    }
    return ComparisonReport(MEASURE_ORDER, topk, corr, params)


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: WeightedDigraph, threshold: float = 0.0) -> str:
    """Graphviz digraph of all edges with weight >= threshold (and > 0)."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    lines = ["digraph communication {"]
    ids = g.roster.ids
    for node_id in ids:
        lines.append(f"  {_dot_quote(node_id)};")
    m = g.m
    for i in range(g.n):
        for j in range(g.n):
            w = m[i, j]
            if w > 0 and w >= threshold:
                lines.append(
                    f"  {_dot_quote(ids[i])} -> {_dot_quote(ids[j])} "
                    f"[weight={format_weight(w)}];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"
