"""Node importance measures over the communication matrices.

Six graph measures (degree, eigenvector importance in both directions,
closeness, betweenness, topological overlap) plus strength and the
degree/strength blend kappa(alpha). Every function returns a
:class:`CentralityResult` carrying raw scores and dense ranks over the
roster. Per-source loops are independent and the results are deterministic.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import PowerIterationError, TomDomainError
from .graph import NodeRoster, UndirectedGraph, WeightedDigraph

logger = logging.getLogger(__name__)

MEASURES = (
    "degree",
    "strength",
    "kappa",
    "eigen_sent",
    "eigen_received",
    "closeness",
    "betweenness",
    "tom",
)

TOM_VARIANTS = ("paper", "standard")

# candidate path lengths within this relative slack count as tied shortest paths;
# reciprocal weights are irrational in general, so exact comparison undercounts
PATH_TIE_TOLERANCE = 1e-9

DEFAULT_EIGEN_TOLERANCE = 1e-10
DEFAULT_MAX_ITERS = 100_000


@dataclass(frozen=True, eq=False)
class CentralityResult:
    measure: str
    ids: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (len(self.ids),):
            raise ValueError("scores must be one value per roster id")
        if not np.isfinite(scores).all():
            raise ValueError(f"{self.measure}: non-finite score")
        scores.setflags(write=False)
        ranks = np.asarray(self.ranks, dtype=np.int64)
        ranks.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "ranks", ranks)


def dense_ranks(scores) -> np.ndarray:
    """1 = highest score; equal scores share a rank and the next distinct
    score takes the next integer."""
    values = np.asarray(scores, dtype=np.float64)
    distinct = np.unique(values)[::-1]
    position = {s: r for r, s in enumerate(distinct, start=1)}
    return np.array([position[s] for s in values], dtype=np.int64)


def _result(measure: str, roster: NodeRoster, scores, params=None) -> CentralityResult:
    scores = np.asarray(scores, dtype=np.float64)
    return CentralityResult(measure, roster.ids, scores, dense_ranks(scores), dict(params or {}))


def degree(g: UndirectedGraph) -> CentralityResult:
    """Number of distinct neighbours (any positive undirected weight counts once)."""
    scores = (g.u > 0).sum(axis=1).astype(np.float64)
    return _result("degree", g.roster, scores)


def strength(g: UndirectedGraph) -> CentralityResult:
    """Total incident weight; the volume of traffic rather than the breadth of contacts."""
    return _result("strength", g.roster, g.u.sum(axis=1))


def kappa(g: UndirectedGraph, alpha: float) -> CentralityResult:
    """Blend degree^alpha * strength^(1-alpha); alpha=0 is strength, alpha=1 is degree.

    Nodes with no edges score 0 by convention for every alpha.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    deg = (g.u > 0).sum(axis=1).astype(np.float64)
    sig = g.u.sum(axis=1)
    scores = np.zeros(g.n)
    mask = deg > 0
    scores[mask] = deg[mask] ** alpha * sig[mask] ** (1.0 - alpha)
    return _result("kappa", g.roster, scores, {"alpha": float(alpha)})


def eigencentrality(
    g: WeightedDigraph,
    direction: str = "sent",
    tolerance: float = DEFAULT_EIGEN_TOLERANCE,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> CentralityResult:
    """Dominant-eigenpair importance weights via shifted power iteration.

    ``sent`` iterates the weight matrix itself, so importance flows from the
    people a node writes to; ``received`` iterates the transpose. Iteration
    starts from the uniform positive vector and adds a positive diagonal
    shift proportional to the matrix scale: the shift leaves eigenvectors
    unchanged but keeps the iteration convergent on bipartite-like structures
    whose extreme eigenvalues tie in magnitude. The eigenvalue reported in
    ``params`` is a Rayleigh quotient of the unshifted matrix, and the
    returned vector has unit Euclidean length, nonnegative entries, and
    max-norm residual ||A x - lambda x|| <= tolerance.
    """
    if direction not in ("sent", "received"):
        raise ValueError(f"direction must be 'sent' or 'received', got {direction!r}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    a = g.m if direction == "sent" else g.m.T
    if not a.any():
        raise ValueError("cannot rank an identically zero matrix")

    n = a.shape[0]
    shift = 0.5 * float(a.sum(axis=1).max())
    if shift <= 0:  # nonzero matrix with all-zero row sums cannot happen, but stay safe
        shift = 1.0
    x = np.full(n, 1.0 / math.sqrt(n))
    residual = math.inf
    measure = "eigen_sent" if direction == "sent" else "eigen_received"
    for iteration in range(1, max_iters + 1):
        ax = a @ x
        lam = float(x @ ax)
        residual = float(np.abs(ax - lam * x).max())
        if residual <= tolerance:
            return _result(
                measure,
                g.roster,
                x,
                {
                    "eigenvalue": lam,
                    "residual": residual,
                    "iterations": float(iteration),
                    "tolerance": float(tolerance),
                    "shift": shift,
                },
            )
        y = ax + shift * x
        x = y / np.linalg.norm(y)
    raise PowerIterationError(
        f"{measure}: no convergence to residual {tolerance:g} within {max_iters} "
        f"iterations (last residual {residual:g}); the matrix may be reducible or periodic",
        residual=residual,
        iterations=max_iters,
    )


def hop_distances(m: np.ndarray) -> np.ndarray:
    """All-pairs directed hop counts over the nonzero pattern (inf when unreachable)."""
    n = m.shape[0]
    exists = (m > 0).astype(np.float64)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    reached = np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=bool)
    for step in range(1, n + 1):
        nxt = (frontier.astype(np.float64) @ exists) > 0
        nxt &= ~reached
        if not nxt.any():
            break
        dist[nxt] = step
        reached |= nxt
        frontier = nxt
    return dist


def _reciprocal_length_distances(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest distances where an edge of weight w has length 1/w."""
    mask = weights > 0
    rows, cols = np.nonzero(mask)
    data = 1.0 / weights[rows, cols]
    graph = csr_matrix((data, (rows, cols)), shape=weights.shape)
    return dijkstra(graph, directed=True)


def closeness(g: WeightedDigraph, weighted: bool = False) -> CentralityResult:
    """Reciprocal of the total distance from a node to every other node.

    Distances are directed hop counts over the nonzero pattern; ``weighted``
    switches to reciprocal-weight edge lengths instead. A node that cannot
    reach some other node scores 0, so on a disconnected graph every score is 0.
    """
    dist = _reciprocal_length_distances(g.m) if weighted else hop_distances(g.m)
    n = g.n
    scores = np.zeros(n)
    for i in range(n):
        row = np.delete(dist[i], i)
        if row.size and np.isfinite(row).all():
            scores[i] = 1.0 / row.sum()
    return _result("closeness", g.roster, scores, {"weighted": 1.0 if weighted else 0.0})


def betweenness(
    g: UndirectedGraph,
    tie_tolerance: float = PATH_TIE_TOLERANCE,
) -> CentralityResult:
    """Shortest-path betweenness with reciprocal-weight edge lengths.

    A heavier tie is a shorter hop: an edge of weight w has length 1/w and a
    path's length is the sum over its edges. For every unordered pair {j, k}
    the minimal-length paths share one unit of credit; node i earns the
    fraction passing through it as an interior node. Candidate lengths within
    relative ``tie_tolerance`` of the minimum count as tied. Pairs with no
    connecting path contribute nothing.

    Per source: exact distances first, then a shortest-path DAG under the
    tolerance, then path counting and dependency accumulation along the DAG.
    """
    n = g.n
    u = g.u
    if n <= 2 or not u.any():
        return _result("betweenness", g.roster, np.zeros(n), {"tie_tolerance": tie_tolerance})

    lengths = np.full_like(u, np.inf)
    mask = u > 0
    lengths[mask] = 1.0 / u[mask]
    dist = _reciprocal_length_distances(u)

    beta = np.zeros(n)
    for s in range(n):
        d = dist[s]
        finite = np.flatnonzero(np.isfinite(d))
        if finite.size <= 1:
            continue
        candidate = d[:, None] + lengths
        dag = (
            np.isfinite(candidate)
            & (candidate <= d[None, :] * (1.0 + tie_tolerance))
            & (d[:, None] < d[None, :])
        )
        dag_in = np.ascontiguousarray(dag.T)  # dag_in[w] marks predecessors of w

        order = finite[np.argsort(d[finite], kind="stable")]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        for w in order[1:]:
            sigma[w] = float(dag_in[w] @ sigma)

        delta = np.zeros(n)
        for w in order[:0:-1]:
            if sigma[w] > 0:
                delta += dag_in[w] * (sigma * ((1.0 + delta[w]) / sigma[w]))
        delta[s] = 0.0
        beta += delta
    beta *= 0.5  # each unordered pair was counted from both endpoints
    return _result("betweenness", g.roster, beta, {"tie_tolerance": tie_tolerance})


def tom_matrix(g: UndirectedGraph, variant: str = "paper", strict: bool = True) -> np.ndarray:
    """Topological overlap: shared-neighbour weight plus the direct edge,
    scaled against the smaller of the two row sums.

    ``paper`` excludes both endpoints from the row sums in the denominator,
    which lets entries exceed 1 on weighted graphs; ``standard`` uses full row
    sums (the WGCNA convention, bounded by 1 on binary graphs). Non-positive
    denominators, possible under ``paper`` when the direct weight dominates,
    raise :class:`TomDomainError` in strict mode and clamp the entry to 0
    otherwise. The diagonal is 1 by convention.
    """
    if variant not in TOM_VARIANTS:
        raise ValueError(f"variant must be one of {TOM_VARIANTS}, got {variant!r}")
    if g.n < 3:
        raise ValueError("topological overlap needs at least 3 nodes")
    u = g.u
    k = u.sum(axis=1)
    shared = u @ u  # zero diagonal makes the l != i, j exclusion automatic
    num = shared + u
    kmin = np.minimum(k[:, None], k[None, :])
    if variant == "paper":
        denom = kmin + 1.0 - 2.0 * u
    else:
        denom = kmin + 1.0 - u
    np.fill_diagonal(denom, 1.0)

    bad = denom <= 0
    if bad.any():
        if strict:
            i, j = map(int, np.argwhere(bad)[0])
            raise TomDomainError(
                f"non-positive overlap denominator for pair "
                f"({g.roster.ids[i]}, {g.roster.ids[j]}); rerun in lenient mode to clamp"
            )
        logger.warning(
            "clamped %d overlap entries with non-positive denominators to 0", int(bad.sum())
        )
        denom = np.where(bad, 1.0, denom)
    tom = num / denom
    tom[bad] = 0.0
    np.fill_diagonal(tom, 1.0)
    return tom


def tom_centrality(
    g: UndirectedGraph, variant: str = "paper", strict: bool = True
) -> CentralityResult:
    """Row sums of the topological overlap matrix, the unit diagonal excluded."""
    tom = tom_matrix(g, variant, strict)
    scores = tom.sum(axis=1) - np.diagonal(tom)
    return _result("tom", g.roster, scores)


def rank_of(result: CentralityResult, k: int) -> list[tuple[str, float, int]]:
    """Top-k (canonical_id, score, rank), descending by score; ties keep id order."""
    n = len(result.ids)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    order = sorted(range(n), key=lambda i: (-result.scores[i], result.ids[i]))
    return [(result.ids[i], float(result.scores[i]), int(result.ranks[i])) for i in order[:k]]
