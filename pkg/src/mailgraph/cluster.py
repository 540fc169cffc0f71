"""Agglomerative clustering over adjacency- or overlap-based dissimilarities.

Dissimilarity is one minus a similarity in [0, 1]: either the undirected
weight scaled by the largest weight in the graph, or a topological overlap
entry. Clusters come from cutting the merge tree at a fixed height and
keeping groups that reach a minimum size.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .centrality import tom_matrix
from .errors import DissimilarityError
from .graph import NodeRoster, UndirectedGraph

logger = logging.getLogger(__name__)

BASES = ("scaled_adjacency", "tom")
LINKAGES = ("average", "min", "max")


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    d: np.ndarray
    basis: str

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        d = np.array(self.d, dtype=np.float64, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"dissimilarity matrix must be square, got shape {d.shape}")
        if (d != d.T).any():
            raise ValueError("dissimilarity matrix must be symmetric")
        if np.diagonal(d).any():
            raise ValueError("dissimilarity diagonal must be zero")
        if (d < 0).any() or (d > 1).any():
            raise ValueError("dissimilarity entries must lie in [0, 1]")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class LinkageTree:
    """Full agglomeration record. Cluster ids 0..n_leaves-1 are single leaves;
    merge t creates cluster id n_leaves + t."""

    n_leaves: int
    merges: tuple[Merge, ...]

    def __post_init__(self):
        if self.n_leaves < 1:
            raise ValueError("linkage tree needs at least one leaf")
        if len(self.merges) != self.n_leaves - 1:
            raise ValueError(
                f"expected {self.n_leaves - 1} merges for {self.n_leaves} leaves, "
                f"got {len(self.merges)}"
            )


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[tuple[str, ...], ...]
    unassigned: tuple[str, ...]
    params: dict = field(default_factory=dict)

    def member_map(self) -> dict[str, int]:
        """id -> cluster position; unassigned ids map to -1."""
        out = {i: -1 for i in self.unassigned}
        for c, members in enumerate(self.clusters):
            for i in members:
                out[i] = c
        return out


def dissimilarity(
    g: UndirectedGraph,
    basis: str = "scaled_adjacency",
    variant: str = "paper",
    strict: bool = True,
) -> DissimilarityMatrix:
    """Build 1 - similarity with zero diagonal.

    ``scaled_adjacency`` divides the undirected weights by the largest weight,
    so the strongest tie has dissimilarity 0. ``tom`` uses 1 - overlap; under
    the ``paper`` overlap variant entries above 1 raise in strict mode and are
    clamped to 1 (with a warning) otherwise.
    """
    if basis == "scaled_adjacency":
        top = float(g.u.max())
        if top <= 0:
            raise DissimilarityError("graph has no positive weight; dissimilarity is undefined")
        d = 1.0 - g.u / top
    elif basis == "tom":
        t = tom_matrix(g, variant, strict)
        over = t > 1.0
        np.fill_diagonal(over, False)
        if over.any():
            if strict:
                raise DissimilarityError(
                    f"{int(over.sum())} overlap entries exceed 1 under the {variant!r} "
                    f"variant; rerun in lenient mode to clamp them"
                )
            logger.warning("clamped %d overlap entries above 1", int(over.sum()))
            t = np.minimum(t, 1.0)
        d = 1.0 - t
    else:
        raise ValueError(f"basis must be one of {BASES}, got {basis!r}")
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix(d, basis)


def agglomerate(dmat: DissimilarityMatrix, linkage: str = "average") -> LinkageTree:
    """Merge the closest pair of clusters until one remains.

    ``average`` scores a candidate pair by the unweighted mean over all
    cross-pairs (recorded as the merge height); ``min``/``max`` take the
    extreme cross-pair instead. Ties on the candidate height break toward the
    smallest (min member, min member) index pair, so trees are deterministic
    on symmetric inputs.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    n = dmat.n
    total = 2 * n - 1
    dist = np.full((total, total), np.inf)
    dist[:n, :n] = dmat.d
    np.fill_diagonal(dist, np.inf)
    size = np.zeros(total, dtype=np.int64)
    size[:n] = 1
    minmem = np.full(total, -1, dtype=np.int64)
    minmem[:n] = np.arange(n)
    active = np.zeros(total, dtype=bool)
    active[:n] = True

    merges: list[Merge] = []
    for t in range(n - 1):
        act = np.flatnonzero(active)
        sub = dist[np.ix_(act, act)]
        height = float(sub.min())
        ties = np.argwhere(sub == height)
        best: tuple[int, int] | None = None
        best_key: tuple[int, int] | None = None
        for la, lb in ties:
            ga, gb = int(act[la]), int(act[lb])
            if ga >= gb:
                continue
            key = (int(min(minmem[ga], minmem[gb])), int(max(minmem[ga], minmem[gb])))
            if best_key is None or key < best_key:
                best_key = key
                best = (ga, gb)
        assert best is not None
        a, b = best
        if minmem[b] < minmem[a]:
            a, b = b, a  # left child carries the smaller min member

        new = n + t
        active[a] = active[b] = False
        others = np.flatnonzero(active)
        if linkage == "average":
            combined = (size[a] * dist[a, others] + size[b] * dist[b, others]) / (
                size[a] + size[b]
            )
        elif linkage == "min":
            combined = np.minimum(dist[a, others], dist[b, others])
        else:
            combined = np.maximum(dist[a, others], dist[b, others])
        dist[new, others] = combined
        dist[others, new] = combined
        size[new] = size[a] + size[b]
        minmem[new] = min(minmem[a], minmem[b])
        active[new] = True
        merges.append(Merge(a, b, height, int(size[new])))
    return LinkageTree(n, tuple(merges))


def cut(
    tree: LinkageTree,
    max_dissimilarity: float,
    min_size: int,
    roster: NodeRoster,
    extra_params: dict | None = None,
) -> ClusterSet:
    """Drop merges above the height cutoff; surviving groups of at least
    ``min_size`` become clusters and everything else is left unassigned.

    Heights are non-decreasing by construction, so the kept merges form a
    prefix of the merge sequence.
    """
    if not 0 <= max_dissimilarity <= 1:
        raise ValueError(f"max_dissimilarity must be in [0, 1], got {max_dissimilarity}")
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    if len(roster) != tree.n_leaves:
        raise ValueError(
            f"roster has {len(roster)} ids but the tree has {tree.n_leaves} leaves"
        )
    n = tree.n_leaves
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rep = {i: i for i in range(n)}
    for t, mg in enumerate(tree.merges):
        if mg.height > max_dissimilarity:
            break
        ra, rb = find(rep[mg.left]), find(rep[mg.right])
        parent[rb] = ra
        rep[n + t] = ra

    groups: dict[int, list[str]] = {}
    ids = roster.ids
    for i in range(n):
        groups.setdefault(find(i), []).append(ids[i])

    clusters = []
    unassigned: list[str] = []
    for members in groups.values():
        if len(members) >= min_size:
            clusters.append(tuple(sorted(members)))
        else:
            unassigned.extend(members)
    clusters.sort(key=lambda c: c[0])
    params = {"max_dissimilarity": float(max_dissimilarity), "min_size": int(min_size)}
    params.update(extra_params or {})
    return ClusterSet(tuple(clusters), tuple(sorted(unassigned)), params)


def cluster_graph(
    g: UndirectedGraph,
    basis: str,
    cut_height: float,
    min_size: int,
    *,
    variant: str = "paper",
    linkage: str = "average",
    strict: bool = True,
) -> tuple[ClusterSet, LinkageTree]:
    """Dissimilarity -> agglomeration -> cut, with the run parameters recorded."""
    dmat = dissimilarity(g, basis, variant, strict)
    tree = agglomerate(dmat, linkage)
    extra = {"basis": basis, "linkage": linkage}
    if basis == "tom":
        extra["tom_variant"] = variant
    clusters = cut(tree, cut_height, min_size, g.roster, extra)
    return clusters, tree


def _tree_nodes(tree: LinkageTree, roster: NodeRoster):
    """Per-cluster (height, children, min leaf name) lookup tables."""
    n = tree.n_leaves
    ids = roster.ids
    height = {i: 0.0 for i in range(n)}
    children: dict[int, tuple[int, int]] = {}
    min_name = {i: ids[i] for i in range(n)}
    for t, mg in enumerate(tree.merges):
        node = n + t
        height[node] = mg.height
        children[node] = (mg.left, mg.right)
        min_name[node] = min(min_name[mg.left], min_name[mg.right])
    return height, children, min_name


def export_dendrogram(tree: LinkageTree, roster: NodeRoster, format: str = "newick") -> str:
    """Serialize a linkage tree with merge heights as branch data.

    Children are ordered smaller-min-leaf-name first, so output is
    deterministic. ``newick`` writes branch lengths as height differences
    (leaves sit at height 0); ``json`` writes the nested structure with each
    internal node's merge order, height, and size.
    """
    if len(roster) != tree.n_leaves:
        raise ValueError(
            f"roster has {len(roster)} ids but the tree has {tree.n_leaves} leaves"
        )
    height, children, min_name = _tree_nodes(tree, roster)
    n = tree.n_leaves
    ids = roster.ids
    root = 2 * n - 2 if n > 1 else 0

    def ordered(node: int) -> tuple[int, int]:
        a, b = children[node]
        return (a, b) if min_name[a] <= min_name[b] else (b, a)

    if format == "newick":

        def render(node: int, parent_height: float) -> str:
            branch = parent_height - height[node]
            if node < n:
                return f"{ids[node]}:{branch}"
            a, b = ordered(node)
            inner = f"({render(a, height[node])},{render(b, height[node])})"
            return f"{inner}:{branch}"

        if n == 1:
            return f"{ids[0]};"
        a, b = ordered(root)
        return f"({render(a, height[root])},{render(b, height[root])});"

    if format == "json":

        def build(node: int):
            if node < n:
                return {"name": ids[node]}
            a, b = ordered(node)
            return {
                "order": node - n,
                "height": height[node],
                "size": tree.merges[node - n].size,
                "children": [build(a), build(b)],
            }

        return json.dumps({"leaves": n, "tree": build(root)}, indent=2)

    raise ValueError(f"format must be 'newick' or 'json', got {format!r}")
