"""Adjacency-matrix graph types: node roster, directed weight matrix, undirected fold, CSV I/O.

Matrices are dense float64 numpy arrays. At the intended scale (a few hundred
nodes) dense storage is a few hundred kilobytes and keeps the O(n^3)
algorithms downstream simple. All types are immutable after construction and
safe for concurrent reads.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import MatrixFormatError

# 17 significant digits make save -> load bit-exact for float64
_FLOAT_FMT = "{:.17g}"

ROSTER_HEADER = ("canonical_id", "display_name", "department", "title")


def format_weight(value: float) -> str:
    return _FLOAT_FMT.format(float(value))


@dataclass(frozen=True)
class RosterEntry:
    canonical_id: str
    display_name: str = ""
    department: str = ""
    title: str = ""


@dataclass(frozen=True)
class NodeRoster:
    """Ordered universe of node identities; position in ``entries`` is the matrix index."""

    entries: tuple[RosterEntry, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx: dict[str, int] = {}
        for pos, entry in enumerate(self.entries):
            if not entry.canonical_id:
                raise MatrixFormatError(f"roster entry {pos} has an empty canonical_id")
            if entry.canonical_id in idx:
                raise MatrixFormatError(
                    f"duplicate canonical_id {entry.canonical_id!r} in roster"
                )
            idx[entry.canonical_id] = pos
        object.__setattr__(self, "index", idx)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.canonical_id for e in self.entries)

    def position(self, canonical_id: str) -> int:
        return self.index[canonical_id]

    def entry(self, canonical_id: str) -> RosterEntry:
        return self.entries[self.index[canonical_id]]

    @classmethod
    def from_ids(cls, ids: Iterable[str], sort: bool = False) -> "NodeRoster":
        """Bare roster from ids. ``sort=True`` gives the lexicographic fallback
        order used when no roster file fixes an order."""
        ordered = sorted(ids) if sort else list(ids)
        return cls(tuple(RosterEntry(i) for i in ordered))


def merge_roster_metadata(base: NodeRoster, meta: NodeRoster) -> NodeRoster:
    """Keep ``base`` order, pulling display name/department/title from ``meta`` by id."""
    entries = []
    for e in base.entries:
        if e.canonical_id in meta.index:
            entries.append(meta.entry(e.canonical_id))
        else:
            entries.append(e)
    return NodeRoster(tuple(entries))


def _as_weight_matrix(values, n: int, kind: str) -> np.ndarray:
    m = np.array(values, dtype=np.float64, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{kind} matrix must be square, got shape {m.shape}")
    if m.shape[0] != n:
        raise ValueError(
            f"{kind} matrix is {m.shape[0]}x{m.shape[1]} but the roster has {n} nodes"
        )
    if not np.isfinite(m).all():
        raise ValueError(f"{kind} matrix contains non-finite entries")
    if (m < 0).any():
        raise ValueError(f"{kind} matrix contains negative entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Directed weight matrix; ``m[i, j]`` is the aggregated weight of edges i -> j."""

    roster: NodeRoster
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", _as_weight_matrix(self.m, len(self.roster), "directed"))

    @property
    def n(self) -> int:
        return len(self.roster)


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    """Symmetric weight matrix with a zero diagonal."""

    roster: NodeRoster
    u: np.ndarray

    def __post_init__(self):
        u = _as_weight_matrix(self.u, len(self.roster), "undirected")
        if (u != u.T).any():
            raise ValueError("undirected matrix must be exactly symmetric")
        if np.diagonal(u).any():
            raise ValueError("undirected matrix must have a zero diagonal")
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return len(self.roster)


def symmetrize(g: WeightedDigraph) -> UndirectedGraph:
    """Fold a directed matrix into the undirected one: u[i, j] = m[i, j] + m[j, i].

    The diagonal is forced to zero, so self-addressed weight is discarded
    rather than doubled. Each entry is a single float addition, which keeps
    u[i, j] == u[j, i] bit-exact.
    """
    u = g.m + g.m.T
    np.fill_diagonal(u, 0.0)
    return UndirectedGraph(g.roster, u)


def binarize(g: UndirectedGraph) -> UndirectedGraph:
    """Map every positive weight to 1.0; symmetry and zero diagonal are preserved."""
    return UndirectedGraph(g.roster, (g.u > 0).astype(np.float64))


def save_matrix_csv(g: WeightedDigraph, path) -> None:
    """Write the adjacency CSV: empty corner cell, id header, one labelled row per sender."""
    ids = g.roster.ids
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("",) + ids)
        for i, row_id in enumerate(ids):
            writer.writerow((row_id, *(format_weight(v) for v in g.m[i])))


def load_matrix_csv(path) -> WeightedDigraph:
    """Read an adjacency CSV written by :func:`save_matrix_csv` (or compatible).

    Row labels must repeat the header ids in the same order. Any standard
    decimal or scientific literal is accepted for the weights; node order is
    taken from the file.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as err:
        raise MatrixFormatError(f"cannot read adjacency file {path}: {err}") from err
    if not rows:
        raise MatrixFormatError(f"{path}: file is empty")

    header = rows[0]
    if header[0].strip():
        raise MatrixFormatError(
            f"{path}: first header cell must be empty, got {header[0]!r}"
        )
    ids = [c.strip() for c in header[1:]]
    n = len(ids)
    if n == 0:
        raise MatrixFormatError(f"{path}: header lists no node ids")
    seen: set[str] = set()
    for c, node_id in enumerate(ids):
        if not node_id:
            raise MatrixFormatError(f"{path}: empty id in header column {c + 2}")
        if node_id in seen:
            raise MatrixFormatError(f"{path}: duplicate id {node_id!r} in header")
        seen.add(node_id)
    if len(rows) - 1 != n:
        raise MatrixFormatError(
            f"{path}: header lists {n} ids but the file has {len(rows) - 1} data rows"
        )

    m = np.zeros((n, n))
    for r, row in enumerate(rows[1:]):
        if len(row) != n + 1:
            raise MatrixFormatError(
                f"{path} row {r + 2}: expected {n + 1} cells, got {len(row)}"
            )
        label = row[0].strip()
        if label != ids[r]:
            raise MatrixFormatError(
                f"{path} row {r + 2}: row label {label!r} does not match header id {ids[r]!r}"
            )
        for c, cell in enumerate(row[1:]):
            try:
                value = float(cell)
            except ValueError:
                raise MatrixFormatError(
                    f"{path} row {r + 2} ({label!r}), column {ids[c]!r}: "
                    f"non-numeric cell {cell!r}"
                ) from None
            m[r, c] = value
    if not np.isfinite(m).all():
        raise MatrixFormatError(f"{path}: matrix contains non-finite values")
    if (m < 0).any():
        raise MatrixFormatError(f"{path}: matrix contains negative weights")
    return WeightedDigraph(NodeRoster.from_ids(ids), m)


def save_roster_csv(roster: NodeRoster, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROSTER_HEADER)
        for e in roster.entries:
            writer.writerow((e.canonical_id, e.display_name, e.department, e.title))


def load_roster_csv(path) -> NodeRoster:
    """Read ``canonical_id,display_name,department,title`` rows; file order is kept."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as err:
        raise MatrixFormatError(f"cannot read roster file {path}: {err}") from err
    if not rows:
        raise MatrixFormatError(f"{path}: roster file is empty")
    header = tuple(c.strip().lower() for c in rows[0])
    if header != ROSTER_HEADER:
        raise MatrixFormatError(
            f"{path}: expected header {','.join(ROSTER_HEADER)}, got {','.join(rows[0])}"
        )
    entries = []
    for r, row in enumerate(rows[1:]):
        if len(row) > len(ROSTER_HEADER):
            raise MatrixFormatError(f"{path} row {r + 2}: too many cells ({len(row)})")
        cells = [c.strip() for c in row] + [""] * (len(ROSTER_HEADER) - len(row))
        if not cells[0]:
            raise MatrixFormatError(f"{path} row {r + 2}: empty canonical_id")
        entries.append(RosterEntry(*cells))
    return NodeRoster(tuple(entries))
