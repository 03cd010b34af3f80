"""Multi-hypergraph container, edge-list I/O, expansions and hop distances."""

from __future__ import annotations

import re
import threading
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ParseError

_TOKEN_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class Graph:
    """Plain graph produced by an expansion. ``weights`` is aligned with ``edges``."""

    node_count: int
    edges: list[tuple[int, int]]
    weights: list[int] | None = None

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        if self.weights is None:
            g.add_edges_from(self.edges)
        else:
            for (a, b), w in zip(self.edges, self.weights):
                g.add_edge(a, b, weight=w)
        return g


@dataclass
class StructuralProfile:
    n: int
    m: int
    c: int
    density: float
    uniform_r: int | None
    regular_k: int | None
    intersecting_s: int | None
    cooccurrent_c: int | None
    diameter: int | None
    d_min: int | None
    component_count: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "c": self.c,
            "density": self.density,
            "uniform_r": self.uniform_r,
            "regular_k": self.regular_k,
            "intersecting_s": self.intersecting_s,
            "cooccurrent_c": self.cooccurrent_c,
            "diameter": self.diameter,
            "d_min": self.d_min,
            "components": self.component_count,
        }


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Immutable multi-hypergraph over dense node indices ``0..n-1``.

    Edges keep their input order and may repeat. Each edge is stored as a
    sorted tuple of distinct node indices.
    """

    node_count: int
    edges: tuple[tuple[int, ...], ...]
    node_labels: tuple[str, ...]
    _bfs_memo: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if len(self.node_labels) != self.node_count:
            raise ValueError("node_labels must have one entry per node")
        for idx, e in enumerate(self.edges):
            if len(e) == 0:
                raise ValueError(f"edge {idx} is empty")
            if len(set(e)) != len(e):
                raise ValueError(f"edge {idx} repeats a node")
            if e[0] < 0 or e[-1] >= self.node_count or list(e) != sorted(e):
                raise ValueError(f"edge {idx} has invalid node indices")

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Iterable[int]],
        node_count: int | None = None,
        node_labels: Sequence[str] | None = None,
    ) -> "Hypergraph":
        normalized = tuple(tuple(sorted(set(int(v) for v in e))) for e in edges)
        if node_count is None:
            node_count = 1 + max((e[-1] for e in normalized if e), default=-1)
        if node_labels is None:
            node_labels = [str(i) for i in range(node_count)]
        return cls(node_count, normalized, tuple(node_labels))

    # -- basic statistics -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence_count(self) -> int:
        return sum(len(e) for e in self.edges)

    @cached_property
    def cardinalities(self) -> np.ndarray:
        return np.array([len(e) for e in self.edges], dtype=np.int64)

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.node_count)]
        for idx, e in enumerate(self.edges):
            for v in e:
                inc[v].append(idx)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def cooccurrence(self) -> tuple[dict[int, int], ...]:
        """Per node, neighbor -> number of edges containing both."""
        co: list[Counter] = [Counter() for _ in range(self.node_count)]
        for e in self.edges:
            for a in e:
                c = co[a]
                for b in e:
                    if b != a:
                        c[b] += 1
        return tuple(dict(sorted(c.items())) for c in co)

    @cached_property
    def _neighbor_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.fromiter(c.keys(), dtype=np.int64, count=len(c)) for c in self.cooccurrence)

    def degree(self, i: int) -> int:
        return len(self.incident_edges[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(x) for x in self.incident_edges], dtype=np.int64)

    def node_neighborhood(self, i: int) -> set[int]:
        return set(self.cooccurrence[i])

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of ``i`` (excluding ``i``)."""
        return self._neighbor_arrays[i]

    def edge_neighborhood(self, e: int) -> set[int]:
        out = set()
        for v in self.edges[e]:
            out.update(self.incident_edges[v])
        out.discard(e)
        return out

    def is_adjacent(self, i: int, j: int) -> bool:
        return j in self.cooccurrence[i]

    # -- expansions -------------------------------------------------------

    def clique_expansion(self, weighted: bool = False) -> Graph:
        pairs: list[tuple[int, int]] = []
        weights: list[int] = []
        for a in range(self.node_count):
            for b, w in self.cooccurrence[a].items():
                if b > a:
                    pairs.append((a, b))
                    weights.append(w)
        return Graph(self.node_count, pairs, weights if weighted else None)

    def star_expansion(self) -> Graph:
        n = self.node_count
        pairs = [(v, n + idx) for idx, e in enumerate(self.edges) for v in e]
        return Graph(n + self.edge_count, pairs)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse 0/1 adjacency of the unweighted clique expansion."""
        rows, cols = [], []
        for a, nb in enumerate(self._neighbor_arrays):
            rows.append(np.full(len(nb), a, dtype=np.int64))
            cols.append(nb)
        r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
        data = np.ones(len(r), dtype=np.float64)
        return sp.csr_matrix((data, (r, c)), shape=(self.node_count, self.node_count))

    # -- distances ----------------------------------------------------------

    def distances_from(self, i: int, cap: int | None = None) -> dict[int, int]:
        """Breadth-first hop distances from ``i``; nodes beyond ``cap`` are omitted."""
        key = (i, cap)
        with self._lock:
            hit = self._bfs_memo.get(key)
        if hit is not None:
            return dict(hit)
        dist = {i: 0}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if cap is not None and du >= cap:
                continue
            for w in self.cooccurrence[u]:
                if w not in dist:
                    dist[w] = du + 1
                    queue.append(w)
        with self._lock:
            self._bfs_memo[key] = dist
        return dict(dist)

    def distance_rows(self, sources: Sequence[int], cap: int | None = None) -> np.ndarray:
        """Dense hop-distance rows for ``sources``; unreachable (or beyond cap) is -1."""
        src = np.asarray(sources, dtype=np.int64)
        if len(src) == 0:
            return np.empty((0, self.node_count), dtype=np.int32)
        limit = np.inf if cap is None else float(cap)
        d = csgraph.dijkstra(self.adjacency, directed=False, indices=src, unweighted=True, limit=limit)
        out = np.full(d.shape, -1, dtype=np.int32)
        finite = np.isfinite(d)
        out[finite] = d[finite].astype(np.int32)
        return out

    def components(self) -> tuple[int, np.ndarray]:
        return csgraph.connected_components(self.adjacency, directed=False)

    def diameter(self) -> int | None:
        """Exact diameter via all-pairs BFS, ``None`` when disconnected."""
        ncomp, _ = self.components()
        if ncomp != 1:
            return None
        if self.node_count == 1:
            return 0
        d = self.distance_rows(range(self.node_count))
        return int(d.max())

    # -- structure ----------------------------------------------------------

    def structural_profile(self, exact_diameter: bool = False) -> StructuralProfile:
        n, m, c = self.node_count, self.edge_count, self.incidence_count
        cards = set(self.cardinalities.tolist())
        degs = set(self.degrees().tolist())

        inter: Counter = Counter()
        for inc in self.incident_edges:
            for e, f in combinations(inc, 2):
                inter[(e, f)] += 1
        inter_sizes = set(inter.values())

        co_values = set()
        for row in self.cooccurrence:
            co_values.update(row.values())

        ncomp, _ = self.components()
        return StructuralProfile(
            n=n,
            m=m,
            c=c,
            density=c / (n * m) if n and m else 0.0,
            uniform_r=cards.pop() if len(cards) == 1 else None,
            regular_k=degs.pop() if len(degs) == 1 else None,
            intersecting_s=inter_sizes.pop() if len(inter_sizes) == 1 else None,
            cooccurrent_c=co_values.pop() if len(co_values) == 1 else None,
            diameter=self.diameter() if exact_diameter else None,
            d_min=1 if any(len(e) >= 2 for e in self.edges) else None,
            component_count=int(ncomp),
        )

    # -- I/O ------------------------------------------------------------------

    def to_text(self) -> str:
        lab = self.node_labels
        return "".join(" ".join(lab[v] for v in e) + "\n" for e in self.edges)

    def same_edges(self, other: "Hypergraph") -> bool:
        """Edge families equal as labelled sets, in order."""
        mine = [frozenset(self.node_labels[v] for v in e) for e in self.edges]
        theirs = [frozenset(other.node_labels[v] for v in e) for e in other.edges]
        return mine == theirs


def parse_hypergraph(text: str) -> Hypergraph:
    """Parse an edge list: one edge per line, comma- or whitespace-separated labels.

    Blank lines and lines starting with ``#`` are skipped.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        members: dict[int, None] = {}
        for tok in _TOKEN_SPLIT.split(line):
            if not tok:
                continue
            if tok not in index:
                index[tok] = len(labels)
                labels.append(tok)
            members[index[tok]] = None
        if not members:
            raise ParseError(f"line {lineno}: empty edge", lineno)
        edges.append(tuple(sorted(members)))
    return Hypergraph(len(labels), tuple(edges), tuple(labels))


def read_hypergraph(path) -> Hypergraph:
    with open(path, encoding="utf-8") as fh:
        return parse_hypergraph(fh.read())


def write_hypergraph(h: Hypergraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(h.to_text())
