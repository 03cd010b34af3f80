"""Ollivier-Ricci curvatures of hypergraphs: directional, edge, node and subset.

Edge curvatures aggregate walk measures of an edge's nodes in one of three
ways: the mean pairwise W1 (``mean``), the mean W1 to the Wasserstein
barycenter scaled by ``|e| / (|e| - 1)`` (``barycenter``), or the largest
pairwise W1 (``max``).
"""

from __future__ import annotations

import enum
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import DiameterUnavailable, DistanceCapExceeded, InfiniteDistance, IsolatedNode, Unsupported
from .hypergraph import Hypergraph
from .measures import MeasureKind, SparseMeasure, build_measure
from .transport import (
    LOCAL_CAP,
    distance_cache,
    reduce_instance,
    solve_transport,
    wasserstein1,
    wasserstein_barycenter,
)

# Above these sizes barycenter curvature gets slow; warn but continue.
BARYCENTER_EDGE_WARN = 8
BARYCENTER_BALL_WARN = 200
# Dense distance matrices are used up to this many nodes.
DENSE_NODE_LIMIT = 4000


class Aggregator(str, enum.Enum):
    MEAN = "mean"
    BARYCENTER = "barycenter"
    MAX = "max"

    @classmethod
    def parse(cls, value: "Aggregator | str") -> "Aggregator":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"a": "mean", "b": "barycenter", "m": "max", "bary": "barycenter"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown aggregator {value!r}; expected mean, barycenter or max") from None


@dataclass(frozen=True)
class CurvatureConfig:
    measure: MeasureKind = MeasureKind.EN
    agg: Aggregator = Aggregator.MEAN
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "measure", MeasureKind.parse(self.measure))
        object.__setattr__(self, "agg", Aggregator.parse(self.agg))
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def to_json(self) -> dict:
        return {"measure": self.measure.value, "agg": self.agg.value, "alpha": float(self.alpha)}


ALL_FAMILIES = frozenset({"edge", "directional", "node_edges", "node_neighborhood"})


@dataclass
class CurvatureResult:
    config: CurvatureConfig
    edge_curvature: list[float | None] | None = None
    directional: dict[tuple[int, int], float] | None = None
    node_curvature_edges: list[float | None] | None = None
    node_curvature_neighborhood: list[float | None] | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self, h: Hypergraph) -> dict:
        lab = h.node_labels
        out: dict = {"config": self.config.to_json()}
        if self.edge_curvature is not None:
            out["edge_curvature"] = [_num(v) for v in self.edge_curvature]
        if self.directional is not None:
            out["directional"] = [[lab[i], lab[j], _num(v)] for (i, j), v in self.directional.items()]
        if self.node_curvature_edges is not None:
            out["node_curvature_edges"] = {lab[i]: _num(v) for i, v in enumerate(self.node_curvature_edges)}
        if self.node_curvature_neighborhood is not None:
            out["node_curvature_neighborhood"] = {
                lab[i]: _num(v) for i, v in enumerate(self.node_curvature_neighborhood)
            }
        if self.meta:
            out["meta"] = self.meta
        return out


def _num(v):
    return None if v is None else float(v)


class CurvatureEngine:
    """Curvature computations for one hypergraph, measure kind and alpha.

    Walk measures and W1 values are memoized (W1 by unordered node pair), so
    directional, edge and node curvatures share solves.
    """

    def __init__(
        self,
        h: Hypergraph,
        measure: MeasureKind | str = MeasureKind.EN,
        alpha: float = 0.0,
        *,
        exact: bool = False,
        barycenter_support: str = "two-hop",
        count_singleton_edges: bool = False,
    ):
        self.h = h
        self.kind = MeasureKind.parse(measure)
        self.alpha = alpha
        self.exact = exact
        self.barycenter_support = barycenter_support
        self.count_singleton_edges = count_singleton_edges
        self.distances = distance_cache(h)
        self._measures: dict[int, SparseMeasure | None] = {}
        self._w1: dict[tuple[int, int], float] = {}
        self._lock = threading.Lock()
        self._dense: np.ndarray | None = None

    # -- building blocks ----------------------------------------------------

    def measure(self, i: int) -> SparseMeasure | None:
        hit = self._measures.get(i, False)
        if hit is not False:
            return hit
        try:
            mu = build_measure(self.h, i, self.kind, self.alpha, self.exact)
        except IsolatedNode:
            mu = None
        with self._lock:
            self._measures[i] = mu
        return mu

    def _require(self, i: int) -> SparseMeasure:
        mu = self.measure(i)
        if mu is None:
            raise IsolatedNode(i)
        return mu

    def _local_dense(self) -> np.ndarray | None:
        if self._dense is None and self.h.node_count <= DENSE_NODE_LIMIT:
            d = self.h.distance_rows(range(self.h.node_count), LOCAL_CAP).astype(np.int16)
            with self._lock:
                if self._dense is None:
                    self._dense = d
        return self._dense

    def _adjacent_w1(self, i: int, j: int):
        a, b = reduce_instance(self._require(i), self._require(j))
        if len(a.support) == 0:
            return Fraction(0) if self.exact else 0.0
        dense = self._local_dense()
        if dense is not None:
            cost = dense[np.ix_(a.support, b.support)]
            if (cost < 0).any():
                raise DistanceCapExceeded(f"support of pair ({i}, {j}) beyond depth {LOCAL_CAP}")
            top = int(cost.max())
            if top > self.distances.max_local_cost:
                with self._lock:
                    self.distances.max_local_cost = max(self.distances.max_local_cost, top)
        else:
            cost = self.distances.cost_matrix(a.support, b.support, LOCAL_CAP)
        return solve_transport(a.masses, b.masses, cost)[0]

    def w1(self, i: int, j: int):
        """W1 between the walk measures of ``i`` and ``j``."""
        key = (i, j) if i < j else (j, i)
        hit = self._w1.get(key)
        if hit is not None:
            return hit
        if i == j:
            value = 0.0
        elif self.h.is_adjacent(i, j):
            value = self._adjacent_w1(i, j)
        else:
            value = wasserstein1(self.h, self._require(i), self._require(j), cap=None).cost
        with self._lock:
            self._w1[key] = value
        return value

    def prefetch(self, pairs: list[tuple[int, int]], threads: int = 1) -> None:
        """Solve many adjacent pairs, optionally across worker threads."""
        todo = [p for p in pairs if (min(p), max(p)) not in self._w1]
        if not todo:
            return
        self._local_dense()
        for i in {v for p in todo for v in p}:
            self.measure(i)
        todo = [p for p in todo if self._measures[p[0]] is not None and self._measures[p[1]] is not None]
        if threads <= 1 or len(todo) < 64:
            for i, j in todo:
                self.w1(i, j)
            return
        chunks = [todo[s : s + 256] for s in range(0, len(todo), 256)]

        def run(chunk):
            return [self._adjacent_w1(i, j) for i, j in chunk]

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for chunk, values in zip(chunks, pool.map(run, chunks)):
                for (i, j), v in zip(chunk, values):
                    self._w1[(min(i, j), max(i, j))] = v

    def distance(self, i: int, j: int) -> int:
        d = self.h.distances_from(i).get(j)
        if d is None:
            raise InfiniteDistance(f"nodes {i} and {j} lie in different components")
        return d

    # -- aggregation --------------------------------------------------------

    def aggregate(self, nodes: tuple[int, ...], agg: Aggregator | str):
        agg = Aggregator.parse(agg)
        if len(nodes) < 2:
            raise ValueError("aggregation needs at least two nodes")
        if agg is Aggregator.BARYCENTER:
            measures = [self._require(i) for i in nodes]
            if len(nodes) > BARYCENTER_EDGE_WARN:
                warnings.warn(f"barycenter over {len(nodes)} measures may be slow", RuntimeWarning, stacklevel=3)
            _, mean = wasserstein_barycenter(
                self.h, measures, self.barycenter_support, warn_above=BARYCENTER_BALL_WARN
            )
            return len(nodes) * mean / (len(nodes) - 1)
        values = [self.w1(i, j) for i, j in combinations(nodes, 2)]
        if agg is Aggregator.MAX:
            return max(values)
        return sum(values) / len(values)

    # -- curvatures ---------------------------------------------------------

    def directional(self, i: int, j: int):
        if i == j:
            raise ValueError("directional curvature needs two distinct nodes")
        d = self.distance(i, j)
        return 1 - self.w1(i, j) / d

    def edge(self, e: int, agg: Aggregator | str):
        nodes = self.h.edges[e]
        if len(nodes) < 2:
            return None
        return 1 - self.aggregate(nodes, agg)

    def subset(self, s: Iterable[int], agg: Aggregator | str):
        nodes = tuple(sorted(set(int(v) for v in s)))
        if len(nodes) < 2:
            raise ValueError("subset curvature needs at least two nodes")
        extent = max(self.distance(i, j) for i, j in combinations(nodes, 2))
        return 1 - self.aggregate(nodes, agg) / extent

    def node_neighborhood(self, i: int):
        nb = self.h.neighbors(i)
        if len(nb) == 0 or self.measure(i) is None:
            return None
        return sum(self.directional(i, int(j)) for j in nb) / len(nb)

    def node_edges(self, i: int, agg: Aggregator | str, edge_values: list | None = None):
        if self.measure(i) is None:
            return None
        incident = self.h.incident_edges[i]
        vals = []
        for e in incident:
            if len(self.h.edges[e]) < 2:
                continue
            vals.append(edge_values[e] if edge_values is not None else self.edge(e, agg))
        if not vals:
            return None
        denom = len(incident) if self.count_singleton_edges else len(vals)
        return sum(vals) / denom

    def bounds(self, e: int, agg: Aggregator | str, diameter: int | None = None):
        """Total-variation sandwich around the mean or max edge curvature.

        Each pairwise W1 lies between ``d_min * TV`` and ``diam * TV`` with
        ``TV = ||mu_i - mu_j||_1 / 2``; ``d_min`` is 1 for any hypergraph
        with an edge of two or more nodes.
        """
        agg = Aggregator.parse(agg)
        if agg is Aggregator.BARYCENTER:
            raise Unsupported("bounds exist only for the mean and max aggregators")
        if diameter is None:
            diameter = self.h.diameter()
            if diameter is None:
                raise DiameterUnavailable("hypergraph is disconnected")
        nodes = self.h.edges[e]
        if len(nodes) < 2:
            return None
        tvs = [total_variation(self._require(i), self._require(j)) for i, j in combinations(nodes, 2)]
        spread = max(tvs) if agg is Aggregator.MAX else sum(tvs) / len(tvs)
        d_min = 1
        return 1 - diameter * spread, 1 - d_min * spread


def total_variation(mu: SparseMeasure, nu: SparseMeasure):
    diff = dict(zip(mu.support.tolist(), mu.masses.tolist()))
    for k, m in zip(nu.support.tolist(), nu.masses.tolist()):
        diff[k] = diff.get(k, 0) - m
    return sum(abs(x) for x in diff.values()) / 2


def _engine(h: Hypergraph, cfg: CurvatureConfig, **kw) -> CurvatureEngine:
    return CurvatureEngine(h, cfg.measure, cfg.alpha, **kw)


def directional_curvature(h: Hypergraph, i: int, j: int, cfg: CurvatureConfig, **kw):
    return _engine(h, cfg, **kw).directional(i, j)


def edge_curvature(h: Hypergraph, e: int, cfg: CurvatureConfig, **kw):
    return _engine(h, cfg, **kw).edge(e, cfg.agg)


def node_curvature_edges(h: Hypergraph, i: int, cfg: CurvatureConfig, **kw):
    return _engine(h, cfg, **kw).node_edges(i, cfg.agg)


def node_curvature_neighborhood(h: Hypergraph, i: int, cfg: CurvatureConfig, **kw):
    return _engine(h, cfg, **kw).node_neighborhood(i)


def subset_curvature(h: Hypergraph, s: Iterable[int], cfg: CurvatureConfig, **kw):
    return _engine(h, cfg, **kw).subset(s, cfg.agg)


def curvature_bounds(h: Hypergraph, e: int, cfg: CurvatureConfig, diameter: int | None = None, **kw):
    return _engine(h, cfg, **kw).bounds(e, cfg.agg, diameter)


def adjacent_pairs(h: Hypergraph) -> list[tuple[int, int]]:
    """Every unordered within-edge node pair, sorted."""
    return [(a, b) for a in range(h.node_count) for b in h.cooccurrence[a] if b > a]


def all_curvatures(
    h: Hypergraph,
    cfg: CurvatureConfig,
    which: Iterable[str] = ALL_FAMILIES,
    *,
    threads: int = 1,
    engine: CurvatureEngine | None = None,
    **kw,
) -> CurvatureResult:
    """Batch driver: selected curvature families for every edge, pair and node."""
    which = set(which)
    unknown = which - ALL_FAMILIES
    if unknown:
        raise ValueError(f"unknown curvature families: {sorted(unknown)}")
    eng = engine or _engine(h, cfg, **kw)
    result = CurvatureResult(cfg)
    if not which:
        return result

    pairs = adjacent_pairs(h)
    needs_pairs = which & {"directional", "node_neighborhood"} or (
        cfg.agg is not Aggregator.BARYCENTER and which & {"edge", "node_edges"}
    )
    if needs_pairs:
        eng.prefetch(pairs, threads)

    edge_values = None
    if which & {"edge", "node_edges"}:
        edge_values = [eng.edge(e, cfg.agg) for e in range(h.edge_count)]
        if "edge" in which:
            result.edge_curvature = edge_values
    if "directional" in which:
        result.directional = {
            (i, j): eng.directional(i, j)
            for i, j in pairs
            if eng.measure(i) is not None and eng.measure(j) is not None
        }
    if "node_edges" in which:
        result.node_curvature_edges = [eng.node_edges(i, cfg.agg, edge_values) for i in range(h.node_count)]
    if "node_neighborhood" in which:
        result.node_curvature_neighborhood = [eng.node_neighborhood(i) for i in range(h.node_count)]
    result.meta = {"max_local_cost": int(eng.distances.max_local_cost)}
    return result
