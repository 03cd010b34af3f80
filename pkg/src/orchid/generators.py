"""Random hypergraph models and analytic reference constructions.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``. Models
that fill incidence cells draw one child stream per edge
(``SeedSequence(seed).spawn(m)``), so each edge's members depend only on the
seed and the edge index.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import SpecError
from .hypergraph import Hypergraph


def _edge_streams(seed: int, m: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(m)]


def _finish(n: int, members: list[np.ndarray]) -> Hypergraph:
    edges = [tuple(int(v) for v in e) for e in members if len(e)]
    return Hypergraph.from_edges(edges, node_count=n)


def gen_configuration(degree_seq, card_seq, seed: int = 0) -> Hypergraph:
    """Pair shuffled node stubs with edge slots; repeated (node, edge) pairs are dropped."""
    degrees = np.asarray(degree_seq, dtype=np.int64)
    cards = np.asarray(card_seq, dtype=np.int64)
    if (degrees < 0).any() or (cards < 0).any():
        raise SpecError("degrees and cardinalities must be non-negative")
    if degrees.sum() != cards.sum():
        raise SpecError(f"degree sum {degrees.sum()} != cardinality sum {cards.sum()}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    rng.shuffle(stubs)
    slots = np.repeat(np.arange(len(cards)), cards)
    members: list[set[int]] = [set() for _ in range(len(cards))]
    for v, e in zip(stubs.tolist(), slots.tolist()):
        members[e].add(v)
    return _finish(len(degrees), [np.array(sorted(s), dtype=np.int64) for s in members])


def gen_erdos_renyi(n: int, m: int, p: float, seed: int = 0) -> Hypergraph:
    """Fill each of the ``n * m`` incidence cells independently with probability ``p``."""
    if n < 1 or m < 1:
        raise SpecError("n and m must be positive")
    if not 0 <= p <= 1:
        raise SpecError("p must lie in [0, 1]")
    members = [np.flatnonzero(g.random(n) < p) for g in _edge_streams(seed, m)]
    return _finish(n, members)


@dataclass
class BlockModelSample:
    hypergraph: Hypergraph
    node_communities: np.ndarray
    edge_communities: np.ndarray  # community of each *kept* edge


def gen_hsbm(node_comm_sizes, edge_comm_sizes, affinity, seed: int = 0) -> BlockModelSample:
    """Hypergraph stochastic block model.

    Cell ``(i, e)`` is filled with probability
    ``affinity[community(i)][community(e)]``. Edges left empty are dropped,
    together with their community entry.
    """
    node_sizes = np.asarray(node_comm_sizes, dtype=np.int64)
    edge_sizes = np.asarray(edge_comm_sizes, dtype=np.int64)
    aff = np.asarray(affinity, dtype=np.float64)
    if aff.shape != (len(node_sizes), len(edge_sizes)):
        raise SpecError(f"affinity shape {aff.shape} != ({len(node_sizes)}, {len(edge_sizes)})")
    if ((aff < 0) | (aff > 1)).any():
        raise SpecError("affinities must lie in [0, 1]")
    if (node_sizes < 0).any() or (edge_sizes < 0).any():
        raise SpecError("community sizes must be non-negative")
    n, m = int(node_sizes.sum()), int(edge_sizes.sum())
    if n < 1 or m < 1:
        raise SpecError("need at least one node and one edge")
    node_comm = np.repeat(np.arange(len(node_sizes)), node_sizes)
    edge_comm = np.repeat(np.arange(len(edge_sizes)), edge_sizes)
    members = []
    for e, g in enumerate(_edge_streams(seed, m)):
        prob = aff[node_comm, edge_comm[e]]
        members.append(np.flatnonzero(g.random(n) < prob))
    kept = np.array([len(x) > 0 for x in members], dtype=bool)
    return BlockModelSample(_finish(n, members), node_comm, edge_comm[kept])


def make_hyperclique(n: int, r: int) -> Hypergraph:
    """All ``r``-subsets of ``n`` nodes."""
    if not 1 <= r <= n:
        raise SpecError("need 1 <= r <= n")
    return Hypergraph.from_edges(combinations(range(n), r), node_count=n)


def make_hypergrid(cycle_len: int, r: int) -> Hypergraph:
    """Windows of ``r`` consecutive nodes on a cycle of ``cycle_len`` nodes."""
    if r < 2 or cycle_len <= 2 * r:
        raise SpecError("need r >= 2 and cycle_len > 2 r")
    edges = [[(s + t) % cycle_len for t in range(r)] for s in range(cycle_len)]
    return Hypergraph.from_edges(edges, node_count=cycle_len)


@dataclass
class HypertreeSample:
    hypergraph: Hypergraph
    central_edge: int
    levels: np.ndarray  # edge-distance of each node from the central edge


def make_hypertree(r: int, k: int, depth: int) -> HypertreeSample:
    """Truncated ``r``-uniform, ``k``-regular, 1-intersecting hypertree.

    The central edge (index 0) holds the level-0 nodes. Every node below
    ``depth`` gets ``k - 1`` further edges, each adding ``r - 1`` fresh nodes
    one level down, so nodes above the last level have degree ``k``.
    """
    if r < 2 or k < 1 or depth < 3:
        raise SpecError("need r >= 2, k >= 1, depth >= 3")
    edges = [list(range(r))]
    levels = [0] * r
    frontier = list(range(r))
    for level in range(1, depth + 1):
        nxt = []
        for v in frontier:
            for _ in range(k - 1):
                fresh = list(range(len(levels), len(levels) + r - 1))
                levels.extend([level] * (r - 1))
                edges.append([v] + fresh)
                nxt.extend(fresh)
        frontier = nxt
    h = Hypergraph.from_edges(edges, node_count=len(levels))
    return HypertreeSample(h, 0, np.array(levels, dtype=np.int64))
