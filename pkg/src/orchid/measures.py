"""Alpha-lazy random-walk measures on hypergraph nodes.

Three ways of spreading the moving ``1 - alpha`` mass over the neighbors of
a node:

``en``  uniform over neighbors (walk on the unweighted clique expansion),
``ee``  uniform over non-singleton incident edges, then uniform inside the edge,
``we``  incident edges weighted by ``|e| - 1``, then uniform inside the edge
        (walk on the weighted clique expansion).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import IsolatedNode
from .hypergraph import Hypergraph


class MeasureKind(str, enum.Enum):
    EN = "en"
    EE = "ee"
    WE = "we"

    @classmethod
    def parse(cls, value: "MeasureKind | str") -> "MeasureKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown measure kind {value!r}; expected en, ee or we") from None


@dataclass(frozen=True, eq=False)
class SparseMeasure:
    """Finitely supported probability measure attached to ``base``.

    ``support`` is sorted and duplicate free. ``masses`` is float64, or an
    object array of ``Fraction`` in exact mode.
    """

    base: int
    support: np.ndarray
    masses: np.ndarray

    @property
    def exact(self) -> bool:
        return self.masses.dtype == object

    def as_dict(self) -> dict[int, float]:
        return {int(k): v for k, v in zip(self.support, self.masses)}

    def mass_at(self, node: int):
        pos = np.searchsorted(self.support, node)
        if pos < len(self.support) and self.support[pos] == node:
            return self.masses[pos]
        return 0

    def total(self):
        return sum(self.masses.tolist()) if self.exact else float(self.masses.sum())

    def to_json(self) -> dict:
        return {
            "node": int(self.base),
            "support": [int(k) for k in self.support],
            "mass": [float(x) for x in self.masses],
        }

    @classmethod
    def dirac(cls, node: int, exact: bool = False) -> "SparseMeasure":
        masses = np.array([Fraction(1)], dtype=object) if exact else np.ones(1)
        return cls(node, np.array([node], dtype=np.int64), masses)

    @classmethod
    def from_dict(cls, base: int, mapping: dict) -> "SparseMeasure":
        keys = sorted(k for k, v in mapping.items() if v != 0)
        vals = [mapping[k] for k in keys]
        exact = any(isinstance(v, Fraction) for v in vals)
        masses = np.array(vals, dtype=object if exact else np.float64)
        return cls(base, np.array(keys, dtype=np.int64), masses)


def _neighbor_weights(h: Hypergraph, i: int, kind: MeasureKind, exact: bool):
    """Unnormalized weights over ``i``'s neighbors plus their normalizer."""
    co = h.cooccurrence[i]
    one = Fraction(1) if exact else 1.0
    if kind is MeasureKind.EN:
        return {j: one for j in co}, one * len(co)
    if kind is MeasureKind.WE:
        total = sum(len(h.edges[e]) - 1 for e in h.incident_edges[i])
        return {j: one * c for j, c in co.items()}, one * total
    weights: dict[int, object] = {}
    real_edges = 0
    for e in h.incident_edges[i]:
        members = h.edges[e]
        if len(members) < 2:
            continue
        real_edges += 1
        share = one / (len(members) - 1)
        for j in members:
            if j != i:
                weights[j] = weights.get(j, 0) + share
    return weights, one * real_edges


def build_measure(
    h: Hypergraph, i: int, kind: MeasureKind | str, alpha: float | Fraction, exact: bool = False
) -> SparseMeasure:
    """Walk measure of node ``i``: mass ``alpha`` stays, the rest moves per ``kind``."""
    kind = MeasureKind.parse(kind)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if exact:
        alpha = Fraction(alpha)
    if alpha == 1:
        return SparseMeasure.dirac(i, exact)
    weights, norm = _neighbor_weights(h, i, kind, exact)
    if not weights or norm == 0:
        raise IsolatedNode(i)
    moving = 1 - alpha
    entries = {j: moving * w / norm for j, w in weights.items()}
    if alpha:
        entries[i] = alpha
    return SparseMeasure.from_dict(i, entries)


def measure_matrix(
    h: Hypergraph, kind: MeasureKind | str, alpha: float, exact: bool = False
) -> list[SparseMeasure | None]:
    """One measure per node; ``None`` marks nodes that raised :class:`IsolatedNode`."""
    out: list[SparseMeasure | None] = []
    for i in range(h.node_count):
        try:
            out.append(build_measure(h, i, kind, alpha, exact))
        except IsolatedNode:
            out.append(None)
    return out

