"""Exact Wasserstein-1 transport over hypergraph hop distances.

The transportation kernel is compiled when the extension is available and
falls back to an identical pure-Python implementation otherwise. Set
``ORCHID_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
import threading
import warnings
import weakref
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import highspy

from ..errors import DistanceCapExceeded, InfiniteCost, OrchidError
from ..hypergraph import Hypergraph
from ..measures import SparseMeasure
from . import _kernel_py

if os.environ.get("ORCHID_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _kernel as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

#: Walk measures of adjacent nodes only need distances up to this depth.
LOCAL_CAP = 3


def solve_transport(a, b, cost, want_plan: bool = False):
    """Dispatch to the compiled kernel for floats, the Python one for exact masses."""
    exact = getattr(a, "dtype", None) == object or getattr(b, "dtype", None) == object
    if exact or _compiled is None:
        return _kernel_py.solve(a, b, cost, want_plan)
    return _compiled.solve(a, b, cost, want_plan)


@dataclass
class CouplingResult:
    cost: float
    plan: list[tuple[int, int, float]] | None = None


class DistanceCache:
    """Thread-safe memo of dense hop-distance rows, keyed by ``(source, cap)``."""

    def __init__(self, h: Hypergraph):
        self.h = h
        self._rows: dict[tuple[int, int | None], np.ndarray] = {}
        self._lock = threading.Lock()
        self.max_local_cost = 0
        self.barycenters: dict = {}

    def prefetch(self, sources, cap: int | None = None) -> None:
        with self._lock:
            missing = sorted({int(s) for s in sources if (int(s), cap) not in self._rows})
        if not missing:
            return
        block = self.h.distance_rows(missing, cap)
        with self._lock:
            for s, row in zip(missing, block):
                self._rows[(s, cap)] = row

    def rows(self, sources, cap: int | None = None) -> np.ndarray:
        self.prefetch(sources, cap)
        with self._lock:
            return np.stack([self._rows[(int(s), cap)] for s in sources])

    def cost_matrix(self, sources, targets, cap: int | None = None) -> np.ndarray:
        block = self.rows(sources, cap)[:, np.asarray(targets, dtype=np.int64)]
        if (block < 0).any():
            if cap is not None:
                raise DistanceCapExceeded(f"support pair beyond distance cap {cap}")
            raise InfiniteCost("measure supports lie in different components")
        if cap is not None:
            top = int(block.max()) if block.size else 0
            if top > self.max_local_cost:
                with self._lock:
                    self.max_local_cost = max(self.max_local_cost, top)
        return block


_caches: "weakref.WeakKeyDictionary[Hypergraph, DistanceCache]" = weakref.WeakKeyDictionary()
_caches_lock = threading.Lock()


def distance_cache(h: Hypergraph) -> DistanceCache:
    with _caches_lock:
        cache = _caches.get(h)
        if cache is None:
            cache = _caches[h] = DistanceCache(h)
        return cache


def reduce_instance(mu: SparseMeasure, nu: SparseMeasure) -> tuple[SparseMeasure, SparseMeasure]:
    """Cancel the mass both measures place on a common node.

    W1 is unchanged because an optimal coupling can leave shared mass in place.
    The reduced pair is supported on disjoint node sets with equal totals.
    """
    common, ia, ib = np.intersect1d(mu.support, nu.support, assume_unique=True, return_indices=True)
    if len(common) == 0:
        return mu, nu
    ma = mu.masses.copy()
    mb = nu.masses.copy()
    shared = np.minimum(ma[ia], mb[ib])
    ma[ia] = ma[ia] - shared
    mb[ib] = mb[ib] - shared
    keep_a = ma > 0
    keep_b = mb > 0
    return (
        SparseMeasure(mu.base, mu.support[keep_a], ma[keep_a]),
        SparseMeasure(nu.base, nu.support[keep_b], mb[keep_b]),
    )


def _is_local(h: Hypergraph, mu: SparseMeasure) -> bool:
    nb = h.cooccurrence[mu.base]
    return all(k == mu.base or k in nb for k in mu.support.tolist())


def wasserstein1(
    h: Hypergraph,
    mu: SparseMeasure,
    nu: SparseMeasure,
    want_plan: bool = False,
    reduce: bool = True,
    cap: int | None | str = "auto",
) -> CouplingResult:
    """Exact W1 between two node measures under the hop metric of ``h``.

    With ``cap="auto"`` distances are truncated at depth 3 when both measures
    are one-step walk measures of equal or adjacent base nodes; every support
    pair then lies within that depth and a miss raises
    :class:`DistanceCapExceeded`.
    """
    if cap == "auto":
        adjacent = mu.base == nu.base or h.is_adjacent(mu.base, nu.base)
        cap = LOCAL_CAP if adjacent and _is_local(h, mu) and _is_local(h, nu) else None
    a, b = reduce_instance(mu, nu) if reduce else (mu, nu)
    if len(a.support) == 0 or len(b.support) == 0:
        zero = Fraction(0) if a.exact else 0.0
        return CouplingResult(zero, [] if want_plan else None)
    cost = distance_cache(h).cost_matrix(a.support, b.support, cap)
    value, flow = solve_transport(a.masses, b.masses, cost, want_plan)
    plan = None
    if want_plan:
        plan = [
            (int(a.support[i]), int(b.support[j]), flow[i][j])
            for i in range(len(a.support))
            for j in range(len(b.support))
            if flow[i][j] != 0
        ]
    return CouplingResult(value, plan)


def jump(h: Hypergraph, mu: SparseMeasure):
    """Jump probability of ``mu``: W1 between the Dirac at its base and ``mu``."""
    dist = h.distances_from(mu.base)
    total = 0
    for k, m in zip(mu.support.tolist(), mu.masses.tolist()):
        if k not in dist:
            raise InfiniteCost(f"node {k} unreachable from {mu.base}")
        total += m * dist[k]
    return total


def ball(h: Hypergraph, centers, radius: int) -> np.ndarray:
    out: set[int] = set()
    for c in centers:
        out.update(h.distances_from(int(c), radius))
    return np.array(sorted(out), dtype=np.int64)


def _solve_barycenter_lp(kc: int, costs: list[np.ndarray], masses: list[np.ndarray]) -> tuple[float, np.ndarray]:
    """Column-wise LP: ``kc`` barycenter weights, then one plan block per measure.

    Rows of block ``t``: ``sum_l pi_t[k, l] - w[k] = 0`` for each candidate
    ``k``, then ``sum_k pi_t[k, l] = mu_t(l)`` for each support node ``l``.
    """
    t = len(costs)
    sizes = [c.shape[1] for c in costs]
    row_off = np.cumsum([0] + [kc + s for s in sizes])
    nrow = int(row_off[-1])
    # weight columns: a -1 in the first row group of every block
    w_index = (row_off[:-1][None, :] + np.arange(kc)[:, None]).ravel()
    index = [w_index]
    obj = [np.zeros(kc)]
    for b, (cmat, s) in enumerate(zip(costs, sizes)):
        k, l = np.divmod(np.arange(kc * s), s)
        pair = np.empty((kc * s, 2), dtype=np.int64)
        pair[:, 0] = row_off[b] + k
        pair[:, 1] = row_off[b] + kc + l
        index.append(pair.ravel())
        obj.append(cmat.ravel().astype(np.float64) / t)
    nplan = sum(kc * s for s in sizes)
    ncol = kc + nplan
    start = np.concatenate([np.arange(kc + 1) * t, kc * t + 2 * np.arange(1, nplan + 1)])
    value = np.concatenate([-np.ones(kc * t), np.ones(2 * nplan)])
    rhs = np.concatenate([np.concatenate([np.zeros(kc), np.asarray(m, dtype=np.float64)]) for m in masses])

    lp = highspy.HighsLp()
    lp.num_col_ = ncol
    lp.num_row_ = nrow
    lp.col_cost_ = np.concatenate(obj)
    lp.col_lower_ = np.zeros(ncol)
    lp.col_upper_ = np.full(ncol, highspy.kHighsInf)
    lp.row_lower_ = rhs
    lp.row_upper_ = rhs
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = start
    lp.a_matrix_.index_ = np.concatenate(index)
    lp.a_matrix_.value_ = value
    solver = highspy.Highs()
    solver.setOptionValue("output_flag", False)
    solver.setOptionValue("presolve", "off")
    solver.setOptionValue("solver", "simplex")
    solver.passModel(lp)
    solver.run()
    status = solver.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        raise OrchidError(f"barycenter LP failed: {solver.modelStatusToString(status)}")
    x = np.asarray(solver.getSolution().col_value[:kc])
    return float(solver.getInfo().objective_function_value), x


def wasserstein_barycenter(
    h: Hypergraph,
    measures: list[SparseMeasure],
    support_mode: str = "two-hop",
    warn_above: int | None = None,
) -> tuple[SparseMeasure, float]:
    """Minimize the mean W1 from a candidate measure to every input measure.

    Solved as one linear program with the HiGHS dual simplex. The candidate support is the union
    of 2-hop balls around the base nodes (``"two-hop"``) or the whole
    component (``"full"``). Returns the minimizer, attached to the first base
    node, and the minimized mean distance.
    """
    if len(measures) < 2:
        raise ValueError("need at least two measures")
    if any(m.exact for m in measures):
        measures = [SparseMeasure(m.base, m.support, m.masses.astype(np.float64)) for m in measures]
    cache = distance_cache(h)
    key = (support_mode, tuple((m.support.tobytes(), m.masses.tobytes()) for m in measures))
    hit = cache.barycenters.get(key)
    if hit is not None:
        return hit
    if len(measures) == 2:
        # any optimum sits at an endpoint (triangle inequality)
        result = measures[0], wasserstein1(h, measures[0], measures[1], cap=None).cost / 2
        cache.barycenters[key] = result
        return result
    bases = [m.base for m in measures]
    if support_mode == "two-hop":
        cand = ball(h, bases, 2)
    elif support_mode == "full":
        cand = ball(h, bases[:1], h.node_count)
    else:
        raise ValueError(f"unknown support mode {support_mode!r}")
    if warn_above is not None and len(cand) > warn_above:
        warnings.warn(f"barycenter candidate support has {len(cand)} nodes", RuntimeWarning, stacklevel=2)

    kc = len(cand)
    value, weights = _solve_barycenter_lp(
        kc, [cache.cost_matrix(cand, m.support) for m in measures], [m.masses for m in measures]
    )
    weights = np.clip(weights, 0.0, None)
    keep = weights > 1e-15
    bary = SparseMeasure(bases[0], cand[keep], weights[keep] / weights[keep].sum())
    result = bary, value
    cache.barycenters[key] = result
    return result


def w1_empirical_1d(xs, ys) -> float:
    """W1 between two empirical distributions on the real line.

    Integrates the absolute difference of the two step CDFs over the merged
    breakpoints, which equals integrating the quantile-function difference.
    """
    x = np.sort(np.asarray(xs, dtype=np.float64))
    y = np.sort(np.asarray(ys, dtype=np.float64))
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([x, y])
    grid.sort(kind="mergesort")
    widths = np.diff(grid)
    fx = np.searchsorted(x, grid[:-1], side="right") / len(x)
    fy = np.searchsorted(y, grid[:-1], side="right") / len(y)
    return float(np.sum(np.abs(fx - fy) * widths))


__all__ = [
    "BACKEND",
    "CouplingResult",
    "DistanceCache",
    "distance_cache",
    "jump",
    "reduce_instance",
    "solve_transport",
    "w1_empirical_1d",
    "wasserstein1",
    "wasserstein_barycenter",
]
