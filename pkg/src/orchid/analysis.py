"""Statistics over curvature feature distributions.

Kernels between whole distributions, kernel PCA, spectral clustering, a
permutation MMD two-sample test, the Wasserstein clustering coefficient and
normalized mutual information between two parametrizations.
"""

from __future__ import annotations

import warnings
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from .curvature import CurvatureResult
from .errors import EmptyFeature, ShapeError
from .hypergraph import Hypergraph
from .transport import w1_empirical_1d

CURVATURE_FEATURES = (
    "edge_curvature",
    "directional_curvature",
    "node_curvature_edges",
    "node_curvature_neighborhood",
)
STRUCTURAL_FEATURES = ("edge_cardinality", "edge_neighborhood_size", "node_degree", "node_neighborhood_size")
FEATURE_KINDS = CURVATURE_FEATURES + STRUCTURAL_FEATURES

NMI_NORMS = ("max", "min", "mean", "sqrt")


@dataclass
class FeatureDistribution:
    source_id: str
    feature_kind: str
    samples: np.ndarray

    def __post_init__(self):
        if self.feature_kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.feature_kind!r}")
        self.samples = np.asarray(self.samples, dtype=np.float64).ravel()
        if self.samples.size == 0:
            raise EmptyFeature(f"{self.source_id or 'source'}: no {self.feature_kind} values")

    def __len__(self) -> int:
        return self.samples.size


def structural_features(h: Hypergraph) -> dict[str, list[int]]:
    """Baseline per-edge and per-node counts."""
    return {
        "edge_cardinality": [int(c) for c in h.cardinalities],
        "edge_neighborhood_size": [len(h.edge_neighborhood(e)) for e in range(h.edge_count)],
        "node_degree": [int(d) for d in h.degrees()],
        "node_neighborhood_size": [len(h.neighbors(i)) for i in range(h.node_count)],
    }


def _curvature_values(result: CurvatureResult, kind: str):
    if kind == "edge_curvature":
        return result.edge_curvature
    if kind == "directional_curvature":
        return None if result.directional is None else list(result.directional.values())
    if kind == "node_curvature_edges":
        return result.node_curvature_edges
    return result.node_curvature_neighborhood


def _json_values(doc: Mapping, kind: str):
    if kind == "edge_curvature":
        return doc.get("edge_curvature")
    if kind == "directional_curvature":
        rows = doc.get("directional")
        return None if rows is None else [r[2] for r in rows]
    if kind in ("node_curvature_edges", "node_curvature_neighborhood"):
        values = doc.get(kind)
        return None if values is None else list(values.values())
    return (doc.get("baseline") or {}).get(kind)


def feature_distribution(
    source: CurvatureResult | Hypergraph | Mapping,
    feature_kind: str,
    *,
    hypergraph: Hypergraph | None = None,
    source_id: str = "",
) -> FeatureDistribution:
    """Flat sample list of one feature, with nulls dropped.

    ``source`` is a curvature result, a hypergraph (structural features only)
    or a result document as written by the command line tool. Structural
    features of a result need ``hypergraph``.
    """
    if feature_kind not in FEATURE_KINDS:
        raise ValueError(f"unknown feature kind {feature_kind!r}")
    if isinstance(source, Hypergraph):
        hypergraph, source = source, None
    if feature_kind in STRUCTURAL_FEATURES and hypergraph is not None:
        values = structural_features(hypergraph)[feature_kind]
    elif isinstance(source, CurvatureResult):
        if feature_kind in STRUCTURAL_FEATURES:
            raise ValueError(f"{feature_kind} needs the hypergraph")
        values = _curvature_values(source, feature_kind)
    elif isinstance(source, Mapping):
        values = _json_values(source, feature_kind)
    else:
        raise ValueError(f"{feature_kind} is not computable from {type(source).__name__}")
    if values is None:
        raise EmptyFeature(f"{source_id or 'source'}: {feature_kind} was not computed")
    return FeatureDistribution(source_id, feature_kind, [v for v in values if v is not None])


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, FeatureDistribution) else np.asarray(x, dtype=np.float64).ravel()


def quantile_vector(dist, v: int = 64) -> np.ndarray:
    """Empirical quantiles at the midpoints ``(k + 1/2) / v``."""
    if v < 1:
        raise ValueError("v must be positive")
    x = _samples(dist)
    if x.size == 0:
        raise EmptyFeature("no samples")
    return np.quantile(x, (np.arange(v) + 0.5) / v, method="inverted_cdf")


@dataclass
class KernelMatrix:
    ids: list[str]
    values: np.ndarray
    kind: str  # "rbf" or "expw"
    gamma: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "ids": list(self.ids),
            "kind": self.kind,
            "gamma": self.gamma,
            "values": self.values.tolist(),
            **({"meta": self.meta} if self.meta else {}),
        }


def _median_gamma(pairwise: np.ndarray, what: str) -> float:
    upper = pairwise[np.triu_indices_from(pairwise, k=1)]
    nonzero = upper[upper > 0]
    if nonzero.size == 0:
        warnings.warn(f"all {what} are zero; using gamma = 1", RuntimeWarning, stacklevel=3)
        return 1.0
    return float(1.0 / np.median(nonzero))


def _ids(items, ids) -> list[str]:
    if ids is not None:
        return list(ids)
    return [x.source_id if isinstance(x, FeatureDistribution) else str(k) for k, x in enumerate(items)]


def rbf_kernel_matrix(features, gamma: float | None = None, ids=None, v: int = 64) -> KernelMatrix:
    """``exp(-gamma * |x - y|^2)`` between feature vectors.

    Distributions are featurized first with :func:`quantile_vector`. The
    default ``gamma`` is the inverse median of the nonzero squared distances.
    """
    if len(features) < 2:
        raise ValueError("need at least two sources")
    x = np.stack([quantile_vector(f, v) if isinstance(f, FeatureDistribution) else np.asarray(f, float) for f in features])
    sq = np.sum(x * x, axis=1)
    d2 = np.clip(sq[:, None] + sq[None, :] - 2 * x @ x.T, 0.0, None)
    np.fill_diagonal(d2, 0.0)
    d2 = (d2 + d2.T) / 2
    g = _median_gamma(d2, "squared distances") if gamma is None else float(gamma)
    return KernelMatrix(_ids(features, ids), np.exp(-g * d2), "rbf", g)


def w1_matrix(dists, threads: int = 1) -> np.ndarray:
    """Pairwise 1-D W1 between sample sets; the upper triangle may run on threads."""
    xs = [_samples(d) for d in dists]
    n = len(xs)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(lambda p: w1_empirical_1d(xs[p[0]], xs[p[1]]), pairs))
    else:
        vals = [w1_empirical_1d(xs[a], xs[b]) for a, b in pairs]
    out = np.zeros((n, n))
    for (a, b), w in zip(pairs, vals):
        out[a, b] = out[b, a] = w
    return out


def expw_kernel_matrix(dists, gamma: float | None = None, ids=None, threads: int = 1) -> KernelMatrix:
    """``exp(-gamma * W1(x, y))`` between raw sample distributions.

    May be indefinite; consumers clip negative eigenvalues.
    """
    if len(dists) < 2:
        raise ValueError("need at least two sources")
    w = w1_matrix(dists, threads)
    g = _median_gamma(w, "W1 distances") if gamma is None else float(gamma)
    return KernelMatrix(_ids(dists, ids), np.exp(-g * w), "expw", g, {"eigenvalues_clipped": True})


def _values(k) -> np.ndarray:
    return np.asarray(k.values if isinstance(k, KernelMatrix) else k, dtype=np.float64)


def kpca_embed(k: KernelMatrix | np.ndarray, dims: int = 2) -> np.ndarray:
    """Kernel PCA coordinates, shape ``(sources, dims)``."""
    m = _values(k)
    n = m.shape[0]
    if not 1 <= dims <= n:
        raise ValueError(f"dims must lie in [1, {n}]")
    h = np.eye(n) - 1.0 / n
    centered = h @ m @ h
    lam, vec = np.linalg.eigh((centered + centered.T) / 2)
    order = np.argsort(lam)[::-1][:dims]
    lam = np.clip(lam[order], 0.0, None)
    vec = vec[:, order]
    for c in range(dims):
        if vec[np.argmax(np.abs(vec[:, c])), c] < 0:
            vec[:, c] = -vec[:, c]
    return vec * np.sqrt(lam)


def spectral_cluster(k: KernelMatrix | np.ndarray, n_clusters: int, seed: int = 0) -> np.ndarray:
    """Normalized spectral clustering on a similarity matrix.

    Labels are renumbered in order of first appearance.
    """
    a = np.clip(_values(k), 0.0, None)
    a = (a + a.T) / 2
    n = a.shape[0]
    if not 2 <= n_clusters <= n:
        raise ValueError(f"cluster count must lie in [2, {n}]")
    deg = a.sum(axis=1)
    inv = np.zeros_like(deg)
    inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    lam, vec = np.linalg.eigh(inv[:, None] * a * inv[None, :])
    top = vec[:, np.argsort(lam)[::-1][:n_clusters]]
    norms = np.linalg.norm(top, axis=1, keepdims=True)
    top = np.divide(top, norms, out=np.zeros_like(top), where=norms > 0)
    raw = KMeans(n_clusters=n_clusters, init="k-means++", n_init=10, random_state=seed).fit_predict(top)
    relabel: dict[int, int] = {}
    return np.array([relabel.setdefault(int(c), len(relabel)) for c in raw], dtype=np.int64)


def _mmd2_many(k0: np.ndarray, masks: np.ndarray, n: int, m: int) -> np.ndarray:
    x = masks.astype(np.float64)
    y = 1.0 - x
    kx = x @ k0
    xx = np.einsum("bi,bi->b", kx, x)
    xy = np.einsum("bi,bi->b", kx, y)
    yy = np.einsum("bi,bi->b", y @ k0, y)
    return xx / (n * (n - 1)) + yy / (m * (m - 1)) - 2 * xy / (n * m)


def mmd_test(xs, ys, B: int = 200, seed: int = 0) -> tuple[float, float]:
    """Unbiased MMD^2 with a permutation p-value.

    RBF kernel with ``gamma`` the inverse median of the nonzero pooled squared
    distances. Replicate ``b`` permutes with ``default_rng(seed + b)``.
    """
    x, y = _samples(xs), _samples(ys)
    n, m = x.size, y.size
    if n < 2 or m < 2:
        raise ValueError("each sample needs at least two values")
    if B < 1:
        raise ValueError("B must be positive")
    z = np.concatenate([x, y])
    d2 = (z[:, None] - z[None, :]) ** 2
    nonzero = d2[d2 > 0]
    gamma = 1.0 / np.median(nonzero) if nonzero.size else 1.0
    k0 = np.exp(-gamma * d2)
    np.fill_diagonal(k0, 0.0)
    first = np.zeros(n + m, dtype=bool)
    first[:n] = True
    observed = float(_mmd2_many(k0, first[None, :], n, m)[0])
    masks = np.stack([first[np.random.default_rng(seed + b).permutation(n + m)] for b in range(B)])
    null = _mmd2_many(k0, masks, n, m)
    # tolerate rounding so exchangeable relabelings count as ties
    hits = int(np.sum(null >= observed - 1e-12 * max(1.0, abs(observed))))
    return observed, (1 + hits) / (B + 1)


def bonferroni_adjust(pvals) -> np.ndarray:
    p = np.asarray(pvals, dtype=np.float64)
    if ((p < 0) | (p > 1)).any():
        raise ValueError("p-values must lie in [0, 1]")
    return np.minimum(1.0, p * p.size)


def wcc(labels: Sequence, dists, w: np.ndarray | None = None) -> float:
    """Wasserstein clustering coefficient of a labelled collection; lower is better.

    ``labels[k]`` is the cluster of ``dists[k]``. The cross-cluster sum runs
    over ordered pairs of distinct clusters.
    """
    labels = list(labels)
    if len(labels) != len(dists):
        raise ShapeError(f"{len(labels)} labels for {len(dists)} distributions")
    if w is None:
        w = w1_matrix(dists)
    groups: dict = {}
    for k, c in enumerate(labels):
        groups.setdefault(c, []).append(k)
    members = list(groups.values())
    intra = 0.0
    for g in members:
        if len(g) > 1:
            block = w[np.ix_(g, g)]
            intra += block[np.triu_indices(len(g), k=1)].mean()
    cross = 0.0
    for a, ga in enumerate(members):
        for b, gb in enumerate(members):
            if a != b:
                cross += w[np.ix_(ga, gb)].mean()
    return float(intra / (1.0 + cross))


def _discretize(x: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros(x.size, dtype=np.int64)
    return np.minimum(((x - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(xs, ys, bins: int = 10, norm: str = "max") -> float:
    """Mutual information of equal-width discretizations, normalized to [0, 1].

    ``norm`` picks the normalizer: max, min, arithmetic mean or geometric mean
    of the two entropies. A constant variable gives 1 when both are constant
    and 0 otherwise.
    """
    x, y = _samples(xs), _samples(ys)
    if x.size != y.size:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2 or bins < 2:
        raise ValueError("need at least two samples and two bins")
    if norm not in NMI_NORMS:
        raise ValueError(f"norm must be one of {NMI_NORMS}")
    bx, by = _discretize(x, bins), _discretize(y, bins)
    joint = np.zeros((bins, bins))
    np.add.at(joint, (bx, by), 1)
    hx, hy = _entropy(joint.sum(axis=1)), _entropy(joint.sum(axis=0))
    if hx == 0 or hy == 0:
        return 1.0 if hx == hy == 0 else 0.0
    mi = hx + hy - _entropy(joint.ravel())
    denom = {"max": max(hx, hy), "min": min(hx, hy), "mean": (hx + hy) / 2, "sqrt": np.sqrt(hx * hy)}[norm]
    return float(min(1.0, max(0.0, mi / denom)))
