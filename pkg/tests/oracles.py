"""Independent reference implementations used by the tests.

None of these share code with the library's solver: distances come from
networkx or plain BFS, transport costs from scipy's generic LP or from
enumerating every vertex of the transportation polytope.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations

import networkx as nx
import numpy as np
from scipy.optimize import linprog


def bfs_distances(edges, n: int, source: int) -> dict[int, int]:
    adj = [set() for _ in range(n)]
    for e in edges:
        for a in e:
            adj[a].update(b for b in e if b != a)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def lp_w1(a, b, cost) -> float:
    """W1 by scipy's dense LP over the full coupling."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    cost = np.asarray(cost, float)
    ns, nt = cost.shape
    a_eq = np.zeros((ns + nt, ns * nt))
    for i in range(ns):
        a_eq[i, i * nt : (i + 1) * nt] = 1
    for j in range(nt):
        a_eq[ns + j, j::nt] = 1
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)


def vertex_w1(a, b, cost) -> float:
    """W1 as the cheapest feasible basic solution.

    Every basis of the transportation problem is a spanning tree of the
    complete bipartite graph; the flow on a tree is forced, found here by
    repeatedly settling leaves.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    ns, nt = len(a), len(b)
    cells = [(i, j) for i in range(ns) for j in range(nt)]
    best = np.inf
    for tree in combinations(cells, ns + nt - 1):
        parent = list(range(ns + nt))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for i, j in tree:
            ri, rj = find(i), find(ns + j)
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if not acyclic:
            continue
        rem = a + b
        open_cells = set(tree)
        flow = {}
        while open_cells:
            deg = {}
            for i, j in open_cells:
                deg[i] = deg.get(i, 0) + 1
                deg[ns + j] = deg.get(ns + j, 0) + 1
            leaf = next(v for v, d in deg.items() if d == 1)
            cell = next(c for c in open_cells if c[0] == leaf or ns + c[1] == leaf)
            x = rem[leaf]
            flow[cell] = x
            rem[cell[0]] -= x
            rem[ns + cell[1]] -= x
            open_cells.remove(cell)
        if min(flow.values()) < -1e-12:
            continue
        best = min(best, sum(f * cost[i][j] for (i, j), f in flow.items()))
    return float(best)


def oracle_w1(a, b, cost) -> float:
    if len(a) <= 4 and len(b) <= 4:
        return vertex_w1(a, b, cost)
    return lp_w1(a, b, cost)


def graph_orc(g: nx.Graph, alpha: float) -> dict[tuple[int, int], float]:
    """Ollivier-Ricci curvature of every graph edge with the alpha-lazy walk."""
    dist = dict(nx.all_pairs_shortest_path_length(g))

    def walk(x):
        nb = sorted(g.neighbors(x))
        m = {y: (1 - alpha) / len(nb) for y in nb}
        if alpha:
            m[x] = m.get(x, 0) + alpha
        return m

    out = {}
    for x, y in g.edges():
        mx, my = walk(x), walk(y)
        sx, sy = sorted(mx), sorted(my)
        cost = [[dist[u][v] for v in sy] for u in sx]
        w = lp_w1([mx[u] for u in sx], [my[v] for v in sy], cost)
        out[(min(x, y), max(x, y))] = 1 - w / dist[x][y]
    return out


def random_connected_graph(rng: np.random.Generator, n: int, extra: float) -> nx.Graph:
    """Random spanning tree plus independent extra edges."""
    g = nx.Graph()
    g.add_nodes_from(range(n))
    order = rng.permutation(n)
    for k in range(1, n):
        g.add_edge(int(order[k]), int(order[rng.integers(0, k)]))
    for u, v in combinations(range(n), 2):
        if rng.random() < extra:
            g.add_edge(u, v)
    return g


def brute_barycenter_mean(measures, dist) -> float:
    """Mean W1 to the barycenter over every node of ``dist`` (dense LP)."""
    k = dist.shape[0]
    t = len(measures)
    sizes = [len(m) for m in measures]
    nvar = k + sum(k * s for s in sizes)
    obj = np.zeros(nvar)
    rows, rhs = [], []
    off = k
    for m, s in zip(measures, sizes):
        support = sorted(m)
        block = dist[:, support]
        obj[off : off + k * s] = block.ravel() / t
        for x in range(k):
            r = np.zeros(nvar)
            r[off + x * s : off + (x + 1) * s] = 1
            r[x] = -1
            rows.append(r)
            rhs.append(0.0)
        for l, node in enumerate(support):
            r = np.zeros(nvar)
            r[off + l : off + k * s : s] = 1
            rows.append(r)
            rhs.append(m[node])
        off += k * s
    res = linprog(obj, A_eq=np.array(rows), b_eq=rhs, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)
