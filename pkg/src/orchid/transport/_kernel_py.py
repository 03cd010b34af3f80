"""Pure-Python transportation solver (fallback for the compiled kernel).

Primal-dual method for integer costs: dual potentials stay integral, so the
admissibility test ``u[i] + v[j] == cost[i][j]`` is exact. Each phase grows
the flow along admissible arcs with shortest BFS augmenting paths, then
raises the potentials of the labelled sources by the smallest reduced cost
leaving the labelled set. Works with ``float`` masses or with
``fractions.Fraction`` masses (then with zero tolerance).
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

EPS = 1e-14


def solve(a, b, cost, want_plan: bool = False):
    """Exact minimum transport cost from masses ``a`` to ``b``.

    ``cost`` is an ``len(a) x len(b)`` table of non-negative integers. Totals
    must agree (up to rounding). Returns ``(value, plan)`` where ``plan`` is a
    list of rows, or ``None`` unless requested.
    """
    a = list(a.tolist() if hasattr(a, "tolist") else a)
    b = list(b.tolist() if hasattr(b, "tolist") else b)
    cost = [[int(c) for c in row] for row in (cost.tolist() if hasattr(cost, "tolist") else cost)]
    ns, nt = len(a), len(b)
    if ns == 0 or nt == 0:
        return 0.0, ([[0.0] * nt for _ in range(ns)] if want_plan else None)

    exact = isinstance(a[0], Fraction) or isinstance(b[0], Fraction)
    zero = Fraction(0) if exact else 0.0
    eps = zero if exact else EPS * max(1.0, float(sum(a)))

    rs = a[:]
    rd = b[:]
    u = [min(row) for row in cost]
    v = [min(cost[i][j] - u[i] for i in range(ns)) for j in range(nt)]
    flow = [[zero] * nt for _ in range(ns)]

    while True:
        roots = [i for i in range(ns) if rs[i] > eps]
        if not roots or not any(x > eps for x in rd):
            break
        pred_s = [-2] * ns  # -1 marks a root
        pred_t = [-1] * nt
        for i in roots:
            pred_s[i] = -1
        queue = deque(roots)
        sink = -1
        while queue and sink < 0:
            i = queue.popleft()
            ui = u[i]
            ci = cost[i]
            for j in range(nt):
                if pred_t[j] < 0 and ui + v[j] == ci[j]:
                    pred_t[j] = i
                    if rd[j] > eps:
                        sink = j
                        break
                    for k in range(ns):
                        if pred_s[k] == -2 and flow[k][j] > eps:
                            pred_s[k] = j
                            queue.append(k)

        if sink >= 0:
            delta = rd[sink]
            j = sink
            while True:
                i = pred_t[j]
                back = pred_s[i]
                if back == -1:
                    delta = min(delta, rs[i])
                    root = i
                    break
                delta = min(delta, flow[i][back])
                j = back
            rd[sink] -= delta
            rs[root] -= delta
            if rd[sink] <= eps:
                rd[sink] = zero
            if rs[root] <= eps:
                rs[root] = zero
            j = sink
            while True:
                i = pred_t[j]
                flow[i][j] += delta
                back = pred_s[i]
                if back == -1:
                    break
                flow[i][back] -= delta
                if flow[i][back] <= eps:
                    flow[i][back] = zero
                j = back
            continue

        step = None
        for i in range(ns):
            if pred_s[i] == -2:
                continue
            ui = u[i]
            ci = cost[i]
            for j in range(nt):
                if pred_t[j] < 0:
                    r = ci[j] - ui - v[j]
                    if step is None or r < step:
                        step = r
        if step is None:
            break
        for i in range(ns):
            if pred_s[i] != -2:
                u[i] += step
        for j in range(nt):
            if pred_t[j] >= 0:
                v[j] -= step

    total = zero
    for i in range(ns):
        fi, ci = flow[i], cost[i]
        for j in range(nt):
            if fi[j]:
                total += fi[j] * ci[j]
    return total, (flow if want_plan else None)
