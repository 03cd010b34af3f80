# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transportation solver; mirrors ``_kernel_py.solve`` for float masses."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

cdef double EPS = 1e-14


cdef double _solve(const double* a, const double* b, const long* cost,
                   int ns, int nt, double* flow) noexcept nogil:
    cdef double* rs = <double*> malloc(ns * sizeof(double))
    cdef double* rd = <double*> malloc(nt * sizeof(double))
    cdef long* u = <long*> malloc(ns * sizeof(long))
    cdef long* v = <long*> malloc(nt * sizeof(long))
    cdef int* pred_s = <int*> malloc(ns * sizeof(int))
    cdef int* pred_t = <int*> malloc(nt * sizeof(int))
    cdef int* queue = <int*> malloc(ns * sizeof(int))
    cdef int i, j, k, head, tail, sink, back, root, any_root, any_sink, have_step
    cdef long ui, r, step
    cdef double delta, eps, total = 0.0, supply = 0.0

    for i in range(ns):
        rs[i] = a[i]
        supply += a[i]
    for j in range(nt):
        rd[j] = b[j]
    eps = EPS * (supply if supply > 1.0 else 1.0)
    memset(flow, 0, ns * nt * sizeof(double))

    for i in range(ns):
        ui = cost[i * nt]
        for j in range(1, nt):
            if cost[i * nt + j] < ui:
                ui = cost[i * nt + j]
        u[i] = ui
    for j in range(nt):
        r = cost[j] - u[0]
        for i in range(1, ns):
            if cost[i * nt + j] - u[i] < r:
                r = cost[i * nt + j] - u[i]
        v[j] = r

    while True:
        any_root = 0
        head = 0
        tail = 0
        for i in range(ns):
            if rs[i] > eps:
                pred_s[i] = -1
                queue[tail] = i
                tail += 1
                any_root = 1
            else:
                pred_s[i] = -2
        any_sink = 0
        for j in range(nt):
            pred_t[j] = -1
            if rd[j] > eps:
                any_sink = 1
        if not any_root or not any_sink:
            break

        sink = -1
        while head < tail and sink < 0:
            i = queue[head]
            head += 1
            ui = u[i]
            for j in range(nt):
                if pred_t[j] < 0 and ui + v[j] == cost[i * nt + j]:
                    pred_t[j] = i
                    if rd[j] > eps:
                        sink = j
                        break
                    for k in range(ns):
                        if pred_s[k] == -2 and flow[k * nt + j] > eps:
                            pred_s[k] = j
                            queue[tail] = k
                            tail += 1

        if sink >= 0:
            delta = rd[sink]
            j = sink
            while True:
                i = pred_t[j]
                back = pred_s[i]
                if back == -1:
                    if rs[i] < delta:
                        delta = rs[i]
                    root = i
                    break
                if flow[i * nt + back] < delta:
                    delta = flow[i * nt + back]
                j = back
            rd[sink] -= delta
            rs[root] -= delta
            if rd[sink] <= eps:
                rd[sink] = 0.0
            if rs[root] <= eps:
                rs[root] = 0.0
            j = sink
            while True:
                i = pred_t[j]
                flow[i * nt + j] += delta
                back = pred_s[i]
                if back == -1:
                    break
                flow[i * nt + back] -= delta
                if flow[i * nt + back] <= eps:
                    flow[i * nt + back] = 0.0
                j = back
            continue

        have_step = 0
        step = 0
        for i in range(ns):
            if pred_s[i] == -2:
                continue
            ui = u[i]
            for j in range(nt):
                if pred_t[j] < 0:
                    r = cost[i * nt + j] - ui - v[j]
                    if not have_step or r < step:
                        step = r
                        have_step = 1
        if not have_step:
            break
        for i in range(ns):
            if pred_s[i] != -2:
                u[i] += step
        for j in range(nt):
            if pred_t[j] >= 0:
                v[j] -= step

    for i in range(ns * nt):
        if flow[i] != 0.0:
            total += flow[i] * cost[i]

    free(rs)
    free(rd)
    free(u)
    free(v)
    free(pred_s)
    free(pred_t)
    free(queue)
    return total


def solve(a, b, cost, bint want_plan=False):
    """Exact minimum transport cost for float masses and integer costs.

    Returns ``(value, plan)``; ``plan`` is an ``ndarray`` only when requested.
    """
    cdef cnp.ndarray[double, ndim=1, mode="c"] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[long, ndim=2, mode="c"] cv = np.ascontiguousarray(cost, dtype=np.int_)
    cdef int ns = av.shape[0]
    cdef int nt = bv.shape[0]
    if ns == 0 or nt == 0:
        return 0.0, (np.zeros((ns, nt)) if want_plan else None)
    if cv.shape[0] != ns or cv.shape[1] != nt:
        raise ValueError("cost shape does not match the masses")
    cdef cnp.ndarray[double, ndim=2, mode="c"] flow = np.empty((ns, nt), dtype=np.float64)
    cdef double value
    with nogil:
        value = _solve(&av[0], &bv[0], &cv[0, 0], ns, nt, &flow[0, 0])
    return value, (flow if want_plan else None)
