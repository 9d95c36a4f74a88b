# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors ``_pykernels`` exactly; see there for contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()


def branch_increments(double[:, ::1] dist, perms, Py_ssize_t v):
    cdef cnp.intp_t[:, ::1] p = np.ascontiguousarray(perms, dtype=np.intp)
    cdef Py_ssize_t m = p.shape[0], t = p.shape[1]
    out_arr = np.empty((m, t + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, j, u, w
    cdef double inc
    with nogil:
        for r in range(m):
            if t == 1:
                inc = 2.0 * dist[p[r, 0], v]
                out[r, 0] = inc
                out[r, 1] = inc
                continue
            for j in range(t + 1):
                u = p[r, (j - 1 + t) % t]
                w = p[r, j % t]
                inc = dist[u, v] + dist[v, w] - dist[u, w]
                out[r, j] = inc if inc > 0.0 else 0.0
    return out_arr


def tour_lengths(double[:, ::1] dist, perms):
    cdef cnp.intp_t[:, ::1] p = np.ascontiguousarray(perms, dtype=np.intp)
    cdef Py_ssize_t m = p.shape[0], n = p.shape[1]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r, k
    cdef double s
    if n < 2:
        return out_arr
    with nogil:
        for r in range(m):
            s = 0.0
            for k in range(n):
                s += dist[p[r, k], p[r, (k + 1) % n]]
            out[r] = s
    return out_arr


def enumerate_lengths(double[:, ::1] dist):
    # Level sweep in rank order: the child of rank r at position j has rank
    # r + j * t!, so each level reads its parent arrays contiguously.
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t total = 1, i
    for i in range(2, n + 1):
        total *= i
    out_arr = np.zeros(total, dtype=np.float64)
    cdef double[::1] out = out_arr
    if n < 2:
        return out_arr
    # partial tours of size n-1 are the largest table ever needed
    cdef Py_ssize_t cap = total // n
    cdef int *cur = <int *>malloc(cap * n * sizeof(int))
    cdef int *nxt = <int *>malloc(cap * n * sizeof(int))
    cdef int *tmp
    if cur == NULL or nxt == NULL:
        free(cur); free(nxt)
        raise MemoryError()
    cdef Py_ssize_t t, r, j, k, u, w, size = 1, child
    cdef double inc
    cur[0] = 0
    try:
        with nogil:
            for t in range(1, n):
                # out[0:size] holds lengths of partial tours with t points
                for j in range(t, -1, -1):
                    for r in range(size):
                        if t == 1:
                            inc = 2.0 * dist[cur[0], 1]
                        else:
                            u = cur[r * t + (j - 1 + t) % t]
                            w = cur[r * t + j % t]
                            inc = dist[u, t] + dist[t, w] - dist[u, w]
                            if inc < 0.0:
                                inc = 0.0
                        child = r + j * size
                        out[child] = out[r] + inc
                        if t + 1 < n:
                            for k in range(j):
                                nxt[child * (t + 1) + k] = cur[r * t + k]
                            nxt[child * (t + 1) + j] = <int>t
                            for k in range(j, t):
                                nxt[child * (t + 1) + k + 1] = cur[r * t + k]
                size *= t + 1
                tmp = cur
                cur = nxt
                nxt = tmp
    finally:
        free(cur)
        free(nxt)
    return out_arr


def sis_draw(double[:, ::1] dist, double log_alpha, uniforms):
    cdef double[:, ::1] uni = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n = dist.shape[0], m = uni.shape[0]
    codes_arr = np.ones((m, n), dtype=np.int8)
    lengths_arr = np.zeros(m, dtype=np.float64)
    logq_arr = np.zeros(m, dtype=np.float64)
    cdef cnp.int8_t[:, ::1] codes = codes_arr
    cdef double[::1] lengths = lengths_arr
    cdef double[::1] log_q = logq_arr
    cdef int *perm = <int *>malloc(n * sizeof(int))
    cdef double *inc = <double *>malloc(n * sizeof(double))
    cdef double *logit = <double *>malloc(n * sizeof(double))
    if perm == NULL or inc == NULL or logit == NULL:
        free(perm); free(inc); free(logit)
        raise MemoryError()
    cdef Py_ssize_t r, t, j, k, u, w, pick
    cdef double mx, z, cum, uu
    try:
        with nogil:
            for r in range(m):
                perm[0] = 0
                for t in range(1, n):
                    mx = -INFINITY
                    for j in range(t + 1):
                        if t == 1:
                            inc[j] = 2.0 * dist[perm[0], t]
                        else:
                            u = perm[(j - 1 + t) % t]
                            w = perm[j % t]
                            inc[j] = dist[u, t] + dist[t, w] - dist[u, w]
                            if inc[j] < 0.0:
                                inc[j] = 0.0
                        logit[j] = -log_alpha * inc[j]
                        if logit[j] > mx:
                            mx = logit[j]
                    z = 0.0
                    for j in range(t + 1):
                        logit[j] -= mx
                        z += exp(logit[j])
                    uu = uni[r, t - 1]
                    cum = 0.0
                    pick = t
                    for j in range(t + 1):
                        cum += exp(logit[j]) / z
                        if uu < cum:
                            pick = j
                            break
                    codes[r, t] = <cnp.int8_t>(pick + 1)
                    lengths[r] += inc[pick]
                    log_q[r] += logit[pick] - log(z)
                    for k in range(t, pick, -1):
                        perm[k] = perm[k - 1]
                    perm[pick] = <int>t
    finally:
        free(perm); free(inc); free(logit)
    return codes_arr, lengths_arr, logq_arr


def held_karp(double[:, ::1] dist):
    cdef Py_ssize_t n = dist.shape[0]
    if n == 2:
        return 2.0 * dist[0, 1], [0, 1]
    cdef Py_ssize_t k = n - 1
    cdef Py_ssize_t size = (<Py_ssize_t>1) << k
    dp_arr = np.full((size, k), np.inf)
    parent_arr = np.full((size, k), -1, dtype=np.intp)
    cdef double[:, ::1] dp = dp_arr
    cdef cnp.intp_t[:, ::1] parent = parent_arr
    cdef Py_ssize_t mask, j, i, prev_mask, best_i, full, last, cur, pv
    cdef double best, c
    for j in range(k):
        dp[(<Py_ssize_t>1) << j, j] = dist[0, j + 1]
    with nogil:
        for mask in range(1, size):
            if mask & (mask - 1) == 0:
                continue
            for j in range(k):
                if not (mask >> j) & 1:
                    continue
                prev_mask = mask ^ ((<Py_ssize_t>1) << j)
                best = INFINITY
                best_i = 0
                for i in range(k):
                    if not (prev_mask >> i) & 1:
                        continue
                    c = dp[prev_mask, i] + dist[i + 1, j + 1]
                    if c < best:
                        best = c
                        best_i = i
                dp[mask, j] = best
                parent[mask, j] = best_i
    full = size - 1
    best = INFINITY
    last = 0
    for j in range(k):
        c = dp[full, j] + dist[j + 1, 0]
        if c < best:
            best = c
            last = j
    tour = []
    mask = full
    cur = last
    while cur >= 0:
        tour.append(cur + 1)
        pv = parent[mask, cur]
        mask ^= (<Py_ssize_t>1) << cur
        cur = pv
    tour.append(0)
    tour.reverse()
    return best, tour


def nearest_neighbor(double[:, ::1] dist, Py_ssize_t start):
    cdef Py_ssize_t n = dist.shape[0], step, c, cur = start, nxt
    cdef double length = 0.0, best
    seen_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] seen = seen_arr
    tour = [start]
    seen[start] = 1
    for step in range(n - 1):
        best = INFINITY
        nxt = -1
        for c in range(n):
            if not seen[c] and dist[cur, c] < best:
                best = dist[cur, c]
                nxt = c
        length += best
        seen[nxt] = 1
        tour.append(nxt)
        cur = nxt
    length += dist[cur, start]
    return length, tour
