"""Pure numpy kernels; same signatures and results as the compiled ``_ckernels``.

All point indices here are 0-based. Randomness never enters a kernel:
callers pass pre-drawn uniforms so both backends consume identical streams.
"""

import math

import numpy as np


def branch_increments(dist, perms, v):
    """Cyclic growth for inserting point ``v`` at each of ``t+1`` positions.

    ``perms`` is an ``(M, t)`` array of partial tours; column ``j`` of the
    ``(M, t+1)`` result is the increment for 1-based position ``j+1``.
    """
    dist = np.asarray(dist, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp)
    m, t = perms.shape
    if t == 1:
        inc = 2.0 * dist[perms[:, 0], v]
        return np.repeat(inc[:, None], 2, axis=1)
    pos = np.arange(t + 1)
    u = perms[:, (pos - 1) % t]
    w = perms[:, pos % t]
    inc = dist[u, v] + dist[v, w] - dist[u, w]
    return np.maximum(inc, 0.0)


def tour_lengths(dist, perms):
    dist = np.asarray(dist, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp)
    if perms.shape[1] < 2:
        return np.zeros(perms.shape[0])
    return dist[perms, np.roll(perms, -1, axis=1)].sum(axis=1)


def enumerate_lengths(dist):
    """Tour length of every insertion code, indexed by code rank."""
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    lengths = np.zeros(1)
    perms = np.zeros((1, 1), dtype=np.int8)
    for t in range(1, n):
        inc = branch_increments(dist, perms, t)
        # child rank = parent rank + j * t!, so blocks are ordered by j
        lengths = (lengths[:, None] + inc).T.ravel()
        if t < n - 1:
            perms = _extend_all(perms, t)
    return lengths


def _extend_all(perms, v):
    m, t = perms.shape
    out = np.empty(((t + 1) * m, t + 1), dtype=perms.dtype)
    for j in range(t + 1):
        block = out[j * m:(j + 1) * m]
        block[:, :j] = perms[:, :j]
        block[:, j] = v
        block[:, j + 1:] = perms[:, j:]
    return out


def sis_draw(dist, log_alpha, uniforms):
    """Sequential insertion draws with branch probabilities proportional to alpha**-increment.

    ``uniforms`` has shape ``(M, n-1)``. Returns ``(codes, lengths, log_q)``
    where ``codes`` holds 1-based insertion codes and ``log_q`` the log of
    the realized product of branch probabilities.
    """
    dist = np.asarray(dist, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    n = dist.shape[0]
    m = uniforms.shape[0]
    codes = np.ones((m, n), dtype=np.int8)
    lengths = np.zeros(m)
    log_q = np.zeros(m)
    perms = np.zeros((m, 1), dtype=np.intp)
    rows = np.arange(m)
    for t in range(1, n):
        inc = branch_increments(dist, perms, t)
        logits = -log_alpha * inc
        logits -= logits.max(axis=1, keepdims=True)
        w = np.exp(logits)
        z = w.sum(axis=1)
        cum = np.cumsum(w / z[:, None], axis=1)
        j = np.minimum((cum <= uniforms[:, t - 1][:, None]).sum(axis=1), t)
        codes[:, t] = j + 1
        lengths += inc[rows, j]
        log_q += logits[rows, j] - np.log(z)
        perms = _insert_rows(perms, j, t)
    return codes, lengths, log_q


def _insert_rows(perms, j, v):
    m, t = perms.shape
    idx = np.arange(t + 1)[None, :]
    jj = j[:, None]
    src = np.where(idx < jj, idx, idx - 1)
    src = np.clip(src, 0, t - 1)
    out = np.take_along_axis(perms, src, axis=1)
    out[idx == jj] = v
    return out


def held_karp(dist):
    """Exact shortest cyclic tour by bitmask dynamic programming.

    Returns ``(length, tour)`` with ``tour`` a list of 0-based indices
    starting at 0. Ties resolve to the lowest predecessor index.
    """
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if n == 2:
        return 2.0 * float(dist[0, 1]), [0, 1]
    k = n - 1  # cities 1..n-1 carry bits 0..k-1
    size = 1 << k
    sub = dist[1:, 1:]
    dp = np.full((size, k), np.inf)
    parent = np.full((size, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = dist[0, j + 1]
    bits = 1 << np.arange(k)
    for mask in range(1, size):
        members = np.nonzero(mask & bits)[0]
        if members.size < 2:
            continue
        prev = dp[mask ^ bits[members]]  # row r: predecessor table without members[r]
        cand = prev + sub[:, members].T
        best = np.argmin(cand, axis=1)
        dp[mask, members] = cand[np.arange(members.size), best]
        parent[mask, members] = best
    full = size - 1
    closing = dp[full] + dist[1:, 0]
    last = int(np.argmin(closing))
    length = float(closing[last])
    tour = []
    mask, cur = full, last
    while cur >= 0:
        tour.append(cur + 1)
        prev = int(parent[mask, cur])
        mask ^= 1 << cur
        cur = prev
    tour.append(0)
    tour.reverse()
    return length, tour


def nearest_neighbor(dist, start):
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    seen = np.zeros(n, dtype=bool)
    tour = [start]
    seen[start] = True
    length = 0.0
    cur = start
    for _ in range(n - 1):
        d = np.where(seen, math.inf, dist[cur])
        nxt = int(np.argmin(d))
        length += float(d[nxt])
        seen[nxt] = True
        tour.append(nxt)
        cur = nxt
    length += float(dist[cur, start])
    return length, tour
