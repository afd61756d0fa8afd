"""Prequential PPM mixture conditionals in one left-to-right pass.

The count tables of all orders live in a single trie of reversed contexts:
the node at depth k on the path of position j holds the counts N(c, a) of
the order-k context c = x[j-k:j].  A node seen once keeps only the
position that created it; its child is materialized the first time another
walk passes through it, so the trie holds one node per distinct context
that has occurred, up to depth ``max_order``.

Orders above the deepest context that has ever repeated have seen only
uniform factors; they share one closed-form tail weight, which keeps the
mixture exact at O(depth) work per symbol.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MAX_STREAM_ALPHABET = 64
NEGLIGIBLE = 60.0  # nats; exp(-60) is far below double precision


@njit(cache=True)
def _grow(child, cnt, tot, origin, expanded):
    cap = 2 * tot.shape[0]
    A = child.shape[1]
    old = tot.shape[0]
    child2 = np.full((cap, A), -1, dtype=np.int32)
    child2[:old] = child
    cnt2 = np.zeros((cap, A), dtype=np.int32)
    cnt2[:old] = cnt
    tot2 = np.zeros(cap, dtype=np.int32)
    tot2[:old] = tot
    origin2 = np.full(cap, -1, dtype=np.int64)
    origin2[:old] = origin
    expanded2 = np.zeros(cap, dtype=np.bool_)
    expanded2[:old] = expanded
    return child2, cnt2, tot2, origin2, expanded2


@njit(cache=True)
def _run(data, A, beta, log_w, log_tail, kcap, child, cnt, tot, origin, expanded, n_nodes,
         ex, val, path, num, cond, logp, log_num, log_den, tracked, j0):
    """Process positions from ``j0`` until done or the node arrays are nearly full.

    Kept separate from the driver so that the node arrays are never rebound
    inside the hot loop (rebinding costs a refcount round trip per access).
    """
    n = data.shape[0]
    ln_a = math.log(A)
    cap = tot.shape[0]
    for j in range(j0, n):
        # one step creates at most depth + 1 <= kcap + 1 nodes
        if n_nodes + kcap + 2 > cap:
            return j, n_nodes, tracked
        v = 0
        d = 0
        path[0] = 0
        while d < kcap and j - d - 1 >= 0:
            if not expanded[v]:
                t0 = origin[v]
                if t0 - d - 1 >= 0:
                    u = n_nodes
                    n_nodes += 1
                    child[v, data[t0 - d - 1]] = u
                    cnt[u, data[t0]] = 1
                    tot[u] = 1
                    origin[u] = t0
                expanded[v] = True
            u = child[v, data[j - d - 1]]
            if u < 0:
                break
            v = u
            d += 1
            path[d] = v
        depth = d
        if depth + 1 > tracked:
            tracked = depth + 1

        top = log_tail[tracked]
        for k in range(tracked):
            val[k] = log_w[k] + ex[k]
            if val[k] > top:
                top = val[k]
        # terms more than NEGLIGIBLE nats below the largest cannot move the sum
        floor = top - NEGLIGIBLE
        den = 0.0
        flat = 0.0  # mass of orders predicting uniformly
        if log_tail[tracked] > floor:
            flat = math.exp(log_tail[tracked] - top)
        for a in range(A):
            num[a] = 0.0
        for k in range(tracked):
            if val[k] <= floor:
                continue
            e = math.exp(val[k] - top)
            if k <= depth:
                node = path[k]
                z = e / (tot[node] + beta * A)
                for a in range(A):
                    num[a] += z * (cnt[node, a] + beta)
                den += e
            else:
                flat += e
        den += flat
        for a in range(A):
            cond[j, a] = (num[a] + flat / A) / den

        x = data[j]
        logp[j] = math.log(cond[j, x])
        for k in range(depth + 1):
            node = path[k]
            ex[k] += log_num[cnt[node, x]] - log_den[tot[node]] + ln_a
            cnt[node, x] += 1
            tot[node] += 1
        if depth < kcap and j - depth - 1 >= 0:
            u = n_nodes
            n_nodes += 1
            child[path[depth], data[j - depth - 1]] = u
            cnt[u, x] = 1
            tot[u] = 1
            origin[u] = j
    return n, n_nodes, tracked


@njit(cache=True)
def _stream_kernel(data, A, beta, log_w, log_tail, kcap):
    n = data.shape[0]
    cap = 4 * n + 2 * kcap + 16
    child = np.full((cap, A), -1, dtype=np.int32)
    cnt = np.zeros((cap, A), dtype=np.int32)
    tot = np.zeros(cap, dtype=np.int32)
    origin = np.full(cap, -1, dtype=np.int64)
    expanded = np.zeros(cap, dtype=np.bool_)
    expanded[0] = True

    ex = np.zeros(kcap + 1)  # log P_k + j*log|A| for individually tracked orders
    val = np.zeros(kcap + 1)
    path = np.zeros(kcap + 1, dtype=np.int64)
    num = np.zeros(A)
    cond = np.empty((n, A))
    logp = np.empty(n)
    # log(c + beta) and log(c + beta*|A|) for every count c <= n
    log_num = np.log(np.arange(n + 1) + beta)
    log_den = np.log(np.arange(n + 1) + beta * A)
    j, n_nodes, tracked = 0, 1, 0  # orders 0..tracked-1 are tracked individually
    while True:
        j, n_nodes, tracked = _run(data, A, beta, log_w, log_tail, kcap, child, cnt, tot, origin,
                                   expanded, n_nodes, ex, val, path, num, cond, logp, log_num,
                                   log_den, tracked, j)
        if j >= n:
            return cond, logp
        child, cnt, tot, origin, expanded = _grow(child, cnt, tot, origin, expanded)


def stream_conditionals(data: np.ndarray, alphabet_size: int, beta: float, log_weights: np.ndarray,
                        log_tails: np.ndarray, max_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Conditionals before every symbol, and the log-loss of each symbol.

    ``log_weights`` must cover orders ``0..max_order`` and ``log_tails``
    indices ``0..max_order+1``.
    """
    if alphabet_size > MAX_STREAM_ALPHABET:
        raise ValueError(f"streaming kernel supports alphabets up to {MAX_STREAM_ALPHABET} symbols")
    data = np.ascontiguousarray(data, dtype=np.int64)
    return _stream_kernel(data, int(alphabet_size), float(beta),
                          np.ascontiguousarray(log_weights[: max_order + 1], dtype=np.float64),
                          np.ascontiguousarray(log_tails[: max_order + 2], dtype=np.float64),
                          int(max_order))
