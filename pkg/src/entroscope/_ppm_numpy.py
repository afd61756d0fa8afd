"""Vectorized per-order statistics for the PPM mixture.

Order-k contexts are refined level by level: the order-(k+1) context of a
position is the pair (order-k context id, symbol k+1 steps back).  A
position whose context is unique stays unique at every higher order and
contributes exactly ``1/|A|`` from then on, so only positions with repeated
contexts are carried forward.  Once no context repeats, every remaining
order is the uniform measure and is folded into the closed-form tail.

All log-probabilities are reported as *excess* over the uniform measure:
``log P_k(x) = -n*log|A| + excess_k``.
"""

from __future__ import annotations

import math

import numpy as np


def _pair_ids(left: np.ndarray, right: np.ndarray, right_size: int) -> np.ndarray:
    """Dense ids for the pairs ``(left[i], right[i])``."""
    if left.size == 0:
        return left.astype(np.int64)
    if int(left.max()) < (2**62) // max(right_size, 1):
        key = left.astype(np.int64) * right_size + right
        return np.unique(key, return_inverse=True)[1].astype(np.int64)
    order = np.lexsort((right, left))
    sl, sr = left[order], right[order]
    change = np.empty(left.size, dtype=bool)
    change[0] = True
    change[1:] = (sl[1:] != sl[:-1]) | (sr[1:] != sr[:-1])
    ids = np.empty(left.size, dtype=np.int64)
    ids[order] = np.cumsum(change) - 1
    return ids


def _ranks(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each element: number of earlier and later elements with the same key.

    ``keys`` are listed in increasing position order; stable sorting keeps
    that order inside each run of equal keys.
    """
    m = keys.size
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    idx = np.arange(m)
    start = np.empty(m, dtype=bool)
    start[0] = True
    start[1:] = sk[1:] != sk[:-1]
    run_start = np.maximum.accumulate(np.where(start, idx, 0))
    end = np.empty(m, dtype=bool)
    end[-1] = True
    end[:-1] = start[1:]
    run_end = np.minimum.accumulate(np.where(end, idx, m)[::-1])[::-1]
    before = np.empty(m, dtype=np.int64)
    after = np.empty(m, dtype=np.int64)
    before[order] = idx - run_start
    after[order] = run_end - idx
    return before, after


def _orders(data: np.ndarray, alphabet_size: int, max_order: int | None, query: bool):
    """Yield ``(k, pos, gid)`` with the positions whose order-k context repeats.

    ``pos`` is increasing; with ``query`` the extra position ``n`` (the
    context for the next, not yet seen symbol) takes part in the grouping.
    Stops at the first order with no repeated context or past ``max_order``.
    """
    n = data.size
    pos = np.arange(n + 1 if query else n, dtype=np.int64)
    gid = np.zeros(pos.size, dtype=np.int64)
    k = 0
    while max_order is None or k <= max_order:
        if pos.size == 0:
            return
        sizes = np.bincount(gid)
        keep = sizes[gid] >= 2
        if not keep.all():
            pos, gid = pos[keep], gid[keep]
            if pos.size == 0:
                return
            gid = np.unique(gid, return_inverse=True)[1].astype(np.int64)
        yield k, pos, gid
        nxt = pos >= k + 1
        pos, gid = pos[nxt], gid[nxt]
        gid = _pair_ids(gid, data[pos - k - 1], alphabet_size)
        k += 1


class OrderStats:
    """Per-order results of one forward pass over a sequence.

    ``excess[k]`` is defined for ``k < stop``; orders ``>= stop`` are exactly
    uniform (or, past ``max_order``, replaced by the uniform measure).
    ``query_counts[k]`` holds the next-symbol counts ``N(context, a)`` of the
    final context, or ``None`` when that context never occurred.
    """

    def __init__(self, n, alphabet_size, excess, query_counts, stop):
        self.n = n
        self.alphabet_size = alphabet_size
        self.excess = excess
        self.query_counts = query_counts
        self.stop = stop


def forward_stats(data: np.ndarray, alphabet_size: int, beta: float, max_order: int | None,
                  query: bool = False, log_weights=None, log_tails=None) -> OrderStats:
    """Prequential per-order statistics.

    With ``log_weights``/``log_tails`` supplied, iteration also stops once the
    remaining orders cannot change the mixture in double precision.
    """
    data = np.asarray(data, dtype=np.int64)
    n = data.size
    A = alphabet_size
    ln_a = math.log(A)
    excess, qcounts = [], []
    stop = 0
    running = -math.inf
    for k, pos, gid in _orders(data, A, max_order, query):
        real = pos < n
        rpos, rgid = pos[real], gid[real]
        if rpos.size:
            sym = data[rpos]
            ctx_before, _ = _ranks(rgid)
            key_before, _ = _ranks(rgid * A + sym)
            ex = float(np.sum(np.log(key_before + beta) - np.log(ctx_before + beta * A))) + rpos.size * ln_a
        else:
            ex = 0.0
        excess.append(ex)
        qc = None
        if query and not real[-1]:
            qgid = gid[-1]
            qc = np.bincount(data[rpos[rgid == qgid]], minlength=A).astype(np.float64)
        qcounts.append(qc)
        stop = k + 1  # orders >= stop are uniform, capped, or negligible
        if log_weights is not None:
            running = np.logaddexp(running, log_weights[k] + ex)
            # remaining orders j > k satisfy excess_j <= (n - k - 1) log|A|
            if log_tails[k + 1] + max(n - k - 1, 0) * ln_a < running - 800.0:
                break
    return OrderStats(n, A, excess, qcounts, stop)


def mixture_log_excess(stats: OrderStats, log_weights, log_tails) -> float:
    """``log sum_k w_k P_k(x) + n log|A|`` (tail orders contribute excess 0)."""
    terms = [log_weights[k] + stats.excess[k] for k in range(stats.stop)]
    terms.append(log_tails[stats.stop])
    terms = np.asarray(terms)
    top = terms.max()
    return float(top + math.log(np.exp(terms - top).sum()))


def next_symbol_log_probs(stats: OrderStats, beta: float, log_weights, log_tails) -> np.ndarray:
    """Mixture conditional of the next symbol from a ``query=True`` pass."""
    A = stats.alphabet_size
    rows, lv = [], []
    for k in range(stats.stop):
        qc = stats.query_counts[k]
        if qc is None:
            rows.append(np.full(A, -math.log(A)))
        else:
            rows.append(np.log(qc + beta) - math.log(qc.sum() + beta * A))
        lv.append(log_weights[k] + stats.excess[k])
    rows.append(np.full(A, -math.log(A)))
    lv.append(log_tails[stats.stop])
    lv = np.asarray(lv)
    joint = lv[:, None] + np.asarray(rows)
    top = lv.max()
    den = top + math.log(np.exp(lv - top).sum())
    num = top + np.log(np.exp(joint - top).sum(axis=0))
    return num - den


def suffix_conditionals(data: np.ndarray, alphabet_size: int, beta: float, max_order: int | None,
                        log_weights, log_tails) -> np.ndarray:
    """Mixture conditionals given every suffix of ``data``.

    Row ``s`` is the next-symbol distribution of the PPM mixture evaluated on
    the history ``data[s:]`` alone (row ``n`` is the empty history).

    Works right to left: the smoothed Markov block probability of a context
    depends only on its final counts, so a window's order-k probability can
    be built by adding occurrences in reverse, where the factor for position
    ``t`` uses the counts of *later* occurrences.  One suffix cumulative sum
    then serves every window start at once.
    """
    data = np.asarray(data, dtype=np.int64)
    n = data.size
    A = alphabet_size
    ln_a = math.log(A)
    starts = np.arange(n + 1)
    # running log-sum-exp over orders: top, scaled denominator and numerators
    top = np.full(n + 1, -np.inf)
    den = np.zeros(n + 1)
    num = np.zeros((n + 1, A))

    def add(v, probs):
        nonlocal top, den, num
        new_top = np.maximum(top, v)
        scale = np.exp(top - new_top)
        e = np.exp(v - new_top)
        den = den * scale + e
        num = num * scale[:, None] + e[:, None] * probs
        top = new_top

    uniform = np.full((1, A), 1.0 / A)
    stop = 0
    for k, pos, gid in _orders(data, A, max_order, query=True):
        stop = k + 1
        real = pos < n
        rpos, rgid = pos[real], gid[real]
        d = np.zeros(n + 1)
        if rpos.size:
            sym = data[rpos]
            _, ctx_after = _ranks(rgid)
            _, key_after = _ranks(rgid * A + sym)
            d[rpos] = np.log(key_after + beta) - np.log(ctx_after + beta * A) + ln_a
        D = np.cumsum(d[::-1])[::-1]  # D[u] = sum_{t >= u} d[t]; D[n] = 0
        u = starts + k
        inside = u <= n
        ex = np.where(inside, D[np.minimum(u, n)], 0.0)
        probs = np.broadcast_to(uniform, (n + 1, A))
        if not real[-1]:
            qpos = rpos[rgid == gid[-1]]
            qsym = data[qpos]
            onehot = np.zeros((qpos.size + 1, A))
            onehot[np.arange(qpos.size), qsym] = 1.0
            tail_counts = np.cumsum(onehot[::-1], axis=0)[::-1]  # counts in qpos[i:]
            idx = np.searchsorted(qpos, np.minimum(u, n + 1))
            counts = tail_counts[idx]
            probs = (counts + beta) / (counts.sum(axis=1, keepdims=True) + beta * A)
        add(log_weights[k] + ex, probs)
    add(np.full(n + 1, log_tails[stop]), np.broadcast_to(uniform, (n + 1, A)))
    return num / den[:, None]
