"""From-scratch PPM mixture, for equivalence testing on short strings.

Every order's measure is evaluated independently with a plain dictionary of
counts, and the infinite mixture is closed with the exact tail weight.  With
``exact=True`` (rational weights, rational smoothing) everything is carried
in :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction

from .weights import WeightScheme, exact_weight, exact_weight_tail, weight, weight_tail


def order_prob(seq, k: int, alphabet_size: int, beta, exact: bool = False):
    """P_k(seq) for the additively smoothed order-k Markov measure."""
    one = Fraction(1) if exact else 1.0
    beta = Fraction(beta) if exact else float(beta)
    counts = defaultdict(int)
    totals = defaultdict(int)
    prob = one
    seq = list(seq)
    for i, x in enumerate(seq):
        ctx = tuple(seq[max(0, i - k):i])
        prob *= (counts[ctx, x] + beta) / (totals[ctx] + beta * alphabet_size)
        counts[ctx, x] += 1
        totals[ctx] += 1
    return prob


def mixture_prob(seq, alphabet_size: int, beta=1, scheme="rational", max_order=None, exact: bool = False):
    """sum_k w_k P_k(seq), summing orders up to n-2 and closing with the tail.

    Orders above ``max_order`` are replaced by the uniform measure.
    """
    scheme = WeightScheme.parse(scheme)
    if exact and scheme is not WeightScheme.RATIONAL:
        raise ValueError("exact arithmetic needs rational weights")
    seq = list(seq)
    n = len(seq)
    if n == 0:
        return Fraction(1) if exact else 1.0
    w = exact_weight if exact else (lambda k: weight(k, scheme))
    tail = exact_weight_tail if exact else (lambda k: weight_tail(k, scheme))
    last = n - 1 if max_order is None else min(n - 1, max_order + 1)
    total = sum(w(k) * order_prob(seq, k, alphabet_size, beta, exact) for k in range(last))
    if max_order is not None and last == max_order + 1:
        uniform = (Fraction(1, alphabet_size) if exact else 1.0 / alphabet_size) ** n
        return total + tail(last) * uniform
    return total + tail(last) * order_prob(seq, last, alphabet_size, beta, exact)


def mixture_log_prob(seq, alphabet_size: int, beta=1, scheme="rational", max_order=None) -> float:
    return math.log(mixture_prob(seq, alphabet_size, beta, scheme, max_order))


def conditional(history, alphabet_size: int, beta=1, scheme="rational", max_order=None, exact: bool = False):
    """Next-symbol probabilities as ratios of mixture probabilities."""
    history = list(history)
    base = mixture_prob(history, alphabet_size, beta, scheme, max_order, exact)
    return [mixture_prob(history + [a], alphabet_size, beta, scheme, max_order, exact) / base
            for a in range(alphabet_size)]
