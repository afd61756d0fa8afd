"""Smoothed k-th order Markov measures and their mixture over all orders.

Conventions:

* the first ``k`` symbols of a string condition on the whole available
  prefix (truncated contexts), never on padding;
* counts are prequential: position ``i`` sees counts from ``0..i-1`` only.

Under these conventions ``P_k(x) = P_{n-1}(x)`` for every ``k >= n-1``, so the
infinite mixture ``sum_k w_k P_k`` is evaluated exactly by closing the sum
with the tail weight.  ``max_order`` (default 256) replaces orders above it by
the uniform measure; this is still a Kolmogorov-consistent mixture and it
coincides with the infinite one unless some context longer than
``max_order`` repeats.  Pass ``max_order=None`` for the unbounded mixture.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _ppm_numpy as _np_engine
from ._ppm_stream import MAX_STREAM_ALPHABET, stream_conditionals
from .core import Alphabet, ConditionalDistribution, LogWeight, SymbolSequence, _check_alphabet
from .weights import (WeightScheme, log_weight, log_weight_table, log_weight_tail, weight,
                      weight_tail)

DEFAULT_MAX_ORDER = 256

__all__ = [
    "SmoothingRule", "LAPLACE", "KT", "WeightScheme", "ContextCountTable", "PPMMeasure",
    "markov_conditional", "ppm_order_log_prob", "ppm_mixture_log_prob", "ppm_conditional",
    "weight", "weight_tail", "log_weight", "log_weight_tail",
]


@dataclass(frozen=True)
class SmoothingRule:
    """Additive smoothing ``(N(c,a) + beta) / (N(c) + beta*|A|)``."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"smoothing beta must be positive, got {self.beta}")

    @classmethod
    def parse(cls, value) -> "SmoothingRule":
        if isinstance(value, SmoothingRule):
            return value
        if isinstance(value, (int, float, Fraction)):
            return cls(float(value))
        key = str(value).lower()
        if key in ("laplace", "+1", "1"):
            return LAPLACE
        if key in ("kt", "krichevsky-trofimov", "+1/2", "0.5"):
            return KT
        raise ValueError(f"unknown smoothing {value!r}; expected 'laplace' or 'kt'")


LAPLACE = SmoothingRule(1.0)
KT = SmoothingRule(0.5)


class ContextCountTable:
    """Occurrence counts ``N(context, symbol)`` for one Markov order.

    Contexts are tuples of symbols of length at most ``order``.
    """

    def __init__(self, order: int, alphabet: Alphabet):
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.order = order
        self.alphabet = alphabet
        self._counts: dict[tuple, list[int]] = defaultdict(lambda: [0] * alphabet.size)

    def increment(self, context, symbol: int) -> None:
        context = tuple(int(c) for c in context)
        if len(context) > self.order:
            raise ValueError(f"context of length {len(context)} exceeds order {self.order}")
        self._counts[context][int(symbol)] += 1

    def counts(self, context) -> list[int]:
        context = tuple(int(c) for c in context)
        return list(self._counts[context]) if context in self._counts else [0] * self.alphabet.size

    def total(self, context) -> int:
        return sum(self.counts(context))

    @classmethod
    def from_sequence(cls, seq: SymbolSequence, order: int) -> "ContextCountTable":
        """Counts of every position of ``seq`` under the truncated-context convention."""
        table = cls(order, seq.alphabet)
        data = seq.data.tolist()
        for i, x in enumerate(data):
            table.increment(data[max(0, i - order):i], x)
        return table


def markov_conditional(table: ContextCountTable, context, smoothing=LAPLACE,
                       alphabet: Alphabet | None = None) -> ConditionalDistribution:
    """Additively smoothed next-symbol distribution for one context."""
    alphabet = alphabet or table.alphabet
    ctx = list(context.data if isinstance(context, SymbolSequence) else context)
    for c in ctx:
        if not 0 <= c < alphabet.size:
            raise ValueError(f"context symbol {c} outside alphabet of size {alphabet.size}")
    beta = SmoothingRule.parse(smoothing).beta
    counts = np.asarray(table.counts(ctx), dtype=np.float64)
    return ConditionalDistribution(alphabet, np.log(counts + beta) - math.log(counts.sum() + beta * alphabet.size))


class PPMMeasure:
    """The PPM mixture ``sum_k w_k P_k`` over Markov orders ``k = 0, 1, 2, ...``."""

    def __init__(self, alphabet: Alphabet | int, smoothing=LAPLACE, scheme="rational",
                 max_order: int | None = DEFAULT_MAX_ORDER):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(int(alphabet))
        self.smoothing = SmoothingRule.parse(smoothing)
        self.scheme = WeightScheme.parse(scheme)
        if max_order is not None and max_order < 0:
            raise ValueError("max_order must be nonnegative")
        self.max_order = max_order

    def __repr__(self):
        return (f"PPMMeasure(|A|={self.alphabet.size}, beta={self.smoothing.beta}, "
                f"scheme={self.scheme.value}, max_order={self.max_order})")

    @property
    def beta(self) -> float:
        return self.smoothing.beta

    def _tables(self, n: int):
        kmax = n + 1 if self.max_order is None else self.max_order + 1
        size = 64
        while size < kmax:
            size *= 2
        return log_weight_table(self.scheme, size)

    def _data(self, seq) -> np.ndarray:
        if isinstance(seq, SymbolSequence):
            _check_alphabet(self, seq)
            return seq.data
        return SymbolSequence(self.alphabet, seq).data

    def order_log_prob(self, seq, k: int) -> LogWeight:
        """log P_k(seq) for a single order."""
        if k < 0:
            raise ValueError("order must be nonnegative")
        data = self._data(seq)
        stats = _np_engine.forward_stats(data, self.alphabet.size, self.beta, k)
        ex = stats.excess[k] if k < stats.stop else 0.0
        return ex - data.size * math.log(self.alphabet.size)

    def log_prob(self, seq) -> LogWeight:
        data = self._data(seq)
        lw, lt = self._tables(data.size)
        stats = _np_engine.forward_stats(data, self.alphabet.size, self.beta, self.max_order,
                                         log_weights=lw, log_tails=lt)
        return _np_engine.mixture_log_excess(stats, lw, lt) - data.size * math.log(self.alphabet.size)

    def conditional(self, history) -> ConditionalDistribution:
        data = self._data(history)
        lw, lt = self._tables(data.size)
        stats = _np_engine.forward_stats(data, self.alphabet.size, self.beta, self.max_order, query=True)
        return ConditionalDistribution(self.alphabet, _np_engine.next_symbol_log_probs(stats, self.beta, lw, lt))

    def stream(self, seq) -> tuple[np.ndarray, np.ndarray]:
        """Prequential pass: ``(cond, logloss)`` where ``cond[i]`` is the
        conditional given ``seq[:i]`` and ``logloss[i] = log cond[i, seq[i]]``.
        """
        data = self._data(seq)
        kcap = data.size if self.max_order is None else self.max_order
        lw, lt = self._tables(data.size)
        if self.alphabet.size <= MAX_STREAM_ALPHABET:
            return stream_conditionals(data, self.alphabet.size, self.beta, lw, lt, kcap)
        cond = np.empty((data.size, self.alphabet.size))
        for i in range(data.size):
            cond[i] = self.conditional(data[:i]).probs
        return cond, np.log(cond[np.arange(data.size), data])

    def suffix_conditionals(self, history) -> np.ndarray:
        """Row ``m`` is the conditional given only the last ``m`` symbols of ``history``."""
        data = self._data(history)
        lw, lt = self._tables(data.size)
        rows = _np_engine.suffix_conditionals(data, self.alphabet.size, self.beta, self.max_order, lw, lt)
        return rows[::-1]


def ppm_order_log_prob(seq: SymbolSequence, k: int, smoothing=LAPLACE) -> LogWeight:
    return PPMMeasure(seq.alphabet, smoothing).order_log_prob(seq, k)


def ppm_mixture_log_prob(seq: SymbolSequence, smoothing=LAPLACE, scheme="rational",
                         max_order: int | None = DEFAULT_MAX_ORDER) -> LogWeight:
    return PPMMeasure(seq.alphabet, smoothing, scheme, max_order).log_prob(seq)


def ppm_conditional(history: SymbolSequence, smoothing=LAPLACE, scheme="rational",
                    max_order: int | None = DEFAULT_MAX_ORDER) -> ConditionalDistribution:
    return PPMMeasure(history.alphabet, smoothing, scheme, max_order).conditional(history)
