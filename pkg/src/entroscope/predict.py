"""Cesàro-mean measure, the argmax 0-1 predictor and the log-ratio diagnostic.

The Cesàro conditional averages the base measure's conditionals over every
suffix of the history, lengths ``m = 0..n``, with equal weight.  This index
set is a reconstruction: the construction it stands in for is not pinned
down, so exact numeric agreement with other formulations is not claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Alphabet, ConditionalDistribution, SymbolSequence, _check_alphabet
from .sources import SourceModel, _true_probs, replica_seeds, sample

DEFAULT_MAX_TERMS = 4096


class CesaroMeasure:
    """Conditionals averaged over all history-suffix lengths of a base measure."""

    def __init__(self, base):
        self.base = base
        self.alphabet: Alphabet = base.alphabet

    def __repr__(self):
        return f"CesaroMeasure({self.base!r})"

    def _data(self, history) -> SymbolSequence:
        if not isinstance(history, SymbolSequence):
            history = SymbolSequence(self.alphabet, history)
        _check_alphabet(self, history)
        return history

    def suffix_probs(self, history) -> np.ndarray:
        """Row ``m``: base conditional given the last ``m`` symbols."""
        history = self._data(history)
        if hasattr(self.base, "suffix_conditionals"):
            return self.base.suffix_conditionals(history)
        n = len(history)
        return np.array([self.base.conditional(history[n - m:]).probs for m in range(n + 1)])

    def conditional(self, history) -> ConditionalDistribution:
        probs = self.suffix_probs(history).mean(axis=0)
        return ConditionalDistribution.from_probs(self.alphabet, probs / probs.sum())


def cesaro_conditional(base, history) -> ConditionalDistribution:
    return CesaroMeasure(base).conditional(history)


def predict_next(history, measure) -> int:
    """Most probable next symbol; ties go to the smallest index."""
    if not isinstance(measure, CesaroMeasure):
        measure = CesaroMeasure(measure)
    return measure.conditional(history).argmax()


@dataclass
class PredictionTrace:
    predicted: np.ndarray
    actual: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def mistakes(self) -> np.ndarray:
        return self.predicted != self.actual

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.mistakes)

    def __len__(self):
        return int(self.actual.size)

    def density(self, n: int | None = None) -> float:
        """Mistake density ``M_n`` over the first ``n`` steps (default all)."""
        n = len(self) if n is None else n
        if n == 0:
            return 0.0
        return float(self.cumulative[n - 1] / n)


def _window_stream(base, data: np.ndarray) -> np.ndarray:
    if hasattr(base, "stream"):
        return base.stream(data)[0]
    seq = SymbolSequence(base.alphabet, data)
    return np.array([base.conditional(seq[:i]).probs for i in range(data.size)])


def averaged_conditionals(base, data: np.ndarray, max_terms: int | None = DEFAULT_MAX_TERMS) -> tuple[np.ndarray, dict]:
    """Cesàro conditionals before every position of ``data``.

    At step ``i`` (history ``data[:i]``) the terms are suffix lengths
    ``i - s`` for window starts ``s`` on a grid of spacing ``d(i)``, the
    smallest power of two keeping at most ``max_terms`` terms.  While
    ``i + 1 <= max_terms`` that grid is every start and the average is exact;
    beyond it the lengths are evenly spaced and their number stays within
    ``(max_terms/2, max_terms]``.  Each start is one prequential pass of the
    base measure, run only as long as the start stays on the grid.
    """
    n = data.size
    A = base.alphabet.size
    cap = n + 1 if max_terms is None else int(max_terms)
    if cap < 1:
        raise ValueError("max_terms must be positive")
    acc = np.zeros((n, A))
    terms = np.zeros(n, dtype=np.int64)
    if n == 0:
        return acc, {"max_terms": cap, "exact_steps": 0, "windows": 0}
    # spacing(i): smallest power of two d with i < cap * d
    steps = np.arange(n)
    spacing = np.ones(n, dtype=np.int64)
    d = 1
    while cap * d <= n - 1:
        spacing[steps >= cap * d] = 2 * d
        d *= 2
    windows = 0
    for s in range(n):
        # start s is used while spacing(i) divides s; spacing is nondecreasing in i
        if s % spacing[s]:
            continue
        if s:
            low = s & -s  # largest power of two dividing s
            stop = int(np.searchsorted(spacing, low, side="right"))
        else:
            stop = n
        cond = _window_stream(base, data[s:stop])
        acc[s:stop] += cond
        terms[s:stop] += 1
        windows += 1
    exact = int(min(n, cap))
    meta = {"max_terms": cap, "exact_steps": exact, "windows": windows}
    return acc / terms[:, None], meta


def run_prediction(seq, measure, max_terms: int | None = DEFAULT_MAX_TERMS) -> PredictionTrace:
    """Prequential argmax prediction with the Cesàro measure of ``measure``.

    ``max_terms=None`` averages over every suffix at every step.
    """
    base = measure.base if isinstance(measure, CesaroMeasure) else measure
    if not isinstance(seq, SymbolSequence):
        seq = SymbolSequence(base.alphabet, seq)
    _check_alphabet(base, seq)
    probs, meta = averaged_conditionals(base, seq.data, max_terms)
    meta["mode"] = "exact" if meta["exact_steps"] >= len(seq) else "capped"
    return PredictionTrace(np.argmax(probs, axis=1) if len(seq) else np.zeros(0, np.int64),
                           seq.data.copy(), meta)


def log_grid(n: int, start: int = 10, per_decade: int = 1) -> list[int]:
    """Logarithmic checkpoints ``start, 10*start, ...`` up to and including ``n``."""
    if n < 1:
        return []
    pts = set()
    e = math.log10(max(start, 1))
    while True:
        v = int(round(10 ** e))
        if v >= n:
            break
        pts.add(v)
        e += 1.0 / per_decade
    pts.add(n)
    return sorted(pts)


def log_ratio_diagnostic(source: SourceModel, measure, n, replicas: int = 100,
                         seed: int = 0) -> list[tuple[int, float]]:
    """Replica means of ``E[log P(X_{t+1}|X_{1:t}) - log R(X_{t+1}|X_{1:t})]``.

    ``n`` is a step count (checkpoints on a logarithmic grid) or an explicit
    list of steps.  For each replica and step the expectation over the next
    symbol is taken exactly, i.e. the term is the conditional divergence
    ``KL(P(.|h) || R(.|h))`` at the sampled history ``h``; this is the
    sampled log-ratio averaged over its last coordinate, with the same mean
    and less noise, and is never negative.
    """
    if not source.is_finite:
        raise ValueError(f"{source.kind} source has no finite-alphabet conditionals")
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    if not isinstance(measure, CesaroMeasure):
        measure = CesaroMeasure(measure)
    if measure.alphabet.size != source.alphabet_size:
        raise ValueError("measure and source alphabets differ")
    steps = log_grid(n, 100) if isinstance(n, (int, np.integer)) else sorted(int(v) for v in n)
    last = steps[-1]
    sums = np.zeros(len(steps))
    for rs in replica_seeds(seed, replicas):
        x = sample(source, last, rs).data
        for j, t in enumerate(steps):
            p = _true_probs(source, x[:t])
            r = measure.suffix_probs(x[:t]).mean(axis=0)
            nz = p > 0
            sums[j] += float(np.sum(p[nz] * (np.log(p[nz]) - np.log(r[nz]))))
    return [(t, s / replicas) for t, s in zip(steps, sums)]
