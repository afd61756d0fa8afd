"""Shared domain types, log-domain arithmetic and the sequential-measure contract.

Every probability in the package is carried as a natural logarithm
(``-inf`` is zero weight).  A sequential measure is anything that maps a
finite history to a conditional distribution over the next symbol; the
chain rule then gives the probability of any finite string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np

# Natural-log probability; -inf encodes zero weight.
LogWeight = float

ZERO: LogWeight = -math.inf
ONE: LogWeight = 0.0


@dataclass(frozen=True)
class Alphabet:
    """Symbols ``0 .. size-1``."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise ValueError(f"alphabet size must be a positive integer, got {self.size!r}")

    def __contains__(self, symbol) -> bool:
        return 0 <= symbol < self.size

    def __len__(self) -> int:
        return int(self.size)


class SymbolSequence:
    """Immutable finite string over an :class:`Alphabet`.

    Backed by an int64 array; slicing returns another ``SymbolSequence``.
    """

    __slots__ = ("alphabet", "_data")

    def __init__(self, alphabet: Alphabet | int, data: Iterable[int] = ()):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(int(alphabet))
        arr = np.array(list(data) if not isinstance(data, np.ndarray) else data, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("symbol data must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= alphabet.size):
            bad = int(np.flatnonzero((arr < 0) | (arr >= alphabet.size))[0])
            raise ValueError(
                f"symbol {int(arr[bad])} at position {bad} outside alphabet of size {alphabet.size}"
            )
        arr.setflags(write=False)
        self.alphabet = alphabet
        self._data = arr

    @classmethod
    def from_string(cls, alphabet: Alphabet | int, text: str) -> "SymbolSequence":
        """Parse digits such as ``"0110"`` (whitespace ignored)."""
        return cls(alphabet, [int(ch) for ch in text if not ch.isspace()])

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __len__(self) -> int:
        return int(self._data.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolSequence(self.alphabet, self._data[item])
        return int(self._data[item])

    def __iter__(self):
        return (int(v) for v in self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self.alphabet.size, self._data.tobytes()))

    def __repr__(self) -> str:
        body = "".join(map(str, self._data[:32])) if self.alphabet.size <= 10 else str(self._data[:16].tolist())
        more = "..." if len(self) > 32 else ""
        return f"SymbolSequence(|A|={self.alphabet.size}, n={len(self)}, {body}{more})"

    def append(self, symbol: int) -> "SymbolSequence":
        return SymbolSequence(self.alphabet, np.append(self._data, symbol))


def log_sum_exp(terms: Iterable[LogWeight]) -> LogWeight:
    """``log(sum(exp(t) for t in terms))``; the empty sum is ``-inf``."""
    values = np.fromiter(terms, dtype=np.float64)
    if values.size == 0:
        return ZERO
    if np.isnan(values).any():
        raise ValueError("NaN in log-domain terms")
    top = values.max()
    if top == -math.inf:
        return ZERO
    if top == math.inf:
        return math.inf
    return float(top + math.log(np.exp(values - top).sum()))


@dataclass(frozen=True)
class ConditionalDistribution:
    """Next-symbol distribution, stored as log-probabilities."""

    alphabet: Alphabet
    log_probs: np.ndarray

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=np.float64)
        if lp.shape != (self.alphabet.size,):
            raise ValueError(f"expected {self.alphabet.size} log-probabilities, got shape {lp.shape}")
        if np.isnan(lp).any():
            raise ValueError("NaN log-probability")
        lp.setflags(write=False)
        object.__setattr__(self, "log_probs", lp)

    @classmethod
    def from_probs(cls, alphabet: Alphabet, probs: Sequence[float]) -> "ConditionalDistribution":
        p = np.asarray(probs, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return cls(alphabet, np.log(p))

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "ConditionalDistribution":
        return cls(alphabet, np.full(alphabet.size, -math.log(alphabet.size)))

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def __getitem__(self, symbol: int) -> float:
        return float(np.exp(self.log_probs[symbol]))

    def log_prob(self, symbol: int) -> LogWeight:
        return float(self.log_probs[symbol])

    def total(self) -> float:
        return math.exp(log_sum_exp(self.log_probs))

    def argmax(self) -> int:
        # np.argmax returns the first maximal index: ties go to the smallest symbol
        return int(np.argmax(self.log_probs))


@runtime_checkable
class SequentialMeasure(Protocol):
    """A probability measure on strings given by its one-step conditionals.

    Implementations may additionally provide ``log_prob(seq)`` as a fast path
    for the chain rule.
    """

    alphabet: Alphabet

    def conditional(self, history: SymbolSequence) -> ConditionalDistribution: ...


class UniformMeasure:
    """The i.i.d. uniform measure, ``|A|^-n`` on every string of length n."""

    def __init__(self, alphabet: Alphabet | int):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)

    def conditional(self, history: SymbolSequence) -> ConditionalDistribution:
        _check_alphabet(self, history)
        return ConditionalDistribution.uniform(self.alphabet)

    def log_prob(self, seq: SymbolSequence) -> LogWeight:
        _check_alphabet(self, seq)
        return -len(seq) * math.log(self.alphabet.size)

    def __repr__(self):
        return f"UniformMeasure({self.alphabet.size})"


def _check_alphabet(measure, seq: SymbolSequence) -> None:
    if seq.alphabet.size != measure.alphabet.size:
        raise ValueError(
            f"sequence alphabet size {seq.alphabet.size} does not match measure alphabet size "
            f"{measure.alphabet.size}"
        )


def sequence_log_prob(measure: SequentialMeasure, seq: SymbolSequence, *, chain_rule: bool = False) -> LogWeight:
    """Log-probability of ``seq`` under ``measure``.

    Uses the measure's own ``log_prob`` when available; ``chain_rule=True``
    forces the sum of one-step conditionals.
    """
    _check_alphabet(measure, seq)
    if not chain_rule and hasattr(measure, "log_prob"):
        return float(measure.log_prob(seq))
    total = 0.0
    for i in range(len(seq)):
        total += measure.conditional(seq[:i]).log_prob(seq[i])
    return total
