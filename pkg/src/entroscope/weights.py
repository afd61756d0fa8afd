"""Telescoping prior weights over Markov orders (and quantization levels).

``rational``: w_k = 1/(k+1) - 1/(k+2), tail sum_{j>=K} w_j = 1/(K+1).
``log``:      w_k = 1/log2(k+2) - 1/log2(k+3), tail = 1/log2(K+2).
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np


class WeightScheme(str, Enum):
    RATIONAL = "rational"
    LOG = "log"

    @classmethod
    def parse(cls, value) -> "WeightScheme":
        if isinstance(value, cls):
            return value
        aliases = {"rational": cls.RATIONAL, "log": cls.LOG, "log-telescoping": cls.LOG, "irrational": cls.LOG}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown weight scheme {value!r}; expected 'rational' or 'log'") from None


def _check(k):
    if k < 0:
        raise ValueError(f"order index must be nonnegative, got {k}")


def weight(k: int, scheme="rational") -> float:
    _check(k)
    if WeightScheme.parse(scheme) is WeightScheme.RATIONAL:
        return 1.0 / ((k + 1) * (k + 2))
    # log2(k+3) - log2(k+2) via log1p keeps precision for large k
    a, b = math.log2(k + 2), math.log2(k + 3)
    return math.log1p(1.0 / (k + 2)) / math.log(2) / (a * b)


def weight_tail(K: int, scheme="rational") -> float:
    """Sum of ``weight(k)`` over all ``k >= K``."""
    _check(K)
    if WeightScheme.parse(scheme) is WeightScheme.RATIONAL:
        return 1.0 / (K + 1)
    return 1.0 / math.log2(K + 2)


def log_weight(k: int, scheme="rational") -> float:
    return math.log(weight(k, scheme))


def log_weight_tail(K: int, scheme="rational") -> float:
    return math.log(weight_tail(K, scheme))


def exact_weight(k: int) -> Fraction:
    _check(k)
    return Fraction(1, k + 1) - Fraction(1, k + 2)


def exact_weight_tail(K: int) -> Fraction:
    _check(K)
    return Fraction(1, K + 1)


@lru_cache(maxsize=32)
def log_weight_table(scheme, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """``(log w_k for k<=kmax, log tail_K for K<=kmax+1)`` as read-only arrays."""
    scheme = WeightScheme.parse(scheme)
    k = np.arange(kmax + 2, dtype=np.float64)
    if scheme is WeightScheme.RATIONAL:
        lw = -np.log(k[:-1] + 1) - np.log(k[:-1] + 2)
        lt = -np.log(k + 1)
    else:
        a, b = np.log2(k[:-1] + 2), np.log2(k[:-1] + 3)
        lw = np.log(np.log1p(1.0 / (k[:-1] + 2)) / np.log(2)) - np.log(a) - np.log(b)
        lt = -np.log(np.log2(k + 2))
    lw.setflags(write=False)
    lt.setflags(write=False)
    return lw, lt
