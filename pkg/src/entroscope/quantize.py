"""Reference measures on the real line and nested dyadic quantization.

Cells are dyadic intervals in reference-quantile space: at level ``r`` cell
``c`` is ``{x : c/2^r <= cdf(x) < (c+1)/2^r}``, so every cell carries
reference mass exactly ``2^-r`` and level ``r+1`` refines level ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import Alphabet, SymbolSequence

MAX_LEVEL = 52  # cdf values are doubles; finer cells cannot be resolved


@dataclass(frozen=True)
class ReferenceMeasure:
    """A probability measure on an interval, given by its cdf and quantile."""

    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.name not in _CDF:
            raise ValueError(f"unknown reference measure {self.name!r}; expected one of {sorted(_CDF)}")

    @classmethod
    def uniform(cls) -> "ReferenceMeasure":
        return cls("uniform", 0.0, 1.0)

    @classmethod
    def gaussian(cls) -> "ReferenceMeasure":
        return cls("gaussian", -math.inf, math.inf)

    @classmethod
    def parse(cls, value) -> "ReferenceMeasure":
        if isinstance(value, ReferenceMeasure):
            return value
        key = str(value).lower()
        if key in ("uniform", "unif", "u01"):
            return cls.uniform()
        if key in ("gaussian", "normal", "std-normal", "standard-gaussian"):
            return cls.gaussian()
        raise ValueError(f"unknown reference measure {value!r}; expected 'uniform' or 'gaussian'")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def in_support(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x >= self.lower) & (x <= self.upper) & ~np.isnan(x)

    def cdf(self, x):
        return _CDF[self.name](np.asarray(x, dtype=np.float64))

    def quantile(self, u):
        return _QUANTILE[self.name](np.asarray(u, dtype=np.float64))

    def log_density(self, x):
        return _LOGPDF[self.name](np.asarray(x, dtype=np.float64))


_CDF = {"uniform": lambda x: np.clip(x, 0.0, 1.0), "gaussian": special.ndtr}
_QUANTILE = {"uniform": lambda u: np.clip(u, 0.0, 1.0), "gaussian": special.ndtri}
_LOGPDF = {
    "uniform": lambda x: np.where((x >= 0) & (x <= 1), 0.0, -np.inf),
    "gaussian": lambda x: -0.5 * x * x - 0.5 * math.log(2 * math.pi),
}


@dataclass(frozen=True)
class QuantizationLevel:
    """Level ``r``: ``2^r`` cells of reference mass ``2^-r`` each."""

    r: int

    def __post_init__(self):
        _check_level(self.r)

    @property
    def cells(self) -> int:
        return 1 << self.r

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.cells)

    @property
    def cell_mass(self) -> float:
        return 2.0 ** -self.r


def _check_level(r):
    if not isinstance(r, (int, np.integer)) or r < 0:
        raise ValueError(f"quantization level must be a nonnegative integer, got {r!r}")
    if r > MAX_LEVEL:
        raise ValueError(f"quantization level {r} exceeds the resolvable maximum {MAX_LEVEL}")


def _cells_from_cdf(u: np.ndarray, r: int) -> np.ndarray:
    # ldexp is exact, so floor(u * 2^r) has no rounding beyond that of u itself
    return np.clip(np.floor(np.ldexp(u, r)), 0, (1 << r) - 1).astype(np.int64)


def cell_indices(xs, r: int, ref: ReferenceMeasure) -> np.ndarray:
    """Vectorized :func:`cell_index`; raises naming the first out-of-support position."""
    _check_level(r)
    xs = np.asarray(xs, dtype=np.float64)
    ok = ref.in_support(xs)
    if not ok.all():
        bad = int(np.flatnonzero(~ok.ravel())[0])
        raise ValueError(f"sample {xs.ravel()[bad]!r} at position {bad} outside support {ref.support} "
                         f"of the {ref.name} reference")
    return _cells_from_cdf(ref.cdf(xs), r)


def cell_index(x: float, r: int, ref: ReferenceMeasure) -> int:
    """Index of the level-``r`` cell containing ``x``; cdf value 1 goes to the last cell."""
    _check_level(r)
    if not ref.in_support(x):
        raise ValueError(f"sample {x!r} outside support {ref.support} of the {ref.name} reference")
    return int(_cells_from_cdf(ref.cdf(np.float64(x)), r))


def quantize_sequence(xs, r: int, ref: ReferenceMeasure) -> SymbolSequence:
    return SymbolSequence(Alphabet(1 << r), cell_indices(xs, r, ref) if len(xs) else [])


def refine_parent(c, r: int | None = None):
    """Parent cell at level ``r`` of cell ``c`` at level ``r+1``."""
    c = np.asarray(c)
    if np.any(c < 0):
        raise ValueError("cell index must be nonnegative")
    if r is not None and np.any(c >= (1 << (r + 1))):
        raise ValueError(f"cell index {c} does not exist at level {r + 1}")
    out = c // 2
    return int(out) if out.ndim == 0 else out
