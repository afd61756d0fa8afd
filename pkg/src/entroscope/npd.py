"""NPD density: PPM measures of the quantized series, mixed over quantization levels.

For samples ``x_1..x_n`` and a reference measure with cdf ``F``,

    g(x) = sum_{r=0..R} w_r * PPM_r(q_r(x)) * 2^(r n)

where ``q_r`` maps each sample to its level-``r`` dyadic cell of ``F``
(reference mass ``2^-r``), ``PPM_r`` is the order mixture over ``2^r``
symbols and ``w_r = 1/(r+1) - 1/(r+2)``.  ``g`` is a density with respect
to the reference measure; the untruncated sum (``R = inf``) has the
level-0 term ``1/2`` as a floor and total mass 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LogWeight, SymbolSequence, log_sum_exp
from .ppm import DEFAULT_MAX_ORDER, PPMMeasure, SmoothingRule
from .quantize import MAX_LEVEL, ReferenceMeasure, cell_indices
from .weights import WeightScheme, log_weight, weight_tail

DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3  # bytes
# working set of the sparse count engine per sample and level (ids, ranks, keys)
_BYTES_PER_SAMPLE = 96


def auto_levels(n: int) -> int:
    """``ceil(log2 n) + 2`` (at least 2)."""
    return max(0, math.ceil(math.log2(max(n, 1)))) + 2


@dataclass(frozen=True)
class NpdConfig:
    ref: ReferenceMeasure = field(default_factory=ReferenceMeasure.uniform)
    smoothing: SmoothingRule = SmoothingRule(1.0)
    scheme: WeightScheme = WeightScheme.RATIONAL
    rmax: int | str = "auto"
    max_order: int | None = DEFAULT_MAX_ORDER
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "ref", ReferenceMeasure.parse(self.ref))
        object.__setattr__(self, "smoothing", SmoothingRule.parse(self.smoothing))
        object.__setattr__(self, "scheme", WeightScheme.parse(self.scheme))
        if self.rmax != "auto":
            if isinstance(self.rmax, bool) or not isinstance(self.rmax, (int, np.integer)) or self.rmax < 1:
                raise ValueError(f"rmax must be a positive integer or 'auto', got {self.rmax!r}")

    def levels(self, n: int) -> int:
        """Effective ``R_max`` for a series of length ``n``, checked against limits."""
        R = auto_levels(n) if self.rmax == "auto" else int(self.rmax)
        if R > MAX_LEVEL:
            raise ValueError(f"rmax {R} exceeds {MAX_LEVEL}: finer cells are not resolvable in double precision")
        need = _BYTES_PER_SAMPLE * max(n, 1) * min(R + 1, 2)
        if need > self.memory_budget:
            raise ValueError(f"count tables for n={n} need about {need} bytes, over the budget of "
                             f"{self.memory_budget}")
        return R

    def truncated_mass(self, n: int = 1) -> float:
        """Total level weight kept, ``1 - 1/(R_max+2)`` for rational weights."""
        return 1.0 - weight_tail(self.levels(n) + 1, "rational")


def _level_weight(r: int) -> float:
    return log_weight(r, "rational")


@dataclass
class EntropyEstimate:
    n: int
    value: float
    trace: list = field(default_factory=list)

    def __float__(self):
        return self.value


def _uniforms(xs, config: NpdConfig) -> np.ndarray:
    """Reference-cdf values of the samples; raises on out-of-support samples."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    cell_indices(xs, 0, config.ref)  # support check with position
    return config.ref.cdf(xs)


def _level_cells(u: np.ndarray, r: int) -> np.ndarray:
    return np.clip(np.floor(np.ldexp(u, r)), 0, (1 << r) - 1).astype(np.int64)


def _level_measure(r: int, config: NpdConfig) -> PPMMeasure:
    return PPMMeasure(1 << r, config.smoothing, config.scheme, config.max_order)


def level_terms(xs, config: NpdConfig, rmax: int | None = None) -> np.ndarray:
    """``log(w_r PPM_r(q_r(x)) 2^(r n))`` for ``r = 0..R_max``."""
    u = _uniforms(xs, config)
    n = u.size
    R = config.levels(n) if rmax is None else rmax
    out = np.empty(R + 1)
    for r in range(R + 1):
        if r == 0:
            lp = 0.0  # one cell: every string has probability 1
        else:
            lp = _level_measure(r, config).log_prob(SymbolSequence(1 << r, _level_cells(u, r)))
        out[r] = _level_weight(r) + lp + r * n * math.log(2)
    return out


def npd_log_density(xs, config: NpdConfig | None = None) -> LogWeight:
    """Natural log of the truncated NPD density of ``xs`` w.r.t. the reference."""
    config = config or NpdConfig()
    if len(xs) == 0:
        raise ValueError("need at least one sample")
    return log_sum_exp(level_terms(xs, config))


def differential_entropy_rate(xs, config: NpdConfig | None = None, checkpoints=None) -> EntropyEstimate:
    """``-log g(x_1..x_n) / n`` in nats, relative to the reference measure.

    Truncating at ``R_max`` drops levels whose terms are usually at most
    their weights, which bounds the upward bias by
    ``-log(1 - 1/(R_max+2)) / n``.  Data with structure finer than a
    too-small ``R_max`` resolves can violate that premise.

    ``checkpoints`` adds ``(i, estimate on the first i samples)`` pairs to the
    trace; each prefix is scored with its own automatic level count.
    """
    config = config or NpdConfig()
    xs = np.asarray(xs, dtype=np.float64).ravel()
    n = xs.size
    if n == 0:
        raise ValueError("need at least one sample")
    trace = []
    for i in checkpoints or ():
        if 1 <= i < n:
            trace.append((int(i), -npd_log_density(xs[:i], config) / i))
    value = -npd_log_density(xs, config) / n
    trace.append((n, value))
    return EntropyEstimate(n, value, trace)


def lebesgue_rate(estimate: float, xs, ref: ReferenceMeasure) -> float:
    """Convert a reference-relative rate to one relative to Lebesgue measure.

    ``h_Lebesgue = h_ref - mean(log ref_density(x_i))``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    return float(estimate - np.mean(ref.log_density(xs)))


def predictive_density(x, history, config: NpdConfig | None = None, rmax: int | None = None):
    """``g(history + [x]) / g(history)``; ``x`` may be an array of query points.

    ``g`` of the empty history is 1, so with no history this is the
    single-sample density ``1 - 1/(R_max+2)``.  ``R_max`` is fixed for the
    numerator and denominator (automatic: from ``len(history) + 1``).
    """
    config = config or NpdConfig()
    q = np.atleast_1d(np.asarray(x, dtype=np.float64))
    uq = _uniforms(q, config)
    h = np.asarray(history, dtype=np.float64).ravel()
    uh = _uniforms(h, config) if h.size else np.zeros(0)
    n = h.size
    R = config.levels(n + 1) if rmax is None else int(rmax)
    num = np.empty((R + 1, q.size))
    den = np.empty(R + 1)
    for r in range(R + 1):
        lw = _level_weight(r)
        if r == 0:
            lp, cond = 0.0, np.zeros(1)
        else:
            m = _level_measure(r, config)
            seq = SymbolSequence(1 << r, _level_cells(uh, r))
            lp = m.log_prob(seq) if n else 0.0
            cond = m.conditional(seq).log_probs
        den[r] = lw + lp + r * n * math.log(2)
        num[r] = den[r] + cond[_level_cells(uq, r)] + r * math.log(2)
    top = num.max(axis=0)
    log_num = top + np.log(np.exp(num - top).sum(axis=0))
    log_den = log_sum_exp(den) if n else 0.0
    out = np.exp(log_num - log_den)
    return float(out[0]) if np.ndim(x) == 0 else out


def discrete_entropy_rate(seq: SymbolSequence, smoothing=SmoothingRule(1.0), scheme="rational",
                          max_order: int | None = DEFAULT_MAX_ORDER, checkpoints=None) -> EntropyEstimate:
    """``-log PPM(seq) / n`` in nats, with optional prefix checkpoints."""
    n = len(seq)
    if n == 0:
        raise ValueError("need at least one symbol")
    m = PPMMeasure(seq.alphabet, smoothing, scheme, max_order)
    if checkpoints:
        # prefix probabilities are partial sums of the prequential log-losses
        _, logp = m.stream(seq)
        cum = np.cumsum(logp)
        pts = sorted({int(i) for i in checkpoints if 1 <= i <= n} | {n})
        trace = [(i, float(-cum[i - 1] / i)) for i in pts]
        return EntropyEstimate(n, trace[-1][1], trace)
    value = -m.log_prob(seq) / n
    return EntropyEstimate(n, value, [(n, value)])
