"""Synthetic stationary ergodic sources with exact conditionals and entropy rates.

Randomness comes from numpy's counter-based ``Philox`` bit generator, keyed
by a 64-bit seed; independent replica streams are derived with
``SeedSequence.spawn``.  Output is a pure function of ``(model, n, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.signal import lfilter

from .core import Alphabet, ConditionalDistribution, SymbolSequence
from .quantize import ReferenceMeasure

KINDS = ("iid-categorical", "markov", "iid-uniform-real", "gaussian-ar1", "periodic")
FINITE_KINDS = ("iid-categorical", "markov", "periodic")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def replica_seeds(seed: int, replicas: int) -> list[int]:
    """Independent 64-bit child seeds of ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(replicas)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def _check_rows(rows: np.ndarray, what: str):
    if np.any(rows < 0) or not np.all(np.isfinite(rows)):
        raise ValueError(f"{what} must be finite and nonnegative")
    bad = np.abs(rows.sum(axis=-1) - 1.0) > 1e-12
    if np.any(bad):
        raise ValueError(f"{what} must sum to 1 within 1e-12 (got sums {rows.sum(axis=-1)[bad][:3]})")


def _is_primitive(support: np.ndarray) -> bool:
    """Irreducible and aperiodic: some power of the support matrix is all positive."""
    m = support.shape[0]
    # Wielandt: a primitive m x m matrix has a positive power at exponent (m-1)^2 + 1
    steps = (m - 1) ** 2 + 1
    reach = np.eye(m, dtype=np.int64)
    base = (support > 0).astype(np.int64)
    e = steps
    while e:
        if e & 1:
            reach = np.minimum(reach @ base, 1)
        base = np.minimum(base @ base, 1)
        e >>= 1
    return bool(reach.all())


@dataclass(frozen=True)
class SourceModel:
    """A stationary ergodic source.

    ``params`` by kind:

    * ``iid-categorical``: ``p`` (probability vector)
    * ``markov``: ``rows`` of shape ``(|A|^k, |A|)``; row ``s`` is the next-symbol
      law after the context whose base-``|A|`` digits (oldest first) spell ``s``
    * ``iid-uniform-real``: none (Uniform[0,1])
    * ``gaussian-ar1``: ``rho`` with ``|rho| < 1``, unit stationary variance
    * ``periodic``: ``pattern`` (symbols), started at phase 0
    """

    kind: str
    params: dict = field(default_factory=dict, hash=False, compare=False)
    seed: int = 0
    alphabet_size: int | None = field(default=None, compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, hash=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {KINDS}")
        getattr(self, "_init_" + self.kind.replace("-", "_"))()

    def _set(self, **kw):
        self._cache.update(kw)

    def _init_iid_categorical(self):
        p = np.asarray(self.params.get("p"), dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("iid-categorical needs a probability vector p")
        _check_rows(p, "p")
        object.__setattr__(self, "alphabet_size", p.size)
        self._set(p=p, cum=np.cumsum(p))

    def _init_markov(self):
        rows = np.asarray(self.params.get("rows"), dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("markov rows must be a 2-D array")
        R, A = rows.shape
        k = 0
        while A ** k < R:
            k += 1
        if A ** k != R:
            raise ValueError(f"markov rows: {R} rows is not a power of the alphabet size {A}")
        _check_rows(rows, "markov rows")
        # lifted chain on contexts: s -> (s * A + a) mod A^k
        lifted = np.zeros((R, R))
        for s in range(R):
            for a in range(A):
                lifted[s, (s * A + a) % R] += rows[s, a]
        if not _is_primitive(lifted > 0):
            raise ValueError("markov chain must be irreducible and aperiodic")
        w, v = np.linalg.eig(lifted.T)
        pi = np.real(v[:, np.argmin(np.abs(w - 1.0))])
        pi = np.abs(pi) / np.abs(pi).sum()
        object.__setattr__(self, "alphabet_size", A)
        self._set(rows=rows, order=k, pi=pi, cum=np.cumsum(rows, axis=1))

    def _init_iid_uniform_real(self):
        object.__setattr__(self, "alphabet_size", None)

    def _init_gaussian_ar1(self):
        rho = float(self.params.get("rho", math.nan))
        if not abs(rho) < 1:
            raise ValueError(f"gaussian-ar1 needs |rho| < 1, got {rho}")
        object.__setattr__(self, "alphabet_size", None)
        self._set(rho=rho)

    def _init_periodic(self):
        pattern = np.asarray(self.params.get("pattern", ()), dtype=np.int64)
        if pattern.ndim != 1 or pattern.size == 0 or pattern.min() < 0:
            raise ValueError("periodic needs a nonempty pattern of nonnegative symbols")
        A = int(self.alphabet_size or max(2, int(pattern.max()) + 1))
        if pattern.max() >= A:
            raise ValueError("pattern symbol outside alphabet")
        object.__setattr__(self, "alphabet_size", A)
        self._set(pattern=pattern)

    @property
    def is_finite(self) -> bool:
        return self.kind in FINITE_KINDS

    @property
    def alphabet(self) -> Alphabet:
        if not self.is_finite:
            raise ValueError(f"{self.kind} source is real-valued")
        return Alphabet(self.alphabet_size)

    def cached(self, key):
        return self._cache[key]

    def bayes_error(self) -> float:
        """Mistake density of the optimal predictor that knows the source."""
        if self.kind == "iid-categorical":
            return float(1.0 - self.cached("p").max())
        if self.kind == "markov":
            return float(self.cached("pi") @ (1.0 - self.cached("rows").max(axis=1)))
        if self.kind == "periodic":
            return 0.0
        raise ValueError(f"{self.kind} source has no finite-alphabet Bayes error")


@njit(cache=True)
def _markov_path(cum, start_ctx, u, A, k):
    n = u.shape[0]
    out = np.empty(n, dtype=np.int64)
    R = cum.shape[0]
    s = start_ctx
    for i in range(n):
        a = 0
        while a < A - 1 and u[i] >= cum[s, a]:
            a += 1
        out[i] = a
        s = (s * A + a) % R
    return out


def _stationary_context(model: SourceModel, rng) -> tuple[int, np.ndarray]:
    """Draw a stationary k-symbol context; returns (index, its symbols oldest first)."""
    pi, k, A = model.cached("pi"), model.cached("order"), model.alphabet_size
    s = int(np.searchsorted(np.cumsum(pi), rng.random(), side="right"))
    s = min(s, pi.size - 1)
    digits = np.array([(s // A ** (k - 1 - j)) % A for j in range(k)], dtype=np.int64)
    return s, digits


def sample(model: SourceModel, n: int, seed: int | None = None):
    """``n`` draws from the stationary source: a SymbolSequence or a float array."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = make_rng(model.seed if seed is None else seed)
    kind = model.kind
    if kind == "iid-categorical":
        cum = model.cached("cum")
        x = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), cum.size - 1)
        return SymbolSequence(model.alphabet, x)
    if kind == "markov":
        k, A = model.cached("order"), model.alphabet_size
        s, digits = _stationary_context(model, rng)
        if n <= k:
            return SymbolSequence(model.alphabet, digits[:n])
        rest = _markov_path(model.cached("cum"), s, rng.random(n - k), A, k)
        return SymbolSequence(model.alphabet, np.concatenate([digits, rest]))
    if kind == "periodic":
        pattern = model.cached("pattern")
        return SymbolSequence(model.alphabet, np.resize(pattern, n))
    if kind == "iid-uniform-real":
        return rng.random(n)
    # gaussian-ar1: x_0 ~ N(0,1), x_t = rho x_{t-1} + sqrt(1-rho^2) e_t
    rho = model.cached("rho")
    z = rng.standard_normal(n)
    if n == 0:
        return z
    out = np.empty(n)
    out[0] = z[0]
    if n > 1:
        out[1:] = lfilter([math.sqrt(1 - rho * rho)], [1.0, -rho], z[1:], zi=[rho * z[0]])[0]
    return out


def _context_marginals(model: SourceModel, prefix: np.ndarray) -> np.ndarray:
    """Law of the next symbol given a history shorter than the chain order."""
    k, A = model.cached("order"), model.alphabet_size
    pi = model.cached("pi").reshape((A,) * k)
    m = prefix.size
    joint = pi[tuple(prefix)]  # shape (A,)*(k-m)
    if joint.ndim > 1:
        joint = joint.reshape(A, -1).sum(axis=1)
    return joint / joint.sum()


def true_conditional(model: SourceModel, history, x: float | None = None):
    """Exact next-symbol law, or for real-valued kinds the conditional density at ``x``."""
    if model.kind == "gaussian-ar1":
        if x is None:
            raise ValueError("gaussian-ar1 conditional needs a query point x")
        rho = model.cached("rho")
        h = np.asarray(history, dtype=np.float64)
        mean, var = (rho * h[-1], 1 - rho * rho) if h.size else (0.0, 1.0)
        return math.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2 * math.pi * var)
    if model.kind == "iid-uniform-real":
        if x is None:
            raise ValueError("iid-uniform-real conditional needs a query point x")
        return 1.0 if 0.0 <= x <= 1.0 else 0.0
    data = history.data if isinstance(history, SymbolSequence) else np.asarray(history, dtype=np.int64)
    A = model.alphabet_size
    if data.size and (data.min() < 0 or data.max() >= A):
        raise ValueError(f"history contains a symbol outside the alphabet of size {A}")
    return ConditionalDistribution.from_probs(model.alphabet, _true_probs(model, data))


def _true_probs(model: SourceModel, data: np.ndarray) -> np.ndarray:
    A = model.alphabet_size
    if model.kind == "iid-categorical":
        return model.cached("p")
    if model.kind == "markov":
        k = model.cached("order")
        if data.size < k:
            return _context_marginals(model, data)
        s = 0
        for a in data[data.size - k:]:
            s = s * A + int(a)
        return model.cached("rows")[s]
    pattern = model.cached("pattern")
    L = pattern.size
    if data.size and not np.array_equal(data, np.resize(pattern, data.size)):
        raise ValueError("history is not a prefix of the periodic pattern (phase 0)")
    out = np.zeros(A)
    out[pattern[data.size % L]] = 1.0
    return out


def true_log_probs(model: SourceModel, seq) -> np.ndarray:
    """``log P(x_i | x_<i)`` for every position of a finite-alphabet sample."""
    data = seq.data if isinstance(seq, SymbolSequence) else np.asarray(seq, dtype=np.int64)
    n = data.size
    with np.errstate(divide="ignore"):
        if model.kind == "iid-categorical":
            return np.log(model.cached("p")[data])
        if model.kind == "periodic":
            ok = data == np.resize(model.cached("pattern"), n)
            return np.where(ok, 0.0, -np.inf)
        k, A = model.cached("order"), model.alphabet_size
        out = np.empty(n)
        for i in range(min(k, n)):
            out[i] = math.log(_context_marginals(model, data[:i])[data[i]])
        if n > k:
            ctx = np.zeros(n - k, dtype=np.int64)
            for j in range(k):
                ctx = ctx * A + data[j:n - k + j]
            out[k:] = np.log(model.cached("rows")[ctx, data[k:]])
        return out


@dataclass(frozen=True)
class AnalyticRate:
    value: float
    relative_to: str  # "counting" or the reference name

    def __float__(self):
        return self.value


def analytic_entropy_rate(model: SourceModel, reference: ReferenceMeasure | str | None = None) -> AnalyticRate:
    """Closed-form entropy rate in nats.

    Finite-alphabet kinds are relative to counting measure; real-valued kinds
    are relative to the reference, ``h_ref = h_Lebesgue + E[log ref_density(X)]``.
    """
    if model.is_finite:
        if reference is not None:
            raise ValueError(f"{model.kind} source takes no reference measure")
        if model.kind == "iid-categorical":
            return AnalyticRate(_entropy(model.cached("p")), "counting")
        if model.kind == "markov":
            rows = model.cached("rows")
            value = float(sum(w * _entropy(r) for w, r in zip(model.cached("pi"), rows)))
            return AnalyticRate(value, "counting")
        return AnalyticRate(0.0, "counting")
    if reference is None:
        raise ValueError(f"{model.kind} source needs a reference measure")
    ref = ReferenceMeasure.parse(reference)
    half_log_2pi = 0.5 * math.log(2 * math.pi)
    if model.kind == "iid-uniform-real":
        if ref.name == "uniform":
            return AnalyticRate(0.0, ref.name)
        # h = 0 and E[log phi(U)] = -log(2 pi)/2 - E[U^2]/2
        return AnalyticRate(-half_log_2pi - 1.0 / 6.0, ref.name)
    if ref.name == "gaussian":
        rho = model.cached("rho")
        return AnalyticRate(0.5 * math.log(1 - rho * rho), ref.name)
    raise ValueError(f"no closed form for a {model.kind} source relative to the {ref.name} reference")


def parse_source(spec: str, seed: int = 0) -> SourceModel:
    """Parse ``fair-coin``, ``iid:p=0.3,0.7``, ``markov:rows=0.9,0.1;0.2,0.8``,
    ``ar1:rho=0.5``, ``uniform``, ``constant``, ``periodic:01``.
    """
    text = spec.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    args = {}
    if rest and name != "periodic":
        for part in rest.split("&") if "&" in rest else [rest]:
            key, eq, value = part.partition("=")
            if not eq:
                raise ValueError(f"bad source argument {part!r} in {spec!r}; expected key=value")
            args[key.strip().lower()] = value.strip()
    try:
        if name == "fair-coin":
            return SourceModel("iid-categorical", {"p": [0.5, 0.5]}, seed)
        if name == "iid":
            return SourceModel("iid-categorical", {"p": _floats(args["p"])}, seed)
        if name == "markov":
            rows = [_floats(r) for r in args["rows"].split(";")]
            return SourceModel("markov", {"rows": rows}, seed)
        if name == "ar1":
            return SourceModel("gaussian-ar1", {"rho": float(args["rho"])}, seed)
        if name == "uniform":
            return SourceModel("iid-uniform-real", {}, seed)
        if name == "constant":
            return SourceModel("periodic", {"pattern": [0]}, seed)
        if name == "periodic":
            pattern = [int(ch) for ch in rest.replace(",", "").strip()]
            return SourceModel("periodic", {"pattern": pattern}, seed)
    except KeyError as exc:
        raise ValueError(f"source {spec!r} is missing argument {exc.args[0]!r}") from None
    raise ValueError(f"unknown source {spec!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"bad number list {text!r}") from None
