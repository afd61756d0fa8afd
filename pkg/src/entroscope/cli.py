"""Command-line experiments: ``entroscope {entropy,density,predict,diagnostic,sample}``.

Output is CSV with ``#``-prefixed lines echoing the effective configuration.
Exit status 2 signals a configuration error, 3 a data parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__
from .core import SymbolSequence
from .npd import NpdConfig, differential_entropy_rate, discrete_entropy_rate, lebesgue_rate, predictive_density
from .ppm import DEFAULT_MAX_ORDER, PPMMeasure
from .predict import CesaroMeasure, DEFAULT_MAX_TERMS, log_grid, log_ratio_diagnostic, run_prediction
from .quantize import ReferenceMeasure
from .sources import analytic_entropy_rate, parse_source, sample


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def read_symbols(path: str, alphabet: int) -> SymbolSequence:
    """Whitespace-separated nonnegative integers below ``alphabet``."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            for tok in line.split():
                try:
                    v = int(tok)
                except ValueError:
                    raise DataError(f"line {lineno}: {tok!r} is not an integer") from None
                if not 0 <= v < alphabet:
                    raise DataError(f"line {lineno}: symbol {v} outside alphabet of size {alphabet}")
                out.append(v)
    return SymbolSequence(alphabet, out)


def read_reals(path: str, ref: ReferenceMeasure | None = None) -> np.ndarray:
    """One decimal per line; blank lines are skipped."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.strip()
            if not tok:
                continue
            try:
                v = float(tok)
            except ValueError:
                raise DataError(f"line {lineno}: {tok!r} is not a number") from None
            if not math.isfinite(v) or (ref is not None and not ref.in_support(v)):
                raise DataError(f"line {lineno}: value {tok} outside the reference support")
            out.append(v)
    return np.asarray(out)


class Output:
    def __init__(self, path, config: dict, columns):
        self.buf = io.StringIO()
        self.path = path
        for key in sorted(config):
            self.buf.write(f"# {key}={_fmt(config[key])}\n")
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(columns)

    def row(self, *values):
        self.writer.writerow([_fmt(v) for v in values])

    def close(self):
        text = self.buf.getvalue()
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w") as fh:
                fh.write(text)


def _effective(args) -> dict:
    skip = {"func"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["version"] = __version__
    cfg["generator"] = "numpy Philox"
    return cfg


def _rmax(value: str):
    if value == "auto":
        return "auto"
    try:
        r = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {value!r}") from None
    if r < 1:
        raise argparse.ArgumentTypeError("rmax must be at least 1")
    return r


def _source(args):
    if (args.source is None) == (getattr(args, "input", None) is None):
        raise ConfigError("give exactly one of --source or --input")
    if args.source is None:
        return None
    try:
        return parse_source(args.source, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _seeds(args) -> list[int]:
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    return [args.seed + i for i in range(args.seeds)]


def _max_order(args):
    return None if args.max_order < 0 else args.max_order


def _npd_config(args) -> NpdConfig:
    return NpdConfig(ref=args.reference, smoothing=args.smoothing, scheme=args.weights, rmax=args.rmax,
                     max_order=_max_order(args))


def cmd_entropy(args):
    src = _source(args)
    ref = ReferenceMeasure.parse(args.reference)
    out = Output(args.out, _effective(args), ["n", "estimate_nats", "analytic_nats", "abs_error", "seed"])
    if src is None:
        runs = [(None, _load_input(args, ref), None)]
    else:
        if args.n is None or args.n < 1:
            raise ConfigError("--n must be a positive integer with --source")
        truth = analytic_entropy_rate(src, None if src.is_finite else ref).value \
            if _has_rate(src, ref) else None
        runs = [(s, sample(src, args.n, s), truth) for s in _seeds(args)]
    for seed, data, truth in runs:
        n = len(data)
        if n == 0:
            raise DataError("input is empty")
        grid = log_grid(n, 10)
        if isinstance(data, SymbolSequence):
            est = discrete_entropy_rate(data, args.smoothing, args.weights, _max_order(args), checkpoints=grid)
        else:
            est = differential_entropy_rate(data, _npd_config(args), checkpoints=grid)
        for i, value in est.trace:
            if args.lebesgue and not isinstance(data, SymbolSequence):
                value = lebesgue_rate(value, data[:i], ref)
            err = None if truth is None or args.lebesgue else abs(value - truth)
            out.row(i, value, None if args.lebesgue else truth, err, seed)
    out.close()


def _has_rate(src, ref) -> bool:
    try:
        analytic_entropy_rate(src, None if src.is_finite else ref)
        return True
    except ValueError:
        return False


def _load_input(args, ref):
    if args.alphabet is not None:
        if args.alphabet < 1:
            raise ConfigError("--alphabet must be positive")
        return read_symbols(args.input, args.alphabet)
    return read_reals(args.input, ref)


def cmd_density(args):
    src = _source(args)
    ref = ReferenceMeasure.parse(args.reference)
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    if src is None:
        data = read_reals(args.input, ref)
    else:
        if src.is_finite:
            raise ConfigError(f"density needs a real-valued source, got {args.source!r}")
        if args.n is None or args.n < 0:
            raise ConfigError("--n must be a nonnegative integer with --source")
        data = sample(src, args.n, args.seed)
    xs = ref.quantile(np.linspace(0.001, 0.999, args.grid))
    dens = predictive_density(xs, data, _npd_config(args))
    out = Output(args.out, _effective(args), ["x", "predictive_density"])
    for x, d in zip(xs, np.atleast_1d(dens)):
        out.row(x, d)
    out.close()


def cmd_predict(args):
    src = _source(args)
    if src is not None and not src.is_finite:
        raise ConfigError(f"predict needs a finite-alphabet source, got {args.source!r}")
    if args.max_terms is not None and args.max_terms < 1:
        raise ConfigError("--max-terms must be positive")
    if src is None:
        if args.alphabet is None:
            raise ConfigError("--alphabet is required with --input")
        runs = [(None, read_symbols(args.input, args.alphabet), None)]
    else:
        if args.n is None or args.n < 1:
            raise ConfigError("--n must be a positive integer with --source")
        runs = [(s, sample(src, args.n, s), src.bayes_error()) for s in _seeds(args)]
    out = Output(args.out, _effective(args), ["n", "mistake_density", "bayes_density", "seed"])
    for seed, data, bayes in runs:
        if len(data) == 0:
            raise DataError("input is empty")
        base = PPMMeasure(data.alphabet, args.smoothing, args.weights, _max_order(args))
        trace = run_prediction(data, CesaroMeasure(base), args.max_terms)
        for i in log_grid(len(data), 10):
            out.row(i, trace.density(i), bayes, seed)
    out.close()


def cmd_diagnostic(args):
    if args.source is None:
        raise ConfigError("diagnostic needs --source")
    src = _source(args)
    if not src.is_finite:
        raise ConfigError(f"source {args.source!r} has no finite-alphabet conditionals")
    if args.replicas < 1 or args.n is None or args.n < 1:
        raise ConfigError("--replicas and --n must be positive")
    base = PPMMeasure(src.alphabet, args.smoothing, args.weights, _max_order(args))
    out = Output(args.out, _effective(args), ["n", "mean_log_ratio", "replicas"])
    for step, value in log_ratio_diagnostic(src, base, log_grid(args.n, 100), args.replicas, args.seed):
        out.row(step, value, args.replicas)
    out.close()


def cmd_sample(args):
    src = _source(args)
    if args.n is None or args.n < 0:
        raise ConfigError("--n must be a nonnegative integer")
    data = sample(src, args.n, args.seed)
    if isinstance(data, SymbolSequence):
        text = "".join(f"{v}\n" for v in data.data.tolist())
    else:
        text = "".join(f"{float(v)!r}\n" for v in data)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entroscope", description="Universal entropy, density and prediction experiments.")
    p.add_argument("--version", action="version", version=f"entroscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        sp.add_argument("--source", help="source spec, e.g. fair-coin, iid:p=0.3,0.7, "
                                         "markov:rows=0.9,0.1;0.2,0.8, ar1:rho=0.5, uniform, periodic:01")
        if data:
            sp.add_argument("--input", help="data file (integers for symbols, one decimal per line for reals)")
            sp.add_argument("--alphabet", type=int, help="alphabet size of symbol input")
        sp.add_argument("--n", type=int, help="sample size")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="-", help="output path (default stdout)")

    def model(sp):
        sp.add_argument("--smoothing", choices=["laplace", "kt"], default="laplace")
        sp.add_argument("--weights", choices=["rational", "log"], default="rational")
        sp.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER,
                        help="highest tracked Markov order (negative for unbounded)")

    def real(sp):
        sp.add_argument("--reference", choices=["uniform", "gaussian"], default="uniform")
        sp.add_argument("--rmax", type=_rmax, default="auto", help="highest quantization level, or auto")

    sp = sub.add_parser("entropy", help="entropy-rate estimates on a logarithmic n grid")
    common(sp)
    model(sp)
    real(sp)
    sp.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds starting at --seed")
    sp.add_argument("--lebesgue", action="store_true", help="report real-valued rates relative to Lebesgue measure")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("density", help="predictive density on a grid of reference quantiles")
    common(sp, data=True)
    model(sp)
    real(sp)
    sp.add_argument("--grid", type=int, default=64)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("predict", help="mistake density of the averaged-measure predictor")
    common(sp)
    model(sp)
    sp.add_argument("--seeds", type=int, default=1)
    sp.add_argument("--max-terms", type=int, default=DEFAULT_MAX_TERMS,
                    help="most suffix lengths averaged per step")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("diagnostic", help="replica-mean log-ratio against the true conditionals")
    common(sp, data=False)
    model(sp)
    sp.add_argument("--replicas", type=int, default=100)
    sp.set_defaults(func=cmd_diagnostic, n=10000)

    sp = sub.add_parser("sample", help="write a synthetic sample, one value per line")
    common(sp, data=False)
    sp.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"entroscope: error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"entroscope: data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"entroscope: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"entroscope: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
