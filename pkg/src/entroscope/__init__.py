"""Universal measures for entropy-rate estimation, density estimation and prediction."""

__version__ = "0.1.0"

from .core import (Alphabet, ConditionalDistribution, LogWeight, SequentialMeasure, SymbolSequence,
                   UniformMeasure, log_sum_exp, sequence_log_prob)
from .npd import (EntropyEstimate, NpdConfig, differential_entropy_rate, discrete_entropy_rate,
                  npd_log_density, predictive_density)
from .ppm import KT, LAPLACE, PPMMeasure, SmoothingRule, ppm_conditional, ppm_mixture_log_prob
from .predict import (CesaroMeasure, PredictionTrace, cesaro_conditional, log_ratio_diagnostic,
                      predict_next, run_prediction)
from .quantize import ReferenceMeasure, cell_index, quantize_sequence, refine_parent
from .sources import AnalyticRate, SourceModel, analytic_entropy_rate, parse_source, sample, true_conditional
from .weights import WeightScheme

__all__ = [
    "Alphabet", "ConditionalDistribution", "LogWeight", "SequentialMeasure", "SymbolSequence",
    "UniformMeasure", "log_sum_exp", "sequence_log_prob",
    "EntropyEstimate", "NpdConfig", "differential_entropy_rate", "discrete_entropy_rate",
    "npd_log_density", "predictive_density",
    "KT", "LAPLACE", "PPMMeasure", "SmoothingRule", "ppm_conditional", "ppm_mixture_log_prob",
    "CesaroMeasure", "PredictionTrace", "cesaro_conditional", "log_ratio_diagnostic", "predict_next",
    "run_prediction",
    "ReferenceMeasure", "cell_index", "quantize_sequence", "refine_parent",
    "AnalyticRate", "SourceModel", "analytic_entropy_rate", "parse_source", "sample", "true_conditional",
    "WeightScheme",
]
