"""Raw-signal classifiers: ROCKET, MiniROCKET, 1NN-DTW and symbolic bag-of-patterns."""

from .datasets import (LENGTH_MODES, SeriesDataset, build_series_dataset, conform_length,
                       features_to_tabular, read_series_csv, write_series_csv)
from .dtw import Knn1Dtw, dtw_distance, knn1_dtw_fit_predict, pairwise_dtw
from .minirocket import MiniRocketParams, fit_minirocket, minirocket_transform
from .models import (SERIES_MODELS, DtwClassifier, MiniRocketClassifier, RocketClassifier,
                     SymbolicClassifier, make_series_model)
from .rocket import RocketKernelBank, generate_kernels, rocket_transform
from .symbolic import (SFA, SymbolicConfig, fit_symbolic_linear, sax_word_sequence, sax_words,
                       sfa_words)

__all__ = [
    "LENGTH_MODES", "SeriesDataset", "build_series_dataset", "conform_length",
    "features_to_tabular", "read_series_csv", "write_series_csv",
    "Knn1Dtw", "dtw_distance", "knn1_dtw_fit_predict", "pairwise_dtw",
    "MiniRocketParams", "fit_minirocket", "minirocket_transform",
    "SERIES_MODELS", "DtwClassifier", "MiniRocketClassifier", "RocketClassifier",
    "SymbolicClassifier", "make_series_model",
    "RocketKernelBank", "generate_kernels", "rocket_transform",
    "SFA", "SymbolicConfig", "fit_symbolic_linear", "sax_word_sequence", "sax_words", "sfa_words",
]
