"""Histogram-based, leaf-wise, multiclass gradient boosted trees."""
from .binning import BinMapper, EmptyInputError, fit_bins
from .booster import BoostedModel, TrainingTrace, predict, predict_proba, predict_raw, thread_cap, train
from .config import GbdtConfig
from .objective import cross_entropy, softmax, softmax_gradients
from .persist import MODEL_VERSION, dumps_model, load_model, loads_model, save_model
from .tree import GrowthLog, HistogramMismatchError, Tree, grow_tree

__all__ = [
    "BinMapper",
    "BoostedModel",
    "EmptyInputError",
    "GbdtConfig",
    "GrowthLog",
    "HistogramMismatchError",
    "MODEL_VERSION",
    "TrainingTrace",
    "Tree",
    "cross_entropy",
    "dumps_model",
    "fit_bins",
    "grow_tree",
    "load_model",
    "loads_model",
    "predict",
    "predict_proba",
    "predict_raw",
    "save_model",
    "softmax",
    "softmax_gradients",
    "thread_cap",
    "train",
]
