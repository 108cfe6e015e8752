"""Toy spectral-encoder inverse baseline for pdeinv benchmark datasets."""

from .data import DatasetIndex, WindowDataset
from .model import FnoLite, FnoLiteConfig
from .train import TrainConfig, TrainResult, evaluate, train
from .ttt import TttConfig, TttResult, ttt

__version__ = "0.1.0"

__all__ = [
    "DatasetIndex",
    "WindowDataset",
    "FnoLite",
    "FnoLiteConfig",
    "TrainConfig",
    "TrainResult",
    "TttConfig",
    "TttResult",
    "evaluate",
    "train",
    "ttt",
    "__version__",
]
