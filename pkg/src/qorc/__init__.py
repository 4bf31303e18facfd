"""Photonic reservoir computing: boson-sampling fingerprints feeding a linear softmax readout."""

from .analysis import HillFit, crossover_ratio, fit_hill, js_divergence, ks_two_sample, tvd
from .cache import CacheHeader, FeatureCache, read_cache, write_cache
from .data import LabeledDataset, load_csv, load_digits, load_idx, load_mnist, read_raw, write_raw
from .errors import (
    BudgetExceededError,
    CacheIncompatibleError,
    ConfigError,
    DataError,
    DivergenceError,
    QorcError,
)
from .experiment import ExperimentConfig, RunReport
from .features import assemble_inputs, encode_phases, fit_pca
from .learn import EvalReport, LinearModel, TrainConfig, evaluate, predict, train
from .linalg import haar_random_unitary, permanent
from .photonics import (
    NoiseModel,
    OutcomeDistribution,
    ReservoirCircuit,
    exact_distribution,
    sample_histogram,
)

__version__ = "0.1.0"
