"""Randomly wired random-feature classifiers on sampled DAGs.

Wiring comes from seeded random graphs, feature extraction from cosine
random-feature neurons, training from an EMA-smoothed ADMM ridge fit of
the output layer only, and ensembles from majority voting across members
with distinct connection probabilities.
"""

from .data import LabeledDataset, load_csv, load_idx, one_hot, split
from .ensemble import (
    EnsembleConfig,
    EnsembleReport,
    evaluate_ensemble,
    majority_vote,
    sample_probabilities,
    train_ensemble,
)
from .features import FrfWindow, SaeEncoder, apply_frf_window, composite_frf, encode, fit_sae, sample_frf_window
from .graph import GraphSpec, degree_histogram, generate_random_dag, graph_from_text, graph_to_text, in_neighbors
from .metrics import ConfusionMatrix, confusion, overall_accuracy, per_class_stats, pr_points, roc_points, trapezoid_auc
from .model_io import load_model, save_model
from .network import (
    ArchConfig,
    RgnnModel,
    approximation_distance,
    build_pattern_matrix,
    predict,
    train_regressor,
    train_rgnn,
)
from .solver import AdmmConfig, AdmmState, admm_step, ema_blend, ridge_closed_form, soft_threshold, solve, solve_minibatch

__version__ = "0.1.0"
