"""Networks assembled on random DAGs.

Every node of a sampled graph hosts a neuron built from M cosine feature
windows, a square random combiner, a random bias, and a bounded
activation. Node 1 maps the layer input; node i sums, over its
in-neighbors k, the activated affine image of the windows applied to
neighbor k's output. A layer's output concatenates all neuron outputs in
a random permutation order and appends an activated random "enhancement"
transform of that block, doubling the width.

Layers chain (the previous layer's output is the next one's input signal)
and every layer output is concatenated into the pattern matrix A, whose
ridge fit against the one-hot targets is the only training step: all
internal randomness is frozen at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.special

from .data import one_hot
from .errors import DataError, NumericError
from .features import SaeEncoder, apply_frf_window, composite_frf, encode, fit_sae, sample_frf_window
from .graph import GraphSpec, generate_random_dag, in_neighbors
from .solver import AdmmConfig, MinibatchResult, SolveResult, solve, solve_minibatch

__all__ = [
    "ArchConfig",
    "NeuronParams",
    "GraphLayer",
    "RgnnModel",
    "TrainResult",
    "compute_initial_neuron",
    "compute_neuron",
    "graph_forward",
    "build_layer",
    "build_layers",
    "build_pattern_matrix",
    "pattern_width",
    "train_rgnn",
    "train_regressor",
    "predict",
    "labels_from_scores",
    "scores_to_probabilities",
    "approximation_distance",
]

ACTIVATIONS = {
    "tanh": np.tanh,
    "sigmoid": scipy.special.expit,
}


@dataclass(frozen=True)
class ArchConfig:
    """Structural hyperparameters of one network.

    ``neuron_counts`` lists the node count of each graph;
    ``connection_probability`` is a single p shared by the graphs or one p
    per graph; ``d`` and ``M`` set the window width and count (d*M feature
    points per neuron).
    """

    neuron_counts: tuple[int, ...]
    connection_probability: float | tuple[float, ...] = 0.5
    d: int = 10
    M: int = 5
    sigma: float = 1.0
    activation: str = "tanh"
    sae_hidden: int = 128
    sae_lambda: float = 1e-3

    def __post_init__(self) -> None:
        object.__setattr__(self, "neuron_counts", tuple(int(n) for n in self.neuron_counts))
        if not self.neuron_counts or any(n < 1 for n in self.neuron_counts):
            raise ValueError(f"neuron_counts must be positive, got {self.neuron_counts}")
        for p in self.p_per_graph():
            if not (0.0 < p <= 1.0):
                raise ValueError(f"connection probability {p} outside (0, 1]")
        if self.d < 1 or self.M < 1:
            raise ValueError(f"d and M must be >= 1, got d={self.d}, M={self.M}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {sorted(ACTIVATIONS)}, got {self.activation!r}")
        if self.sae_hidden < 1:
            raise ValueError(f"sae_hidden must be >= 1, got {self.sae_hidden}")
        if self.sae_lambda < 0:
            raise ValueError(f"sae_lambda must be non-negative, got {self.sae_lambda}")

    def p_per_graph(self) -> tuple[float, ...]:
        p = self.connection_probability
        if isinstance(p, (tuple, list)):
            if len(p) != len(self.neuron_counts):
                raise ValueError(
                    f"{len(p)} probabilities for {len(self.neuron_counts)} graphs"
                )
            return tuple(float(v) for v in p)
        return tuple(float(p) for _ in self.neuron_counts)


@dataclass(frozen=True)
class NeuronParams:
    """Frozen random parameters of one neuron; windows are shared across
    every in-edge of the neuron."""

    windows: tuple
    W_n: np.ndarray  # (dM, dM)
    beta_n: np.ndarray  # (dM,)
    activation: str = "tanh"

    def __post_init__(self) -> None:
        object.__setattr__(self, "windows", tuple(self.windows))
        dm = self.windows[0].d * len(self.windows)
        if self.W_n.shape != (dm, dm):
            raise ValueError(f"W_n must be {dm}x{dm}, got {self.W_n.shape}")
        if self.beta_n.shape != (dm,):
            raise ValueError(f"beta_n must have length {dm}, got {self.beta_n.shape}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def width(self) -> int:
        return self.W_n.shape[0]

    @property
    def in_dim(self) -> int:
        return self.windows[0].in_dim


@dataclass(frozen=True)
class GraphLayer:
    """One graph of neurons plus its output permutation and enhancement."""

    spec: GraphSpec
    neurons: tuple
    permutation: np.ndarray  # node indices 1..n in concatenation order
    W_bar: np.ndarray
    beta_bar: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "neurons", tuple(self.neurons))
        n = self.spec.node_count
        if len(self.neurons) != n:
            raise ValueError(f"{len(self.neurons)} neurons for {n} nodes")
        if sorted(self.permutation.tolist()) != list(range(1, n + 1)):
            raise ValueError("permutation must be a bijection on 1..n")
        block = n * self.neurons[0].width
        if self.W_bar.shape != (block, block):
            raise ValueError(f"W_bar must be {block}x{block}, got {self.W_bar.shape}")
        if self.beta_bar.shape != (block,):
            raise ValueError(f"beta_bar must have length {block}, got {self.beta_bar.shape}")

    @property
    def output_width(self) -> int:
        return 2 * self.spec.node_count * self.neurons[0].width

    @property
    def input_dim(self) -> int:
        return self.neurons[0].in_dim


@dataclass(frozen=True)
class RgnnModel:
    """Immutable trained model: encoder, frozen layers, fitted output weights."""

    sae: SaeEncoder
    layers: tuple
    output_weights: np.ndarray
    class_count: int
    arch: ArchConfig
    solver: AdmmConfig

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        width = sum(layer.output_width for layer in self.layers)
        if self.output_weights.shape != (width, self.class_count):
            raise ValueError(
                f"output_weights must be {width}x{self.class_count}, got {self.output_weights.shape}"
            )

    @property
    def pattern_width(self) -> int:
        return self.output_weights.shape[0]


@dataclass
class TrainResult:
    model: RgnnModel
    trace: SolveResult | MinibatchResult


def compute_initial_neuron(params: NeuronParams, F: np.ndarray) -> np.ndarray:
    """Window mapping of the layer input, then the neuron's affine + activation."""
    comp = composite_frf(params.windows, F)
    act = ACTIVATIONS[params.activation]
    return act(comp @ params.W_n + params.beta_n)


def compute_neuron(i: int, params: NeuronParams, neighbor_outputs) -> np.ndarray:
    """Sum, over in-neighbors, of the activated affine image of each
    neighbor's windowed output. Neighbors are consumed in index order so
    the floating-point sum is reproducible."""
    if not neighbor_outputs:
        raise RuntimeError(f"neuron {i} has no neighbor outputs")
    act = ACTIVATIONS[params.activation]
    total = None
    for k in sorted(neighbor_outputs):
        comp = composite_frf(params.windows, neighbor_outputs[k])
        term = act(comp @ params.W_n + params.beta_n)
        total = term if total is None else total + term
    return total


def graph_forward(layer: GraphLayer, input_features: np.ndarray) -> np.ndarray:
    """Evaluate every neuron in node order (a topological order by
    construction), concatenate in permutation order, append the activated
    enhancement block."""
    input_features = np.asarray(input_features)
    if input_features.ndim != 2 or input_features.shape[1] != layer.input_dim:
        raise ValueError(
            f"layer expects N x {layer.input_dim} input, got shape {input_features.shape}"
        )
    n = layer.spec.node_count
    outputs = {1: compute_initial_neuron(layer.neurons[0], input_features)}
    for i in range(2, n + 1):
        nbrs = in_neighbors(layer.spec, i)
        missing = nbrs - outputs.keys()
        if missing:
            raise RuntimeError(f"neuron {i} read unset neighbors {sorted(missing)}")
        outputs[i] = compute_neuron(i, layer.neurons[i - 1], {k: outputs[k] for k in nbrs})

    permuted = np.hstack([outputs[q] for q in layer.permutation.tolist()])
    outputs.clear()
    act = ACTIVATIONS[layer.neurons[0].activation]
    enhancement = act(permuted @ layer.W_bar + layer.beta_bar)
    return np.hstack([permuted, enhancement])


def _sample_neuron(rng, in_dim: int, d: int, M: int, sigma: float, activation: str) -> NeuronParams:
    windows = tuple(sample_frf_window(in_dim, d, sigma, rng) for _ in range(M))
    dm = d * M
    W_n = rng.uniform(-1.0, 1.0, size=(dm, dm))
    beta_n = rng.uniform(0.0, 1.0, size=dm)
    return NeuronParams(windows=windows, W_n=W_n, beta_n=beta_n, activation=activation)


def build_layer(
    spec: GraphSpec,
    input_dim: int,
    d: int,
    M: int,
    sigma: float,
    activation: str,
    rng: np.random.Generator,
) -> GraphLayer:
    """Sample all per-layer randomness from ``rng`` in a fixed order:
    neurons in node order (windows, combiner, bias), then the permutation,
    then the enhancement parameters."""
    n = spec.node_count
    dm = d * M
    neurons = tuple(
        _sample_neuron(rng, input_dim if i == 1 else dm, d, M, sigma, activation)
        for i in range(1, n + 1)
    )
    permutation = rng.permutation(n) + 1
    block = n * dm
    W_bar = rng.uniform(-1.0, 1.0, size=(block, block))
    beta_bar = rng.uniform(0.0, 1.0, size=block)
    return GraphLayer(spec=spec, neurons=neurons, permutation=permutation, W_bar=W_bar, beta_bar=beta_bar)


def build_layers(arch: ArchConfig, input_dim: int, seed) -> tuple[GraphLayer, ...]:
    """Instantiate every graph layer from independent seed streams."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    layers = []
    width = input_dim
    probabilities = arch.p_per_graph()
    for count, p, layer_ss in zip(arch.neuron_counts, probabilities, ss.spawn(len(arch.neuron_counts))):
        graph_ss, params_ss = layer_ss.spawn(2)
        graph_seed = int(graph_ss.generate_state(1, np.uint64)[0])
        spec = generate_random_dag(count, p, graph_seed) if count >= 2 else _single_node_spec(p, graph_seed)
        layer = build_layer(
            spec, width, arch.d, arch.M, arch.sigma, arch.activation, np.random.default_rng(params_ss)
        )
        layers.append(layer)
        width = layer.output_width
    return tuple(layers)


def _single_node_spec(p: float, seed: int) -> GraphSpec:
    # Degenerate one-neuron graph: just the initial node, no edges.
    return GraphSpec(node_count=1, connection_probability=p, seed=seed, edges=frozenset())


def pattern_width(layers) -> int:
    return sum(layer.output_width for layer in layers)


def _pattern_matrix(sae: SaeEncoder, layers, X: np.ndarray) -> np.ndarray:
    signal = encode(sae, X)
    A = np.empty((X.shape[0], pattern_width(layers)))
    offset = 0
    for layer in layers:
        signal = graph_forward(layer, signal)
        A[:, offset : offset + layer.output_width] = signal
        offset += layer.output_width
    return A


def build_pattern_matrix(model: RgnnModel, X: np.ndarray) -> np.ndarray:
    """Concatenated layer outputs [R_1 ... R_m] for the given samples."""
    return _pattern_matrix(model.sae, model.layers, np.asarray(X, dtype=float))


def _train_common(X, targets, arch, solver_config, seed, sae, batch_size, epochs):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.size == 0:
        raise ValueError(f"X must be a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NumericError("X contains non-finite entries")

    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    sae_ss, struct_ss, shuffle_ss = ss.spawn(3)
    if sae is None:
        sae = fit_sae(X, arch.sae_hidden, arch.sae_lambda, sae_ss, solver_config=solver_config)
    elif sae.input_dim != X.shape[1]:
        raise ValueError(f"encoder expects {sae.input_dim} features, X has {X.shape[1]}")

    layers = build_layers(arch, sae.hidden_dim, struct_ss)
    A = _pattern_matrix(sae, layers, X)
    cfg = replace(solver_config, regularizer="l2")
    if batch_size is not None:
        shuffle_seed = int(shuffle_ss.generate_state(1, np.uint64)[0])
        result = solve_minibatch(A, targets, cfg, batch_size, epochs, shuffle_seed)
    else:
        result = solve(A, targets, cfg)
    return sae, layers, cfg, result


def train_rgnn(
    X,
    labels,
    arch_config: ArchConfig,
    solver_config: AdmmConfig,
    seed,
    sae: SaeEncoder | None = None,
    batch_size: int | None = None,
    epochs: int = 1,
) -> TrainResult:
    """Fit a classifier: encoder, frozen random layers, ridge output weights.

    All randomness derives from ``seed`` so retraining reproduces the model
    bit for bit. A prefit encoder can be shared across models; the layer
    seed stream is unchanged either way.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {labels.shape}")
    if np.unique(labels).size < 2:
        raise DataError("need at least two distinct labels")
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    class_count = int(labels.max()) + 1
    targets = one_hot(labels, class_count)

    sae, layers, cfg, result = _train_common(
        X, targets, arch_config, solver_config, seed, sae, batch_size, epochs
    )
    model = RgnnModel(
        sae=sae,
        layers=layers,
        output_weights=result.weights,
        class_count=class_count,
        arch=arch_config,
        solver=cfg,
    )
    return TrainResult(model=model, trace=result)


def train_regressor(
    X,
    targets,
    arch_config: ArchConfig,
    solver_config: AdmmConfig,
    seed,
    sae: SaeEncoder | None = None,
) -> TrainResult:
    """Same construction with real-valued targets; predictions live in the
    score matrix (one column per target dimension)."""
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    sae, layers, cfg, result = _train_common(
        X, targets, arch_config, solver_config, seed, sae, None, 1
    )
    model = RgnnModel(
        sae=sae,
        layers=layers,
        output_weights=result.weights,
        class_count=targets.shape[1],
        arch=arch_config,
        solver=cfg,
    )
    return TrainResult(model=model, trace=result)


def labels_from_scores(scores: np.ndarray) -> np.ndarray:
    """Highest score wins; exact ties go to the lowest class index."""
    return np.argmax(scores, axis=1)


def predict(model: RgnnModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Scores A @ W and the argmax labels."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.sae.input_dim:
        raise ValueError(f"expected N x {model.sae.input_dim} input, got shape {X.shape}")
    scores = build_pattern_matrix(model, X) @ model.output_weights
    return labels_from_scores(scores), scores


def scores_to_probabilities(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax; the score-to-probability convention for PR/ROC."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def approximation_distance(f_true, f_model) -> float:
    """Root-mean-square difference: the sampled approximation-error metric."""
    f_true = np.asarray(f_true, dtype=float).ravel()
    f_model = np.asarray(f_model, dtype=float).ravel()
    if f_true.size == 0:
        raise ValueError("empty input")
    if f_true.shape != f_model.shape:
        raise ValueError(f"length mismatch: {f_true.shape} vs {f_model.shape}")
    return float(np.sqrt(np.mean((f_true - f_model) ** 2)))
