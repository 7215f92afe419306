"""Trainable operators between polynomial coefficient spaces.

The learned object composes three maps: project the input function onto
the first n+1 polynomials of an input basis, push the coefficient vector
through a small feedforward network, and reconstruct from the first m+1
polynomials of an output basis.  With orthonormal bases the coefficient
isomorphisms are well conditioned and mean-squared error on coefficients
is a discretized squared L^2 distance on functions.

The network is a plain NumPy multilayer perceptron (hidden layers tanh
or relu, linear output) with exact backpropagation; training is plain
gradient descent with a fixed step, fully determined by the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError, UsageError
from .function_space import SampledFunction
from .ortho_poly import OrthoPolyBasis, project

ACTIVATIONS = ("tanh", "relu")

MODEL_ARCHIVE_HEADER = "# projop model archive v1"

# loss explosion factor treated as divergence
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True, eq=False)
class Mlp:
    """Feedforward network: affine layers with tanh/relu, linear output.

    ``weights[i]`` has shape (fan_out, fan_in); ``biases[i]`` has shape
    (fan_out,).  All parameters must be finite.
    """

    weights: tuple
    biases: tuple
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise UsageError(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        weights = tuple(np.asarray(W, dtype=float) for W in self.weights)
        biases = tuple(np.asarray(b, dtype=float) for b in self.biases)
        if len(weights) != len(biases) or not weights:
            raise UsageError("need one bias vector per weight matrix")
        for i, (W, b) in enumerate(zip(weights, biases)):
            if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
                raise UsageError(f"layer {i} has incompatible shapes "
                                 f"{W.shape} / {b.shape}")
            if i > 0 and W.shape[1] != weights[i - 1].shape[0]:
                raise UsageError(
                    f"layer {i} input size {W.shape[1]} != previous output "
                    f"size {weights[i - 1].shape[0]}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise UsageError(f"layer {i} has non-finite parameters")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def layer_sizes(self) -> tuple:
        return (self.weights[0].shape[1],) + tuple(W.shape[0] for W in self.weights)

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[0]


def init_mlp(layer_sizes, activation: str, rng: np.random.Generator) -> Mlp:
    """Glorot-uniform weights, zero biases; deterministic given rng state."""
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise UsageError("need at least an input and an output layer")
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(tuple(weights), tuple(biases), activation)


def _act(z: np.ndarray, activation: str) -> np.ndarray:
    return np.tanh(z) if activation == "tanh" else np.maximum(z, 0.0)


def _act_grad(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0.0).astype(float)  # subgradient 0 at the kink


def _forward_batch(weights, biases, activation, V):
    """Batched forward pass; returns output and per-layer pre-activations."""
    pre = []
    a = V
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        pre.append(z)
        a = z if i == last else _act(z, activation)
    return a, pre


def _backward_batch(weights, biases, activation, V, targets):
    """Mean gradients of (1/2)||forward(v) - t||^2 over the batch.

    Returns (loss, weight gradients, bias gradients).
    """
    out, pre = _forward_batch(weights, biases, activation, V)
    B = len(V)
    residual = out - targets
    loss = 0.5 * float(np.sum(residual**2)) / B
    grads_W = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = residual  # linear output layer
    for i in range(len(weights) - 1, -1, -1):
        a_prev = V if i == 0 else _act(pre[i - 1], activation)
        grads_W[i] = delta.T @ a_prev / B
        grads_b[i] = delta.sum(axis=0) / B
        if i > 0:
            delta = (delta @ weights[i]) * _act_grad(pre[i - 1], activation)
    return loss, grads_W, grads_b


def mlp_forward(net: Mlp, v: np.ndarray) -> np.ndarray:
    """Evaluate the network on a single coefficient vector."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) != net.input_size:
        raise UsageError(
            f"input of shape {v.shape} does not match network input size "
            f"{net.input_size}")
    out, _ = _forward_batch(net.weights, net.biases, net.activation,
                            v.reshape(1, -1))
    return out[0]


def mlp_gradient(net: Mlp, v: np.ndarray, target: np.ndarray):
    """Backpropagation gradients of (1/2)||forward(v) - target||^2.

    Returns (weight gradients, bias gradients) matching the parameter
    shapes.
    """
    v = np.asarray(v, dtype=float)
    target = np.asarray(target, dtype=float)
    if v.ndim != 1 or len(v) != net.input_size:
        raise UsageError(f"input of shape {v.shape} does not match input size "
                         f"{net.input_size}")
    if target.ndim != 1 or len(target) != net.output_size:
        raise UsageError(f"target of shape {target.shape} does not match "
                         f"output size {net.output_size}")
    _, gW, gb = _backward_batch(net.weights, net.biases, net.activation,
                                v.reshape(1, -1), target.reshape(1, -1))
    return gW, gb


@dataclass(frozen=True, eq=False)
class TrainConfig:
    """Hyperparameters for gradient-descent training.

    ``batch_size`` of 0 means full batch.  ``hidden_width`` of 0 picks
    the default 4*max(n, m) + 16.  The seed fixes every random draw
    (initialization and batch shuffling).
    """

    learning_rate: float = 0.1
    epochs: int = 500
    batch_size: int = 0
    seed: int = 0
    hidden_width: int = 0
    activation: str = "tanh"
    loss_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise UsageError("learning_rate must be positive")
        if self.epochs < 1:
            raise UsageError("epochs must be >= 1")
        if self.batch_size < 0:
            raise UsageError("batch_size must be positive (0 = full batch)")
        if self.hidden_width < 0:
            raise UsageError("hidden_width must be positive (0 = default)")
        if self.activation not in ACTIVATIONS:
            raise UsageError(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if not self.loss_tolerance > 0:
            raise UsageError("loss_tolerance must be positive")
        if self.seed < 0:
            raise UsageError("seed must be nonnegative")


@dataclass(frozen=True, eq=False)
class NeuralProjectionOperator:
    """project onto input basis -> network on coefficients -> reconstruct.

    The weight functions of the two bases (unit weight by default,
    learned samples when the bases came from the weighted Gram-Schmidt
    construction) travel with the bases themselves.
    """

    input_basis: OrthoPolyBasis
    n: int
    output_basis: OrthoPolyBasis
    m: int
    net: Mlp

    def __post_init__(self):
        if not 0 <= self.n < self.input_basis.size:
            raise UsageError(f"n = {self.n} outside input basis of size "
                             f"{self.input_basis.size}")
        if not 0 <= self.m < self.output_basis.size:
            raise UsageError(f"m = {self.m} outside output basis of size "
                             f"{self.output_basis.size}")
        if self.net.input_size != self.n + 1:
            raise UsageError(f"network input size {self.net.input_size} != "
                             f"n + 1 = {self.n + 1}")
        if self.net.output_size != self.m + 1:
            raise UsageError(f"network output size {self.net.output_size} != "
                             f"m + 1 = {self.m + 1}")

    @property
    def weight_functions(self) -> tuple[SampledFunction, SampledFunction]:
        """The rho samples of the input and output functionals."""
        return (self.input_basis.functional.rho,
                self.output_basis.functional.rho)


def default_hidden_width(n: int, m: int) -> int:
    return 4 * max(n, m) + 16


def coefficient_data(data, input_basis: OrthoPolyBasis, n: int,
                     output_basis: OrthoPolyBasis, m: int):
    """Project (f, g) pairs to (input, target) coefficient arrays."""
    X = np.empty((len(data), n + 1))
    Y = np.empty((len(data), m + 1))
    for i, (f, g) in enumerate(data):
        X[i], _ = project(input_basis, n, f)
        Y[i], _ = project(output_basis, m, g)
    return X, Y


def train_operator(data, input_basis: OrthoPolyBasis, n: int,
                   output_basis: OrthoPolyBasis, m: int,
                   cfg: TrainConfig) -> tuple[NeuralProjectionOperator, np.ndarray]:
    """Fit the coefficient network by gradient descent on squared error.

    ``data`` is a sequence of (f, T(f)) pairs of sampled functions.
    Inputs are the coefficients of the projection of f onto the input
    basis, targets the coefficients of the projection of T(f) onto the
    output basis.  Training is deterministic given the config seed and
    stops early once the epoch loss falls below ``loss_tolerance``.

    Returns the trained operator and the per-epoch loss history (entry 0
    is the loss at initialization).  A loss exceeding DIVERGENCE_FACTOR
    times the initial loss, or a non-finite loss, raises DivergenceError
    with the epoch index.
    """
    if len(data) == 0:
        raise UsageError("training needs at least one (f, T(f)) pair")
    X, Y = coefficient_data(data, input_basis, n, output_basis, m)

    rng = np.random.default_rng(cfg.seed)
    width = cfg.hidden_width or default_hidden_width(n, m)
    net0 = init_mlp((n + 1, width, m + 1), cfg.activation, rng)
    weights = [W.copy() for W in net0.weights]
    biases = [b.copy() for b in net0.biases]

    batch = cfg.batch_size if 0 < cfg.batch_size < len(X) else len(X)
    initial_loss, _, _ = _backward_batch(weights, biases, cfg.activation, X, Y)
    losses = [initial_loss]
    floor = max(initial_loss, 1e-30)

    for epoch in range(cfg.epochs):
        if batch == len(X):
            order = np.arange(len(X))
        else:
            order = rng.permutation(len(X))
        for start in range(0, len(X), batch):
            sel = order[start:start + batch]
            _, gW, gb = _backward_batch(weights, biases, cfg.activation,
                                        X[sel], Y[sel])
            for i in range(len(weights)):
                weights[i] -= cfg.learning_rate * gW[i]
                biases[i] -= cfg.learning_rate * gb[i]
        loss, _, _ = _backward_batch(weights, biases, cfg.activation, X, Y)
        losses.append(loss)
        if not np.isfinite(loss) or loss > DIVERGENCE_FACTOR * floor:
            raise DivergenceError(
                f"training diverged at epoch {epoch}: loss = {loss!r} "
                f"(initial {initial_loss:.6g})")
        if loss < cfg.loss_tolerance:
            break

    net = Mlp(tuple(weights), tuple(biases), cfg.activation)
    op = NeuralProjectionOperator(input_basis, n, output_basis, m, net)
    return op, np.array(losses)


def apply_operator(S: NeuralProjectionOperator,
                   f: SampledFunction) -> SampledFunction:
    """Evaluate the learned operator: project, map coefficients, rebuild.

    The output lies in the span of the first m+1 output polynomials by
    construction.
    """
    c, _ = project(S.input_basis, S.n, f)
    d = mlp_forward(S.net, c)
    return S.output_basis.reconstruct(d)


# --- plain-text model archive ----------------------------------------------

def _format_floats(arr) -> str:
    return " ".join(f"{x:.17g}" for x in np.asarray(arr, dtype=float).ravel())


def save_model(path, op: NeuralProjectionOperator, seed: int | None = None,
               config_echo: dict | None = None,
               basis_ref: str | None = None) -> None:
    """Write the network and its basis metadata as plain text.

    Floats use 17 significant digits, so a load returns bitwise-equal
    parameters.
    """
    net = op.net
    lines = [
        MODEL_ARCHIVE_HEADER,
        f"activation = {net.activation}",
        "layer_sizes = " + " ".join(str(s) for s in net.layer_sizes),
        f"n = {op.n}",
        f"m = {op.m}",
        f"input_dimension = {op.input_basis.dim}",
        f"input_degree = {op.input_basis.max_total_degree}",
        f"input_points_per_axis = {op.input_basis.quadrature.points_per_axis}",
        f"output_dimension = {op.output_basis.dim}",
        f"output_degree = {op.output_basis.max_total_degree}",
        f"output_points_per_axis = {op.output_basis.quadrature.points_per_axis}",
    ]
    if seed is not None:
        lines.append(f"seed = {seed}")
    if basis_ref is not None:
        lines.append(f"basis_export = {basis_ref}")
    for key, value in (config_echo or {}).items():
        lines.append(f"config.{key} = {value}")
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"weights[{i}] = {_format_floats(W)}")
        lines.append(f"biases[{i}] = {_format_floats(b)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path, input_basis: OrthoPolyBasis | None = None,
               output_basis: OrthoPolyBasis | None = None) -> NeuralProjectionOperator:
    """Rebuild an operator from an archive written by save_model.

    When bases are not supplied, orthonormal tensor-Legendre bases are
    rebuilt from the recorded dimension/degree/points metadata; archives
    of operators over learned-weight bases require the caller to pass
    the bases explicitly.
    """
    from .function_space import build_quadrature
    from .ortho_poly import tensor_legendre

    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_ARCHIVE_HEADER:
        raise UsageError(f"{path} is not a projop model archive")
    meta: dict[str, str] = {}
    for line in lines[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    try:
        sizes = [int(s) for s in meta["layer_sizes"].split()]
        activation = meta["activation"]
        n = int(meta["n"])
        m = int(meta["m"])
        weights = []
        biases = []
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            W = np.array([float(x) for x in meta[f"weights[{i}]"].split()])
            b = np.array([float(x) for x in meta[f"biases[{i}]"].split()])
            weights.append(W.reshape(fan_out, fan_in))
            biases.append(b)
    except KeyError as exc:
        raise UsageError(f"model archive is missing {exc}") from exc
    net = Mlp(tuple(weights), tuple(biases), activation)
    if input_basis is None:
        quad = build_quadrature(int(meta["input_dimension"]),
                                int(meta["input_points_per_axis"]))
        input_basis = tensor_legendre(int(meta["input_dimension"]),
                                      int(meta["input_degree"]), quad)
    if output_basis is None:
        if (meta["output_dimension"] == meta["input_dimension"]
                and meta["output_degree"] == meta["input_degree"]
                and meta["output_points_per_axis"] == meta["input_points_per_axis"]):
            output_basis = input_basis
        else:
            quad = build_quadrature(int(meta["output_dimension"]),
                                    int(meta["output_points_per_axis"]))
            output_basis = tensor_legendre(int(meta["output_dimension"]),
                                           int(meta["output_degree"]), quad)
    return NeuralProjectionOperator(input_basis, n, output_basis, m, net)
