"""Dense Q-network with hand-written backprop and Adam.

No autodiff: the gradient of the TD loss is computed layer by layer in
plain numpy.  The loss only flows through the output unit of the action
actually taken in each sampled transition.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SNAPSHOT_FORMAT_VERSION = 1


class QNetwork:
    """Fully connected net, ReLU hidden layers, linear output.

    With an rng, weights start uniform in +-1/sqrt(fan_in); without one
    they start at zero.  Biases always start at zero.
    """

    def __init__(self, layer_sizes, activation: str = "relu", rng: np.random.Generator | None = None):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"bad layer sizes {layer_sizes}")
        if activation != "relu":
            raise ValueError(f"unsupported activation {activation!r}")
        self.layer_sizes = sizes
        self.activation = activation
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                bound = 1.0 / np.sqrt(fan_in)
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Q-values for one observation (1-D) or a batch (2-D)."""
        x = np.asarray(inputs, dtype=float)
        single = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.layer_sizes[0]:
            raise ValueError(
                f"input dim {h.shape[1]} does not match network input {self.layer_sizes[0]}"
            )
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        out = h @ self.weights[-1] + self.biases[-1]
        return out[0] if single else out


def mse_loss_and_grad(net: QNetwork, inputs: np.ndarray, actions: np.ndarray, targets: np.ndarray):
    """Mean squared TD error over a batch, with gradients per parameter.

    loss = mean over the batch of (Q(s, a) - target)^2, where only the
    taken action's output contributes.  Returns (loss, grads) with grads
    a list of (dW, db) matching net.weights / net.biases.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    acts_idx = np.asarray(actions, dtype=int)
    tgt = np.asarray(targets, dtype=float)
    batch = x.shape[0]
    if batch == 0:
        raise ValueError("empty batch")
    if acts_idx.shape != (batch,) or tgt.shape != (batch,):
        raise ValueError("inputs, actions and targets must share the batch dimension")
    if acts_idx.min() < 0 or acts_idx.max() >= net.output_dim:
        raise ValueError("action index out of range")

    # forward, keeping pre-activations for the backward pass
    activations = [x]
    pre_acts = []
    h = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ w + b
        pre_acts.append(z)
        h = np.maximum(z, 0.0)
        activations.append(h)
    out = h @ net.weights[-1] + net.biases[-1]

    rows = np.arange(batch)
    err = out[rows, acts_idx] - tgt
    loss = float(np.mean(err**2))

    delta = np.zeros_like(out)
    delta[rows, acts_idx] = 2.0 * err / batch
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.weights)
    for layer in range(len(net.weights) - 1, -1, -1):
        grads[layer] = (activations[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ net.weights[layer].T) * (pre_acts[layer - 1] > 0)
    return loss, grads


@dataclass
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_network(cls, net: QNetwork, learning_rate: float = 0.001,
                    beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        state = cls(learning_rate, beta1, beta2, epsilon)
        for w, b in zip(net.weights, net.biases):
            state.m.append((np.zeros_like(w), np.zeros_like(b)))
            state.v.append((np.zeros_like(w), np.zeros_like(b)))
        return state


def adam_step(net: QNetwork, state: AdamState, grads) -> None:
    """One bias-corrected Adam update, in place."""
    state.t += 1
    corr1 = 1.0 - state.beta1**state.t
    corr2 = 1.0 - state.beta2**state.t
    for layer, (dw, db) in enumerate(grads):
        for param, grad, slot in (
            (net.weights[layer], dw, 0),
            (net.biases[layer], db, 1),
        ):
            m = state.m[layer][slot]
            v = state.v[layer][slot]
            m *= state.beta1
            m += (1.0 - state.beta1) * grad
            v *= state.beta2
            v += (1.0 - state.beta2) * grad * grad
            param -= state.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + state.epsilon)


def clone_parameters(net: QNetwork) -> QNetwork:
    """Deep copy: same architecture, independent parameter arrays."""
    copy = QNetwork(net.layer_sizes, activation=net.activation)
    for layer in range(len(net.weights)):
        copy.weights[layer][:] = net.weights[layer]
        copy.biases[layer][:] = net.biases[layer]
    return copy


def save_policy(net: QNetwork, path) -> None:
    """Write a self-describing snapshot: JSON header line, then raw
    little-endian float64 parameters (per layer, weights then bias)."""
    header = {
        "format_version": SNAPSHOT_FORMAT_VERSION,
        "layer_sizes": net.layer_sizes,
        "activation": net.activation,
    }
    blob = b"".join(
        arr.astype("<f8").tobytes()
        for w, b in zip(net.weights, net.biases)
        for arr in (w, b)
    )
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(blob)


def load_policy(path) -> QNetwork:
    raw = Path(path).read_bytes()
    newline = raw.index(b"\n")
    header = json.loads(raw[:newline].decode("utf-8"))
    if header.get("format_version") != SNAPSHOT_FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format {header.get('format_version')!r}")
    net = QNetwork(header["layer_sizes"], activation=header["activation"])
    flat = np.frombuffer(raw[newline + 1 :], dtype="<f8")
    expected = sum(w.size + b.size for w, b in zip(net.weights, net.biases))
    if flat.size != expected:
        raise ValueError(f"snapshot holds {flat.size} parameters, expected {expected}")
    cursor = 0
    for layer in range(len(net.weights)):
        for param in (net.weights[layer], net.biases[layer]):
            param[:] = flat[cursor : cursor + param.size].reshape(param.shape)
            cursor += param.size
    return net
