"""Double-Q learning machinery: dense MLP, Adam, replay buffer, checkpoints.

Everything runs on float64 numpy arrays so that seeded training is
bit-reproducible. Hidden layers use ReLU, the output layer is linear.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CheckpointError,
    InsufficientDataError,
    NumericError,
    ShapeError,
)

CHECKPOINT_MAGIC = b"IABQ"
CHECKPOINT_VERSION = 1


@dataclass
class QNetwork:
    """Fully connected action-value network.

    weights[i] has shape (layer_dims[i], layer_dims[i+1]); the forward pass
    is x @ W + b per layer.
    """

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def create(cls, layer_dims, rng) -> "QNetwork":
        """Glorot-uniform weights, zero biases."""
        dims = tuple(int(d) for d in layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ShapeError(f"invalid layer dims {dims}")
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def copy(self) -> "QNetwork":
        return QNetwork(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


@dataclass
class AdamState:
    """Adam moment estimates, one array per parameter tensor."""

    moment1_w: list[np.ndarray]
    moment1_b: list[np.ndarray]
    moment2_w: list[np.ndarray]
    moment2_b: list[np.ndarray]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    @classmethod
    def for_network(cls, net: QNetwork) -> "AdamState":
        return cls(
            [np.zeros_like(w) for w in net.weights],
            [np.zeros_like(b) for b in net.biases],
            [np.zeros_like(w) for w in net.weights],
            [np.zeros_like(b) for b in net.biases],
        )


@dataclass(frozen=True, eq=False)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Bounded FIFO of transitions; sampling is uniform with replacement."""

    def __init__(self, capacity: int = 10000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        """Yields transitions oldest first."""
        n = len(self._items)
        start = self._next if n == self.capacity else 0
        for i in range(n):
            yield self._items[(start + i) % n]

    def push(self, tr: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(tr)
        else:
            self._items[self._next] = tr
            self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng) -> list[Transition]:
        if len(self._items) < batch_size:
            raise InsufficientDataError(
                f"buffer holds {len(self._items)} transitions, need {batch_size}"
            )
        idx = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in idx]


@dataclass(frozen=True)
class EpsilonSchedule:
    epsilon0: float
    decay: float
    epsilon_min: float


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    discount: float
    batch_size: int
    target_sync_interval: int
    episodes: int
    seed: int


def epsilon_at(schedule: EpsilonSchedule, t: int) -> float:
    """Exploration rate after t steps: max(eps_min, eps0 * decay**t)."""
    if t < 0:
        raise ValueError("step index must be non-negative")
    return max(schedule.epsilon_min, schedule.epsilon0 * schedule.decay**t)


def mlp_forward(net: QNetwork, x: np.ndarray) -> np.ndarray:
    """Q-values for a single state vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise ShapeError(f"expected input of length {net.input_dim}, got shape {x.shape}")
    return forward_batch(net, x[None, :])[0]


def forward_batch(net: QNetwork, states: np.ndarray) -> np.ndarray:
    """Q-values for a batch of states, shape (n, output_dim)."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] != net.input_dim:
        raise ShapeError(f"expected (n, {net.input_dim}) states, got {states.shape}")
    a = states
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        a = z if i == last else np.maximum(z, 0.0)
    return a


def _forward_cache(net: QNetwork, states: np.ndarray):
    """Forward pass keeping pre-activations and activations for backprop."""
    zs = []
    acts = [states]
    a = states
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        zs.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return zs, acts


def ddqn_target(tr: Transition, online: QNetwork, target: QNetwork, discount: float) -> float:
    """Double-Q target: online net picks the next action, target net values it."""
    if online.layer_dims != target.layer_dims:
        raise ShapeError("online and target networks must share dimensions")
    if tr.terminal:
        return float(tr.reward)
    q_online = mlp_forward(online, tr.next_state)
    q_target = mlp_forward(target, tr.next_state)
    best = int(np.argmax(q_online))
    return float(tr.reward + discount * q_target[best])


def batch_targets(online: QNetwork, target: QNetwork, batch, discount: float) -> np.ndarray:
    """Vectorized ddqn_target over a batch."""
    if online.layer_dims != target.layer_dims:
        raise ShapeError("online and target networks must share dimensions")
    next_states = np.stack([tr.next_state for tr in batch]).astype(float)
    rewards = np.array([tr.reward for tr in batch], dtype=float)
    terminal = np.array([tr.terminal for tr in batch], dtype=bool)
    best = np.argmax(forward_batch(online, next_states), axis=1)
    q_next = forward_batch(target, next_states)[np.arange(len(batch)), best]
    return rewards + np.where(terminal, 0.0, discount * q_next)


def loss_and_gradients(net: QNetwork, states: np.ndarray, actions: np.ndarray, targets: np.ndarray):
    """Mean squared error on the taken actions' outputs, plus its gradients.

    Only the taken action's output carries gradient per sample; the loss is
    averaged over the batch. Targets are treated as constants.
    """
    m = states.shape[0]
    if np.any(actions < 0) or np.any(actions >= net.output_dim):
        raise ShapeError(f"action index out of range for {net.output_dim} outputs")
    zs, acts = _forward_cache(net, states)
    rows = np.arange(m)
    diff = acts[-1][rows, actions] - targets
    loss = float(np.mean(diff * diff))
    grad = np.zeros_like(acts[-1])
    grad[rows, actions] = 2.0 * diff / m
    grads_w, grads_b = [], []
    for i in range(len(net.weights) - 1, -1, -1):
        grads_w.append(acts[i].T @ grad)
        grads_b.append(grad.sum(axis=0))
        if i > 0:
            grad = (grad @ net.weights[i].T) * (zs[i - 1] > 0.0)
    return loss, grads_w[::-1], grads_b[::-1]


def adam_update(net: QNetwork, state: AdamState, grads_w, grads_b, learning_rate: float) -> None:
    """One in-place Adam step on every parameter tensor."""
    state.step_count += 1
    c1 = 1.0 - state.beta1**state.step_count
    c2 = 1.0 - state.beta2**state.step_count
    params = zip(
        net.weights + net.biases,
        grads_w + grads_b,
        state.moment1_w + state.moment1_b,
        state.moment2_w + state.moment2_b,
    )
    for param, grad, m1, m2 in params:
        m1 *= state.beta1
        m1 += (1.0 - state.beta1) * grad
        m2 *= state.beta2
        m2 += (1.0 - state.beta2) * grad * grad
        param -= learning_rate * (m1 / c1) / (np.sqrt(m2 / c2) + state.eps_hat)


def train_on_batch(online: QNetwork, target: QNetwork, batch, cfg: TrainConfig, adam: AdamState) -> float:
    """One gradient step on a batch of transitions; returns the pre-update loss."""
    if not batch:
        raise ValueError("batch must be non-empty")
    states = np.stack([tr.state for tr in batch]).astype(float)
    if states.shape[1] != online.input_dim:
        raise ShapeError(f"state length {states.shape[1]} != input dim {online.input_dim}")
    actions = np.array([tr.action for tr in batch], dtype=int)
    targets = batch_targets(online, target, batch, cfg.discount)
    loss, grads_w, grads_b = loss_and_gradients(online, states, actions, targets)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss at optimizer step {adam.step_count + 1}")
    adam_update(online, adam, grads_w, grads_b, cfg.learning_rate)
    return loss


def sync_target(online: QNetwork, target: QNetwork) -> QNetwork:
    """Copy online parameters into the target network (deep copy semantics)."""
    if online.layer_dims != target.layer_dims:
        raise ShapeError("online and target networks must share dimensions")
    for tw, ow in zip(target.weights, online.weights):
        tw[...] = ow
    for tb, ob in zip(target.biases, online.biases):
        tb[...] = ob
    return target


def _pack_arrays(net: QNetwork, adam: AdamState) -> bytes:
    parts = []
    for group in (
        zip(net.weights, net.biases),
        zip(adam.moment1_w, adam.moment1_b),
        zip(adam.moment2_w, adam.moment2_b),
    ):
        for w, b in group:
            parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    parts.append(struct.pack("<Qddd", adam.step_count, adam.beta1, adam.beta2, adam.eps_hat))
    return b"".join(parts)


def checkpoint_save(net: QNetwork, adam: AdamState, path) -> None:
    """Write a little-endian binary checkpoint with a CRC32 body checksum."""
    dims = net.layer_dims
    header = CHECKPOINT_MAGIC + struct.pack(
        "<HH", CHECKPOINT_VERSION, len(dims)
    ) + struct.pack(f"<{len(dims)}I", *dims)
    body = _pack_arrays(net, adam)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))


def checkpoint_load(path) -> tuple[QNetwork, AdamState]:
    """Read a checkpoint; raises CheckpointError on any malformed input."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic bytes; not an iabsim checkpoint")
    version, n_dims = struct.unpack_from("<HH", raw, 4)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    offset = 8
    if len(raw) < offset + 4 * n_dims:
        raise CheckpointError("truncated header")
    dims = struct.unpack_from(f"<{n_dims}I", raw, offset)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise CheckpointError(f"invalid layer dims {dims}")
    offset += 4 * n_dims
    n_params = sum(a * b + b for a, b in zip(dims[:-1], dims[1:]))
    body_size = 3 * n_params * 8 + struct.calcsize("<Qddd")
    if len(raw) != offset + body_size + 4:
        raise CheckpointError(
            f"expected {offset + body_size + 4} bytes for dims {dims}, file has {len(raw)}"
        )
    body = raw[offset:offset + body_size]
    (stored_crc,) = struct.unpack_from("<I", raw, offset + body_size)
    if stored_crc != zlib.crc32(body) & 0xFFFFFFFF:
        raise CheckpointError("body checksum mismatch")

    pos = 0

    def take(shape):
        nonlocal pos
        count = int(np.prod(shape))
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=pos).reshape(shape)
        pos += count * 8
        return arr.astype(float)

    layer_shapes = list(zip(dims[:-1], dims[1:]))
    weights = []
    biases = []
    for fan_in, fan_out in layer_shapes:
        weights.append(take((fan_in, fan_out)))
        biases.append(take((fan_out,)))
    groups = []
    for _ in range(2):
        gw, gb = [], []
        for fan_in, fan_out in layer_shapes:
            gw.append(take((fan_in, fan_out)))
            gb.append(take((fan_out,)))
        groups.append((gw, gb))
    step_count, beta1, beta2, eps_hat = struct.unpack_from("<Qddd", body, pos)
    net = QNetwork(tuple(int(d) for d in dims), weights, biases)
    adam = AdamState(
        groups[0][0], groups[0][1], groups[1][0], groups[1][1],
        step_count=step_count, beta1=beta1, beta2=beta2, eps_hat=eps_hat,
    )
    return net, adam
