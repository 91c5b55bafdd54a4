"""Deep Q-learning pieces: replay memory, TD targets, action selection.

Terminal transitions store ``next_state=None`` and their target is the
bare reward; everything else bootstraps through a separate target
network that is synced only every few episodes.
"""

from dataclasses import dataclass, field

import numpy as np

from .network import AdamState, QNetwork, adam_step, clone_parameters, mse_loss_and_grad


@dataclass(frozen=True)
class Transition:
    """One environment step; ``next_state`` is None when the episode ended."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray | None


class ReplayMemory:
    """Bounded ring buffer; once full, new pushes overwrite the oldest."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._buffer: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._buffer)

    def push(self, transition: Transition) -> None:
        if len(self._buffer) < self.capacity:
            self._buffer.append(transition)
        else:
            self._buffer[self._cursor] = transition
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list[Transition]:
        """k distinct transitions, uniformly without replacement."""
        if k > len(self._buffer):
            raise ValueError(f"cannot sample {k} from {len(self._buffer)} transitions")
        idx = rng.choice(len(self._buffer), size=k, replace=False)
        return [self._buffer[i] for i in idx]


@dataclass
class DQNConfig:
    """Learning hyperparameters; defaults follow the experiment setup.

    gamma stays at 0.70: episodes are at most 20 steps with 2-3 step
    solutions, and bootstrapped values inflate without bound at 0.99
    (max-over-actions bias feeding back through the target net).
    """

    gamma: float = 0.70
    batch_size: int = 64
    min_replay: int = 64
    replay_capacity: int = 10_000
    target_update_period: int = 10
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    hidden_sizes: tuple[int, ...] = (64, 64)
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.99
    epsilon_min: float = 0.02


def compute_targets(batch: list[Transition], target_net: QNetwork, gamma: float) -> np.ndarray:
    """r + gamma * max_a' Q(s', a'; target), or just r when terminal."""
    targets = np.array([t.reward for t in batch], dtype=float)
    live = [i for i, t in enumerate(batch) if t.next_state is not None]
    if live:
        next_states = np.stack([batch[i].next_state for i in live])
        targets[live] += gamma * target_net.forward(next_states).max(axis=1)
    return targets


def optimize(policy_net: QNetwork, target_net: QNetwork, memory: ReplayMemory,
             config: DQNConfig, adam: AdamState, rng: np.random.Generator) -> float | None:
    """One replay-sampled gradient step; no-op (None) while memory is short.

    Returns the pre-step batch loss otherwise.
    """
    if len(memory) < max(config.batch_size, config.min_replay):
        return None
    batch = memory.sample(config.batch_size, rng)
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=int)
    targets = compute_targets(batch, target_net, config.gamma)
    loss, grads = mse_loss_and_grad(policy_net, states, actions, targets)
    adam_step(policy_net, adam, grads)
    return loss


def select_action_greedy(net: QNetwork, observation: np.ndarray) -> int:
    """argmax over Q-values; ties break to the lowest index."""
    return int(np.argmax(net.forward(observation)))


def select_action_epsilon_greedy(net: QNetwork, observation: np.ndarray,
                                 epsilon: float, rng: np.random.Generator) -> int:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon out of [0, 1]: {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(net.output_dim))
    return select_action_greedy(net, observation)


def update_target(policy_net: QNetwork, target_net: QNetwork) -> None:
    """Copy policy parameters into the target network, in place."""
    if policy_net.layer_sizes != target_net.layer_sizes:
        raise ValueError("policy and target architectures differ")
    for layer in range(len(policy_net.weights)):
        target_net.weights[layer][:] = policy_net.weights[layer]
        target_net.biases[layer][:] = policy_net.biases[layer]


class DQNAgent:
    """Policy net, frozen-ish target net, replay memory and optimizer state.

    The agent owns its own rng for replay sampling so that exploration
    draws elsewhere never shift which batches get sampled.
    """

    def __init__(self, obs_dim: int, n_actions: int, config: DQNConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        sizes = [obs_dim, *config.hidden_sizes, n_actions]
        self.policy_net = QNetwork(sizes, rng=rng)
        self.target_net = clone_parameters(self.policy_net)
        self.memory = ReplayMemory(config.replay_capacity)
        self.adam = AdamState.for_network(
            self.policy_net,
            learning_rate=config.learning_rate,
            beta1=config.adam_beta1,
            beta2=config.adam_beta2,
            epsilon=config.adam_epsilon,
        )

    def observe(self, transition: Transition) -> None:
        self.memory.push(transition)

    def learn(self) -> float | None:
        return optimize(self.policy_net, self.target_net, self.memory,
                        self.config, self.adam, self.rng)

    def sync_target(self) -> None:
        update_target(self.policy_net, self.target_net)
