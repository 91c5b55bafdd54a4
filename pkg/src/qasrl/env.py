"""Episodic circuit-building environment.

Each step appends one gate to the circuit acting on a simulated noisy
device.  The observation is the vector of per-qubit Pauli expectations;
an episode ends when the state fidelity against the target crosses the
threshold (reward = fidelity) or when the step budget runs out
(reward = -step_penalty, like every other step).
"""

from dataclasses import dataclass, field

import numpy as np

from .quantum import (
    DensityMatrix,
    GateAction,
    GateKind,
    NoiseSpec,
    TargetState,
    apply_gate,
    bell_state,
    fidelity,
    initial_state,
    pauli_expectations,
)

_SINGLE_KINDS = (
    GateKind.ROT_PI4,
    GateKind.PAULI_X,
    GateKind.PAULI_Y,
    GateKind.PAULI_Z,
    GateKind.HADAMARD,
)


def enumerate_actions(n_qubits: int) -> tuple[GateAction, ...]:
    """The discrete action set: 5 single-qubit gates per qubit, then every
    ordered CNOT pair; 5n + n(n-1) actions in total."""
    actions = [
        GateAction(kind, target=q)
        for q in range(n_qubits)
        for kind in _SINGLE_KINDS
    ]
    actions += [
        GateAction(GateKind.CNOT, target=j, control=i)
        for i in range(n_qubits)
        for j in range(n_qubits)
        if j != i
    ]
    return tuple(actions)


@dataclass(frozen=True)
class EnvConfig:
    n_qubits: int = 2
    target: TargetState = field(default_factory=bell_state)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    fidelity_threshold: float = 0.95
    max_steps: int = 20
    step_penalty: float = 0.01

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"need at least one qubit, got {self.n_qubits}")
        if self.target.n_qubits != self.n_qubits:
            raise ValueError("target qubit count does not match the environment")
        if not 0.0 < self.fidelity_threshold <= 1.0:
            raise ValueError(f"fidelity threshold out of (0, 1]: {self.fidelity_threshold}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be positive, got {self.max_steps}")


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    fidelity: float
    steps_taken: int


@dataclass(frozen=True)
class EpisodeRecord:
    """What an episode did: its gate sequence and its final quality.

    ``score`` is final_fidelity - step_penalty * steps.
    """

    actions: tuple[GateAction, ...]
    final_fidelity: float
    steps: int
    score: float


class CircuitEnv:
    """Gym-style environment over the exact density-matrix simulator."""

    def __init__(self, config: EnvConfig, seed: int | None = None):
        self.config = config
        self.actions = enumerate_actions(config.n_qubits)
        # reserved for stochastic backends; the exact simulator never draws
        self.rng = np.random.default_rng(seed)
        self._state: DensityMatrix | None = None
        self._steps = 0
        self._done = False
        self._fidelity = 0.0
        self._taken: list[GateAction] = []

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def observation_dim(self) -> int:
        return 3 * self.config.n_qubits

    def reset(self) -> np.ndarray:
        self._state = initial_state(self.config.n_qubits)
        self._steps = 0
        self._done = False
        self._taken = []
        self._fidelity = fidelity(self._state, self.config.target)
        return pauli_expectations(self._state, self.config.noise)

    def _resolve(self, action) -> GateAction:
        if isinstance(action, GateAction):
            return action
        index = int(action)
        if not 0 <= index < len(self.actions):
            raise ValueError(f"action index {index} out of range 0..{len(self.actions) - 1}")
        return self.actions[index]

    def step(self, action) -> StepResult:
        """Apply one gate (by GateAction or action index)."""
        if self._state is None:
            raise RuntimeError("call reset() before step()")
        if self._done:
            raise RuntimeError("episode finished; call reset()")
        gate = self._resolve(action)
        self._state = apply_gate(self._state, gate, self.config.noise)
        self._steps += 1
        self._taken.append(gate)
        self._fidelity = fidelity(self._state, self.config.target)
        if self._fidelity >= self.config.fidelity_threshold:
            self._done = True
            reward = self._fidelity
        else:
            self._done = self._steps >= self.config.max_steps
            reward = -self.config.step_penalty
        return StepResult(
            observation=pauli_expectations(self._state, self.config.noise),
            reward=reward,
            done=self._done,
            fidelity=self._fidelity,
            steps_taken=self._steps,
        )

    def episode_record(self) -> EpisodeRecord:
        """Snapshot of the current (or just finished) episode."""
        if self._state is None:
            raise RuntimeError("no episode yet; call reset()")
        return EpisodeRecord(
            actions=tuple(self._taken),
            final_fidelity=self._fidelity,
            steps=self._steps,
            score=self._fidelity - self.config.step_penalty * self._steps,
        )
