"""Exact density-matrix simulation of small gate-model circuits.

States are 2^n x 2^n density matrices with qubit 0 as the leftmost
(most significant) tensor factor.  Gate noise is a depolarizing channel
on the qubits a gate touches; readout noise degrades expectation values
without touching the state.
"""

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = np.sqrt(2.0)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2
# Z rotation by pi/4, written in the symmetric phase convention.
_ROT_PI4 = np.array(
    [[np.exp(-1j * np.pi / 8), 0], [0, np.exp(1j * np.pi / 8)]], dtype=complex
)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)

_PAULIS = {"X": _X, "Y": _Y, "Z": _Z}


class GateKind(enum.Enum):
    """The native gate set: one parameterless rotation, the Paulis, Hadamard, CNOT."""

    ROT_PI4 = "rot_pi4"
    PAULI_X = "x"
    PAULI_Y = "y"
    PAULI_Z = "z"
    HADAMARD = "h"
    CNOT = "cnot"


_SINGLE_QUBIT_MATRIX = {
    GateKind.ROT_PI4: _ROT_PI4,
    GateKind.PAULI_X: _X,
    GateKind.PAULI_Y: _Y,
    GateKind.PAULI_Z: _Z,
    GateKind.HADAMARD: _H,
}


@dataclass(frozen=True)
class GateAction:
    """One placement of a gate on named qubits.

    Single-qubit kinds use ``target`` only; CNOT needs a distinct
    ``control`` as well.
    """

    kind: GateKind
    target: int
    control: int | None = None

    def __post_init__(self):
        if self.target < 0:
            raise ValueError(f"negative target qubit {self.target}")
        if self.kind is GateKind.CNOT:
            if self.control is None:
                raise ValueError("CNOT requires a control qubit")
            if self.control < 0:
                raise ValueError(f"negative control qubit {self.control}")
            if self.control == self.target:
                raise ValueError("CNOT control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind.value} takes no control qubit")

    def qubits(self) -> tuple[int, ...]:
        if self.kind is GateKind.CNOT:
            return (self.control, self.target)
        return (self.target,)


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing error probability per gate kind plus a readout error rate.

    Gate kinds absent from ``gate_error`` are noiseless.  ``meas_error``
    is the probability a single-qubit readout flips, which scales every
    expectation value by (1 - 2 * meas_error).
    """

    gate_error: dict[GateKind, float] = field(default_factory=dict)
    meas_error: float = 0.0

    def __post_init__(self):
        for kind, p in self.gate_error.items():
            if not isinstance(kind, GateKind):
                raise TypeError(f"gate_error key {kind!r} is not a GateKind")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"gate error for {kind.value} out of [0, 1]: {p}")
        if not 0.0 <= self.meas_error <= 1.0:
            raise ValueError(f"meas_error out of [0, 1]: {self.meas_error}")

    def gate_p(self, kind: GateKind) -> float:
        return self.gate_error.get(kind, 0.0)


@dataclass(frozen=True)
class DensityMatrix:
    """An n-qubit mixed state; ``elements`` is Hermitian, PSD, trace one."""

    n_qubits: int
    elements: np.ndarray

    def __post_init__(self):
        dim = 2**self.n_qubits
        mat = np.asarray(self.elements, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    def validate(self, atol: float = 1e-9) -> None:
        """Raise if the matrix is not a physical state to within ``atol``."""
        if abs(np.trace(self.elements) - 1.0) > atol:
            raise ValueError(f"trace {np.trace(self.elements)} != 1")
        if not np.allclose(self.elements, self.elements.conj().T, atol=atol):
            raise ValueError("matrix is not Hermitian")
        eigs = np.linalg.eigvalsh(self.elements)
        if eigs.min() < -atol:
            raise ValueError(f"negative eigenvalue {eigs.min()}")


@dataclass(frozen=True)
class TargetState:
    """A pure reference state given by its unit-norm amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(np.log2(len(vec)))
        if 2**n != len(vec):
            raise ValueError(f"amplitude length {len(vec)} is not a power of two")
        if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
            raise ValueError("target state is not normalized")
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(len(self.amplitudes)))


def bell_state() -> TargetState:
    """(|00> + |11>) / sqrt(2)."""
    return TargetState(np.array([1, 0, 0, 1], dtype=complex) / _SQRT2)


def initial_state(n_qubits: int) -> DensityMatrix:
    """|0...0><0...0| on ``n_qubits`` qubits."""
    if n_qubits < 1:
        raise ValueError(f"need at least one qubit, got {n_qubits}")
    dim = 2**n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] = 1.0
    return DensityMatrix(n_qubits, mat)


def _embed_single(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    left = np.eye(2**qubit, dtype=complex)
    right = np.eye(2 ** (n_qubits - qubit - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


@functools.lru_cache(maxsize=None)
def gate_unitary(action: GateAction, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n unitary for one gate placement."""
    for q in action.qubits():
        if q >= n_qubits:
            raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
    if action.kind is GateKind.CNOT:
        mat = _embed_single(_P0, action.control, n_qubits) + _embed_single(
            _P1, action.control, n_qubits
        ) @ _embed_single(_X, action.target, n_qubits)
    else:
        mat = _embed_single(_SINGLE_QUBIT_MATRIX[action.kind], action.target, n_qubits)
    mat.setflags(write=False)
    return mat


def _partial_trace(mat: np.ndarray, traced: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Trace out ``traced`` qubits; remaining qubits keep their relative order."""
    tensor = mat.reshape((2,) * (2 * n_qubits))
    for q in sorted(traced, reverse=True):
        half = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=q, axis2=half + q)
    dim = 2 ** (n_qubits - len(traced))
    return tensor.reshape(dim, dim)


def _mix_subsystem(mat: np.ndarray, qubits: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Replace ``qubits`` with the maximally mixed state, keeping the rest."""
    qubits = tuple(sorted(qubits))
    rest = [q for q in range(n_qubits) if q not in qubits]
    reduced = _partial_trace(mat, qubits, n_qubits)
    sub_dim = 2 ** len(qubits)
    combined = np.kron(reduced, np.eye(sub_dim, dtype=complex) / sub_dim)
    # combined orders qubits as rest + qubits; permute back to 0..n-1
    order = rest + list(qubits)
    inv = np.argsort(order)
    tensor = combined.reshape((2,) * (2 * n_qubits))
    tensor = tensor.transpose(list(inv) + [n_qubits + i for i in inv])
    return np.ascontiguousarray(tensor.reshape(mat.shape))


def apply_gate(state: DensityMatrix, action: GateAction, noise: NoiseSpec | None = None) -> DensityMatrix:
    """Conjugate by the gate unitary, then depolarize the touched qubits.

    The depolarizing channel with probability p maps rho to
    (1 - p) * rho + p * (maximally mixed on the touched qubits).
    """
    unitary = gate_unitary(action, state.n_qubits)
    mat = unitary @ state.elements @ unitary.conj().T
    p = noise.gate_p(action.kind) if noise is not None else 0.0
    if p > 0.0:
        mat = (1.0 - p) * mat + p * _mix_subsystem(mat, action.qubits(), state.n_qubits)
    return DensityMatrix(state.n_qubits, mat)


def pauli_expectations(state: DensityMatrix, noise: NoiseSpec | None = None) -> np.ndarray:
    """Per-qubit <X>, <Y>, <Z> in qubit order, degraded by readout error.

    Returns a float vector of length 3 * n_qubits, each entry in [-1, 1].
    """
    scale = 1.0 - 2.0 * (noise.meas_error if noise is not None else 0.0)
    n = state.n_qubits
    out = np.empty(3 * n)
    for q in range(n):
        others = tuple(i for i in range(n) if i != q)
        reduced = _partial_trace(state.elements, others, n)
        for k, name in enumerate(("X", "Y", "Z")):
            out[3 * q + k] = scale * np.trace(reduced @ _PAULIS[name]).real
    return np.clip(out, -1.0, 1.0)


def fidelity(state: DensityMatrix, target: TargetState) -> float:
    """<psi| rho |psi> against a pure target; linear in rho, in [0, 1]."""
    if target.n_qubits != state.n_qubits:
        raise ValueError(
            f"target has {target.n_qubits} qubits, state has {state.n_qubits}"
        )
    vec = target.amplitudes
    return float(np.real(np.vdot(vec, state.elements @ vec)))
