"""Dense pure- and mixed-state simulation kernels.

Qubit convention: qubit ``k`` is site ``k + 1`` of the chain and is bit ``k``
of a basis index (little-endian), so ``|q_{n-1} ... q_1 q_0>`` has index
``sum(q_k << k)``. Reshaped to a ``(2,) * n`` tensor in C order, qubit ``k``
is axis ``n - 1 - k``.

Multi-qubit gate matrices use the textbook ordering: the first listed
target is the most significant bit of the local index (so ``CNOT`` with
targets ``(control, target)`` is the usual ``[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 16
MAX_MIXED_QUBITS = 10

NORM_TOL = 1e-10


class SimulationError(ValueError):
    """Raised on invalid targets, malformed channels, or degenerate states."""


# ---------------------------------------------------------------------------
# gates

_S2 = 1 / np.sqrt(2)
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CH": np.block(
        [
            [np.eye(2), np.zeros((2, 2))],
            [np.zeros((2, 2)), np.array([[_S2, _S2], [_S2, -_S2]])],
        ]
    ).astype(complex),
}
GATE_ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "SDG": 1, "CZ": 2, "CNOT": 2, "CH": 2}
GATE_NAMES = tuple(GATE_ARITY) + ("PEXP",)


@dataclass(frozen=True)
class Gate:
    """A unitary instruction.

    ``PEXP`` is ``exp(+i * angle * pauli)`` with ``pauli`` given as local
    labels (one per target) and an optional sign ``power`` of ``i`` which
    must leave the string Hermitian.
    """

    name: str
    targets: tuple[int, ...]
    pauli: str | None = None
    angle: float | None = None

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if name not in GATE_NAMES:
            raise SimulationError(f"unknown gate {self.name!r}")
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError(f"repeated target in {name} {self.targets}")
        if name == "PEXP":
            if self.pauli is None or self.angle is None:
                raise SimulationError("PEXP needs a Pauli string and an angle")
            p = self.pauli_string
            if p.n_sites != len(self.targets):
                raise SimulationError("PEXP string length must match targets")
            if not p.is_hermitian:
                raise SimulationError("PEXP string must be Hermitian")
        elif len(self.targets) != GATE_ARITY[name]:
            raise SimulationError(f"{name} acts on {GATE_ARITY[name]} qubit(s)")

    @property
    def pauli_string(self) -> PauliString:
        return PauliString.parse(self.pauli)

    @property
    def arity(self) -> int:
        return len(self.targets)

    def matrix(self) -> np.ndarray:
        """Local unitary on the targets (first target = most significant)."""
        if self.name != "PEXP":
            return _FIXED[self.name]
        # PauliString.to_matrix puts label 0 on the least significant bit
        local = PauliString(self.pauli_string.labels[::-1], self.pauli_string.power)
        m = local.to_matrix()
        return np.cos(self.angle) * np.eye(len(m)) + 1j * np.sin(self.angle) * m

    def inverse(self) -> "Gate":
        if self.name == "S":
            return Gate("SDG", self.targets)
        if self.name == "SDG":
            return Gate("S", self.targets)
        if self.name == "PEXP":
            return Gate("PEXP", self.targets, self.pauli, -self.angle)
        return self


def pauli_exp_gate(p: PauliString, angle: float) -> Gate:
    """``exp(i angle p)`` restricted to the support of ``p``."""
    support = p.support
    if not support:
        raise SimulationError("exponential of the identity is a global phase")
    local = p.restrict(support)
    return Gate("PEXP", support, str(local), float(angle))


# ---------------------------------------------------------------------------
# states


@dataclass
class PureState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise SimulationError("amplitude vector has the wrong length")

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        _check_size(n_qubits, MAX_QUBITS)
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(np.log2(len(vec))))
        if 1 << n != len(vec):
            raise SimulationError("vector length is not a power of two")
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise SimulationError("zero vector")
            vec = vec / norm
        return cls(n, vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "PureState":
        return PureState(self.n_qubits, self.amplitudes.copy())

    def density_matrix(self) -> "MixedState":
        _check_size(self.n_qubits, MAX_MIXED_QUBITS)
        a = self.amplitudes
        return MixedState(self.n_qubits, np.outer(a, a.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class MixedState:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise SimulationError("density matrix has the wrong shape")

    @classmethod
    def zero(cls, n_qubits: int) -> "MixedState":
        _check_size(n_qubits, MAX_MIXED_QUBITS)
        m = np.zeros((1 << n_qubits,) * 2, dtype=complex)
        m[0, 0] = 1.0
        return cls(n_qubits, m)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "MixedState":
        dim = 1 << n_qubits
        return cls(n_qubits, np.eye(dim, dtype=complex) / dim)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def copy(self) -> "MixedState":
        return MixedState(self.n_qubits, self.matrix.copy())

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.matrix)), 0.0, None)

    def check(self, tol: float = NORM_TOL) -> None:
        """Raise unless Hermitian, unit-trace and positive within ``tol``."""
        m = self.matrix
        if np.abs(m - m.conj().T).max() > tol:
            raise SimulationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise SimulationError("density matrix trace differs from 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -tol:
            raise SimulationError("density matrix has a negative eigenvalue")


State = Union[PureState, MixedState]


def _check_size(n: int, limit: int) -> None:
    if n > limit:
        raise SimulationError(f"{n} qubits exceeds the configured maximum {limit}")


def _check_targets(n: int, targets: Sequence[int]) -> None:
    if len(set(targets)) != len(targets):
        raise SimulationError(f"repeated target in {tuple(targets)}")
    for t in targets:
        if not 0 <= t < n:
            raise SimulationError(f"qubit {t} out of range for {n} qubits")


# ---------------------------------------------------------------------------
# tensor kernels


def _apply_local(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``op`` (2^k x 2^k) into ``tensor`` along ``axes`` (MSB first)."""
    k = len(axes)
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    out = (op @ moved.reshape(1 << k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), axes)


def _row_axes(n: int, targets: Sequence[int]) -> list[int]:
    return [n - 1 - t for t in targets]


def _apply_to_vector(vec: np.ndarray, n: int, op: np.ndarray, targets) -> np.ndarray:
    t = vec.reshape((2,) * n)
    return _apply_local(t, op, _row_axes(n, targets)).reshape(-1)


def _conjugate_matrix(rho: np.ndarray, n: int, op: np.ndarray, targets) -> np.ndarray:
    """Return ``op rho op^dagger`` with ``op`` local on ``targets``."""
    t = rho.reshape((2,) * (2 * n))
    rows = _row_axes(n, targets)
    cols = [n + a for a in rows]
    t = _apply_local(t, op, rows)
    t = _apply_local(t, op.conj(), cols)
    return t.reshape(rho.shape)


# ---------------------------------------------------------------------------
# operations


def apply_unitary(state: State, op: np.ndarray, targets: Sequence[int]) -> State:
    targets = tuple(targets)
    _check_targets(state.n_qubits, targets)
    if op.shape != (1 << len(targets),) * 2:
        raise SimulationError("operator shape does not match target count")
    if isinstance(state, PureState):
        return PureState(state.n_qubits, _apply_to_vector(state.amplitudes, state.n_qubits, op, targets))
    return MixedState(state.n_qubits, _conjugate_matrix(state.matrix, state.n_qubits, op, targets))


def apply_gate(state: State, gate: Gate) -> State:
    """``|psi> -> U|psi>`` or ``rho -> U rho U^dagger``."""
    _check_targets(state.n_qubits, gate.targets)
    if gate.name == "PEXP":
        p = gate.pauli_string.embed(gate.targets, state.n_qubits)
        return apply_pauli_exponential(state, p, gate.angle)
    return apply_unitary(state, gate.matrix(), gate.targets)


def apply_pauli(state: State, p: PauliString) -> State:
    if p.n_sites != state.n_qubits:
        raise SimulationError("Pauli string size does not match state")
    if isinstance(state, PureState):
        return PureState(state.n_qubits, p.apply(state.amplitudes))
    left = p.apply(state.matrix, axis=0)
    return MixedState(state.n_qubits, p.apply(left.conj().T, axis=0).conj().T)


def apply_pauli_exponential(state: State, p: PauliString, theta: float) -> State:
    """Apply ``exp(i theta p) = cos(theta) I + i sin(theta) p``."""
    if not p.is_hermitian:
        raise SimulationError("exponent Pauli string must be Hermitian")
    if p.n_sites != state.n_qubits:
        raise SimulationError("Pauli string size does not match state")
    c, s = np.cos(theta), np.sin(theta)
    if isinstance(state, PureState):
        a = state.amplitudes
        return PureState(state.n_qubits, c * a + 1j * s * p.apply(a))
    m = state.matrix
    left = c * m + 1j * s * p.apply(m, axis=0)
    # right-multiply by exp(-i theta p) = (exp(i theta p) left^dagger)^dagger
    lh = left.conj().T
    both = c * lh + 1j * s * p.apply(lh, axis=0)
    return MixedState(state.n_qubits, both.conj().T)


def outcome_probability(state: State, qubit: int) -> float:
    """Born probability of reading ``1`` on ``qubit`` in the Z basis."""
    _check_targets(state.n_qubits, [qubit])
    probs = state.probabilities()
    ones = (np.arange(len(probs)) >> qubit) & 1
    return float(probs[ones == 1].sum())


def project_qubit(state: State, qubit: int, bit: int) -> tuple[State, float]:
    """Project ``qubit`` onto ``|bit>``; return the renormalised state and its weight."""
    _check_targets(state.n_qubits, [qubit])
    keep = ((np.arange(1 << state.n_qubits) >> qubit) & 1) == bit
    if isinstance(state, PureState):
        amps = np.where(keep, state.amplitudes, 0)
        weight = float(np.vdot(amps, amps).real)
        if weight <= 0:
            raise SimulationError("projection onto a zero-probability outcome")
        return PureState(state.n_qubits, amps / np.sqrt(weight)), weight
    mask = np.outer(keep, keep)
    m = np.where(mask, state.matrix, 0)
    weight = float(np.trace(m).real)
    if weight <= 0:
        raise SimulationError("projection onto a zero-probability outcome")
    return MixedState(state.n_qubits, m / weight), weight


def measure_qubit(state: State, qubit: int, rng: np.random.Generator) -> tuple[int, State, float]:
    """Sample a Z-basis outcome on ``qubit``.

    Returns ``(bit, collapsed_state, probability_of_that_bit)``; the
    probability is the pre-collapse Born weight.
    """
    total = state.norm() ** 2 if isinstance(state, PureState) else state.trace()
    if total <= 1e-300:
        raise SimulationError("cannot measure a state of zero norm")
    p1 = outcome_probability(state, qubit) / total
    bit = int(rng.random() < p1)
    collapsed, _ = project_qubit(state, qubit, bit)
    return bit, collapsed, (p1 if bit else 1.0 - p1)


# ---------------------------------------------------------------------------
# Kraus channels


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    operators: tuple[np.ndarray, ...]
    name: str = "kraus"
    tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise SimulationError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if dim & (dim - 1) or any(k.shape != (dim, dim) for k in ops):
            raise SimulationError("Kraus operators must be equal-size 2^k square matrices")
        object.__setattr__(self, "operators", ops)
        if self.completeness_error() > self.tol:
            raise SimulationError(
                f"Kraus operators of {self.name!r} violate sum K^dag K = I "
                f"(error {self.completeness_error():.2e})"
            )

    @property
    def n_qubits(self) -> int:
        return int(self.operators[0].shape[0]).bit_length() - 1

    def completeness_error(self) -> float:
        dim = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.abs(total - np.eye(dim)).max())

    def conjugated(self, u: np.ndarray, name: str | None = None) -> "KrausChannel":
        """Channel ``rho -> U^dag Phi(U rho U^dag) U`` (``Phi`` seen in a rotated frame)."""
        ops = tuple(u.conj().T @ k @ u for k in self.operators)
        return KrausChannel(ops, name or self.name)

    @classmethod
    def unitary(cls, u: np.ndarray, name: str = "unitary") -> "KrausChannel":
        return cls((u,), name)


def apply_kraus_channel(rho: MixedState, channel: KrausChannel, targets: Sequence[int]) -> MixedState:
    """``rho -> sum_i K_i rho K_i^dagger`` on ``targets`` (first target = MSB)."""
    targets = tuple(targets)
    _check_targets(rho.n_qubits, targets)
    if channel.n_qubits != len(targets):
        raise SimulationError("channel arity does not match targets")
    if channel.completeness_error() > channel.tol:
        raise SimulationError("channel is not trace preserving")
    n = rho.n_qubits
    out = np.zeros_like(rho.matrix)
    for k in channel.operators:
        out += _conjugate_matrix(rho.matrix, n, k, targets)
    return MixedState(n, out)


# ---------------------------------------------------------------------------
# composite states and observables


def tensor_copies(state: State, m: int, max_qubits: int | None = None) -> State:
    """``state^{(x) m}``; copy ``c`` occupies qubits ``c*n .. c*n + n - 1``."""
    if m < 1:
        raise SimulationError("copy count must be at least 1")
    total = state.n_qubits * m
    if isinstance(state, PureState):
        _check_size(total, MAX_QUBITS if max_qubits is None else max_qubits)
        vec = state.amplitudes
        for _ in range(m - 1):
            # later copies sit on higher qubit indices, i.e. more significant bits
            vec = np.kron(state.amplitudes, vec)
        return PureState(total, vec)
    _check_size(total, MAX_MIXED_QUBITS if max_qubits is None else max_qubits)
    mat = state.matrix
    for _ in range(m - 1):
        mat = np.kron(state.matrix, mat)
    return MixedState(total, mat)


def pauli_expectation(state: State, p: PauliString) -> complex:
    """``<psi|p|psi>`` or ``Tr[rho p]``; real part is the physical value."""
    if p.n_sites != state.n_qubits:
        raise SimulationError("Pauli string size does not match state")
    if isinstance(state, PureState):
        a = state.amplitudes
        return complex(np.vdot(a, p.apply(a)))
    return complex(np.trace(p.apply(state.matrix, axis=0)))


def operator_trace(matrix: np.ndarray, p: PauliString) -> complex:
    """``Tr[matrix p]`` for any square matrix on ``p.n_sites`` qubits."""
    return complex(np.trace(p.apply(matrix, axis=0)))


def partial_trace(state: State, keep: Sequence[int]) -> MixedState:
    """Reduced density matrix on ``keep``.

    Kept qubits are re-indexed in ascending order: the smallest kept qubit
    becomes qubit 0 (least significant bit) of the result.
    """
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise SimulationError("keep-set must be nonempty")
    n = state.n_qubits
    _check_targets(n, keep)
    traced = [q for q in range(n) if q not in keep]
    k = len(keep)
    keep_axes = [n - 1 - q for q in reversed(keep)]
    trace_axes = [n - 1 - q for q in traced]
    if isinstance(state, PureState):
        t = state.amplitudes.reshape((2,) * n)
        t = np.transpose(t, keep_axes + trace_axes).reshape(1 << k, -1)
        return MixedState(k, t @ t.conj().T)
    t = state.matrix.reshape((2,) * (2 * n))
    perm = keep_axes + trace_axes + [n + a for a in keep_axes] + [n + a for a in trace_axes]
    t = np.transpose(t, perm).reshape(1 << k, 1 << (n - k), 1 << k, 1 << (n - k))
    return MixedState(k, np.einsum("ajbj->ab", t))


def as_mixed(state: State) -> MixedState:
    return state.density_matrix() if isinstance(state, PureState) else state
