"""Running circuits: exact outcome distributions and seeded shot sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Conditional, Measure
from .core import (
    MAX_MIXED_QUBITS,
    MAX_QUBITS,
    Gate,
    MixedState,
    PureState,
    SimulationError,
    State,
    apply_gate,
    apply_kraus_channel,
    measure_qubit,
)
from .noise import NoiseModel, bias_bits


@dataclass
class ShotRecord:
    """Classical bits of every shot (``bits[shot, bit]``) plus provenance."""

    bits: np.ndarray
    seed: int | None = None
    circuit_name: str = ""

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 2:
            raise SimulationError("shot bits must be a 2-D array")

    @property
    def shots(self) -> int:
        return self.bits.shape[0]

    @property
    def n_bits(self) -> int:
        return self.bits.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ShotRecord)
            and self.seed == other.seed
            and np.array_equal(self.bits, other.bits)
        )


def _noise_after(state: MixedState, gate: Gate, noise: NoiseModel) -> MixedState:
    ch = noise.channel_for(gate.arity)
    if ch is None:
        return state
    if ch.n_qubits == gate.arity and gate.arity > 1:
        return apply_kraus_channel(state, ch, gate.targets)
    if ch.n_qubits != 1:
        raise SimulationError("channel arity matches neither 1 nor the gate")
    for q in gate.targets:
        state = apply_kraus_channel(state, ch, [q])
    return state


def evolve(circuit: Circuit, noise: NoiseModel | None = None, state: State | None = None) -> State:
    """Apply every gate of a measurement-free prefix; pure unless gate noise is present."""
    noisy = noise is not None and noise.has_gate_noise
    if state is None:
        state = MixedState.zero(circuit.n_qubits) if noisy else PureState.zero(circuit.n_qubits)
    elif noisy and isinstance(state, PureState):
        state = state.density_matrix()
    for inst in circuit.instructions:
        if isinstance(inst, Measure):
            continue
        if isinstance(inst, Conditional):
            raise SimulationError("evolve() cannot follow classical feed-forward")
        state = apply_gate(state, inst)
        if noisy:
            state = _noise_after(state, inst, noise)
    return state


def _check_capacity(circuit: Circuit, noise: NoiseModel | None) -> None:
    limit = MAX_MIXED_QUBITS if (noise is not None and noise.has_gate_noise) else MAX_QUBITS
    if circuit.n_qubits > limit:
        raise SimulationError(
            f"circuit uses {circuit.n_qubits} qubits, engine maximum is {limit}"
        )


def exact_distribution(circuit: Circuit, noise: NoiseModel | None = None) -> np.ndarray:
    """Probability of each classical record, indexed little-endian over bits.

    Only for circuits whose measurements are terminal. Unwritten bits stay 0.
    Readout bias is folded in exactly.
    """
    _check_capacity(circuit, noise)
    if not circuit.measurements_are_terminal():
        raise SimulationError("exact distribution needs terminal measurements")
    final = evolve(circuit, noise)
    probs = final.probabilities()
    probs = probs / probs.sum()
    meas = circuit.measurements()
    n = circuit.n_qubits
    # marginal over measured qubits, ordered by their bit
    qubits = [m.qubit for m in meas]
    t = probs.reshape((2,) * n)
    keep_axes = [n - 1 - q for q in reversed(qubits)]
    other = [a for a in range(n) if a not in keep_axes]
    marg = np.transpose(t, keep_axes + other).reshape(1 << len(qubits), -1).sum(axis=1)
    if noise is not None and not noise.is_noiseless:
        marg = noise.bias_distribution(marg)
    out = np.zeros(1 << circuit.n_bits)
    local = np.arange(len(marg))
    index = np.zeros_like(local)
    for j, m in enumerate(meas):
        index |= ((local >> j) & 1) << m.bit
    np.add.at(out, index, marg)
    return out


def bits_from_indices(idx: np.ndarray, n_bits: int) -> np.ndarray:
    return ((idx[:, None] >> np.arange(n_bits)) & 1).astype(np.uint8)


def sample_distribution(
    dist: np.ndarray, n_bits: int, shots: int, seed=None, name: str = ""
) -> ShotRecord:
    """Draw ``shots`` records from an exact distribution over ``n_bits`` bits.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts; an
    integer seed is kept on the record.
    """
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(dist), size=shots, p=dist)
    tag = int(seed) if isinstance(seed, (int, np.integer)) else None
    return ShotRecord(bits_from_indices(idx, n_bits), tag, name)


def expected_value(dist: np.ndarray, n_bits: int, per_shot) -> complex:
    """Exact mean of a per-shot statistic ``per_shot(record)`` under ``dist``."""
    support = np.flatnonzero(dist > 0)
    vals = per_shot(ShotRecord(bits_from_indices(support, n_bits)))
    return complex(np.dot(dist[support], vals))


def execute(
    circuit: Circuit,
    noise: NoiseModel | None = None,
    shots: int = 1024,
    seed: int | None = None,
) -> ShotRecord:
    """Sample ``shots`` classical records.

    Terminal-measurement circuits are sampled from their exact Born
    distribution (pure or density-matrix, readout bias included). Circuits
    with mid-circuit measurements or feed-forward are run shot by shot with
    collapse; shot ``k`` draws from its own stream seeded by ``(seed, k)``.
    """
    if shots < 1:
        raise SimulationError("shots must be at least 1")
    circuit.validate()
    _check_capacity(circuit, noise)
    if circuit.n_bits == 0:
        return ShotRecord(np.zeros((shots, 0), dtype=np.uint8), seed, circuit.name)
    if circuit.measurements_are_terminal():
        dist = exact_distribution(circuit, noise)
        return sample_distribution(dist, circuit.n_bits, shots, seed, circuit.name)
    rows = [
        _run_trajectory(circuit, noise, np.random.default_rng([0 if seed is None else seed, k]))
        for k in range(shots)
    ]
    return ShotRecord(np.array(rows, dtype=np.uint8), seed, circuit.name)


def _run_trajectory(circuit: Circuit, noise: NoiseModel | None, rng: np.random.Generator) -> np.ndarray:
    noisy = noise is not None and noise.has_gate_noise
    state: State = MixedState.zero(circuit.n_qubits) if noisy else PureState.zero(circuit.n_qubits)
    bits = np.zeros(circuit.n_bits, dtype=np.uint8)
    for inst in circuit.instructions:
        if isinstance(inst, Measure):
            bit, state, _ = measure_qubit(state, inst.qubit, rng)
            if noise is not None and not noise.is_noiseless:
                bit = int(bias_bits(np.array([bit]), noise.readout_bias, rng,
                                    noise.bias_variant, noise.readout_flip)[0])
            bits[inst.bit] = bit
            continue
        if isinstance(inst, Conditional):
            if bits[inst.bit] != inst.value:
                continue
            inst = inst.gate
        state = apply_gate(state, inst)
        if noisy:
            state = _noise_after(state, inst, noise)
    return bits
