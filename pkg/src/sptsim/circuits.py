"""Circuit representation and the circuit library.

Copies of an ``L``-site chain sit on qubits ``0 .. L-1`` (copy 1) and
``L .. 2L-1`` (copy 2); pair ``i`` of a SWAP test is ``(i, L + i)``.
Every library circuit measures qubit ``q`` into classical bit ``q``.

Text format (one instruction per line, ``#`` starts a comment)::

    NAME <free text>
    FIGURE <free text>
    QUBITS <n>
    BITS <m>
    H 0
    CNOT 0 4                  # control, target
    PEXP ZXZ 1 2 3 0.6        # exp(+i 0.6 Z1 X2 Z3), angle written with repr()
    MEASURE 3 3               # qubit, bit
    IF 2 1 X 4                # apply "X 4" when bit 2 == 1
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .core import GATE_ARITY, Gate, PureState, SimulationError, apply_gate
from .symmetry import _check_chain

STATES = ("cluster", "trivial")
TELEPORT_KINDS = ("symmetric", "symmetry_breaking", "none")


@dataclass(frozen=True)
class Measure:
    qubit: int
    bit: int


@dataclass(frozen=True)
class Conditional:
    """``gate`` applied only when classical ``bit`` equals ``value``."""

    gate: Gate
    bit: int
    value: int = 1


Instruction = Union[Gate, Measure, Conditional]


@dataclass
class Circuit:
    n_qubits: int
    n_bits: int = 0
    instructions: list = field(default_factory=list)
    name: str = ""
    figure: str = ""

    # -- building -----------------------------------------------------
    def append(self, inst: Instruction) -> "Circuit":
        self._check(inst, written=self._written_bits())
        self.instructions.append(inst)
        return self

    def gate(self, name: str, *targets: int, pauli: str | None = None, angle: float | None = None) -> "Circuit":
        return self.append(Gate(name, targets, pauli, angle))

    def h(self, q): return self.gate("H", q)
    def x(self, q): return self.gate("X", q)
    def z(self, q): return self.gate("Z", q)
    def s(self, q): return self.gate("S", q)
    def sdg(self, q): return self.gate("SDG", q)
    def cz(self, a, b): return self.gate("CZ", a, b)
    def cnot(self, c, t): return self.gate("CNOT", c, t)
    def ch(self, c, t): return self.gate("CH", c, t)

    def pexp(self, pauli: str, targets: Sequence[int], angle: float) -> "Circuit":
        return self.append(Gate("PEXP", tuple(targets), pauli, float(angle)))

    def measure(self, qubit: int, bit: int | None = None) -> "Circuit":
        return self.append(Measure(qubit, qubit if bit is None else bit))

    def measure_all(self) -> "Circuit":
        for q in range(self.n_qubits):
            self.measure(q, q)
        return self

    def conditional(self, gate: Gate, bit: int, value: int = 1) -> "Circuit":
        return self.append(Conditional(gate, bit, value))

    def compose(self, other: "Circuit", qubit_offset: int = 0) -> "Circuit":
        """Append ``other``'s gates shifted by ``qubit_offset`` (gates only)."""
        for inst in other.instructions:
            if not isinstance(inst, Gate):
                raise SimulationError("only gate-only circuits can be composed")
            self.append(_shift(inst, qubit_offset))
        return self

    # -- inspection ---------------------------------------------------
    def gates(self) -> list[Gate]:
        return [i for i in self.instructions if isinstance(i, Gate)]

    def measurements(self) -> list[Measure]:
        return [i for i in self.instructions if isinstance(i, Measure)]

    def has_feed_forward(self) -> bool:
        return any(isinstance(i, Conditional) for i in self.instructions)

    def measurements_are_terminal(self) -> bool:
        """True when no gate touches, and no measurement repeats, a measured qubit."""
        measured: set[int] = set()
        for inst in self.instructions:
            if isinstance(inst, Measure):
                if inst.qubit in measured:
                    return False
                measured.add(inst.qubit)
            else:
                g = inst.gate if isinstance(inst, Conditional) else inst
                if isinstance(inst, Conditional) or measured.intersection(g.targets):
                    return False
        return True

    def _written_bits(self) -> set[int]:
        return {i.bit for i in self.instructions if isinstance(i, Measure)}

    def _check(self, inst: Instruction, written: set[int]) -> None:
        g = inst.gate if isinstance(inst, Conditional) else inst
        if isinstance(g, Gate):
            for t in g.targets:
                if not 0 <= t < self.n_qubits:
                    raise SimulationError(f"qubit {t} out of range in {self.name or 'circuit'}")
        if isinstance(inst, Measure):
            if not 0 <= inst.qubit < self.n_qubits:
                raise SimulationError(f"measured qubit {inst.qubit} out of range")
            if not 0 <= inst.bit < self.n_bits:
                raise SimulationError(f"classical bit {inst.bit} out of range")
        if isinstance(inst, Conditional):
            if inst.bit not in written:
                raise SimulationError(f"condition on bit {inst.bit} before it is measured")
            if inst.value not in (0, 1):
                raise SimulationError("condition value must be 0 or 1")

    def validate(self) -> None:
        written: set[int] = set()
        for inst in self.instructions:
            self._check(inst, written)
            if isinstance(inst, Measure):
                written.add(inst.bit)

    # -- text form ----------------------------------------------------
    def to_text(self) -> str:
        lines = ["# sptsim circuit v1"]
        if self.name:
            lines.append(f"NAME {self.name}")
        if self.figure:
            lines.append(f"FIGURE {self.figure}")
        lines += [f"QUBITS {self.n_qubits}", f"BITS {self.n_bits}"]
        for inst in self.instructions:
            if isinstance(inst, Measure):
                lines.append(f"MEASURE {inst.qubit} {inst.bit}")
            elif isinstance(inst, Conditional):
                lines.append(f"IF {inst.bit} {inst.value} {_gate_text(inst.gate)}")
            else:
                lines.append(_gate_text(inst))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        header: dict[str, str] = {}
        body: list[list[str]] = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            if key in ("NAME", "FIGURE", "QUBITS", "BITS"):
                header[key] = rest.strip()
            else:
                body.append(line.split())
        if "QUBITS" not in header:
            raise SimulationError("circuit text lacks a QUBITS line")
        circ = cls(int(header["QUBITS"]), int(header.get("BITS", 0)),
                   name=header.get("NAME", ""), figure=header.get("FIGURE", ""))
        for tokens in body:
            op = tokens[0].upper()
            if op == "MEASURE":
                circ.append(Measure(int(tokens[1]), int(tokens[2])))
            elif op == "IF":
                circ.append(Conditional(_parse_gate(tokens[3:]), int(tokens[1]), int(tokens[2])))
            else:
                circ.append(_parse_gate(tokens))
        return circ


def _gate_text(g: Gate) -> str:
    targets = " ".join(str(t) for t in g.targets)
    if g.name == "PEXP":
        return f"PEXP {g.pauli} {targets} {g.angle!r}"
    return f"{g.name} {targets}"


def _parse_gate(tokens: list[str]) -> Gate:
    op = tokens[0].upper()
    if op == "PEXP":
        return Gate("PEXP", tuple(int(t) for t in tokens[2:-1]), tokens[1], float(tokens[-1]))
    if op not in GATE_ARITY:
        raise SimulationError(f"unknown opcode {tokens[0]!r}")
    return Gate(op, tuple(int(t) for t in tokens[1:]))


def _shift(g: Gate, offset: int) -> Gate:
    return Gate(g.name, tuple(t + offset for t in g.targets), g.pauli, g.angle)


# ---------------------------------------------------------------------------
# building blocks


def chain_bases(L: int, state: str = "cluster", boundary: str = "open") -> str:
    """Per-site measurement bases whose prefix products are the subsystem symmetry.

    Open cluster chains: ``Y X ... X Y`` (so every prefix reads
    ``Y1 X2 ... X_{L_A}`` and the full chain reads the total parity).
    Product states and periodic chains: ``X`` everywhere.
    """
    if state not in STATES:
        raise SimulationError(f"state must be one of {STATES}")
    if state == "trivial" or boundary == "periodic":
        return "X" * L
    return "Y" + "X" * (L - 2) + "Y" if L >= 2 else "Y"


def rotate_to_bases(circ: Circuit, bases: str, offset: int = 0) -> Circuit:
    """Rotate each site so that a Z measurement reads the given Pauli."""
    for k, b in enumerate(bases):
        q = offset + k
        if b == "Y":
            circ.sdg(q)
            circ.h(q)
        elif b == "X":
            circ.h(q)
        elif b != "Z":
            raise SimulationError(f"unknown basis {b!r}")
    return circ


def add_chain_preparation(circ: Circuit, L: int, state: str = "cluster",
                          boundary: str = "open", offset: int = 0) -> Circuit:
    """Hadamards on every site, then CZ on neighbouring pairs (cluster only)."""
    if state not in STATES:
        raise SimulationError(f"state must be one of {STATES}")
    for k in range(L):
        circ.h(offset + k)
    if state == "cluster":
        for k in range(L - 1):
            circ.cz(offset + k, offset + k + 1)
        if boundary == "periodic":
            circ.cz(offset + L - 1, offset)
    return circ


def cluster_state_circuit(L: int, boundary: str = "open", state: str = "cluster") -> Circuit:
    _check_chain(L, boundary)
    circ = Circuit(L, 0, name=f"{state}_prep L={L} {boundary}", figure="2a")
    return add_chain_preparation(circ, L, state, boundary)


def _check_subsystem(L: int, subsystem_size: int) -> None:
    if not 1 <= subsystem_size <= L:
        raise SimulationError(f"subsystem size must lie in 1..{L}")


def swap_test_circuit(
    L: int,
    subsystem_size: int | None = None,
    state: str = "cluster",
    boundary: str = "open",
    prep: Circuit | None = None,
    rotate: bool = True,
) -> Circuit:
    """Two prepared copies, a Bell-basis readout on each pair, all qubits measured.

    ``subsystem_size`` is only validated: every pair is measured so one
    shot set serves every prefix. With ``prep`` given, that gate-only
    circuit prepares each copy instead of the chain.
    """
    if prep is not None:
        L = prep.n_qubits
    _check_subsystem(L, subsystem_size or L)
    circ = Circuit(2 * L, 2 * L, name=f"swap_test L={L}", figure="S1")
    for offset in (0, L):
        if prep is not None:
            circ.compose(prep, offset)
        else:
            add_chain_preparation(circ, L, state, boundary, offset)
            if rotate:
                rotate_to_bases(circ, chain_bases(L, state, boundary), offset)
    for i in range(L):
        circ.cnot(i, L + i)
        circ.h(i)
    return circ.measure_all()


def symmetry_resolved_probability_circuit(L: int, state: str = "cluster", boundary: str = "open") -> Circuit:
    """Single copy rotated into the symmetry basis and measured."""
    _check_chain(L, boundary)
    circ = Circuit(L, L, name=f"sector_probability L={L} {state}", figure="S2")
    add_chain_preparation(circ, L, state, boundary)
    rotate_to_bases(circ, chain_bases(L, state, boundary))
    return circ.measure_all()


def pair_eigenbasis_block(circ: Circuit, a: int, b: int) -> Circuit:
    """Map the eigenvectors of ``(Z_a (x) I) SWAP_ab`` onto computational states."""
    circ.cnot(b, a)
    circ.sdg(b)
    circ.ch(a, b)
    circ.cnot(b, a)
    return circ


def modified_swap_test_circuit(
    L: int,
    subsystem_size: int | None = None,
    state: str = "cluster",
    boundary: str = "open",
) -> Circuit:
    """Both copies rotated into the symmetry basis, then the pair eigenbasis block."""
    _check_subsystem(L, subsystem_size or L)
    circ = Circuit(2 * L, 2 * L, name=f"modified_swap_test L={L} {state}", figure="S3")
    for offset in (0, L):
        add_chain_preparation(circ, L, state, boundary, offset)
        rotate_to_bases(circ, chain_bases(L, state, boundary), offset)
    for i in range(L):
        pair_eigenbasis_block(circ, i, L + i)
    return circ.measure_all()


def pair_eigenvectors() -> dict[complex, np.ndarray]:
    """Eigenvectors of ``(Z (x) I) SWAP`` on a pair (first factor = qubit 0 of the pair).

    Vectors are in the little-endian basis of a 2-qubit register where the
    copy-1 qubit is qubit 0.
    """
    s = 1 / np.sqrt(2)

    def ket(a: int, b: int) -> np.ndarray:
        v = np.zeros(4, dtype=complex)
        v[a | (b << 1)] = 1
        return v

    return {
        1: ket(0, 0),
        -1: ket(1, 1),
        1j: s * (ket(0, 1) + 1j * ket(1, 0)),
        -1j: s * (ket(0, 1) - 1j * ket(1, 0)),
    }


@functools.lru_cache(maxsize=None)
def pair_decode_table() -> dict[tuple[int, int], complex]:
    """``(bit of copy-1 qubit, bit of copy-2 qubit) -> eigenvalue``.

    Built by pushing each analytic eigenvector through
    :func:`pair_eigenbasis_block`; raises if any outcome is not
    deterministic or two eigenvectors collide.
    """
    block = pair_eigenbasis_block(Circuit(2), 0, 1)
    table: dict[tuple[int, int], complex] = {}
    for value, vec in pair_eigenvectors().items():
        st = PureState(2, vec)
        for g in block.gates():
            st = apply_gate(st, g)
        probs = st.probabilities()
        idx = int(np.argmax(probs))
        if abs(probs[idx] - 1) > 1e-12:
            raise SimulationError("pair block does not resolve the eigenbasis")
        key = (idx & 1, idx >> 1)
        if key in table:
            raise SimulationError("two eigenvectors share an outcome")
        table[key] = value
    return table


# ---------------------------------------------------------------------------
# teleportation

INPUT_STATES: dict[str, tuple[str, ...]] = {
    "0": (),
    "1": ("X",),
    "+": ("H",),
    "-": ("X", "H"),
    "+i": ("H", "S"),
    "-i": ("H", "SDG"),
}


def input_state_vector(label: str) -> np.ndarray:
    st = PureState.zero(1)
    for name in INPUT_STATES[label]:
        st = apply_gate(st, Gate(name, (0,)))
    return st.amplitudes


def teleportation_circuit(
    input_prep: Iterable[str] | Sequence[Gate] = (),
    alpha: float = 0.0,
    beta: float = 0.0,
    kind: str = "symmetric",
    sign: int = 1,
    tomography_basis: str | None = None,
) -> Circuit:
    """Wire protocol on an input qubit plus a four-site open cluster chain.

    Qubit 0 holds the input, qubits 1-4 the chain. The chain is perturbed
    by ``exp(i sign alpha X_3)`` (or ``Y_3``) followed by
    ``exp(i sign beta Z_1 X_2 Z_3)`` in chain numbering. Qubits 0-3 are read
    in the X basis into bits 0-3; qubit 4 carries the output and is
    measured into bit 4 only when ``tomography_basis`` is given. The Pauli
    correction is left to post-processing.
    """
    if kind not in TELEPORT_KINDS:
        raise SimulationError(f"kind must be one of {TELEPORT_KINDS}")
    n_bits = 4 if tomography_basis is None else 5
    circ = Circuit(5, n_bits, name=f"teleport {kind} alpha={alpha!r} beta={beta!r}", figure="S4")
    for g in input_prep:
        g = Gate(g, (0,)) if isinstance(g, str) else g
        if g.targets != (0,):
            raise SimulationError("input preparation must act on qubit 0 only")
        circ.append(g)
    add_chain_preparation(circ, 4, "cluster", "open", offset=1)
    circ.cz(0, 1)
    if kind != "none":
        letter = "X" if kind == "symmetric" else "Y"
        circ.pexp(letter, (3,), sign * alpha)
        circ.pexp("ZXZ", (1, 2, 3), sign * beta)
    for q in range(4):
        circ.h(q)
        circ.measure(q, q)
    if tomography_basis is not None:
        rotate_to_bases(circ, tomography_basis.upper(), offset=4)
        circ.measure(4, 4)
    return circ
