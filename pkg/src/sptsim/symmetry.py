"""Finite Abelian symmetries acting by Pauli strings, and sector projectors."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    KrausChannel,
    MixedState,
    PureState,
    SimulationError,
    State,
    apply_kraus_channel,
    as_mixed,
    operator_trace,
    partial_trace,
)
from .pauli import PauliString, pauli_product

BOUNDARIES = ("open", "periodic")
MAX_DENSE_SITES = 8


class SymmetryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class AbelianGroup:
    """Finite Abelian group given by its multiplication and character tables.

    ``table[a][b]`` is the index of ``elements[a] * elements[b]``; element 0
    is the identity. ``characters[k][g]`` is ``chi_k(g)``.
    """

    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    characters: np.ndarray

    def __post_init__(self):
        n = len(self.elements)
        chars = np.asarray(self.characters, dtype=complex)
        object.__setattr__(self, "characters", chars)
        if len(self.table) != n or any(len(r) != n for r in self.table):
            raise SymmetryError("multiplication table must be |G| x |G|")
        if chars.shape != (n, n):
            raise SymmetryError("character table must be |G| x |G|")
        for a, b in itertools.product(range(n), repeat=2):
            if self.table[a][b] != self.table[b][a]:
                raise SymmetryError("group is not Abelian")
        if any(self.table[0][g] != g for g in range(n)):
            raise SymmetryError("element 0 must be the identity")
        if not np.allclose(chars[:, 0], 1):
            raise SymmetryError("characters must equal 1 on the identity")
        for a, b in itertools.product(range(n), repeat=2):
            if not np.allclose(chars[:, self.table[a][b]], chars[:, a] * chars[:, b]):
                raise SymmetryError("character row is not a homomorphism")
        if not np.allclose(chars @ chars.conj().T, n * np.eye(n)):
            raise SymmetryError("character rows are not orthogonal")

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, label: str) -> int:
        return self.elements.index(label)

    def multiply(self, a: int, b: int) -> int:
        return self.table[a][b]


def trivial_group() -> AbelianGroup:
    return AbelianGroup(("e",), ((0,),), np.ones((1, 1)))


def cyclic_group(n: int) -> AbelianGroup:
    labels = tuple("e" if m == 0 else f"g{m}" for m in range(n))
    table = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
    omega = np.exp(2j * np.pi / n)
    chars = np.array([[omega ** (k * m) for m in range(n)] for k in range(n)])
    # snap roots of unity such as i**k to exact values
    chars = np.round(chars.real, 15) + 1j * np.round(chars.imag, 15)
    return AbelianGroup(labels, table, chars)


def direct_product(g: AbelianGroup, h: AbelianGroup) -> AbelianGroup:
    pairs = list(itertools.product(range(g.order), range(h.order)))
    labels = tuple(
        "e" if (a, b) == (0, 0) else f"{g.elements[a]}*{h.elements[b]}" for a, b in pairs
    )
    pos = {p: i for i, p in enumerate(pairs)}
    table = tuple(
        tuple(pos[(g.table[a1][a2], h.table[b1][b2])] for (a2, b2) in pairs)
        for (a1, b1) in pairs
    )
    chars = np.array(
        [[g.characters[k1, a] * h.characters[k2, b] for (a, b) in pairs] for (k1, k2) in pairs]
    )
    return AbelianGroup(labels, table, chars)


def z2() -> AbelianGroup:
    return cyclic_group(2)


def z2xz2() -> AbelianGroup:
    """``Z2 x Z2`` with elements ``(e, b, a, ab)``, ``a`` generating the first factor.

    Sectors are indexed the same way; their labels give the ``(a, b)``
    eigenvalues, i.e. ``(++, +-, -+, --)``.
    """
    return direct_product(cyclic_group(2), cyclic_group(2))


def group_from_config(cfg: Mapping) -> AbelianGroup:
    """Group from ``elements``, ``table`` (labels or indices) and ``characters``.

    Characters may be numbers or ``[re, im]`` pairs.
    """
    elements = tuple(str(e) for e in cfg["elements"])

    def idx(v):
        return elements.index(str(v)) if str(v) in elements else int(v)

    table = tuple(tuple(idx(v) for v in row) for row in cfg["table"])

    def num(v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)

    chars = np.array([[num(v) for v in row] for row in cfg["characters"]])
    return AbelianGroup(elements, table, chars)


# ---------------------------------------------------------------------------
# actions


@dataclass(frozen=True)
class SymmetryAction:
    """Representation ``g -> U(g)`` of a group by Pauli strings."""

    group: AbelianGroup
    operators: tuple[PauliString, ...]

    def __post_init__(self):
        if len(self.operators) != self.group.order:
            raise SymmetryError("one operator per group element is required")
        n = {op.n_sites for op in self.operators}
        if len(n) != 1:
            raise SymmetryError("all operators must act on the same register")
        if not self.operators[0].is_identity() or self.operators[0].power != 0:
            raise SymmetryError("identity element must act as +I")
        for a, b in itertools.product(range(self.group.order), repeat=2):
            prod = self.operators[a] * self.operators[b]
            if prod != self.operators[self.group.multiply(a, b)]:
                raise SymmetryError(
                    f"U({self.group.elements[a]}) U({self.group.elements[b]}) = {prod} "
                    f"is not U({self.group.elements[self.group.multiply(a, b)]})"
                )

    @property
    def n_sites(self) -> int:
        return self.operators[0].n_sites

    def __getitem__(self, g: int) -> PauliString:
        return self.operators[g]

    def commutes_with(self, p: PauliString) -> bool:
        return all(op.commutes_with(p) for op in self.operators)


def z2_action(p: PauliString) -> SymmetryAction:
    return SymmetryAction(z2(), (PauliString.identity(p.n_sites), p))


def z2xz2_action(a: PauliString, b: PauliString) -> SymmetryAction:
    n = a.n_sites
    return SymmetryAction(z2xz2(), (PauliString.identity(n), b, a, a * b))


def action_from_config(group: AbelianGroup, cfg: Mapping[str, str], n_sites: int) -> SymmetryAction:
    ops = []
    for label in group.elements:
        text = cfg.get(label)
        if text is None:
            if label == group.elements[0]:
                ops.append(PauliString.identity(n_sites))
                continue
            raise SymmetryError(f"no action given for element {label!r}")
        ops.append(PauliString.parse(str(text), n_sites))
    return SymmetryAction(group, tuple(ops))


# ---------------------------------------------------------------------------
# cluster-chain operators


def _check_chain(L: int, boundary: str) -> None:
    if boundary not in BOUNDARIES:
        raise SymmetryError(f"boundary must be one of {BOUNDARIES}")
    if L < 2:
        raise SymmetryError("chain needs at least two sites")
    if boundary == "periodic" and L % 2:
        raise SymmetryError("periodic chains need even L for the Z2 x Z2 symmetry")


def stabilizers(L: int, boundary: str = "open") -> list[PauliString]:
    """``h_i = Z_{i-1} X_i Z_{i+1}`` (open chains drop the missing Z)."""
    _check_chain(L, boundary)
    out = []
    for i in range(L):
        sites = {i: "X"}
        for j in (i - 1, i + 1):
            if boundary == "periodic" or 0 <= j < L:
                sites[j % L] = "Z"
        out.append(PauliString.from_sites(sites, L))
    return out


def sublattice_parity(L: int, boundary: str, which: str, subsystem_size: int | None = None) -> PauliString:
    """Symmetry operators of the cluster chain.

    ``which`` is ``odd`` / ``even`` (products of stabilizers on 1-based odd
    or even sites, which reduce to X strings for periodic chains), ``total``
    (``(-1)^L`` times the product of all stabilizers, ``Y1 X2 ... X_{L-1} YL``
    for open chains), or ``subsystem`` (``Y1 X2 ... X_{L_A}`` embedded in the
    ``L``-site register; at ``L_A = L`` the open-chain total parity).
    """
    _check_chain(L, boundary)
    hs = stabilizers(L, boundary)
    if which == "odd":
        return pauli_product(hs[0::2])
    if which == "even":
        return pauli_product(hs[1::2])
    if which == "total":
        p = pauli_product(hs)
        return p if L % 2 == 0 else -p
    if which == "subsystem":
        la = subsystem_size
        if la is None or not 1 <= la <= L:
            raise SymmetryError("subsystem parity needs 1 <= L_A <= L")
        if la == L and boundary == "open":
            return sublattice_parity(L, boundary, "total")
        return PauliString.from_sites({0: "Y", **{k: "X" for k in range(1, la)}}, L)
    raise SymmetryError(f"unknown parity {which!r}")


def measurement_bases(L: int, subsystem_size: int, state: str = "cluster") -> str:
    """Single-site bases whose product is the subsystem symmetry on the first ``L_A`` sites."""
    if state == "trivial":
        return "X" * subsystem_size
    if subsystem_size == 1:
        return "Y"
    last = "Y" if subsystem_size == L else "X"
    return "Y" + "X" * (subsystem_size - 2) + last


def subsystem_operator(L: int, subsystem_size: int, state: str = "cluster") -> PauliString:
    """Subsystem symmetry as a string on the first ``L_A`` sites only."""
    return PauliString(measurement_bases(L, subsystem_size, state))


def subsystem_action(L: int, boundary: str, subsystem_size: int, state: str = "cluster") -> SymmetryAction:
    """Symmetry acting on the first ``L_A`` sites, as used for sector resolution.

    Open cluster chains use the Z2 generated by ``Y1 X2 ... X_{L_A}``;
    periodic chains the Z2 x Z2 of the odd- and even-site X strings inside
    the subsystem; the product state uses ``X1 ... X_{L_A}``.
    """
    la = subsystem_size
    if state == "trivial" or boundary == "open":
        return z2_action(subsystem_operator(L, la, state))
    _check_chain(L, boundary)
    odd = PauliString.from_sites({k: "X" for k in range(0, la, 2)}, la)
    even = PauliString.from_sites({k: "X" for k in range(1, la, 2)}, la)
    if even.is_identity():
        return z2_action(odd)
    return z2xz2_action(odd, even)


def edge_flip_operators(L: int, boundary: str, subsystem_size: int) -> list[PauliString]:
    """Operators ``T_A`` exchanging sectors at the entanglement cuts of ``A``.

    Periodic chains have cuts on both sides (``Z_1`` and ``Z_{L_A}``); open
    chains only at the right end of ``A`` when ``L_A < L``.
    """
    la = subsystem_size
    right = PauliString.from_sites({la - 1: "Z"}, la)
    if boundary == "periodic":
        left = PauliString.from_sites({0: "Z"}, la)
        return [left] if la == 1 else [left, right]
    return [right] if la < L else []


# ---------------------------------------------------------------------------
# sector projectors


@dataclass(frozen=True)
class SectorProjector:
    """``(1/|G|) sum_g chi_k(g) U(g)`` kept as a lazy Pauli sum."""

    sector: int
    terms: tuple[tuple[complex, PauliString], ...]
    label: str = ""

    @property
    def n_sites(self) -> int:
        return self.terms[0][1].n_sites

    def trace_with(self, matrix: np.ndarray) -> complex:
        """``Tr[matrix Pi]`` without densifying ``Pi``."""
        return sum(c * operator_trace(matrix, p) for c, p in self.terms)

    def matrix(self) -> np.ndarray:
        if self.n_sites > MAX_DENSE_SITES:
            raise SymmetryError(f"refusing to densify a projector on {self.n_sites} sites")
        return sum(c * p.to_matrix() for c, p in self.terms)


def build_sector_projector(action: SymmetryAction, sector: int) -> SectorProjector:
    group = action.group
    if not 0 <= sector < group.order:
        raise SymmetryError(f"sector {sector} out of range")
    ops = action.operators
    for a, b in itertools.combinations(ops, 2):
        if not a.commutes_with(b):
            raise SymmetryError(f"symmetry operators {a} and {b} do not commute")
    chi = group.characters[sector]
    terms = tuple(
        (complex(chi[g]) / group.order, ops[g]) for g in range(group.order) if chi[g] != 0
    )
    return SectorProjector(sector, terms, _sector_label(group, sector))


def sector_projectors(action: SymmetryAction) -> list[SectorProjector]:
    return [build_sector_projector(action, k) for k in range(action.group.order)]


def _sector_label(group: AbelianGroup, k: int) -> str:
    row = group.characters[k]
    sign = lambda v: "+" if v.real > 0 else "-"
    if group.order == 2:
        return sign(row[1])
    if group.elements == z2xz2().elements:
        # elements are (e, b, a, ab): label by the (a, b) eigenvalues
        return sign(row[2]) + sign(row[1])
    return f"k{k}"


# ---------------------------------------------------------------------------
# symmetry diagnostics


def symmetry_commutator_norm(rho: State, t: PauliString) -> float:
    """Largest entry magnitude of ``T rho - rho T``."""
    rho = as_mixed(rho)
    if t.n_sites != rho.n_qubits:
        raise SymmetryError("operator and state act on different registers")
    if not t.is_hermitian:
        raise SymmetryError("T must be Hermitian")
    left = t.apply(rho.matrix, axis=0)
    # rho and T Hermitian: rho T = (T rho)^dagger
    right = left.conj().T
    return float(np.abs(left - right).max())


@dataclass(frozen=True)
class ChannelClassification:
    preserving: bool
    witness: float
    before: float
    tolerance: float
    sector_gap: float | None = None

    @property
    def label(self) -> str:
        return "preserving" if self.preserving else "breaking"


def apply_channel_everywhere(rho: MixedState, channel: KrausChannel, targets: Sequence[int] | None = None) -> MixedState:
    """Apply a one-qubit channel to each of ``targets`` (default: all qubits),
    or a full-register channel once."""
    if channel.n_qubits == rho.n_qubits and targets is None:
        return apply_kraus_channel(rho, channel, range(rho.n_qubits - 1, -1, -1))
    targets = range(rho.n_qubits) if targets is None else targets
    for q in targets:
        rho = apply_kraus_channel(rho, channel, [q])
    return rho


def classify_channel(
    channel: KrausChannel | Sequence[tuple[KrausChannel, Sequence[int]]],
    state: State,
    subsystem: Sequence[int],
    t_ops: Sequence[PauliString],
    targets: Sequence[int] | None = None,
    tol: float = 1e-8,
    sector_operator: PauliString | None = None,
) -> ChannelClassification:
    """Decide whether a channel keeps ``[T_A, rho_A] = 0``.

    ``channel`` is either a single channel (one-qubit channels are applied
    to every qubit in ``targets``; register-wide channels once) or an
    explicit list of ``(channel, targets)`` placements. The witness is the
    largest commutator norm over ``t_ops`` after the channel. When
    ``sector_operator`` is given, a change in ``Tr[rho_A P_A]`` also counts
    as breaking.
    """
    rho = as_mixed(state)
    rho_a = partial_trace(rho, subsystem)
    before = max((symmetry_commutator_norm(rho_a, t) for t in t_ops), default=0.0)
    if before > tol:
        raise SymmetryError(
            f"input state does not commute with T_A (norm {before:.3e}); not a symmetric resource"
        )
    if isinstance(channel, KrausChannel):
        out = apply_channel_everywhere(rho, channel, targets)
    else:
        out = rho
        for ch, tg in channel:
            out = apply_kraus_channel(out, ch, tg)
    out_a = partial_trace(out, subsystem)
    witness = max((symmetry_commutator_norm(out_a, t) for t in t_ops), default=0.0)
    gap = None
    preserving = witness <= tol
    if sector_operator is not None:
        # the gap is only a witness when the input state had none
        gap = float(operator_trace(out_a.matrix, sector_operator).real)
        gap0 = float(operator_trace(rho_a.matrix, sector_operator).real)
        preserving = preserving and abs(gap - gap0) <= tol
    return ChannelClassification(preserving, witness, before, tol, gap)


def is_pure(state: State) -> bool:
    return isinstance(state, PureState)
