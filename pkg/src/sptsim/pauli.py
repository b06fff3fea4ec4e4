"""Signed Pauli strings with exact phase tracking.

A :class:`PauliString` is ``i**power * P_0 (x) P_1 (x) ... (x) P_{n-1}``
where site ``k`` of the chain (1-based in physics notation, ``k + 1``)
lives at index ``k``. Products are exact: phases are integers mod 4.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

LABELS = "IXYZ"

# (a, b) -> (power of i, label) for single-site products a*b
_SITE_PRODUCT: dict[tuple[str, str], tuple[int, str]] = {}
for _a in LABELS:
    _SITE_PRODUCT[("I", _a)] = (0, _a)
    _SITE_PRODUCT[(_a, "I")] = (0, _a)
    _SITE_PRODUCT[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _SITE_PRODUCT[(_a, _b)] = (1, _c)
    _SITE_PRODUCT[(_b, _a)] = (3, _c)

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PHASE_VALUE = {0: 1, 1: 1j, 2: -1, 3: -1j}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _parse_phase(text: str) -> tuple[int, str]:
    power = 0
    if text.startswith("+"):
        text = text[1:]
    elif text.startswith("-"):
        power = 2
        text = text[1:]
    if text.startswith("i"):
        power = (power + 1) % 4
        text = text[1:]
    return power, text


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis times a phase ``i**power``.

    Parameters
    ----------
    labels : str
        One character from ``IXYZ`` per site, index ``k`` is site ``k``.
    power : int
        Exponent of ``i`` in the overall phase, reduced mod 4.
    """

    labels: str
    power: int = 0

    def __post_init__(self):
        if not self.labels or any(c not in LABELS for c in self.labels):
            raise ValueError(f"invalid Pauli labels {self.labels!r}")
        object.__setattr__(self, "power", self.power % 4)

    # -- construction -------------------------------------------------
    @classmethod
    def identity(cls, n_sites: int) -> "PauliString":
        return cls("I" * n_sites)

    @classmethod
    def from_sites(
        cls, factors: Mapping[int, str], n_sites: int, power: int = 0
    ) -> "PauliString":
        """Build from a ``{site_index: label}`` mapping (0-based indices)."""
        chars = ["I"] * n_sites
        for site, label in factors.items():
            if not 0 <= site < n_sites:
                raise IndexError(f"site {site} outside 0..{n_sites - 1}")
            chars[site] = label
        return cls("".join(chars), power)

    @classmethod
    def parse(cls, text: str, n_sites: int | None = None) -> "PauliString":
        """Parse ``"-iXIZ"`` (dense) or ``"Y1X2X3Y4"`` (1-based sparse).

        The sparse form needs ``n_sites`` unless the largest site index
        fixes it.
        """
        text = text.strip().replace(" ", "")
        power, body = _parse_phase(text)
        if re.fullmatch(r"([IXYZ]\d+)+", body):
            pairs = re.findall(r"([IXYZ])(\d+)", body)
            sites = {int(k) - 1: lab for lab, k in pairs}
            if min(sites) < 0:
                raise ValueError("sparse Pauli sites are 1-based")
            n = n_sites if n_sites is not None else max(sites) + 1
            return cls.from_sites(sites, n, power)
        if n_sites is not None and len(body) != n_sites:
            raise ValueError(f"expected {n_sites} labels, got {len(body)}")
        return cls(body, power)

    # -- properties ---------------------------------------------------
    @property
    def n_sites(self) -> int:
        return len(self.labels)

    @property
    def phase(self) -> complex:
        return _PHASE_VALUE[self.power]

    @property
    def is_hermitian(self) -> bool:
        return self.power in (0, 2)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.labels) if c != "I")

    @property
    def x_mask(self) -> int:
        return sum(1 << k for k, c in enumerate(self.labels) if c in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << k for k, c in enumerate(self.labels) if c in "ZY")

    def is_identity(self) -> bool:
        return self.support == ()

    # -- algebra ------------------------------------------------------
    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        if other.n_sites != self.n_sites:
            raise ValueError("Pauli strings act on different numbers of sites")
        power = self.power + other.power
        out = []
        for a, b in zip(self.labels, other.labels):
            p, c = _SITE_PRODUCT[(a, b)]
            power += p
            out.append(c)
        return PauliString("".join(out), power)

    def __neg__(self) -> "PauliString":
        return PauliString(self.labels, self.power + 2)

    def times_phase(self, power: int) -> "PauliString":
        return PauliString(self.labels, self.power + power)

    def adjoint(self) -> "PauliString":
        return PauliString(self.labels, -self.power)

    def commutes_with(self, other: "PauliString") -> bool:
        clashes = sum(
            1
            for a, b in zip(self.labels, other.labels)
            if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def restrict(self, sites) -> "PauliString":
        """Sub-string on ``sites`` (in the given order), phase kept."""
        return PauliString("".join(self.labels[s] for s in sites), self.power)

    def embed(self, targets, n_sites: int) -> "PauliString":
        """Place this string on ``targets`` of an ``n_sites`` register."""
        if len(targets) != self.n_sites:
            raise ValueError("target count does not match string length")
        return PauliString.from_sites(
            dict(zip(targets, self.labels)), n_sites, self.power
        )

    # -- dense forms --------------------------------------------------
    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix; basis bit ``k`` encodes site ``k``."""
        mat = np.array([[1.0 + 0j]])
        for c in reversed(self.labels):
            mat = np.kron(mat, _MATRICES[c])
        return self.phase * mat

    def apply(self, vec: np.ndarray, axis: int = 0) -> np.ndarray:
        """Return ``P @ vec`` along ``axis`` without forming the matrix."""
        dim = vec.shape[axis]
        if dim != 1 << self.n_sites:
            raise ValueError("vector length does not match Pauli string")
        idx = np.arange(dim)
        z_sign = 1 - 2 * (np.bitwise_count(idx & self.z_mask).astype(np.int64) & 1)
        n_y = self.labels.count("Y")
        coeff = self.phase * (1j**n_y) * z_sign
        shape = [1] * vec.ndim
        shape[axis] = dim
        moved = np.take(vec * coeff.reshape(shape), idx ^ self.x_mask, axis=axis)
        # (P v)[x ^ xm] = c(x) v[x]  =>  (P v)[y] = c(y ^ xm) v[y ^ xm]
        return moved

    def __str__(self) -> str:
        return _PHASE_TEXT[self.power] + self.labels

    def sparse_str(self) -> str:
        """``+Y1X2X3Y4`` style text with 1-based sites."""
        body = "".join(f"{c}{k + 1}" for k, c in enumerate(self.labels) if c != "I")
        return _PHASE_TEXT[self.power] + (body or "I")


def pauli_product(strings) -> PauliString:
    strings = list(strings)
    out = strings[0]
    for s in strings[1:]:
        out = out * s
    return out
