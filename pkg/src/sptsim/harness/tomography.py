"""Single-qubit tomography with a per-shot Pauli frame, and exact teleport branches."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..circuits import input_state_vector, teleportation_circuit
from ..core import MixedState, SimulationError
from ..entanglement import Estimate, mean_estimate
from ..execution import evolve

BASES = ("X", "Y", "Z")
_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}

# which correction bits anticommute with each Pauli: U = Z^q1 X^q2 Z^q3 X^q4
_FRAME_BITS = {"X": (0, 2), "Y": (0, 1, 2, 3), "Z": (1, 3)}


@dataclass(frozen=True)
class TomographyResult:
    """Bloch components with standard errors and the linear-inversion state."""

    expectations: dict[str, Estimate]

    @property
    def bloch(self) -> np.ndarray:
        return np.array([self.expectations[b].value for b in BASES])

    @property
    def bloch_stderr(self) -> np.ndarray:
        return np.array([self.expectations[b].stderr for b in BASES])

    @property
    def state(self) -> MixedState:
        x, y, z = self.bloch
        m = 0.5 * (_PAULI["I"] + x * _PAULI["X"] + y * _PAULI["Y"] + z * _PAULI["Z"])
        return MixedState(1, m)

    def fidelity(self, psi: np.ndarray) -> Estimate:
        """``<psi|rho|psi> = (1 + r_psi . r) / 2`` with propagated error."""
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        r_in = bloch_vector(psi)
        value = 0.5 * (1 + float(r_in @ self.bloch))
        err = 0.5 * float(np.sqrt(np.sum((r_in * self.bloch_stderr) ** 2)))
        return Estimate(value, err)


def bloch_vector(psi: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.vdot(psi, _PAULI[b] @ psi)) for b in BASES])


def frame_signs(corrections: np.ndarray, basis: str) -> np.ndarray:
    """Sign of ``U^dag P U`` relative to ``P`` for each shot's correction bits."""
    corrections = np.asarray(corrections)
    if corrections.ndim != 2 or corrections.shape[1] != 4:
        raise SimulationError("corrections must have shape (shots, 4)")
    flips = corrections[:, list(_FRAME_BITS[basis])].sum(axis=1) % 2
    return 1.0 - 2.0 * flips


def tomography(outcomes: dict[str, np.ndarray], corrections: dict[str, np.ndarray] | None = None) -> TomographyResult:
    """Estimate ``<X>, <Y>, <Z>`` from Z-basis bits recorded after each basis rotation.

    Parameters
    ----------
    outcomes : dict
        Basis letter to a 1-D array of output bits.
    corrections : dict, optional
        Basis letter to the matching ``(shots, 4)`` correction bits; each
        shot's eigenvalue is then read in the frame of ``U = Z^q1 X^q2 Z^q3 X^q4``.
    """
    if set(outcomes) != set(BASES):
        raise SimulationError("tomography needs X, Y and Z shot sets")
    sizes = {len(np.asarray(outcomes[b])) for b in BASES}
    if len(sizes) != 1:
        raise SimulationError("basis shot sets differ in size")
    expectations = {}
    for b in BASES:
        vals = 1.0 - 2.0 * np.asarray(outcomes[b], dtype=float)
        if corrections is not None:
            c = np.asarray(corrections[b])
            if len(c) != len(vals):
                raise SimulationError("corrections and outcomes differ in shot count")
            vals = vals * frame_signs(c, b)
        expectations[b] = mean_estimate(vals)
    return TomographyResult(expectations)


def corrected_fidelity(
    outcomes: dict[str, np.ndarray],
    corrections: dict[str, np.ndarray],
    psi_in: np.ndarray,
) -> tuple[Estimate, TomographyResult]:
    """Fidelity ``<psi_in| U rho U^dag |psi_in>`` of the frame-corrected output."""
    result = tomography(outcomes, corrections)
    return result.fidelity(psi_in), result


def apply_correction(out: np.ndarray, bits) -> np.ndarray:
    q1, q2, q3, q4 = bits
    u = np.eye(2, dtype=complex)
    for letter, q in (("Z", q1), ("X", q2), ("Z", q3), ("X", q4)):
        if q:
            u = u @ _PAULI[letter]
    return u @ out


def teleport_branches(label: str, alpha: float, beta: float, kind: str, sign: int = 1):
    """Every measurement branch of the noiseless wire protocol.

    Returns a list of ``(bits, probability, fidelity)`` where the fidelity is
    that of the corrected output state on that branch alone.
    """
    circ = teleportation_circuit(input_prep_for(label), alpha, beta, kind, sign)
    amps = evolve(circ).amplitudes
    psi_in = input_state_vector(label)
    branches = []
    for bits in itertools.product((0, 1), repeat=4):
        base = sum(b << k for k, b in enumerate(bits))
        out = np.array([amps[base], amps[base | 16]])
        prob = float(np.vdot(out, out).real)
        if prob < 1e-14:
            continue
        out = apply_correction(out / np.sqrt(prob), bits)
        branches.append((bits, prob, float(abs(np.vdot(psi_in, out)) ** 2)))
    return branches


def exact_teleport_fidelity(label: str, alpha: float, beta: float, kind: str, sign: int = 1) -> float:
    return float(sum(p * f for _, p, f in teleport_branches(label, alpha, beta, kind, sign)))


def input_prep_for(label: str):
    from ..circuits import INPUT_STATES

    return INPUT_STATES[label]
