"""Noise channels, readout bias and the closed-form bias predictions.

``paper_depolarizing_channel`` keeps the historical name of its Kraus pair
although algebraically it is amplitude damping: ``K1 = diag(sqrt(1-p), 1)``
and ``K2 = sqrt(p) |1><0|``. The lowering operator must map ``|0>`` to
``|1>`` for the pair to be trace preserving, so population flows from
``|0>`` into ``|1>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import KrausChannel, SimulationError

_I = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|

_S2 = 1 / np.sqrt(2)
# rotations U with U P U^dag = Z, used to move into a measurement frame
BASIS_ROTATIONS = {
    "Z": _I,
    "X": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "Y": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex) @ np.diag([1, -1j]),
}


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise SimulationError(f"probability {p} outside [0, 1]")
    return p


def _check_bias(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 0.5:
        raise SimulationError(f"readout bias {eps} outside [0, 0.5)")
    return eps


def dephasing_channel(p: float) -> KrausChannel:
    p = _check_probability(p)
    return KrausChannel((math.sqrt(1 - p) * _I, math.sqrt(p) * _Z), f"dephasing({p})")


def paper_depolarizing_channel(p: float) -> KrausChannel:
    p = _check_probability(p)
    s = math.sqrt(1 - p)
    k1 = ((1 + s) * _I - (1 - s) * _Z) / 2
    return KrausChannel((k1, math.sqrt(p) * _SIGMA_MINUS), f"paper_depolarizing({p})")


def amplitude_damping_to_zero(gamma: float) -> KrausChannel:
    """Decay ``|1> -> |0>`` with probability ``gamma``."""
    g = _check_probability(gamma)
    k1 = np.diag([1.0, math.sqrt(1 - g)]).astype(complex)
    k2 = np.array([[0, math.sqrt(g)], [0, 0]], dtype=complex)
    return KrausChannel((k1, k2), f"damp0({g})")


def readout_bias_channel(eps: float, basis: str = "Z") -> KrausChannel:
    """Quantum form of the asymmetric readout bias for a ``basis`` measurement.

    Applied immediately before a measurement of the Pauli ``basis`` it
    reproduces the classical flip ``1 -> 0`` with probability ``2 eps``.
    """
    eps = _check_bias(eps)
    u = BASIS_ROTATIONS[basis.upper()]
    return amplitude_damping_to_zero(2 * eps).conjugated(u, f"readout_bias({eps},{basis})")


CHANNELS = {
    "dephasing": dephasing_channel,
    "paper_depolarizing": paper_depolarizing_channel,
    "depolarizing": paper_depolarizing_channel,
    "amplitude_damping": amplitude_damping_to_zero,
}


def make_channel(kind: str, p: float) -> KrausChannel:
    try:
        return CHANNELS[kind](p)
    except KeyError:
        raise SimulationError(f"unknown channel kind {kind!r}") from None


# ---------------------------------------------------------------------------
# readout bias


def confusion_matrix(eps: float, variant: str = "asymmetric", flip: float = 0.0) -> np.ndarray:
    """Column-stochastic ``M[read, true]`` for one qubit.

    ``asymmetric`` flips ``1 -> 0`` with probability ``2 eps`` and never
    ``0 -> 1``. ``confusion`` adds a symmetric base flip rate ``flip`` on
    both outcomes on top of the same bias, so a uniform bit still reads
    ``0`` with probability ``0.5 + eps``.
    """
    eps = _check_bias(eps)
    if variant == "asymmetric":
        f01, f10 = 0.0, 2 * eps
    elif variant == "confusion":
        f01, f10 = flip, flip + 2 * eps
    else:
        raise SimulationError(f"unknown bias variant {variant!r}")
    if not (0 <= f01 <= 1 and 0 <= f10 <= 1):
        raise SimulationError("flip probabilities outside [0, 1]")
    return np.array([[1 - f01, f10], [f01, 1 - f10]])


def apply_readout_bias(
    probs: np.ndarray, eps: float, variant: str = "asymmetric", flip: float = 0.0
) -> np.ndarray:
    """Bias a distribution over measured bits, independently per qubit.

    ``probs`` is either a single qubit's ``[p0, p1]`` or a joint distribution
    of length ``2**m`` indexed little-endian (bit ``b`` is ``(i >> b) & 1``).
    """
    probs = np.asarray(probs, dtype=float)
    m_bits = int(round(math.log2(len(probs))))
    if 1 << m_bits != len(probs):
        raise SimulationError("distribution length is not a power of two")
    if eps == 0 and flip == 0:
        return probs.copy()
    conf = confusion_matrix(eps, variant, flip)
    t = probs.reshape((2,) * m_bits) if m_bits else probs
    for b in range(m_bits):
        axis = m_bits - 1 - b
        t = np.moveaxis(np.tensordot(conf, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def bias_bits(bits: np.ndarray, eps: float, rng: np.random.Generator,
              variant: str = "asymmetric", flip: float = 0.0) -> np.ndarray:
    """Sample the readout map on an array of true bits."""
    conf = confusion_matrix(eps, variant, flip)
    u = rng.random(bits.shape)
    p_one = np.where(bits == 1, conf[1, 1], conf[1, 0])
    return (u < p_one).astype(np.uint8)


# ---------------------------------------------------------------------------
# noise model


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate-class channels plus readout bias.

    Single-qubit channels are applied to every target of a gate; a channel
    whose arity equals the gate arity is applied jointly instead.
    """

    single_qubit: KrausChannel | None = None
    multi_qubit: KrausChannel | None = None
    readout_bias: float = 0.0
    bias_variant: str = "asymmetric"
    readout_flip: float = 0.0
    description: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_bias(self.readout_bias)
        confusion_matrix(self.readout_bias, self.bias_variant, self.readout_flip)

    @property
    def is_noiseless(self) -> bool:
        return (
            self.single_qubit is None
            and self.multi_qubit is None
            and self.readout_bias == 0
            and self.readout_flip == 0
        )

    @property
    def has_gate_noise(self) -> bool:
        return self.single_qubit is not None or self.multi_qubit is not None

    def channel_for(self, arity: int) -> KrausChannel | None:
        return self.single_qubit if arity == 1 else self.multi_qubit

    def bias_distribution(self, probs: np.ndarray) -> np.ndarray:
        return apply_readout_bias(probs, self.readout_bias, self.bias_variant, self.readout_flip)

    @classmethod
    def from_config(cls, cfg: Mapping | None) -> "NoiseModel":
        """Build from a mapping such as::

            single_qubit: {channel: dephasing, p: 0.01}
            two_qubit: {channel: dephasing, p: 0.05}
            readout_bias: 0.07
            bias_variant: asymmetric
        """
        if not cfg:
            return cls()

        def chan(entry):
            if not entry:
                return None
            return make_channel(entry.get("channel", "dephasing"), entry.get("p", 0.0))

        return cls(
            single_qubit=chan(cfg.get("single_qubit")),
            multi_qubit=chan(cfg.get("two_qubit") or cfg.get("multi_qubit")),
            readout_bias=float(cfg.get("readout_bias", 0.0)),
            bias_variant=cfg.get("bias_variant", "asymmetric"),
            readout_flip=float(cfg.get("readout_flip", 0.0)),
            description=dict(cfg),
        )


DEFAULT_NOISE = {
    "single_qubit": {"channel": "dephasing", "p": 0.01},
    "two_qubit": {"channel": "dephasing", "p": 0.05},
    "readout_bias": 0.07,
    "bias_variant": "asymmetric",
}


# ---------------------------------------------------------------------------
# closed-form predictions for a random biased bit


@dataclass(frozen=True)
class BiasPrediction:
    eps: float
    subsystem_size: int
    neg_log_s2_exact: float
    neg_log_s2_approx: float
    sector_gap: float

    @property
    def s2_exact(self) -> float:
        return math.exp(-self.neg_log_s2_exact)


def bias_model_predictions(eps: float, subsystem_size: int) -> BiasPrediction:
    """Second Renyi entropy and sector gap for i.i.d. bits biased towards 0.

    With ``P(0) = 0.5 + eps`` a pair reads ``(1, 1)`` with probability
    ``(0.5 - eps)**2``, flipping the swap eigenvalue.
    """
    eps = _check_bias(eps)
    a, b = 0.5 + eps, 0.5 - eps
    per_pair = a * a + 2 * a * b - b * b
    return BiasPrediction(
        eps=eps,
        subsystem_size=subsystem_size,
        neg_log_s2_exact=-subsystem_size * math.log(per_pair),
        neg_log_s2_approx=subsystem_size * (math.log(2) - 4 * eps),
        sector_gap=abs(2 * eps) ** subsystem_size,
    )
