"""Desk-scale simulation of SPT-order diagnostics on small qubit chains."""

from .pauli import PauliString
from .core import (
    Gate,
    KrausChannel,
    MixedState,
    PureState,
    SimulationError,
    apply_gate,
    apply_kraus_channel,
    apply_pauli_exponential,
    measure_qubit,
    partial_trace,
    pauli_expectation,
    tensor_copies,
)
from .circuits import Circuit
from .execution import ShotRecord, execute, exact_distribution
from .noise import NoiseModel

__version__ = "0.1.0"
