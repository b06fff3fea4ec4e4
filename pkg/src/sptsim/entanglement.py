"""Entanglement spectra, Renyi and symmetry-resolved moments, and shot estimators.

Exact quantities take a reduced density matrix; estimators take the
:class:`~sptsim.execution.ShotRecord` of the matching library circuit.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuits import pair_decode_table
from .core import MixedState, SimulationError, as_mixed
from .execution import ShotRecord
from .symmetry import SectorProjector

HERMITIAN_TOL = 1e-10
ZERO_DISPLAY = 1e-12


class SymmetryWarning(UserWarning):
    """A projector does not commute with the density matrix it resolves."""


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        return abs(self.value - target) <= n_sigma * self.stderr


def mean_estimate(samples: np.ndarray) -> Estimate:
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    if n == 0:
        raise SimulationError("no samples")
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(samples.mean()), se)


# ---------------------------------------------------------------------------
# exact oracle


def _matrix(rho) -> np.ndarray:
    m = as_mixed(rho).matrix if not isinstance(rho, np.ndarray) else rho
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
        raise SimulationError("density matrix is not Hermitian")
    return m


def entanglement_spectrum(rho_a) -> np.ndarray:
    """Eigenvalues in descending order; tiny negative round-off clipped to 0."""
    vals = np.linalg.eigvalsh(_matrix(rho_a))[::-1]
    if vals.min() < -HERMITIAN_TOL:
        raise SimulationError("density matrix has a negative eigenvalue")
    return np.clip(vals, 0.0, None)


def moment(rho_a, n: int) -> float:
    """``Tr[rho^n]`` from the spectrum."""
    return float(np.sum(entanglement_spectrum(rho_a) ** n))


def von_neumann_entropy(rho_a) -> float:
    lam = entanglement_spectrum(rho_a)
    lam = lam[lam > ZERO_DISPLAY]
    return float(-np.sum(lam * np.log(lam)))


def renyi_entropy(rho_a, n: int) -> float:
    """``-ln Tr[rho^n]``; ``n = 1`` gives the von Neumann entropy."""
    if n < 1:
        raise SimulationError("Renyi index must be >= 1")
    if n == 1:
        return von_neumann_entropy(rho_a)
    return -math.log(moment(rho_a, n))


def symmetry_resolved_moment(rho_a, projector: SectorProjector | np.ndarray, n: int, tol: float = 1e-8) -> float:
    """``Tr[rho^n Pi]``; ``n = 1`` is the probability of the sector.

    Warns with :class:`SymmetryWarning` when ``Pi`` and ``rho`` fail to
    commute within ``tol``; the value is still returned.
    """
    m = _matrix(rho_a)
    if n < 1:
        raise SimulationError("moment order must be >= 1")
    dense = projector.matrix() if isinstance(projector, SectorProjector) else np.asarray(projector)
    if dense.shape != m.shape:
        raise SimulationError("projector and density matrix dimensions differ")
    if np.abs(dense @ m - m @ dense).max() > tol:
        warnings.warn("projector does not commute with rho", SymmetryWarning, stacklevel=2)
    power = np.linalg.matrix_power(m, n)
    return float(np.real(np.trace(power @ dense)))


@dataclass
class EntanglementReport:
    subsystem_size: int
    spectrum: list[float]
    renyi: dict[int, float]
    resolved: dict[tuple[str, int], float] = field(default_factory=dict)
    degenerate: bool | None = None
    sector_gap: float | None = None

    def to_dict(self) -> dict:
        return {
            "subsystem_size": self.subsystem_size,
            "spectrum": [0.0 if abs(v) < ZERO_DISPLAY else v for v in self.spectrum],
            "renyi": {str(k): v for k, v in sorted(self.renyi.items())},
            "resolved": [
                {"sector": s, "moment": n, "value": v}
                for (s, n), v in sorted(self.resolved.items())
            ],
            "degenerate": self.degenerate,
            "sector_gap": self.sector_gap,
        }


def entanglement_report(
    rho_a,
    projectors: list[SectorProjector] | None = None,
    moments=(1, 2, 3, 4),
    tol: float = 1e-8,
) -> EntanglementReport:
    m = as_mixed(rho_a) if not isinstance(rho_a, np.ndarray) else MixedState(
        int(round(math.log2(len(rho_a)))), rho_a)
    renyi = {n: renyi_entropy(m, n) for n in moments if n >= 2}
    renyi[1] = von_neumann_entropy(m)
    resolved = {}
    for proj in projectors or []:
        for n in moments:
            resolved[(proj.label or str(proj.sector), n)] = symmetry_resolved_moment(m, proj, n, tol)
    report = EntanglementReport(m.n_qubits, entanglement_spectrum(m).tolist(), renyi, resolved)
    if projectors:
        degeneracy_check(report, tol)
    return report


def degeneracy_check(report: EntanglementReport, tol: float = 1e-8) -> tuple[bool, float]:
    """Largest difference of any resolved moment between any two sectors."""
    by_moment: dict[int, list[float]] = {}
    for (_, n), v in report.resolved.items():
        by_moment.setdefault(n, []).append(v)
    if not by_moment:
        raise SimulationError("report carries no resolved moments")
    gap = 0.0
    for vals in by_moment.values():
        for a, b in itertools.combinations(vals, 2):
            gap = max(gap, abs(a - b))
    report.degenerate = gap <= tol
    report.sector_gap = gap
    return report.degenerate, gap


# ---------------------------------------------------------------------------
# estimators


def _pairs(rec: ShotRecord, subsystem_size: int) -> tuple[np.ndarray, np.ndarray]:
    if rec.n_bits % 2:
        raise SimulationError("two-copy record must have an even number of bits")
    L = rec.n_bits // 2
    if not 1 <= subsystem_size <= L:
        raise SimulationError(f"subsystem size must be in 1..{L}")
    idx = np.arange(subsystem_size)
    return rec.bits[:, idx], rec.bits[:, L + idx]


def swap_values(rec: ShotRecord, subsystem_size: int) -> np.ndarray:
    """Per-shot product of pair swap eigenvalues (``-1`` for each ``(1,1)`` pair)."""
    a, b = _pairs(rec, subsystem_size)
    singlets = np.sum(a & b, axis=1)
    return 1.0 - 2.0 * (singlets % 2)


def estimate_s2_from_shots(rec: ShotRecord, subsystem_size: int) -> Estimate:
    """Purity ``Tr[rho_A^2]`` from SWAP-test records."""
    return mean_estimate(swap_values(rec, subsystem_size))


def twisted_swap_values(rec: ShotRecord, subsystem_size: int) -> np.ndarray:
    """Per-shot product of pair eigenvalues of ``(P_i (x) I) SWAP_i`` (complex)."""
    a, b = _pairs(rec, subsystem_size)
    table = pair_decode_table()
    lookup = np.empty((2, 2), dtype=complex)
    for (x, y), v in table.items():
        lookup[x, y] = v
    return np.prod(lookup[a, b], axis=1)


def estimate_twisted_purity(rec: ShotRecord, subsystem_size: int) -> tuple[Estimate, Estimate]:
    """``Tr[rho_A^2 P_A]`` split into real and imaginary estimates."""
    v = twisted_swap_values(rec, subsystem_size)
    return mean_estimate(v.real), mean_estimate(v.imag)


def parity_values(rec: ShotRecord, subsystem_size: int) -> np.ndarray:
    """Per-shot eigenvalue of the prefix symmetry from a sector-probability record."""
    if not 1 <= subsystem_size <= rec.n_bits:
        raise SimulationError("subsystem size exceeds record width")
    ones = rec.bits[:, :subsystem_size].sum(axis=1)
    return 1.0 - 2.0 * (ones % 2)


@dataclass(frozen=True)
class ResolvedEstimate:
    subsystem_size: int
    s1: dict[str, Estimate]
    s2: dict[str, Estimate]
    purity: Estimate
    twisted: Estimate
    twisted_imag: Estimate

    def gap(self, order: int) -> Estimate:
        """``S_n(+) - S_n(-)``: the prefix parity mean (n=1) or ``Re Tr[rho^2 P_A]`` (n=2)."""
        if order == 1:
            return Estimate(self.s1["+"].value - self.s1["-"].value, 2 * self.s1["+"].stderr)
        return Estimate(self.s2["+"].value - self.s2["-"].value, self.twisted.stderr)


def estimate_resolved_from_shots(
    plain: ShotRecord,
    modified: ShotRecord,
    prob: ShotRecord,
    subsystem_size: int,
) -> ResolvedEstimate:
    """Sector probabilities and purities for the Z2 subsystem symmetry.

    ``S1(+-) = (1 +- <P_A>) / 2`` from ``prob``;
    ``S2(+-) = (Tr[rho^2] +- Re Tr[rho^2 P_A]) / 2`` from ``plain`` and
    ``modified``. The imaginary part of ``Tr[rho^2 P_A]`` is kept as a
    diagnostic.
    """
    if plain.n_bits != modified.n_bits or plain.n_bits != 2 * prob.n_bits:
        raise SimulationError("records come from circuits of different sizes")
    la = subsystem_size
    p = mean_estimate(parity_values(prob, la))
    s2 = estimate_s2_from_shots(plain, la)
    tw_re, tw_im = estimate_twisted_purity(modified, la)
    half_p = Estimate(0.0, p.stderr / 2)
    s2_err = 0.5 * math.hypot(s2.stderr, tw_re.stderr)
    return ResolvedEstimate(
        subsystem_size=la,
        s1={
            "+": Estimate((1 + p.value) / 2, half_p.stderr),
            "-": Estimate((1 - p.value) / 2, half_p.stderr),
        },
        s2={
            "+": Estimate((s2.value + tw_re.value) / 2, s2_err),
            "-": Estimate((s2.value - tw_re.value) / 2, s2_err),
        },
        purity=s2,
        twisted=tw_re,
        twisted_imag=tw_im,
    )


def sampled_degeneracy(est: ResolvedEstimate, n_sigma: float = 3.0) -> tuple[bool, float]:
    """Sampled analogue of :func:`degeneracy_check` with a ``n_sigma * SE`` tolerance."""
    g1, g2 = est.gap(1), est.gap(2)
    ok = all(abs(g.value) <= n_sigma * g.stderr for g in (g1, g2))
    return ok, max(abs(g1.value), abs(g2.value))
