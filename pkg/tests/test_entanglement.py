import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sptsim.circuits import (
    Circuit,
    cluster_state_circuit,
    modified_swap_test_circuit,
    swap_test_circuit,
    symmetry_resolved_probability_circuit,
)
from sptsim.core import MixedState, SimulationError, partial_trace
from sptsim.entanglement import (
    Estimate,
    SymmetryWarning,
    degeneracy_check,
    entanglement_report,
    entanglement_spectrum,
    estimate_resolved_from_shots,
    estimate_s2_from_shots,
    estimate_twisted_purity,
    mean_estimate,
    moment,
    renyi_entropy,
    sampled_degeneracy,
    symmetry_resolved_moment,
    von_neumann_entropy,
)
from sptsim.execution import ShotRecord, evolve, execute
from sptsim.noise import NoiseModel
from sptsim.symmetry import sector_projectors, subsystem_action

from conftest import random_density_matrix

LN2 = math.log(2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31))
def test_spectrum_and_moments_invariants(n, seed):
    rho = random_density_matrix(n, np.random.default_rng(seed))
    lam = entanglement_spectrum(rho)
    assert lam.sum() == pytest.approx(1) and np.all(lam >= 0)
    assert np.all(np.diff(lam) <= 1e-14)
    assert moment(rho, 2) == pytest.approx(np.trace(rho @ rho).real)
    s1, s2, s3 = (renyi_entropy(rho, k) for k in (1, 2, 3))
    # -ln Tr[rho^n] grows with n; the normalized form -ln Tr[rho^n] / (n - 1) decreases
    assert s1 + 1e-9 >= s2 and s2 <= s3 + 1e-9 and s3 / 2 <= s2 + 1e-9
    assert 0 <= s2 <= n * LN2 + 1e-9


def test_cluster_spectra_and_renyi(cluster4):
    for la in (1, 2, 3, 4):
        rho_a = partial_trace(cluster4, range(la))
        rank = 1 if la == 4 else 2
        lam = entanglement_spectrum(rho_a)
        np.testing.assert_allclose(lam[:rank], 1 / rank, atol=1e-12)
        np.testing.assert_allclose(lam[rank:], 0, atol=1e-12)
        assert renyi_entropy(rho_a, 2) == pytest.approx(math.log(rank), abs=1e-12)
    per = partial_trace(evolve(cluster_state_circuit(8, "periodic")), range(4))
    assert renyi_entropy(per, 2) == pytest.approx(2 * LN2)
    assert von_neumann_entropy(per) == pytest.approx(2 * LN2)


def test_spectrum_validation():
    with pytest.raises(SimulationError):
        entanglement_spectrum(np.array([[1, 1], [0, 0]], dtype=complex))
    with pytest.raises(SimulationError):
        entanglement_spectrum(np.diag([1.5, -0.5]))
    with pytest.raises(SimulationError):
        renyi_entropy(np.eye(2) / 2, 0)


def test_resolved_moments_sum_to_total(cluster4):
    for la in (1, 2, 3):
        rho_a = partial_trace(cluster4, range(la))
        projs = sector_projectors(subsystem_action(4, "open", la))
        for n in (1, 2, 3):
            parts = [symmetry_resolved_moment(rho_a, p, n) for p in projs]
            assert sum(parts) == pytest.approx(moment(rho_a, n), abs=1e-12)
            assert parts[0] == pytest.approx(parts[1], abs=1e-12)


def test_non_commuting_projector_warns():
    plus = MixedState(1, np.full((2, 2), 0.5, dtype=complex))
    with pytest.warns(SymmetryWarning):
        val = symmetry_resolved_moment(plus, np.diag([1.0, 0.0]), 1)
    assert val == pytest.approx(0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        symmetry_resolved_moment(np.eye(2) / 2, np.diag([1.0, 0.0]), 2)


def test_report_and_degeneracy(cluster4):
    rho_a = partial_trace(cluster4, range(2))
    rep = entanglement_report(rho_a, sector_projectors(subsystem_action(4, "open", 2)))
    assert rep.degenerate and rep.sector_gap < 1e-12
    d = rep.to_dict()
    assert d["renyi"]["2"] == pytest.approx(LN2)
    assert {r["sector"] for r in d["resolved"]} == {"+", "-"}
    triv = partial_trace(evolve(_trivial_prep(3)), range(2))
    rep = entanglement_report(triv, sector_projectors(subsystem_action(3, "open", 2, "trivial")))
    ok, gap = degeneracy_check(rep)
    assert not ok and gap == pytest.approx(1)
    with pytest.raises(SimulationError):
        degeneracy_check(entanglement_report(rho_a))


def _trivial_prep(L):
    c = Circuit(L)
    for q in range(L):
        c.h(q)
    return c


# -- estimators ------------------------------------------------------------


def test_estimator_examples():
    zeros = ShotRecord(np.zeros((50, 4), dtype=np.uint8))
    assert estimate_s2_from_shots(zeros, 2) == Estimate(1.0, 0.0)
    singlet = ShotRecord(np.array([[1, 1]] * 10))
    assert estimate_s2_from_shots(singlet, 1).value == -1
    re, im = estimate_twisted_purity(ShotRecord(np.array([[0, 1], [0, 1]])), 1)
    assert (re.value, im.value) == (0, 1)
    with pytest.raises(SimulationError):
        estimate_s2_from_shots(ShotRecord(np.zeros((3, 3))), 1)
    with pytest.raises(SimulationError):
        estimate_s2_from_shots(zeros, 3)
    assert mean_estimate([1.0]).stderr == 0
    with pytest.raises(SimulationError):
        mean_estimate([])


def _resolved(L, la, state="cluster", noise=None, shots=8192, seed=0):
    plain = execute(swap_test_circuit(L, la, state=state), noise, shots, seed)
    mod = execute(modified_swap_test_circuit(L, la, state), noise, shots, seed + 1)
    prob = execute(symmetry_resolved_probability_circuit(L, state), noise, shots, seed + 2)
    return estimate_resolved_from_shots(plain, mod, prob, la)


def test_resolved_cluster_degenerate():
    for la in (1, 2, 3):
        est = _resolved(4, la, seed=10 * la)
        ok, _ = sampled_degeneracy(est)
        assert ok
        assert est.s1["+"].within(0.5)
        assert abs(est.twisted_imag.value) < 5 * max(est.twisted_imag.stderr, 1e-3)


def test_resolved_trivial_concentrated():
    est = _resolved(4, 2, "trivial", seed=3)
    assert est.s1["+"].value == 1 and est.s1["-"].value == 0
    assert est.s2["+"].value == pytest.approx(1) and est.s2["-"].value == pytest.approx(0)
    assert not sampled_degeneracy(est)[0]


def test_resolved_bias_gap():
    est = _resolved(4, 1, noise=NoiseModel(readout_bias=0.07), shots=20000, seed=5)
    assert est.gap(1).within(0.14)
    assert not sampled_degeneracy(est)[0]


def test_resolved_size_checks():
    rec = ShotRecord(np.zeros((4, 4)))
    with pytest.raises(SimulationError):
        estimate_resolved_from_shots(rec, rec, rec, 1)
