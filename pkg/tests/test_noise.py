import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sptsim.circuits import cluster_state_circuit
from sptsim.core import MixedState, PureState, SimulationError, apply_kraus_channel, as_mixed, partial_trace
from sptsim.entanglement import estimate_s2_from_shots, mean_estimate, parity_values, symmetry_resolved_moment
from sptsim.execution import ShotRecord, evolve
from sptsim.noise import (
    CHANNELS,
    DEFAULT_NOISE,
    NoiseModel,
    apply_readout_bias,
    bias_bits,
    bias_model_predictions,
    confusion_matrix,
    dephasing_channel,
    make_channel,
    paper_depolarizing_channel,
    readout_bias_channel,
)
from sptsim.symmetry import (
    classify_channel,
    edge_flip_operators,
    measurement_bases,
    sector_projectors,
    subsystem_action,
    subsystem_operator,
)

from conftest import random_density_matrix

Z = np.diag([1.0, -1.0])


@pytest.mark.parametrize("kind", sorted(CHANNELS))
@pytest.mark.parametrize("p", [0.0, 0.05, 0.3, 1.0])
def test_builtin_channels_complete(kind, p):
    assert make_channel(kind, p).completeness_error() < 1e-12


def test_probability_range_checked():
    with pytest.raises(SimulationError):
        dephasing_channel(1.5)
    with pytest.raises(SimulationError):
        readout_bias_channel(0.5)
    with pytest.raises(SimulationError):
        make_channel("thermal", 0.1)


def test_dephasing_half_fully_dephases_plus():
    plus = MixedState(1, np.full((2, 2), 0.5, dtype=complex))
    out = apply_kraus_channel(plus, dephasing_channel(0.5), [0])
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-14)


@settings(max_examples=20)
@given(st.floats(0, 1), st.integers(0, 2**31))
def test_dephasing_covariant_under_z(p, seed):
    rho = MixedState(1, random_density_matrix(1, np.random.default_rng(seed)))
    ch = dephasing_channel(p)
    a = apply_kraus_channel(MixedState(1, Z @ rho.matrix @ Z), ch, [0]).matrix
    b = Z @ apply_kraus_channel(rho, ch, [0]).matrix @ Z
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_paper_depolarizing_endpoints():
    assert np.allclose(paper_depolarizing_channel(0).operators[0], np.eye(2))
    # sigma^- = |1><0| is forced by completeness, so |0><0| -> |1><1| at p = 1
    out = apply_kraus_channel(MixedState.zero(1), paper_depolarizing_channel(1.0), [0])
    np.testing.assert_allclose(out.matrix, np.diag([0, 1]), atol=1e-14)
    one = MixedState(1, np.diag([0, 1]).astype(complex))
    np.testing.assert_allclose(apply_kraus_channel(one, paper_depolarizing_channel(1.0), [0]).matrix,
                               one.matrix, atol=1e-14)


@settings(max_examples=20)
@given(st.floats(0, 1), st.floats(0, 1))
def test_paper_depolarizing_keeps_z_commutation(p, a):
    # any rho commuting with Z is diagonal
    rho = MixedState(1, np.diag([a, 1 - a]).astype(complex))
    out = apply_kraus_channel(rho, paper_depolarizing_channel(p), [0]).matrix
    assert np.abs(out @ Z - Z @ out).max() < 1e-12


def test_readout_bias_on_distributions():
    np.testing.assert_allclose(apply_readout_bias([0.5, 0.5], 0.0), [0.5, 0.5])
    np.testing.assert_allclose(apply_readout_bias([0.5, 0.5], 0.07), [0.57, 0.43])
    np.testing.assert_allclose(apply_readout_bias([1.0, 0.0], 0.3), [1.0, 0.0])
    joint = apply_readout_bias(np.full(4, 0.25), 0.07)
    np.testing.assert_allclose(joint, np.kron([0.57, 0.43], [0.57, 0.43]), atol=1e-14)
    # bit 0 deterministic 1, bit 1 deterministic 0: index 1
    out = apply_readout_bias(np.array([0, 1.0, 0, 0]), 0.1)
    np.testing.assert_allclose(out, [0.2, 0.8, 0, 0], atol=1e-14)


def test_confusion_variant_keeps_marginal():
    m = confusion_matrix(0.07, "confusion", 0.02)
    np.testing.assert_allclose(m.sum(axis=0), 1)
    assert m @ [0.5, 0.5] == pytest.approx([0.57, 0.43])
    with pytest.raises(SimulationError):
        confusion_matrix(0.07, "bogus")


def test_bias_bits_frequency():
    rng = np.random.default_rng(5)
    bits = bias_bits(rng.integers(0, 2, 200_000), 0.07, rng)
    assert abs(bits.mean() - 0.43) < 3 * math.sqrt(0.25 / 200_000)


@pytest.mark.parametrize("basis", "ZXY")
def test_readout_channel_matches_classical_bias(basis):
    rng = np.random.default_rng(2)
    rho = MixedState(1, random_density_matrix(1, rng))
    from sptsim.noise import BASIS_ROTATIONS

    u = BASIS_ROTATIONS[basis]
    true = np.real(np.diag(u @ rho.matrix @ u.conj().T))
    out = apply_kraus_channel(rho, readout_bias_channel(0.07, basis), [0]).matrix
    read = np.real(np.diag(u @ out @ u.conj().T))
    np.testing.assert_allclose(read, apply_readout_bias(true, 0.07), atol=1e-12)


def test_bias_predictions():
    p0 = bias_model_predictions(0.0, 3)
    assert p0.neg_log_s2_exact == pytest.approx(3 * math.log(2))
    assert p0.sector_gap == 0
    p1 = bias_model_predictions(0.07, 1)
    assert p1.neg_log_s2_approx == pytest.approx(math.log(2) - 0.28)
    assert p1.neg_log_s2_approx == pytest.approx(0.413, abs=1e-3)
    assert p1.sector_gap == pytest.approx(0.14)
    assert bias_model_predictions(0.07, 3).sector_gap == pytest.approx(2.744e-3)
    # unapproximated per-pair form
    a, b = 0.57, 0.43
    assert p1.neg_log_s2_exact == pytest.approx(-math.log(a * a + 2 * a * b - b * b))


def test_iid_biased_bits_reproduce_prediction():
    rng = np.random.default_rng(99)
    eps, n = 0.07, 100_000
    for la in (1, 2, 3):
        bits = (rng.random((n, 2 * la)) < 0.5 - eps).astype(np.uint8)
        est = estimate_s2_from_shots(ShotRecord(bits), la)
        assert est.within(bias_model_predictions(eps, la).s2_exact)
        gap = mean_estimate(parity_values(ShotRecord(bits[:, :la]), la))
        assert gap.within(bias_model_predictions(eps, la).sector_gap)


def test_noise_model_config():
    m = NoiseModel.from_config(DEFAULT_NOISE)
    assert m.has_gate_noise and not m.is_noiseless
    assert m.readout_bias == 0.07
    assert m.channel_for(1).name.startswith("dephasing")
    assert NoiseModel.from_config(None).is_noiseless
    assert NoiseModel.from_config({"readout_bias": 0.05}).has_gate_noise is False
    with pytest.raises(SimulationError):
        NoiseModel(readout_bias=0.6)


@pytest.mark.parametrize("p", [0.05, 0.1, 0.3])
@pytest.mark.parametrize("kind", ["dephasing", "paper_depolarizing"])
def test_gate_class_channels_preserve_on_cluster(cluster4, kind, p):
    for la in (1, 2, 3):
        res = classify_channel(make_channel(kind, p), cluster4, range(la),
                               edge_flip_operators(4, "open", la),
                               sector_operator=subsystem_operator(4, la))
        assert res.preserving, (la, res)


@pytest.mark.parametrize("eps", [0.03, 0.07])
def test_readout_bias_breaks_on_cluster(cluster4, eps):
    for la in (1, 2, 3):
        placed = [(readout_bias_channel(eps, b), [k]) for k, b in enumerate(measurement_bases(4, la))]
        res = classify_channel(placed, cluster4, range(la), edge_flip_operators(4, "open", la),
                               sector_operator=subsystem_operator(4, la))
        assert not res.preserving
        assert res.sector_gap == pytest.approx((2 * eps) ** la, abs=1e-12)


def test_gate_dephasing_keeps_degeneracy():
    noise = NoiseModel.from_config({"single_qubit": {"channel": "dephasing", "p": 0.1},
                                    "two_qubit": {"channel": "dephasing", "p": 0.1}})
    rho = evolve(cluster_state_circuit(4), noise)
    assert isinstance(rho, MixedState)
    for la in (1, 2, 3):
        rho_a = partial_trace(rho, range(la))
        p_plus, p_minus = (symmetry_resolved_moment(rho_a, pr, 1) for pr in
                           sector_projectors(subsystem_action(4, "open", la)))
        assert abs(p_plus - p_minus) <= 1e-8
    # but the state is no longer pure
    assert partial_trace(rho, range(4)).purity() < 1


def test_noiseless_model_pure_path():
    out = evolve(cluster_state_circuit(3), NoiseModel())
    assert isinstance(out, PureState)
    assert as_mixed(out).purity() == pytest.approx(1)
