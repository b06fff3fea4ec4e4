import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sptsim.circuits import cluster_state_circuit
from sptsim.core import (
    MAX_QUBITS,
    Gate,
    KrausChannel,
    MixedState,
    PureState,
    SimulationError,
    apply_gate,
    apply_kraus_channel,
    apply_pauli_exponential,
    as_mixed,
    measure_qubit,
    partial_trace,
    pauli_exp_gate,
    pauli_expectation,
    tensor_copies,
)
from sptsim.execution import evolve
from sptsim.noise import dephasing_channel, paper_depolarizing_channel
from sptsim.pauli import PauliString
from sptsim.symmetry import stabilizers, sublattice_parity

from conftest import random_density_matrix, random_state_vector

S2 = 1 / np.sqrt(2)


def ket(*amps):
    return PureState.from_vector(np.array(amps, dtype=complex))


# -- gates -----------------------------------------------------------------


def test_hadamard_on_zero():
    out = apply_gate(PureState.zero(1), Gate("H", (0,)))
    np.testing.assert_allclose(out.amplitudes, [S2, S2])


def test_cz_twice_is_identity():
    st_ = PureState.zero(2)
    st_ = apply_gate(apply_gate(st_, Gate("H", (0,))), Gate("H", (1,)))
    before = st_.amplitudes.copy()
    for _ in range(2):
        st_ = apply_gate(st_, Gate("CZ", (0, 1)))
    np.testing.assert_allclose(st_.amplitudes, before, atol=1e-14)


def test_pexp_zero_angle_is_identity(rng):
    v = random_state_vector(4, rng)
    g = Gate("PEXP", (0, 1, 2), "ZXZ", 0.0)
    np.testing.assert_allclose(apply_gate(PureState(4, v), g).amplitudes, v, atol=1e-14)


def test_gate_errors():
    with pytest.raises(SimulationError):
        Gate("CZ", (1, 1))
    with pytest.raises(SimulationError):
        Gate("H", (0, 1))
    with pytest.raises(SimulationError):
        Gate("PEXP", (0,), "X", None)
    with pytest.raises(SimulationError):
        Gate("PEXP", (0,), "iX", 0.1)
    with pytest.raises(SimulationError):
        apply_gate(PureState.zero(2), Gate("H", (2,)))
    with pytest.raises(SimulationError):
        Gate("RX", (0,))


@pytest.mark.parametrize("name", ["H", "X", "Y", "Z", "S", "SDG", "CZ", "CNOT", "CH"])
def test_fixed_gates_unitary(name):
    n = 1 if name in "HXYZS" or name == "SDG" else 2
    m = Gate(name, tuple(range(n))).matrix()
    np.testing.assert_allclose(m @ m.conj().T, np.eye(2**n), atol=1e-12)


def test_cnot_control_is_first_target():
    # control qubit 0 set (index 1), target qubit 1 flips -> index 3
    out = apply_gate(PureState.from_vector(np.eye(4)[1]), Gate("CNOT", (0, 1)))
    np.testing.assert_allclose(np.abs(out.amplitudes), np.eye(4)[3])


@settings(max_examples=40)
@given(st.text("XYZ", min_size=1, max_size=3), st.floats(-np.pi, np.pi), st.booleans())
def test_pexp_matrix_equals_cos_plus_i_sin(lab, theta, negative):
    p = PauliString(lab, 2 if negative else 0)
    g = pauli_exp_gate(p, theta)
    local = PauliString(g.pauli_string.labels[::-1], g.pauli_string.power).to_matrix()
    expected = np.cos(theta) * np.eye(2 ** len(lab)) + 1j * np.sin(theta) * local
    np.testing.assert_allclose(g.matrix(), expected, atol=1e-12)
    np.testing.assert_allclose(g.matrix() @ g.matrix().conj().T, np.eye(2 ** len(lab)), atol=1e-12)


# -- Pauli exponentials ----------------------------------------------------


def test_exp_i_pi_half_x_on_zero():
    out = apply_pauli_exponential(PureState.zero(1), PauliString("X"), np.pi / 2)
    np.testing.assert_allclose(out.amplitudes, [0, 1j], atol=1e-14)


def test_exponential_inverse_pair(rng):
    v = random_state_vector(4, rng)
    p = PauliString.parse("X3", 4)
    out = apply_pauli_exponential(apply_pauli_exponential(PureState(4, v), p, 0.37), p, -0.37)
    np.testing.assert_allclose(out.amplitudes, v, atol=1e-12)


def test_exponential_rejects_non_hermitian():
    with pytest.raises(SimulationError):
        apply_pauli_exponential(PureState.zero(1), PauliString("X", 1), 0.1)


def test_zxz_exponential_keeps_sublattice_parities(cluster4):
    out = apply_pauli_exponential(cluster4, PauliString.parse("Z1X2Z3", 4), 0.83)
    for which in ("odd", "even"):
        assert pauli_expectation(out, sublattice_parity(4, "open", which)).real == pytest.approx(1, abs=1e-12)


def test_pexp_gate_agrees_with_exponential(rng):
    v = random_state_vector(4, rng)
    p = PauliString.parse("Z1X2Z3", 4)
    a = apply_gate(PureState(4, v), pauli_exp_gate(p, 0.41))
    b = apply_pauli_exponential(PureState(4, v), p, 0.41)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


# -- measurement -----------------------------------------------------------


def test_measure_eigenstate():
    bit, post, prob = measure_qubit(ket(0, 1), 0, np.random.default_rng(0))
    assert (bit, prob) == (1, 1.0)
    np.testing.assert_allclose(post.amplitudes, [0, 1])


def test_measure_plus_frequencies():
    plus = ket(S2, S2)
    rng = np.random.default_rng(7)
    ones = sum(measure_qubit(plus, 0, rng)[0] for _ in range(10_000))
    assert abs(ones / 10_000 - 0.5) <= 3 * 0.5 / 100


def test_cluster_edge_is_maximally_mixed(cluster4):
    bit, post, prob = measure_qubit(cluster4, 0, np.random.default_rng(3))
    assert prob == pytest.approx(0.5, abs=1e-12)
    assert post.norm() == pytest.approx(1, abs=1e-12)


def test_measurement_is_seeded(cluster4):
    def stream(seed):
        rng = np.random.default_rng(seed)
        return [measure_qubit(cluster4, q, rng)[0] for q in range(4) for _ in range(5)]

    assert stream(11) == stream(11)


def test_measure_mixed_state():
    rho = MixedState(1, np.diag([0.25, 0.75]).astype(complex))
    bit, post, prob = measure_qubit(rho, 0, np.random.default_rng(1))
    assert prob == pytest.approx(0.75 if bit else 0.25)
    assert post.trace() == pytest.approx(1)


# -- channels --------------------------------------------------------------


def test_kraus_completeness_checked():
    with pytest.raises(SimulationError):
        KrausChannel([np.eye(2) * 0.9])


def test_dephasing_zero_is_identity(rng):
    rho = MixedState(2, random_density_matrix(2, rng))
    out = apply_kraus_channel(rho, dephasing_channel(0.0), [1])
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-14)


def test_dephasing_one_is_z_conjugation():
    plus = as_mixed(ket(S2, S2))
    out = apply_kraus_channel(plus, dephasing_channel(1.0), [0])
    np.testing.assert_allclose(out.matrix, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-14)
    assert out.purity() == pytest.approx(1)


def test_paper_depolarizing_transfers_population():
    # with the completeness-consistent sigma^- = |1><0| population flows 0 -> 1
    zero = as_mixed(PureState.zero(1))
    zs = []
    for p in (0.0, 0.3, 0.7, 1.0):
        out = apply_kraus_channel(zero, paper_depolarizing_channel(p), [0])
        zs.append(pauli_expectation(out, PauliString("Z")).real)
    assert zs[0] == pytest.approx(1)
    assert all(a > b for a, b in zip(zs, zs[1:]))
    assert zs[-1] == pytest.approx(-1)


@settings(max_examples=25)
@given(st.integers(1, 3), st.floats(0, 1), st.integers(0, 2**31))
def test_channels_preserve_trace_and_positivity(n, p, seed):
    rng = np.random.default_rng(seed)
    rho = MixedState(n, random_density_matrix(n, rng))
    for ch in (dephasing_channel(p), paper_depolarizing_channel(p)):
        out = apply_kraus_channel(rho, ch, [int(rng.integers(n))])
        assert out.trace() == pytest.approx(1, abs=1e-10)
        out.check()


# -- copies, expectations, partial trace -----------------------------------


def test_tensor_copies():
    psi = ket(0.6, 0.8j)
    assert np.allclose(tensor_copies(psi, 1).amplitudes, psi.amplitudes)
    np.testing.assert_allclose(tensor_copies(PureState.zero(1), 2).amplitudes, [1, 0, 0, 0])
    with pytest.raises(SimulationError):
        tensor_copies(PureState.zero(9), 2)
    with pytest.raises(SimulationError):
        tensor_copies(psi, 0)
    assert MAX_QUBITS == 16


@settings(max_examples=20)
@given(st.integers(1, 3), st.integers(0, 2**31))
def test_swap_expectation_of_pure_copies_is_one(n, seed):
    psi = PureState(n, random_state_vector(n, np.random.default_rng(seed)))
    vec = tensor_copies(psi, 2).amplitudes
    # SWAP = prod_i (II + XX + YY + ZZ) / 2 over pairs (i, n + i)
    out = vec
    for i in range(n):
        terms = [PauliString.from_sites({i: c, n + i: c}, 2 * n) for c in "XYZ"]
        out = 0.5 * (out + sum(t.apply(out) for t in terms))
    assert np.vdot(vec, out).real == pytest.approx(1, abs=1e-10)


def test_expectations(cluster4):
    assert pauli_expectation(PureState.zero(1), PauliString("Z")).real == 1
    for h in stabilizers(4, "open"):
        assert pauli_expectation(cluster4, h).real == pytest.approx(1, abs=1e-12)
    assert pauli_expectation(cluster4, PauliString.parse("Y1X2X3Y4")).real == pytest.approx(1, abs=1e-12)


def test_partial_trace_examples(cluster4, rng):
    v = random_state_vector(3, rng)
    full = partial_trace(PureState(3, v), [0, 1, 2])
    np.testing.assert_allclose(full.matrix, np.outer(v, v.conj()), atol=1e-14)
    bell = ket(S2, 0, 0, S2)
    np.testing.assert_allclose(partial_trace(bell, [0]).matrix, np.eye(2) / 2, atol=1e-14)
    lam = np.linalg.eigvalsh(partial_trace(cluster4, [0, 1]).matrix)[::-1]
    np.testing.assert_allclose(lam, [0.5, 0.5, 0, 0], atol=1e-12)
    with pytest.raises(SimulationError):
        partial_trace(cluster4, [])


def test_partial_trace_keeps_ascending_order(rng):
    a, b = random_state_vector(1, rng), random_state_vector(1, rng)
    # qubit 0 = a, qubit 1 = b, qubit 2 = |0>
    v = np.kron(np.array([1, 0]), np.kron(b, a))
    rho = partial_trace(PureState(3, v), [0, 1]).matrix
    np.testing.assert_allclose(rho, np.outer(np.kron(b, a), np.kron(b, a).conj()), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31))
def test_pure_and_mixed_paths_agree(seed):
    rng = np.random.default_rng(seed)
    names = ["H", "S", "SDG", "X", "CZ", "CNOT", "CH"]
    pure, mixed = PureState.zero(3), MixedState.zero(3)
    for _ in range(12):
        name = names[rng.integers(len(names))]
        if name in ("CZ", "CNOT", "CH"):
            g = Gate(name, tuple(int(q) for q in rng.choice(3, 2, replace=False)))
        else:
            g = Gate(name, (int(rng.integers(3)),))
        pure, mixed = apply_gate(pure, g), apply_gate(mixed, g)
        assert pure.norm() == pytest.approx(1, abs=1e-12)
    g = Gate("PEXP", (0, 2), "ZY", float(rng.uniform(-3, 3)))
    pure, mixed = apply_gate(pure, g), apply_gate(mixed, g)
    for keep in ([0], [1, 2], [0, 1, 2]):
        np.testing.assert_allclose(partial_trace(pure, keep).matrix, partial_trace(mixed, keep).matrix, atol=1e-10)


def test_mixed_state_invariants():
    with pytest.raises(SimulationError):
        MixedState(1, np.array([[1, 1], [0, 0]], dtype=complex)).check()
    m = MixedState.maximally_mixed(2)
    assert m.purity() == pytest.approx(0.25)
    rho = as_mixed(evolve(cluster_state_circuit(3)))
    assert rho.trace() == pytest.approx(1)
