import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sptsim.pauli import PauliString, pauli_product

labels = st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n)))


def test_parse_dense_and_sparse():
    assert PauliString.parse("-iXIZ") == PauliString("XIZ", 3)
    assert PauliString.parse("Y1X2X3Y4") == PauliString("YXXY")
    assert PauliString.parse("Z2", 4) == PauliString("IZII")
    assert str(PauliString("YXXY", 2)) == "-YXXY"
    assert PauliString("XIZ").sparse_str() == "+X1Z3"
    with pytest.raises(ValueError):
        PauliString("XQ")
    with pytest.raises(ValueError):
        PauliString.parse("XX", 3)


def test_single_site_products():
    x, y, z = PauliString("X"), PauliString("Y"), PauliString("Z")
    assert x * y == PauliString("Z", 1)
    assert y * x == PauliString("Z", 3)
    assert z * x == PauliString("Y", 1)
    assert x * x == PauliString("I")


@given(labels, st.integers(0, 3), st.integers(0, 3))
def test_product_matches_matrices(pair, pa, pb):
    a, b = PauliString(pair[0], pa), PauliString(pair[1], pb)
    np.testing.assert_allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)


@given(labels)
def test_commutation_matches_matrices(pair):
    a, b = PauliString(pair[0]), PauliString(pair[1])
    ma, mb = a.to_matrix(), b.to_matrix()
    assert a.commutes_with(b) == np.allclose(ma @ mb, mb @ ma)


@given(st.text("IXYZ", min_size=1, max_size=5), st.integers(0, 3))
def test_hermitian_iff_real_phase_and_square(lab, power):
    p = PauliString(lab, power)
    m = p.to_matrix()
    assert p.is_hermitian == np.allclose(m, m.conj().T)
    sq = p * p
    assert sq.is_identity()
    if p.is_hermitian:
        assert sq.power == 0


@settings(max_examples=50)
@given(st.text("IXYZ", min_size=1, max_size=4), st.integers(0, 3))
def test_apply_matches_dense(lab, power):
    p = PauliString(lab, power)
    rng = np.random.default_rng(len(lab) + power)
    v = rng.normal(size=2 ** len(lab)) + 1j * rng.normal(size=2 ** len(lab))
    np.testing.assert_allclose(p.apply(v), p.to_matrix() @ v, atol=1e-12)
    m = rng.normal(size=(2 ** len(lab), 3))
    np.testing.assert_allclose(p.apply(m, axis=0), p.to_matrix() @ m, atol=1e-12)


def test_little_endian_convention():
    # Z on site 1 flips the sign of basis states whose bit 0 is set
    z1 = PauliString("ZI").to_matrix()
    np.testing.assert_allclose(np.diag(z1).real, [1, -1, 1, -1])


def test_restrict_embed_adjoint():
    p = PauliString("XYZ", 1)
    assert p.restrict([0, 2]) == PauliString("XZ", 1)
    assert PauliString("XZ").embed((1, 3), 4) == PauliString("IXIZ")
    assert p.adjoint() == PauliString("XYZ", 3)
    assert (-p).power == 3
    assert pauli_product([PauliString("XI"), PauliString("IX"), PauliString("XX")]).is_identity()
