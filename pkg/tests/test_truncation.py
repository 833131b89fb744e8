import numpy as np
import pytest

from matcorr.engine import apply, builtin_operator, inner, zeta1, zeta2, zeta3
from matcorr.serialize import (
    ContainerError,
    complex_matrix_from_json,
    complex_matrix_to_json,
)
from matcorr.truncation import (
    TruncationError,
    block_to_matrix,
    tensor_apply,
    truncate_cyclic,
    vector_to_dense,
)


def dense_inner(a, b):
    return complex(np.vdot(b, a))  # linear in the first argument


def test_window_guard():
    with pytest.raises(TruncationError):
        truncate_cyclic(1, "plain")
    with pytest.raises(TruncationError):
        truncate_cyclic(4, "weird")


def test_truncated_zeta1_norm_before_renormalization():
    for m in (4, 8, 16):
        model = truncate_cyclic(m, "plain")
        assert model.raw_norm2[0] == pytest.approx(1 - 2.0 ** (-m), abs=1e-14)
        assert model.raw_norm2[1] == pytest.approx(1.0, abs=1e-14)
        # zeta3 window support is 1..m-1
        assert model.raw_norm2[2] == pytest.approx(1 - 2.0 ** (-(m - 1)), abs=1e-14)


def test_s2_mod_2m_is_an_involution():
    model = truncate_cyclic(8, "plain")
    s2 = model.ops["S2"]
    assert np.allclose(s2 @ s2, np.eye(16))
    assert np.allclose(s2, s2.conj().T)
    assert np.allclose(s2 @ s2.conj().T, np.eye(16))


def test_all_truncated_operators_are_unitary():
    model = truncate_cyclic(6, "plain")
    for mat in model.ops.values():
        assert np.allclose(mat.conj().T @ mat, np.eye(12), atol=1e-12)
    induced = truncate_cyclic(6, "induced")
    for mat in induced.ops.values():
        assert np.allclose(mat.conj().T @ mat, np.eye(36), atol=1e-12)


def test_induced_relations_hold_exactly_at_finite_size():
    model = truncate_cyclic(4, "induced")
    g, h = model.ops["g"], model.ops["h"]
    assert np.allclose(g @ g, np.eye(24), atol=1e-12)
    assert np.allclose(h @ h @ h, np.eye(24), atol=1e-12)


def test_truncated_shift_inner_product_converges():
    exact = 2.0 ** -0.5
    previous = None
    for m in (4, 8, 16, 32):
        model = truncate_cyclic(m, "plain")
        u = model.ops["U"]
        z1, z2 = model.vectors[0], model.vectors[1]
        val = dense_inner(tensor_apply(u, u, z1), z2)
        err = abs(val - exact)
        assert err <= 2.0 ** (-m / 2 + 2)
        if previous is not None:
            assert err < previous
        previous = err
    model8 = truncate_cyclic(8, "plain")
    u8 = model8.ops["U"]
    assert abs(dense_inner(tensor_apply(u8, u8, model8.vectors[0]),
                           model8.vectors[1]) - exact) <= 2.0 ** -6


def test_witness_quantities_converge_to_exact_values():
    s2 = builtin_operator("S2")
    exact_vals = {
        ("S2", 0, 2): inner(apply(s2, s2, zeta1()), zeta3()).to_complex(),
        ("S2", 2, 0): inner(apply(s2, s2, zeta3()), zeta1()).to_complex(),
        ("S2", 2, 1): inner(apply(s2, s2, zeta3()), zeta2()).to_complex(),
    }
    for m in (4, 8, 16, 32):
        model = truncate_cyclic(m, "plain")
        mat = model.ops["S2"]
        for (name, j, i), target in exact_vals.items():
            got = dense_inner(tensor_apply(mat, mat, model.vectors[j]), model.vectors[i])
            assert abs(got - target) <= 2.0 ** (-m / 2 + 2)


def test_induced_vectors_are_orthonormal():
    model = truncate_cyclic(5, "induced")
    w = model.isometry
    assert np.allclose(w.conj().T @ w, np.eye(4), atol=1e-12)


def test_vector_to_dense_respects_window():
    dense = vector_to_dense(zeta2(), 4, induced=False)
    idx = (0 + 4) * 8 + (0 + 4)
    assert dense[idx] == 1.0
    assert np.count_nonzero(dense) == 1


def test_block_matrix_layout():
    from matcorr.words import H
    from matcorr.engine import induced_sigma

    mat = block_to_matrix(induced_sigma(H), 4)
    # coset 1 goes to coset 2 with the identity cocycle
    assert mat[8 + 3, 3] == 1.0


def test_matrix_container_round_trip():
    rng = np.random.default_rng(0)
    mat = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    again = complex_matrix_from_json(complex_matrix_to_json(mat))
    assert np.array_equal(mat, again)
    with pytest.raises(ContainerError):
        complex_matrix_from_json({"shape": [2, 2], "data": [[0.0, 0.0]]})
