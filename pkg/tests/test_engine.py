import random
from fractions import Fraction

import pytest

from matcorr.engine import (
    Affine,
    BlockOp,
    EngineError,
    GeometricString,
    PrimitiveOp,
    StructuredVector,
    UnknownOperatorError,
    apply,
    builtin_operator,
    geometric_string,
    gram_schmidt,
    induced_sigma,
    inner,
    norm2,
    vectors_equal,
    zeta1,
    zeta2,
    zeta3,
)
from matcorr.field import INV_SQRT2, OMEGA, ONE, ZERO, FieldElement, HALF
from matcorr.words import G3, H, HGH, GroupWord, Z2_Z3, words_of_presentation

fe = FieldElement.make

T = builtin_operator("T")
U = builtin_operator("U")
S1 = builtin_operator("S1")
S2 = builtin_operator("S2")
S3 = builtin_operator("S3")

SIGMA_G = induced_sigma(G3)
SIGMA_H = induced_sigma(H)


def singleton(jl, jr, coeff=ONE, cl=1, cr=1):
    return StructuredVector((GeometricString.make(
        cl, cr, Affine(1, jl), Affine(1, jr), 1, coeff, ONE),))


def xi3():
    return apply(SIGMA_H, SIGMA_H, zeta1())


def xi4():
    return apply(SIGMA_G, SIGMA_G, xi3())


def spanning_family():
    vs = []
    for cl in (1, 2, 3):
        for cr in (1, 2, 3):
            for jl in (-2, -1, 0, 1, 2):
                vs.append(singleton(jl, -jl + 1, cl=cl, cr=cr))
    vs.append(zeta1())
    vs.append(apply(None, None, zeta3()))
    return vs


def random_vector(rng):
    strings = []
    for _ in range(rng.randint(1, 4)):
        cl, cr = rng.choice([1, 2, 3]), rng.choice([1, 2, 3])
        al = Affine(rng.choice([1, -1]), rng.randint(-4, 4))
        ar = Affine(rng.choice([1, -1]), rng.randint(-4, 4))
        coeff = fe(Fraction(rng.randint(-3, 3), rng.randint(1, 3)),
                   Fraction(rng.randint(-2, 2), 2), rng.randint(-1, 1), 0)
        if coeff.is_zero():
            coeff = ONE
        if rng.random() < 0.4:
            ratio = rng.choice([INV_SQRT2, HALF, OMEGA * HALF])
            strings.append(GeometricString.make(cl, cr, al, ar, None, coeff, ratio))
        else:
            ratio = rng.choice([ONE, OMEGA, INV_SQRT2, -ONE])
            strings.append(GeometricString.make(cl, cr, al, ar, rng.randint(1, 4), coeff, ratio))
    return StructuredVector.make(strings)


def random_sigma_word(rng, max_syll=6):
    sylls = []
    last = None
    for _ in range(rng.randint(0, max_syll)):
        gen = rng.choice([0, 1] if last is None else [1 - last])
        exp = 1 if gen == 0 else rng.choice([1, 2])
        sylls.append((gen, exp))
        last = gen
    return GroupWord.from_syllables(Z2_Z3, sylls)


# -- built-in operators -------------------------------------------------


def test_builtin_examples():
    assert S2.apply_to_basis(0) == (ONE, 1)
    assert T.compose(T).is_identity()
    assert S3.apply_to_basis(5) == (ONE, -5)
    assert T.apply_to_basis(3) == (-ONE, 3)
    assert T.apply_to_basis(-1) == (ONE, -1)
    with pytest.raises(UnknownOperatorError):
        builtin_operator("S4")


def test_builtins_are_self_adjoint_unitaries():
    for name in ("T", "S1", "S2", "S3"):
        op = builtin_operator(name)
        assert op.adjoint() == op
        assert op.compose(op).is_identity()
    assert U.adjoint().compose(U).is_identity()
    assert U.compose(U.adjoint()).is_identity()


# -- induced representation ---------------------------------------------


def test_sigma_hgh_restricted_to_coset_1_is_the_shift():
    sig = induced_sigma(HGH)
    assert sig.perm[0] == 1
    assert sig.ops[0] == U


def test_sigma_g_restricted_to_coset_1_is_t():
    assert SIGMA_G.perm[0] == 1
    assert SIGMA_G.ops[0] == T


def test_sigma_h_cubed_is_identity():
    assert SIGMA_H.compose(SIGMA_H).compose(SIGMA_H).is_identity()


def test_sigma_g_squared_is_identity():
    assert SIGMA_G.compose(SIGMA_G).is_identity()


def test_sigma_g_swaps_cosets_2_and_3():
    assert SIGMA_G.perm == (1, 3, 2)
    assert SIGMA_G.ops[1].is_identity()
    assert SIGMA_G.ops[2].is_identity()
    v = singleton(4, 4, cl=2, cr=1)
    image = apply(SIGMA_G, None, v)
    # delta_2 (x) e_4 goes to delta_3 (x) e_4 on the left leg, phase +1
    assert vectors_equal(image, singleton(4, 4, cl=3, cr=1))


def test_sigma_is_multiplicative_random_pairs():
    rng = random.Random(2718)
    for _ in range(1000):
        w1 = random_sigma_word(rng, 4)
        w2 = random_sigma_word(rng, 4)
        assert induced_sigma(w1 * w2) == induced_sigma(w1).compose(induced_sigma(w2))


def test_sigma_multiplicative_on_spanning_family():
    rng = random.Random(11)
    family = spanning_family()
    for _ in range(20):
        w1 = random_sigma_word(rng, 3)
        w2 = random_sigma_word(rng, 3)
        lhs = induced_sigma(w1 * w2)
        for v in family:
            composed = apply(induced_sigma(w1), None, apply(induced_sigma(w2), None, v))
            assert vectors_equal(apply(lhs, None, v), composed)


# -- vectors and apply ---------------------------------------------------


def test_zetas_are_orthonormal():
    zs = [zeta1(), zeta2(), zeta3()]
    for i, v in enumerate(zs):
        for j, w in enumerate(zs):
            expected = ONE if i == j else ZERO
            assert inner(v, w) == expected


def test_apply_s3_s3_sends_zeta1_to_zeta3():
    assert vectors_equal(apply(S3, S3, zeta1()), zeta3())
    assert vectors_equal(apply(S3, S3, zeta3()), zeta1())
    assert vectors_equal(apply(S3, S3, zeta2()), zeta2())


def test_apply_s1_negates_zeta2():
    assert vectors_equal(apply(S1, None, zeta2()), -zeta2())
    assert vectors_equal(apply(S1, None, zeta1()), zeta1())


def test_sigma_h_on_xi4_recovers_weighted_sum():
    expected = (zeta1() + zeta2()).scale(INV_SQRT2)
    assert vectors_equal(apply(SIGMA_H, SIGMA_H, xi4()), expected)


def test_inner_examples():
    assert inner(apply(U, U, zeta1()), zeta2()) == INV_SQRT2
    assert inner(apply(U, U, zeta1()), zeta1()) == INV_SQRT2
    assert inner(apply(S2, S2, zeta1()), zeta3()) == INV_SQRT2
    assert inner(apply(S2, S2, zeta2()), zeta3()) == INV_SQRT2
    assert inner(apply(S2, S2, zeta3()), zeta1()) == INV_SQRT2
    assert inner(apply(S2, S2, zeta3()), zeta2()) == INV_SQRT2
    assert inner(apply(S2, S2, zeta1()), zeta1()) == ZERO


def test_marginal_values():
    assert inner(apply(T, None, zeta1()), zeta1()) == ONE
    assert inner(apply(None, T, zeta1()), zeta1()) == ONE
    assert inner(apply(T, None, zeta2()), zeta2()) == -ONE
    assert inner(apply(None, T, zeta2()), zeta2()) == -ONE


def test_inner_conjugate_symmetry():
    rng = random.Random(5)
    for _ in range(500):
        v, w = random_vector(rng), random_vector(rng)
        assert inner(v, w) == inner(w, v).conj()


def test_unitarity_preserves_inner_products():
    rng = random.Random(6)
    builtins = [T, U, S2, S3]
    for k in range(60):
        v, w = random_vector(rng), random_vector(rng)
        base = inner(v, w)
        op = builtins[k % 4]
        assert inner(apply(op, op, v), apply(op, op, w)) == base
        sig = induced_sigma(random_sigma_word(rng, 6))
        assert inner(apply(sig, sig, v), apply(sig, sig, w)) == base
        assert norm2(apply(sig, op, v)) == norm2(v)


# -- gram-schmidt ---------------------------------------------------------


def test_gram_schmidt_on_witness_family():
    basis, n, coeffs = gram_schmidt([zeta1(), zeta2(), xi3(), xi4()])
    assert n == 4
    for i in range(4):
        for j in range(4):
            assert coeffs[i][j] == (ONE if i == j else ZERO)
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            assert inner(u, v) == (ONE if i == j else ZERO)


def test_gram_schmidt_duplicate():
    basis, n, coeffs = gram_schmidt([zeta1(), zeta1()])
    assert n == 1
    assert coeffs[0] == [ONE, ONE]
    assert vectors_equal(basis[0], zeta1())


def test_gram_schmidt_keeps_orthonormal_set():
    basis, n, _ = gram_schmidt([zeta1(), zeta2(), zeta3()])
    assert n == 3
    for u, v in zip(basis, [zeta1(), zeta2(), zeta3()]):
        assert vectors_equal(u, v)


def test_gram_schmidt_mixing():
    v = zeta1() + zeta2().scale(fe(2))
    basis, n, coeffs = gram_schmidt([zeta2(), v])
    assert n == 2
    # v = 2*zeta2 + zeta1 and the second basis vector is zeta1
    assert coeffs[0][1] == fe(2)
    assert coeffs[1][1] == ONE
    assert vectors_equal(basis[1], zeta1())


# -- construction guards ---------------------------------------------------


def test_string_constructor_guards():
    aff = Affine(1, 0)
    with pytest.raises(EngineError):
        GeometricString.make(1, 1, aff, aff, 0, ONE, ONE)
    with pytest.raises(EngineError):
        GeometricString.make(1, 1, aff, aff, None, ONE, ONE)  # |ratio| = 1
    with pytest.raises(EngineError):
        GeometricString.make(1, 1, aff, aff, None, ONE, OMEGA)
    with pytest.raises(EngineError):
        GeometricString.make(0, 1, aff, aff, 1, ONE, ONE)


def test_geometric_string_start_direction():
    s = geometric_string(1, 1, Affine(1, 0), Affine(1, 0), -1, -1, None,
                         INV_SQRT2, INV_SQRT2)
    assert vectors_equal(StructuredVector((s,)), zeta1())


def test_norm_of_scaled_sum():
    v = (zeta1() + zeta2()).scale(INV_SQRT2)
    assert norm2(v) == ONE
