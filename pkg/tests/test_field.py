import random
from fractions import Fraction

import pytest

from matcorr.field import (
    INV_SQRT2,
    OMEGA,
    ONE,
    SQRT2,
    ZERO,
    FieldDivisionError,
    FieldElement,
    FieldRangeError,
    FieldSqrtError,
    omega_power,
)

fe = FieldElement.make

OMEGA_SQ = fe(-1, 0, -1)  # w^2 = -1 - w


def random_element(rng, span=30, den=12):
    return fe(*(Fraction(rng.randint(-span, span), rng.randint(1, den)) for _ in range(4)))


def test_add_examples():
    assert fe(1) + fe(-1) == ZERO
    assert OMEGA + OMEGA_SQ == fe(-1)
    assert fe(0, Fraction(1, 2)) + fe(0, Fraction(1, 2)) == SQRT2


def test_mul_examples():
    assert SQRT2 * SQRT2 == fe(2)
    assert INV_SQRT2 * INV_SQRT2 == fe(Fraction(1, 2))
    assert OMEGA * OMEGA * OMEGA == ONE


def test_inv_examples():
    assert fe(2).inv() == fe(Fraction(1, 2))
    assert SQRT2.inv() == INV_SQRT2
    assert (ONE - fe(Fraction(1, 2))).inv() == fe(2)
    with pytest.raises(FieldDivisionError):
        ZERO.inv()


def test_conj_examples():
    assert OMEGA.conj() == fe(-1, 0, -1)
    assert SQRT2.conj() == SQRT2
    assert OMEGA * OMEGA.conj() == ONE


def test_to_complex_examples():
    z = INV_SQRT2.to_complex()
    assert abs(z - 0.7071067811865476) < 1e-15
    w = OMEGA.to_complex()
    assert abs(w - complex(-0.5, 0.8660254037844386)) < 1e-15
    assert abs((ONE + OMEGA + OMEGA_SQ).to_complex()) == 0.0


def test_to_complex_range_error():
    huge = fe(Fraction(10 ** 400))
    with pytest.raises(FieldRangeError):
        huge.to_complex()


def test_field_axioms_random_triples():
    rng = random.Random(20240811)
    for _ in range(10000):
        x, y, z = (random_element(rng) for _ in range(3))
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * y == y * x
        assert x + y == y + x
        assert x * (y + z) == x * y + x * z


def test_inverses_random():
    rng = random.Random(7)
    for _ in range(2000):
        x = random_element(rng)
        if x.is_zero():
            continue
        assert x * x.inv() == ONE


def test_conj_is_multiplicative_involution():
    rng = random.Random(99)
    for _ in range(2000):
        x, y = random_element(rng), random_element(rng)
        assert x.conj().conj() == x
        assert (x * y).conj() == x.conj() * y.conj()


def test_to_complex_is_ring_homomorphism():
    rng = random.Random(123)
    for _ in range(1000):
        x = random_element(rng, span=10 ** 6, den=997)
        y = random_element(rng, span=10 ** 6, den=997)
        assert abs((x + y).to_complex() - (x.to_complex() + y.to_complex())) < 1e-12 * max(
            1.0, abs(x.to_complex()) + abs(y.to_complex()))
        prod = (x * y).to_complex()
        assert abs(prod - x.to_complex() * y.to_complex()) < 1e-12 * max(1.0, abs(prod))


def test_minimal_polynomial_identities():
    assert OMEGA * OMEGA == fe(-1, 0, -1)
    assert ONE + OMEGA + OMEGA * OMEGA == ZERO
    assert SQRT2 ** 2 == fe(2)
    assert omega_power(2) == OMEGA_SQ
    assert omega_power(5) == OMEGA_SQ
    assert omega_power(6) == ONE


def test_sign_and_sqrt_real():
    assert (SQRT2 - ONE).sign_real() == 1
    assert (ONE - SQRT2).sign_real() == -1
    assert ZERO.sign_real() == 0
    assert fe(2).sqrt_real() == SQRT2
    assert fe(Fraction(1, 2)).sqrt_real() == INV_SQRT2
    # (1 + sqrt2)^2 = 3 + 2 sqrt2
    assert fe(3, 2).sqrt_real() == fe(1, 1)
    with pytest.raises(FieldSqrtError):
        fe(3).sqrt_real()
    with pytest.raises(FieldSqrtError):
        (-ONE).sqrt_real()


def test_abs2_unit_modulus():
    assert OMEGA.abs2() == ONE
    assert INV_SQRT2.abs2() == fe(Fraction(1, 2))


def test_json_round_trip():
    x = fe(Fraction(3, 7), Fraction(-1, 2), 5, Fraction(0))
    obj = x.to_json()
    assert obj["a"] == "3/7"
    assert FieldElement.from_json(obj) == x


def test_str_rendering():
    assert str(ZERO) == "0"
    assert str(ONE - OMEGA) == "1 - ω"
    assert str(INV_SQRT2) == "1/2·√2"


def test_pow_negative():
    assert SQRT2 ** -2 == fe(Fraction(1, 2))
    assert OMEGA ** -1 == OMEGA_SQ
