import random

import pytest

from matcorr.words import (
    G2,
    G3,
    H,
    HGH,
    U,
    Z2_Z,
    Z2_Z3,
    GroupWord,
    PresentationMismatchError,
    ResourceLimitError,
    coset_resolve,
    iota_embed,
    membership_H,
    ping_pong_injectivity_check,
    schreier_table,
    words_of_presentation,
    words_of_z2_z,
)

E3 = GroupWord.identity(Z2_Z3)
E2 = GroupWord.identity(Z2_Z)


def random_word(rng, pres, max_syll=6, max_exp=3):
    sylls = []
    last = None
    for _ in range(rng.randint(0, max_syll)):
        gen = rng.choice([i for i in range(len(pres.orders)) if i != last])
        order = pres.orders[gen]
        if order:
            exp = rng.randint(1, order - 1)
        else:
            exp = rng.choice([e for e in range(-max_exp, max_exp + 1) if e])
        sylls.append((gen, exp))
        last = gen
    return GroupWord.from_syllables(pres, sylls)


def test_multiply_examples():
    assert H * (H * H) == E3                       # order 3
    assert (HGH * HGH).syllables == ((1, 1), (0, 1), (1, 2), (0, 1), (1, 1))
    assert G3 * G3 == E3                           # order 2


def test_multiply_deep_cancellation():
    w = H * G3 * H
    assert w * w.inverse() == E3
    assert (G3 * H * G3) * (G3 * H.inverse() * G3) == E3


def test_word_laws_random():
    rng = random.Random(4242)
    for _ in range(10000):
        w1 = random_word(rng, Z2_Z3)
        w2 = random_word(rng, Z2_Z3)
        w3 = random_word(rng, Z2_Z3)
        assert (w1 * w2) * w3 == w1 * (w2 * w3)
        assert w1 * w1.inverse() == E3
        assert w1.inverse() * w1 == E3


def test_presentation_mismatch():
    with pytest.raises(PresentationMismatchError):
        G2 * G3


def test_iota_examples():
    assert iota_embed(U) == HGH
    assert iota_embed(E2) == E3
    assert iota_embed(U.inverse()) == H * H * G3 * H * H  # h^2 g h^2


def test_iota_is_homomorphic():
    rng = random.Random(31337)
    for _ in range(10000):
        w1 = random_word(rng, Z2_Z, max_syll=4)
        w2 = random_word(rng, Z2_Z, max_syll=4)
        assert iota_embed(w1 * w2) == iota_embed(w1) * iota_embed(w2)


def test_ping_pong_small():
    report = ping_pong_injectivity_check(1, 1)
    assert report.passed
    assert report.words_checked == 4  # e, g, u, u^-1
    assert report.collisions == 0


def test_ping_pong_full():
    report = ping_pong_injectivity_check(8, 4)
    assert report.passed
    assert report.collisions == 0
    # alternating-syllable count: 1+9+16+72+128+576+1024+4608+8192
    assert report.words_checked == 14626


def test_hgh_power_lengths():
    lengths = [(HGH ** n).syllable_count() for n in (1, 2, 3)]
    assert lengths == [3, 5, 7]
    report = ping_pong_injectivity_check(1, 1)
    assert report.lengths_strictly_increasing
    assert report.power_lengths[:3] == (3, 5, 7)


def test_ping_pong_cap():
    with pytest.raises(ResourceLimitError):
        ping_pong_injectivity_check(8, 4, cap=100)


def test_membership_examples():
    w = iota_embed(U * G2 * U.inverse())
    assert w == HGH * G3 * (H * H * G3 * H * H)
    assert membership_H(w) == U * G2 * U.inverse()
    assert membership_H(H) is None
    assert membership_H(E3) == E2


def bfs_subgroup_elements(max_letters=6):
    letters = [G3, HGH, HGH.inverse()]
    frontier = {E3.syllables: E3}
    seen = dict(frontier)
    for _ in range(max_letters):
        nxt = {}
        for w in frontier.values():
            for letter in letters:
                v = w * letter
                if v.syllables not in seen:
                    nxt[v.syllables] = v
        seen.update(nxt)
        frontier = nxt
    return set(seen)


def test_membership_against_bfs_oracle():
    subgroup = bfs_subgroup_elements(6)
    checked = 0
    for w in words_of_presentation(Z2_Z3, 9):
        preimage = membership_H(w)
        assert (preimage is not None) == (w.syllables in subgroup), str(w)
        if preimage is not None:
            assert iota_embed(preimage) == w
        checked += 1
    assert checked > 100


def test_schreier_table_matches_expected():
    table = schreier_table()
    assert [str(r) for r in table.reps] == ["e", "h", "g h"]
    expected = {
        ("g", 1): (1, G2), ("g", 2): (3, E2), ("g", 3): (2, E2),
        ("h", 1): (2, E2), ("h", 2): (3, U.inverse()), ("h", 3): (1, U),
    }
    assert table.entries == expected
    table.verify()


def test_schreier_h_cycle_composes_to_identity():
    table = schreier_table()
    coset, total = 1, E2
    for _ in range(3):
        target, z = table.entries[("h", coset)]
        total = z * total
        coset = target
    assert coset == 1
    assert total == E2


def test_coset_resolve_examples():
    coset, cocycle = coset_resolve(H * H)
    assert (coset, cocycle) == (3, U.inverse())
    assert coset_resolve(G3) == (1, G2)
    assert coset_resolve(HGH) == (1, U)


def test_coset_resolve_reconstructs_words():
    table = schreier_table()
    for w in words_of_presentation(Z2_Z3, 9):
        coset, cocycle = coset_resolve(w)
        assert table.reps[coset - 1] * iota_embed(cocycle) == w


def test_cosets_closed_under_generators():
    table = schreier_table()
    for name in ("g", "h"):
        targets = {table.entries[(name, i)][0] for i in (1, 2, 3)}
        assert targets == {1, 2, 3}


def test_str_rendering():
    assert str(HGH * HGH) == "h g h^2 g h"
    assert str(E3) == "e"
