"""Words in free products of cyclic groups.

Provides reduced-word arithmetic for Z2*Z, Z2*Z3 and Z2*Z2*Z2, the
embedding g -> g, u -> hgh of Z2*Z into Z2*Z3, subgroup membership for
H = <g, hgh> by deterministic block parsing, and the index-3 Schreier
coset/cocycle data for H that powers the induced representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional


class WordError(ValueError):
    pass


class PresentationMismatchError(WordError):
    pass


class ResourceLimitError(RuntimeError):
    """Enumeration exceeded its configured cap."""


@dataclass(frozen=True, slots=True)
class FreeProductPresentation:
    """Free product of cyclic groups; order 0 means an infinite factor."""

    orders: tuple[int, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if not self.orders:
            raise WordError("presentation needs at least one factor")
        if any(o == 1 or o < 0 for o in self.orders):
            raise WordError("factor orders must be 0 (infinite) or >= 2")
        if len(self.names) != len(self.orders):
            raise WordError("one generator name per factor required")

    def normalize_exp(self, gen: int, exp: int) -> int:
        o = self.orders[gen]
        return exp % o if o else exp


Z2_Z = FreeProductPresentation((2, 0), ("g", "u"))
Z2_Z3 = FreeProductPresentation((2, 3), ("g", "h"))
Z2_Z2_Z2 = FreeProductPresentation((2, 2, 2), ("g1", "g2", "g3"))


@dataclass(frozen=True, slots=True)
class GroupWord:
    """Reduced word: adjacent syllables use distinct generators and every
    exponent is nonzero (in 1..o-1 for a finite factor of order o)."""

    pres: FreeProductPresentation
    syllables: tuple[tuple[int, int], ...]

    @staticmethod
    def identity(pres: FreeProductPresentation) -> "GroupWord":
        return GroupWord(pres, ())

    @staticmethod
    def generator(pres: FreeProductPresentation, gen: int, exp: int = 1) -> "GroupWord":
        e = pres.normalize_exp(gen, exp)
        return GroupWord(pres, ((gen, e),) if e else ())

    @staticmethod
    def from_syllables(pres: FreeProductPresentation, sylls) -> "GroupWord":
        w = GroupWord.identity(pres)
        for gen, exp in sylls:
            w = w * GroupWord.generator(pres, gen, exp)
        return w

    def is_identity(self) -> bool:
        return not self.syllables

    def syllable_count(self) -> int:
        return len(self.syllables)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        if self.pres is not other.pres and self.pres != other.pres:
            raise PresentationMismatchError("cannot multiply words from different presentations")
        left = list(self.syllables)
        right = list(other.syllables)
        i = 0
        while left and i < len(right) and left[-1][0] == right[i][0]:
            gen = left[-1][0]
            e = self.pres.normalize_exp(gen, left[-1][1] + right[i][1])
            left.pop()
            i += 1
            if e:
                left.append((gen, e))
                break
        left.extend(right[i:])
        return GroupWord(self.pres, tuple(left))

    def inverse(self) -> "GroupWord":
        return GroupWord(self.pres, tuple(
            (gen, self.pres.normalize_exp(gen, -exp)) for gen, exp in reversed(self.syllables)))

    def __pow__(self, n: int) -> "GroupWord":
        base = self if n >= 0 else self.inverse()
        result = GroupWord.identity(self.pres)
        for _ in range(abs(n)):
            result = result * base
        return result

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        parts = []
        for gen, exp in self.syllables:
            name = self.pres.names[gen]
            parts.append(name if exp == 1 else f"{name}^{exp}")
        return " ".join(parts)


# generator shorthands used throughout
G2 = GroupWord.generator(Z2_Z, 0)          # g in Z2*Z
U = GroupWord.generator(Z2_Z, 1)           # u in Z2*Z
G3 = GroupWord.generator(Z2_Z3, 0)         # g in Z2*Z3
H = GroupWord.generator(Z2_Z3, 1)          # h in Z2*Z3
HGH = H * G3 * H


def iota_embed(w: GroupWord) -> GroupWord:
    """The injective homomorphism Z2*Z -> Z2*Z3 with g -> g, u -> hgh."""
    if w.pres != Z2_Z:
        raise PresentationMismatchError("iota_embed expects a word of Z2*Z")
    out = GroupWord.identity(Z2_Z3)
    for gen, exp in w.syllables:
        out = out * (G3 if gen == 0 else HGH ** exp)
    return out


def membership_H(w: GroupWord) -> Optional[GroupWord]:
    """Preimage in Z2*Z of w under iota when w lies in H = <g, hgh>,
    otherwise None.  Greedy left-to-right parse of the reduced-form
    blocks g, h g (h^2 g)^{n-1} h and h^2 g (h g)^{n-1} h^2."""
    if w.pres != Z2_Z3:
        raise PresentationMismatchError("membership_H expects a word of Z2*Z3")
    s = w.syllables
    parts: list[tuple[int, int]] = []
    i = 0
    while i < len(s):
        gen, exp = s[i]
        if gen == 0:
            parts.append((0, 1))
            i += 1
            continue
        # h-led block; exp 1 opens (hgh)^{+n}, exp 2 opens (hgh)^{-n}
        opener = exp
        if i + 1 >= len(s) or s[i + 1] != (0, 1):
            return None
        n = 1
        i += 2
        closer = 1 if opener == 1 else 2
        inner = 2 if opener == 1 else 1
        while True:
            if i >= len(s) or s[i][0] != 1:
                return None
            if s[i][1] == closer:
                i += 1
                parts.append((1, n if opener == 1 else -n))
                break
            if s[i][1] == inner:
                if i + 1 >= len(s) or s[i + 1] != (0, 1):
                    return None
                n += 1
                i += 2
                continue
            return None
    return GroupWord.from_syllables(Z2_Z, parts)


@dataclass(frozen=True)
class SchreierData:
    """Index-3 coset data for H = <g, hgh> with representatives e, h, gh.

    entries[(name, i)] = (target coset, cocycle in Z2*Z) such that
    s * rep_i = rep_target * iota(cocycle) holds by exact word multiplication.
    """

    reps: tuple[GroupWord, GroupWord, GroupWord]
    entries: dict[tuple[str, int], tuple[int, GroupWord]]

    def verify(self) -> None:
        for name, gen in (("g", G3), ("h", H)):
            images = set()
            for i in (1, 2, 3):
                target, cocycle = self.entries[(name, i)]
                images.add(target)
                lhs = gen * self.reps[i - 1]
                rhs = self.reps[target - 1] * iota_embed(cocycle)
                if lhs != rhs:
                    raise WordError(f"Schreier entry ({name},{i}) inconsistent")
            if images != {1, 2, 3}:
                raise WordError(f"action of {name} is not a permutation of the cosets")

    def to_json(self) -> dict:
        return {
            "reps": [str(r) for r in self.reps],
            "entries": {f"{name},{i}": {"target": t, "cocycle": str(c)}
                        for (name, i), (t, c) in sorted(self.entries.items())},
        }

    def render_text(self) -> str:
        lines = ["coset representatives: r1=e, r2=h, r3=gh"]
        for name in ("g", "h"):
            cells = []
            for i in (1, 2, 3):
                t, c = self.entries[(name, i)]
                cells.append(f"{i}->{t} [{c}]")
            lines.append(f"  {name}: " + "  ".join(cells))
        return "\n".join(lines)


_SCHREIER: SchreierData | None = None


def schreier_table() -> SchreierData:
    """Compute (and verify) the coset action and cocycles of g and h on the
    three H-cosets.  The index-3 closure is asserted, not assumed."""
    global _SCHREIER
    if _SCHREIER is not None:
        return _SCHREIER
    reps = (GroupWord.identity(Z2_Z3), H, G3 * H)
    entries: dict[tuple[str, int], tuple[int, GroupWord]] = {}
    for name, gen in (("g", G3), ("h", H)):
        for i in (1, 2, 3):
            moved = gen * reps[i - 1]
            hits = []
            for j in (1, 2, 3):
                preimage = membership_H(reps[j - 1].inverse() * moved)
                if preimage is not None:
                    hits.append((j, preimage))
            if len(hits) != 1:
                raise WordError(f"coset action of {name} on coset {i} is not well defined")
            entries[(name, i)] = hits[0]
    data = SchreierData(reps, entries)
    data.verify()
    _SCHREIER = data
    return data


def _letters(w: GroupWord) -> Iterator[str]:
    for gen, exp in w.syllables:
        if gen == 0:
            yield "g"
        else:
            for _ in range(exp):
                yield "h"


def coset_resolve(w: GroupWord) -> tuple[int, GroupWord]:
    """Unique decomposition w = rep_i * iota(cocycle) with i in {1,2,3}."""
    if w.pres != Z2_Z3:
        raise PresentationMismatchError("coset_resolve expects a word of Z2*Z3")
    table = schreier_table()
    coset = 1
    cocycle = GroupWord.identity(Z2_Z)
    for letter in reversed(list(_letters(w))):
        target, z = table.entries[(letter, coset)]
        coset = target
        cocycle = z * cocycle
    return coset, cocycle


def words_of_z2_z(max_syllables: int, max_exp: int,
                  cap: int | None = None) -> Iterator[GroupWord]:
    """All distinct reduced words of Z2*Z with at most max_syllables
    syllables and u-exponents bounded by max_exp in absolute value."""
    count = 0

    def emit(w):
        nonlocal count
        count += 1
        if cap is not None and count > cap:
            raise ResourceLimitError(
                f"enumeration exceeded cap of {cap} words")
        return w

    def extend(syllables: tuple[tuple[int, int], ...], last_gen: int | None, depth: int):
        yield emit(GroupWord(Z2_Z, syllables))
        if depth == max_syllables:
            return
        if last_gen != 0:
            yield from extend(syllables + ((0, 1),), 0, depth + 1)
        if last_gen != 1:
            for e in range(-max_exp, max_exp + 1):
                if e:
                    yield from extend(syllables + ((1, e),), 1, depth + 1)

    yield from extend((), None, 0)


def words_of_presentation(pres: FreeProductPresentation,
                          max_syllables: int) -> Iterator[GroupWord]:
    """All distinct reduced words of a finite-factor presentation with at
    most max_syllables syllables."""
    if any(o == 0 for o in pres.orders):
        raise WordError("finite factors only")

    def extend(syllables, last_gen, depth):
        yield GroupWord(pres, syllables)
        if depth == max_syllables:
            return
        for gen, order in enumerate(pres.orders):
            if gen == last_gen:
                continue
            for e in range(1, order):
                yield from extend(syllables + ((gen, e),), gen, depth + 1)

    yield from extend((), None, 0)


@dataclass(frozen=True)
class PingPongReport:
    max_syllables: int
    max_exp: int
    words_checked: int
    collisions: int
    power_lengths: tuple[int, ...]
    lengths_strictly_increasing: bool
    passed: bool

    def to_json(self) -> dict:
        return {
            "max_syllables": self.max_syllables,
            "max_exp": self.max_exp,
            "words_checked": self.words_checked,
            "collisions": self.collisions,
            "power_lengths": list(self.power_lengths),
            "lengths_strictly_increasing": self.lengths_strictly_increasing,
            "passed": self.passed,
        }


def ping_pong_injectivity_check(max_syllables: int, max_exp: int,
                                cap: int = 2_000_000) -> PingPongReport:
    """Enumerate reduced words of Z2*Z within the bounds and assert their
    images under iota are pairwise distinct; also check that the reduced
    length of (hgh)^n grows strictly for n = 1..50."""
    if max_syllables < 1 or max_exp < 1:
        raise WordError("bounds must be at least 1")
    seen: dict[tuple, tuple] = {}
    collisions = 0
    words = 0
    for w in words_of_z2_z(max_syllables, max_exp, cap=cap):
        words += 1
        key = iota_embed(w).syllables
        if key in seen and seen[key] != w.syllables:
            collisions += 1
        else:
            seen[key] = w.syllables
    lengths = tuple((HGH ** n).syllable_count() for n in range(1, 51))
    increasing = all(a < b for a, b in zip(lengths, lengths[1:]))
    nontrivial = all(lengths)
    return PingPongReport(
        max_syllables, max_exp, words, collisions, lengths,
        increasing, collisions == 0 and increasing and nontrivial)
