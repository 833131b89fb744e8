"""Exact symbolic operators and vectors on l2(Z), C3 (x) l2(Z) and their
two-fold tensor products.

Operators are weighted permutations of the basis {e_j}: an affine index map
j -> eps*j + off together with a piecewise-constant unit-modulus phase with
finitely many breakpoints.  Vectors are finite sums of geometric diagonal
strings; every inner product is summed in closed form over Q(sqrt2, w),
including the infinite overlaps, via exact geometric series.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .field import INV_SQRT2, ONE, ZERO, FieldElement, FieldSqrtError
from .words import GroupWord, Z2_Z, Z2_Z3, coset_resolve, schreier_table


class EngineError(ValueError):
    pass


class UnknownOperatorError(EngineError):
    pass


class GramSchmidtError(EngineError):
    """Pivot norm has no square root in the field; needs numeric fallback."""


@dataclass(frozen=True, slots=True)
class Affine:
    """The bijection j -> eps*j + off on Z with eps in {+1, -1}."""

    eps: int
    off: int

    def __call__(self, j: int) -> int:
        return self.eps * j + self.off

    def compose(self, other: "Affine") -> "Affine":
        return Affine(self.eps * other.eps, self.eps * other.off + self.off)

    def inverse(self) -> "Affine":
        return Affine(self.eps, -self.eps * self.off)


IDENTITY_AFFINE = Affine(1, 0)


def _pullback(breaks: tuple[int, ...], vals: tuple[FieldElement, ...],
              aff: Affine) -> tuple[tuple[int, ...], tuple[FieldElement, ...]]:
    """Piecewise data of j -> phi(aff(j)) given the data of phi.

    Regions are half-open: value vals[i] on [breaks[i-1], breaks[i])."""
    if not breaks:
        return breaks, vals
    if aff.eps == 1:
        return tuple(b - aff.off for b in breaks), vals
    return tuple(aff.off - b + 1 for b in reversed(breaks)), tuple(reversed(vals))


def _canonical(breaks: Sequence[int], vals: Sequence[FieldElement]):
    out_b: list[int] = []
    out_v: list[FieldElement] = [vals[0]]
    for b, v in zip(breaks, vals[1:]):
        if v == out_v[-1]:
            continue
        out_b.append(b)
        out_v.append(v)
    return tuple(out_b), tuple(out_v)


def _merge_mult(b1, v1, b2, v2):
    merged = sorted(set(b1) | set(b2))

    def value(breaks, vals, j):
        return vals[bisect_right(breaks, j)]

    if not merged:
        return _canonical((), (v1[0] * v2[0],))
    vals = []
    for i in range(len(merged) + 1):
        rep = merged[0] - 1 if i == 0 else merged[i - 1]
        vals.append(value(b1, v1, rep) * value(b2, v2, rep))
    return _canonical(tuple(merged), tuple(vals))


@dataclass(frozen=True, slots=True)
class PrimitiveOp:
    """Unitary weighted shift/reflection on l2(Z): e_j -> phase(j) e_{aff(j)}."""

    affine: Affine
    breaks: tuple[int, ...]
    vals: tuple[FieldElement, ...]

    @staticmethod
    def make(affine: Affine, breaks: Sequence[int] = (),
             vals: Sequence[FieldElement] = (ONE,)) -> "PrimitiveOp":
        if len(vals) != len(breaks) + 1:
            raise EngineError("need exactly one phase per region")
        if any(b1 >= b2 for b1, b2 in zip(breaks, breaks[1:])):
            raise EngineError("breakpoints must be strictly increasing")
        for v in vals:
            if not v.abs2().is_one():
                raise EngineError(f"phase {v} is not unit-modulus")
        b, v = _canonical(tuple(breaks), tuple(vals))
        return PrimitiveOp(affine, b, v)

    @staticmethod
    def identity() -> "PrimitiveOp":
        return PrimitiveOp(IDENTITY_AFFINE, (), (ONE,))

    @staticmethod
    def shift(n: int) -> "PrimitiveOp":
        return PrimitiveOp(Affine(1, n), (), (ONE,))

    def phase_at(self, j: int) -> FieldElement:
        return self.vals[bisect_right(self.breaks, j)]

    def apply_to_basis(self, j: int) -> tuple[FieldElement, int]:
        return self.phase_at(j), self.affine(j)

    def compose(self, other: "PrimitiveOp") -> "PrimitiveOp":
        """self after other."""
        pb, pv = _pullback(self.breaks, self.vals, other.affine)
        breaks, vals = _merge_mult(other.breaks, other.vals, pb, pv)
        return PrimitiveOp(self.affine.compose(other.affine), breaks, vals)

    def adjoint(self) -> "PrimitiveOp":
        inv = self.affine.inverse()
        pb, pv = _pullback(self.breaks, self.vals, inv)
        return PrimitiveOp(inv, pb, tuple(v.conj() for v in pv))

    def is_identity(self) -> bool:
        return self == PrimitiveOp.identity()

    def to_json(self) -> dict:
        return {"eps": self.affine.eps, "off": self.affine.off,
                "breaks": list(self.breaks),
                "phases": [v.to_json() for v in self.vals]}


_MINUS_ONE = -ONE

_BUILTINS = {
    "T": PrimitiveOp(IDENTITY_AFFINE, (0,), (ONE, _MINUS_ONE)),
    "U": PrimitiveOp.shift(1),
    "S1": PrimitiveOp(IDENTITY_AFFINE, (0,), (ONE, _MINUS_ONE)),
    "S2": PrimitiveOp(Affine(-1, 1), (), (ONE,)),
    "S3": PrimitiveOp(Affine(-1, 0), (), (ONE,)),
}


def builtin_operator(name: str) -> PrimitiveOp:
    """T, U and the three reflections S1, S2, S3."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownOperatorError(f"unknown operator {name!r}") from None


@dataclass(frozen=True, slots=True)
class BlockOp:
    """Unitary on C3 (x) l2(Z): a coset permutation with one PrimitiveOp per
    source coset: delta_i (x) v -> delta_perm(i) (x) ops[i] v."""

    perm: tuple[int, int, int]
    ops: tuple[PrimitiveOp, PrimitiveOp, PrimitiveOp]

    @staticmethod
    def identity() -> "BlockOp":
        eye = PrimitiveOp.identity()
        return BlockOp((1, 2, 3), (eye, eye, eye))

    def compose(self, other: "BlockOp") -> "BlockOp":
        perm = tuple(self.perm[other.perm[i] - 1] for i in range(3))
        ops = tuple(self.ops[other.perm[i] - 1].compose(other.ops[i]) for i in range(3))
        return BlockOp(perm, ops)

    def adjoint(self) -> "BlockOp":
        perm = [0, 0, 0]
        ops: list[PrimitiveOp] = [PrimitiveOp.identity()] * 3
        for i in range(3):
            j = self.perm[i] - 1
            perm[j] = i + 1
            ops[j] = self.ops[i].adjoint()
        return BlockOp(tuple(perm), tuple(ops))

    def is_identity(self) -> bool:
        return self == BlockOp.identity()


def _pi_of_word(w: GroupWord) -> PrimitiveOp:
    """The representation of Z2*Z on l2(Z) with g -> T and u -> the shift."""
    op = PrimitiveOp.identity()
    for gen, exp in w.syllables:
        op = op.compose(_BUILTINS["T"] if gen == 0 else PrimitiveOp.shift(exp))
    return op


@lru_cache(maxsize=None)
def induced_sigma(w: GroupWord) -> BlockOp:
    """The representation of Z2*Z3 induced from the index-3 subgroup
    <g, hgh> acting on l2(Z) through T and the shift."""
    if w.pres != Z2_Z3:
        raise EngineError("induced_sigma expects a word of Z2*Z3")
    reps = schreier_table().reps
    perm = [0, 0, 0]
    ops: list[PrimitiveOp] = []
    for i in (1, 2, 3):
        target, cocycle = coset_resolve(w * reps[i - 1])
        perm[i - 1] = target
        ops.append(_pi_of_word(cocycle))
    return BlockOp(tuple(perm), tuple(ops))


Operator = Union[PrimitiveOp, BlockOp, None]


@dataclass(frozen=True, slots=True)
class GeometricString:
    """sum_t coeff * ratio^t (delta_{coset_l} (x) e_{aff_l(t)}) (x)
    (delta_{coset_r} (x) e_{aff_r(t)}) over t = 0..count-1 (count=None: t >= 0)."""

    coset_l: int
    coset_r: int
    aff_l: Affine
    aff_r: Affine
    count: Optional[int]
    coeff: FieldElement
    ratio: FieldElement

    @staticmethod
    def make(coset_l: int, coset_r: int, aff_l: Affine, aff_r: Affine,
             count: Optional[int], coeff: FieldElement,
             ratio: FieldElement) -> "GeometricString":
        if coset_l not in (1, 2, 3) or coset_r not in (1, 2, 3):
            raise EngineError("coset tags must lie in {1,2,3}")
        if count is not None and count < 1:
            raise EngineError("count must be at least 1")
        if count == 1:
            ratio = ONE
            aff_l = Affine(1, aff_l(0))
            aff_r = Affine(1, aff_r(0))
        elif ratio.is_zero():
            raise EngineError("ratio must be nonzero for strings of length > 1")
        if count is None and (ONE - ratio.abs2()).sign_real() <= 0:
            raise EngineError("infinite string needs |ratio| < 1")
        return GeometricString(coset_l, coset_r, aff_l, aff_r, count, coeff, ratio)

    def to_json(self) -> dict:
        return {"coset_l": self.coset_l, "coset_r": self.coset_r,
                "aff_l": [self.aff_l.eps, self.aff_l.off],
                "aff_r": [self.aff_r.eps, self.aff_r.off],
                "count": self.count,
                "coeff": self.coeff.to_json(), "ratio": self.ratio.to_json()}


def geometric_string(coset_l: int, coset_r: int, aff_l: Affine, aff_r: Affine,
                     start: int, direction: int, count: Optional[int],
                     coeff: FieldElement, ratio: FieldElement) -> GeometricString:
    """Spec-shaped constructor: positions run along j = start + direction*t."""
    step = Affine(direction, start)
    return GeometricString.make(coset_l, coset_r, aff_l.compose(step),
                                aff_r.compose(step), count, coeff, ratio)


@dataclass(frozen=True, slots=True)
class StructuredVector:
    """Finite, canonically merged sum of geometric strings."""

    strings: tuple[GeometricString, ...]

    @staticmethod
    def make(strings: Iterable[GeometricString]) -> "StructuredVector":
        merged: dict[tuple, FieldElement] = {}
        order: list[tuple] = []
        for s in strings:
            key = (s.coset_l, s.coset_r, s.aff_l, s.aff_r, s.count, s.ratio)
            if key in merged:
                merged[key] = merged[key] + s.coeff
            else:
                merged[key] = s.coeff
                order.append(key)
        out = []
        for key in order:
            coeff = merged[key]
            if coeff.is_zero():
                continue
            cl, cr, al, ar, count, ratio = key
            out.append(GeometricString(cl, cr, al, ar, count, coeff, ratio))
        return StructuredVector(tuple(out))

    @staticmethod
    def zero() -> "StructuredVector":
        return StructuredVector(())

    def __add__(self, other: "StructuredVector") -> "StructuredVector":
        return StructuredVector.make(self.strings + other.strings)

    def __sub__(self, other: "StructuredVector") -> "StructuredVector":
        return self + other.scale(_MINUS_ONE)

    def __neg__(self) -> "StructuredVector":
        return self.scale(_MINUS_ONE)

    def scale(self, s: FieldElement) -> "StructuredVector":
        if s.is_zero():
            return StructuredVector.zero()
        return StructuredVector(tuple(
            GeometricString(g.coset_l, g.coset_r, g.aff_l, g.aff_r, g.count,
                            g.coeff * s, g.ratio) for g in self.strings))

    def to_json(self) -> dict:
        return {"strings": [s.to_json() for s in self.strings]}


def _resolve(op: Operator, coset: int) -> tuple[int, PrimitiveOp]:
    if op is None:
        return coset, PrimitiveOp.identity()
    if isinstance(op, PrimitiveOp):
        return coset, op
    return op.perm[coset - 1], op.ops[coset - 1]


def _phase_pieces(prim: PrimitiveOp, aff_t: Affine, count: Optional[int]):
    """Constant pieces (lo, hi, value) of t -> prim.phase(aff_t(t)) clipped
    to [0, count); hi=None means unbounded."""
    pb, pv = _pullback(prim.breaks, prim.vals, aff_t)
    pieces = []
    for i, val in enumerate(pv):
        lo = 0 if i == 0 else max(0, pb[i - 1])
        hi_region = pb[i] if i < len(pb) else None
        if hi_region is None:
            hi = count
        elif count is None:
            hi = hi_region
        else:
            hi = min(count, hi_region)
        if hi is None or lo < hi:
            pieces.append((lo, hi, val))
    return pieces


def apply(op_left: Operator, op_right: Operator,
          v: StructuredVector) -> StructuredVector:
    """Exact image of v under op_left (x) op_right; strings split at the
    phase breakpoints of the operators."""
    out: list[GeometricString] = []
    for s in v.strings:
        coset_l, prim_l = _resolve(op_left, s.coset_l)
        coset_r, prim_r = _resolve(op_right, s.coset_r)
        for lo_l, hi_l, val_l in _phase_pieces(prim_l, s.aff_l, s.count):
            for lo_r, hi_r, val_r in _phase_pieces(prim_r, s.aff_r, s.count):
                lo = max(lo_l, lo_r)
                his = [h for h in (hi_l, hi_r) if h is not None]
                hi = min(his) if his else None
                if hi is not None and lo >= hi:
                    continue
                shift = Affine(1, lo)
                out.append(GeometricString.make(
                    coset_l, coset_r,
                    prim_l.affine.compose(s.aff_l).compose(shift),
                    prim_r.affine.compose(s.aff_r).compose(shift),
                    None if hi is None else hi - lo,
                    s.coeff * s.ratio ** lo * val_l * val_r,
                    s.ratio))
    return StructuredVector.make(out)


def _geom(n: Optional[int], r: FieldElement) -> FieldElement:
    """1 + r + ... + r^(n-1); n=None sums the full series (needs |r| < 1)."""
    if n is None:
        if (ONE - r.abs2()).sign_real() <= 0:
            raise EngineError("non-convergent infinite overlap: |ratio product| >= 1")
        return (ONE - r).inv()
    if r.is_one():
        return FieldElement.make(n)
    return (ONE - r ** n) * (ONE - r).inv()


def _inner_strings(s: GeometricString, p: GeometricString) -> FieldElement:
    if s.coset_l != p.coset_l or s.coset_r != p.coset_r:
        return ZERO
    sig1 = s.aff_l.eps * p.aff_l.eps
    c1 = p.aff_l.eps * (s.aff_l.off - p.aff_l.off)
    sig2 = s.aff_r.eps * p.aff_r.eps
    c2 = p.aff_r.eps * (s.aff_r.off - p.aff_r.off)
    if sig1 != sig2:
        # the two index equations cross in at most one lattice point
        q, rem = divmod(c2 - c1, sig1 - sig2)
        if rem:
            return ZERO
        t, tp = q, sig1 * q + c1
        if t < 0 or (s.count is not None and t >= s.count):
            return ZERO
        if tp < 0 or (p.count is not None and tp >= p.count):
            return ZERO
        return s.coeff * s.ratio ** t * (p.coeff * p.ratio ** tp).conj()
    if c1 != c2:
        return ZERO
    sig, c = sig1, c1
    head = s.coeff * p.coeff.conj() * p.ratio.conj() ** c
    if sig == 1:
        lo = max(0, -c)
        his = [h for h in (s.count, None if p.count is None else p.count - c)
               if h is not None]
        hi = min(his) if his else None
        if hi is not None and hi <= lo:
            return ZERO
        r = s.ratio * p.ratio.conj()
        return head * r ** lo * _geom(None if hi is None else hi - lo, r)
    lo = 0 if p.count is None else max(0, c - p.count + 1)
    hi = c if s.count is None else min(c, s.count - 1)
    if hi < lo:
        return ZERO
    r = s.ratio * p.ratio.conj().inv()
    return head * r ** lo * _geom(hi - lo + 1, r)


def inner(v: StructuredVector, w: StructuredVector) -> FieldElement:
    """<v, w>, linear in the first argument and conjugate-linear in the
    second; infinite overlaps summed by exact geometric series."""
    total = ZERO
    for s in v.strings:
        for p in w.strings:
            total = total + _inner_strings(s, p)
    return total


def norm2(v: StructuredVector) -> FieldElement:
    return inner(v, v)


def vectors_equal(v: StructuredVector, w: StructuredVector) -> bool:
    return norm2(v - w).is_zero()


def gram_schmidt(vs: Sequence[StructuredVector]):
    """Exact orthonormalization.  Returns (orthonormal list, rank n, R) with
    vs[j] = sum_i R[i][j] * ortho[i]; dependent inputs are dropped."""
    ortho: list[StructuredVector] = []
    columns: list[list[FieldElement]] = []
    for v in vs:
        col = [inner(v, u) for u in ortho]
        w = v
        for coeff, u in zip(col, ortho):
            w = w - u.scale(coeff)
        nn = norm2(w)
        if nn.is_zero():
            columns.append(col)
            continue
        try:
            pivot = nn.sqrt_real()
        except FieldSqrtError as exc:
            raise GramSchmidtError(
                f"pivot norm^2 {nn} has no in-field square root; needs numeric fallback"
            ) from exc
        ortho.append(w.scale(pivot.inv()))
        columns.append(col + [pivot])
    n = len(ortho)
    coeffs = [[columns[j][i] if i < len(columns[j]) else ZERO
               for j in range(len(vs))] for i in range(n)]
    return ortho, n, coeffs


def zeta1() -> StructuredVector:
    """sum_{j<0} (sqrt2)^j e_j (x) e_j, in the (1,1) coset slot."""
    aff = Affine(-1, -1)
    return StructuredVector((GeometricString.make(
        1, 1, aff, aff, None, INV_SQRT2, INV_SQRT2),))


def zeta2() -> StructuredVector:
    """e_0 (x) e_0."""
    return StructuredVector((GeometricString.make(
        1, 1, IDENTITY_AFFINE, IDENTITY_AFFINE, 1, ONE, ONE),))


def zeta3() -> StructuredVector:
    """sum_{j>0} (sqrt2)^{-j} e_j (x) e_j."""
    aff = Affine(1, 1)
    return StructuredVector((GeometricString.make(
        1, 1, aff, aff, None, INV_SQRT2, INV_SQRT2),))
