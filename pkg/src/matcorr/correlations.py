"""PVMs, matrix-valued correlation tables, witness constructions and
residual functionals.

A correlation table holds the n x n matrices P(a,b|x,y) = W*(E_{a,x} (x)
F_{b,y})W either exactly over Q(sqrt2, w) or as complex128 arrays.  The two
witnesses are the three-input/two-outcome family (n = 3) and the
two-input/three-outcome family (n = 4 via the induced representation);
their residual functionals vanish exactly on the exact constructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from .engine import (
    BlockOp,
    Operator,
    PrimitiveOp,
    StructuredVector,
    apply,
    builtin_operator,
    gram_schmidt,
    induced_sigma,
    inner,
    zeta1,
    zeta2,
    zeta3,
)
from .field import INV_SQRT2, ONE, ZERO, FieldElement, HALF, THIRD, omega_power
from .truncation import CyclicModel, tensor_apply
from .words import G3, H

OMEGA_C = complex(-0.5, 0.8660254037844386)

ExactMatrix = tuple[tuple[FieldElement, ...], ...]


class CorrelationError(ValueError):
    pass


class AssemblyError(CorrelationError):
    pass


class WitnessError(CorrelationError):
    """A witness self-test found an exact mismatch; fatal."""


class CertificateError(CorrelationError):
    """Malformed external table; carries a location string."""


# -- exact matrix helpers -------------------------------------------------


def mat_make(rows: Sequence[Sequence[FieldElement]]) -> ExactMatrix:
    return tuple(tuple(row) for row in rows)


def mat_identity(n: int) -> ExactMatrix:
    return mat_make([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])


def mat_zero(n: int) -> ExactMatrix:
    return mat_make([[ZERO] * n for _ in range(n)])


def mat_add(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return mat_make([[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])


def mat_sub(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return mat_make([[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)])


def mat_scale(a: ExactMatrix, s: FieldElement) -> ExactMatrix:
    return mat_make([[x * s for x in row] for row in a])


def mat_mul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    n, mid, m = len(a), len(b), len(b[0])
    return mat_make([[sum((a[i][t] * b[t][j] for t in range(mid)), ZERO)
                      for j in range(m)] for i in range(n)])


def mat_adjoint(a: ExactMatrix) -> ExactMatrix:
    return mat_make([[a[j][i].conj() for j in range(len(a))] for i in range(len(a[0]))])


def frobenius2_exact(a: ExactMatrix) -> FieldElement:
    total = ZERO
    for row in a:
        for x in row:
            total = total + x.abs2()
    return total


def mat_to_complex(a: ExactMatrix) -> np.ndarray:
    return np.array([[x.to_complex() for x in row] for row in a], dtype=np.complex128)


def _det_exact(a: ExactMatrix) -> FieldElement:
    n = len(a)
    if n == 1:
        return a[0][0]
    total = ZERO
    sign = ONE
    for j in range(n):
        minor = mat_make([row[:j] + row[j + 1:] for row in a[1:]])
        total = total + sign * a[0][j] * _det_exact(minor)
        sign = -sign
    return total


def exact_psd_check(a: ExactMatrix) -> bool:
    """Hermitian with every principal minor nonnegative."""
    n = len(a)
    for i in range(n):
        for j in range(n):
            if a[i][j].conj() != a[j][i]:
                return False
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            minor = mat_make([[a[i][j] for j in idx] for i in idx])
            det = _det_exact(minor)
            if not det.is_real() or det.sign_real() < 0:
                return False
    return True


# -- PVMs ------------------------------------------------------------------

WeightedOps = tuple[tuple[FieldElement, Operator], ...]


@dataclass(frozen=True)
class ExactPVM:
    """Each outcome is a weighted sum of structured operators; the empty
    tuple is the zero projection."""

    outcomes: tuple[WeightedOps, ...]

    @property
    def k(self) -> int:
        return len(self.outcomes)


@dataclass
class NumericPVM:
    projections: list[np.ndarray]

    @property
    def k(self) -> int:
        return len(self.projections)

    def max_violation(self) -> float:
        dim = self.projections[0].shape[0]
        worst = float(np.max(np.abs(sum(self.projections) - np.eye(dim))))
        for i, e in enumerate(self.projections):
            worst = max(worst, float(np.max(np.abs(e @ e - e))))
            worst = max(worst, float(np.max(np.abs(e - e.conj().T))))
            for f in self.projections[i + 1:]:
                worst = max(worst, float(np.max(np.abs(e @ f))))
        return worst


def _op_square(op):
    return op.compose(op)


def pvm_from_involution(s, zero_extend: bool = False,
                        tol: float = 1e-10) -> Union[ExactPVM, NumericPVM]:
    """Two-outcome PVM of a self-adjoint unitary: E2 = (I+S)/2 carries the
    +1 eigenspace and E2 - E1 = S; optionally extended by a zero third
    outcome."""
    if isinstance(s, np.ndarray):
        dim = s.shape[0]
        if np.max(np.abs(s @ s - np.eye(dim))) > tol or np.max(np.abs(s - s.conj().T)) > tol:
            raise CorrelationError("operator is not a self-adjoint involution")
        e2 = (np.eye(dim) + s) / 2
        e1 = (np.eye(dim) - s) / 2
        outcomes = [e1, e2] + ([np.zeros_like(s)] if zero_extend else [])
        return NumericPVM(outcomes)
    if not _op_square(s).is_identity() or s.adjoint() != s:
        raise CorrelationError("operator is not a self-adjoint involution")
    e1: WeightedOps = ((HALF, None), (-HALF, s))
    e2: WeightedOps = ((HALF, None), (HALF, s))
    outcomes = (e1, e2) + (((),) if zero_extend else ())
    return ExactPVM(outcomes)


def pvm_from_order3(v, tol: float = 1e-10) -> Union[ExactPVM, NumericPVM]:
    """Three-outcome PVM of an order-3 unitary: E_b = (1/3) sum_t w^{-bt} V^t,
    so that sum_b w^b E_b = V."""
    if isinstance(v, np.ndarray):
        dim = v.shape[0]
        if np.max(np.abs(v @ v @ v - np.eye(dim))) > tol:
            raise CorrelationError("operator does not have order 3")
        if np.max(np.abs(v @ v.conj().T - np.eye(dim))) > tol:
            raise CorrelationError("operator is not unitary")
        powers = [np.eye(dim, dtype=np.complex128), v, v @ v]
        return NumericPVM([
            sum(OMEGA_C ** ((-b * t) % 3) * powers[t] for t in range(3)) / 3
            for b in (1, 2, 3)])
    if not v.compose(v).compose(v).is_identity():
        raise CorrelationError("operator does not have order 3")
    powers: list[Operator] = [None, v, v.compose(v)]
    outcomes = tuple(
        tuple((THIRD * omega_power(-b * t), powers[t]) for t in range(3))
        for b in (1, 2, 3))
    return ExactPVM(outcomes)


# -- models and assembly -----------------------------------------------------


@dataclass
class ExactModel:
    pvms_a: list[ExactPVM]
    pvms_b: list[ExactPVM]
    basis: list[StructuredVector]


@dataclass
class NumericModel:
    pvms_a: list[NumericPVM]
    pvms_b: list[NumericPVM]
    isometry: np.ndarray
    d_a: int
    d_b: int


@dataclass
class CorrelationTable:
    """P(a,b|x,y) for 1 <= a,b <= k and 1 <= x,y <= m."""

    n: int
    m: int
    k: int
    field: str  # "exact" | "complex128"
    entries: dict[tuple[int, int, int, int], object]

    def entry(self, a: int, b: int, x: int, y: int):
        return self.entries[(a, b, x, y)]

    def marginal_a(self, a: int, x: int, y: int = 1):
        total = self.entry(a, 1, x, y)
        for b in range(2, self.k + 1):
            nxt = self.entry(a, b, x, y)
            total = mat_add(total, nxt) if self.field == "exact" else total + nxt
        return total

    def marginal_b(self, b: int, y: int, x: int = 1):
        total = self.entry(1, b, x, y)
        for a in range(2, self.k + 1):
            nxt = self.entry(a, b, x, y)
            total = mat_add(total, nxt) if self.field == "exact" else total + nxt
        return total

    def check_invariants(self, tol: float = 1e-10) -> list[str]:
        """Positivity, completeness and marginal consistency; returns the
        list of violations (empty means the table is well formed)."""
        bad: list[str] = []
        exact = self.field == "exact"
        eye = mat_identity(self.n) if exact else np.eye(self.n)
        for x in range(1, self.m + 1):
            for y in range(1, self.m + 1):
                acc = None
                for a in range(1, self.k + 1):
                    for b in range(1, self.k + 1):
                        p = self.entry(a, b, x, y)
                        if exact:
                            if not exact_psd_check(p):
                                bad.append(f"P({a},{b}|{x},{y}) is not PSD")
                            acc = p if acc is None else mat_add(acc, p)
                        else:
                            if np.max(np.abs(p - p.conj().T)) > tol:
                                bad.append(f"P({a},{b}|{x},{y}) is not Hermitian")
                            elif np.linalg.eigvalsh((p + p.conj().T) / 2).min() < -tol:
                                bad.append(f"P({a},{b}|{x},{y}) is not PSD")
                            acc = p if acc is None else acc + p
                if exact:
                    if acc != eye:
                        bad.append(f"sum over outcomes at inputs ({x},{y}) is not the identity")
                elif np.max(np.abs(acc - eye)) > tol:
                    bad.append(f"sum over outcomes at inputs ({x},{y}) is not the identity")
        for a in range(1, self.k + 1):
            for x in range(1, self.m + 1):
                ref = self.marginal_a(a, x, y=1)
                for y in range(2, self.m + 1):
                    other = self.marginal_a(a, x, y=y)
                    if exact:
                        if ref != other:
                            bad.append(f"marginal P_A({a}|{x}) depends on y={y}")
                    elif np.max(np.abs(ref - other)) > tol:
                        bad.append(f"marginal P_A({a}|{x}) depends on y={y}")
        for b in range(1, self.k + 1):
            for y in range(1, self.m + 1):
                ref = self.marginal_b(b, y, x=1)
                for x in range(2, self.m + 1):
                    other = self.marginal_b(b, y, x=x)
                    if exact:
                        if ref != other:
                            bad.append(f"marginal P_B({b}|{y}) depends on x={x}")
                    elif np.max(np.abs(ref - other)) > tol:
                        bad.append(f"marginal P_B({b}|{y}) depends on x={x}")
        return bad

    def to_complex(self) -> "CorrelationTable":
        if self.field != "exact":
            return self
        return CorrelationTable(self.n, self.m, self.k, "complex128", {
            key: mat_to_complex(val) for key, val in self.entries.items()})

    def to_json(self) -> dict:
        entries = {}
        for (a, b, x, y), mat in self.entries.items():
            if self.field == "exact":
                entries[f"{a},{b},{x},{y}"] = [[z.to_json() for z in row] for row in mat]
            else:
                entries[f"{a},{b},{x},{y}"] = [[[float(z.real), float(z.imag)] for z in row]
                                               for row in np.asarray(mat)]
        return {"n": self.n, "m": self.m, "k": self.k, "field": self.field,
                "entries": entries}

    @staticmethod
    def from_json(obj: dict) -> "CorrelationTable":
        for key in ("n", "m", "k", "field", "entries"):
            if key not in obj:
                raise CertificateError(f"table is missing key {key!r}")
        n, m, k, fieldname = obj["n"], obj["m"], obj["k"], obj["field"]
        if fieldname not in ("exact", "complex128"):
            raise CertificateError(f"field: unknown value {fieldname!r}")
        entries: dict[tuple[int, int, int, int], object] = {}
        for key, rows in obj["entries"].items():
            try:
                a, b, x, y = (int(t) for t in key.split(","))
            except ValueError:
                raise CertificateError(f"entries[{key!r}]: key is not 'a,b,x,y'") from None
            if len(rows) != n or any(len(r) != n for r in rows):
                raise CertificateError(f"entries[{key!r}]: matrix is not {n}x{n}")
            if fieldname == "exact":
                try:
                    entries[(a, b, x, y)] = mat_make(
                        [[FieldElement.from_json(z) for z in row] for row in rows])
                except Exception as exc:
                    raise CertificateError(f"entries[{key!r}]: {exc}") from None
            else:
                try:
                    entries[(a, b, x, y)] = np.array(
                        [[complex(z[0], z[1]) for z in row] for row in rows],
                        dtype=np.complex128)
                except (TypeError, IndexError) as exc:
                    raise CertificateError(f"entries[{key!r}]: {exc}") from None
        expected = {(a, b, x, y) for a in range(1, k + 1) for b in range(1, k + 1)
                    for x in range(1, m + 1) for y in range(1, m + 1)}
        if set(entries) != expected:
            raise CertificateError("entries do not cover exactly the a,b,x,y grid")
        return CorrelationTable(n, m, k, fieldname, entries)


def assemble_correlation(model: Union[ExactModel, NumericModel],
                         tol: float = 1e-10, validate: bool = True) -> CorrelationTable:
    if isinstance(model, ExactModel):
        return _assemble_exact(model)
    return _assemble_numeric(model, tol, validate)


def _assemble_exact(model: ExactModel) -> CorrelationTable:
    basis = model.basis
    n = len(basis)
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            if inner(u, v) != (ONE if i == j else ZERO):
                raise AssemblyError("basis vectors are not orthonormal")
    m = len(model.pvms_a)
    ks = {p.k for p in model.pvms_a + model.pvms_b}
    if len(ks) != 1 or len(model.pvms_b) != m:
        raise AssemblyError("all inputs must share one outcome count")
    k = ks.pop()
    gram_cache: dict[tuple, ExactMatrix] = {}

    def gram(op_a: Operator, op_b: Operator) -> ExactMatrix:
        key = (op_a, op_b)
        if key not in gram_cache:
            images = [apply(op_a, op_b, v) for v in basis]
            gram_cache[key] = mat_make([[inner(images[j], basis[i])
                                         for j in range(n)] for i in range(n)])
        return gram_cache[key]

    entries = {}
    for x in range(1, m + 1):
        for y in range(1, m + 1):
            for a in range(1, k + 1):
                for b in range(1, k + 1):
                    acc = mat_zero(n)
                    for w_a, op_a in model.pvms_a[x - 1].outcomes[a - 1]:
                        for w_b, op_b in model.pvms_b[y - 1].outcomes[b - 1]:
                            acc = mat_add(acc, mat_scale(gram(op_a, op_b), w_a * w_b))
                    entries[(a, b, x, y)] = acc
    return CorrelationTable(n, m, k, "exact", entries)


def _assemble_numeric(model: NumericModel, tol: float,
                      validate: bool = True) -> CorrelationTable:
    w = model.isometry
    n = w.shape[1]
    if validate and np.max(np.abs(w.conj().T @ w - np.eye(n))) > tol:
        raise AssemblyError("columns of the isometry are not orthonormal")
    m = len(model.pvms_a)
    ks = {p.k for p in model.pvms_a + model.pvms_b}
    if len(ks) != 1 or len(model.pvms_b) != m:
        raise AssemblyError("all inputs must share one outcome count")
    k = ks.pop()
    entries = {}
    cols = [w[:, j] for j in range(n)]
    for x in range(1, m + 1):
        for y in range(1, m + 1):
            for a in range(1, k + 1):
                for b in range(1, k + 1):
                    e = model.pvms_a[x - 1].projections[a - 1]
                    f = model.pvms_b[y - 1].projections[b - 1]
                    mat = np.empty((n, n), dtype=np.complex128)
                    for j in range(n):
                        image = tensor_apply(e, f, cols[j])
                        for i in range(n):
                            mat[i, j] = np.vdot(cols[i], image)
                    entries[(a, b, x, y)] = mat
    return CorrelationTable(n, m, k, "complex128", entries)


def marginals(table: CorrelationTable, tol: float = 1e-10):
    """(P_A(a|x), P_B(b|y)) families; y- (resp. x-) independence asserted."""
    violations = [v for v in table.check_invariants(tol) if "marginal" in v]
    if violations:
        raise CorrelationError("; ".join(violations))
    pa = {(a, x): table.marginal_a(a, x) for a in range(1, table.k + 1)
          for x in range(1, table.m + 1)}
    pb = {(b, y): table.marginal_b(b, y) for b in range(1, table.k + 1)
          for y in range(1, table.m + 1)}
    return pa, pb


# -- witness targets ----------------------------------------------------------


def _exact_rows(values) -> ExactMatrix:
    lookup = {0: ZERO, 1: ONE, -1: -ONE, "r": INV_SQRT2}
    return mat_make([[lookup[v] for v in row] for row in values])


@dataclass(frozen=True)
class WitnessW32:
    m2: ExactMatrix
    m3: ExactMatrix
    j: ExactMatrix
    n: int = 3
    m: int = 3
    k: int = 2


@dataclass(frozen=True)
class WitnessW23:
    a_star: ExactMatrix
    b_star: ExactMatrix
    c_mat: ExactMatrix
    d_mat: ExactMatrix
    compression: ExactMatrix
    n: int = 4
    m: int = 2
    k: int = 3


def w32_targets() -> WitnessW32:
    return WitnessW32(
        m2=_exact_rows([[0, 0, "r"], [0, 0, "r"], ["r", "r", 0]]),
        m3=_exact_rows([[0, 0, 1], [0, 1, 0], [1, 0, 0]]),
        j=_exact_rows([[1, 0, 0], [0, -1, 0], [0, 0, -1]]),
    )


def w23_targets() -> WitnessW23:
    return WitnessW23(
        a_star=_exact_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
        b_star=_exact_rows([[0, 0, 0, "r"], [0, 0, 0, "r"], [1, 0, 0, 0], [0, 0, "r", 0]]),
        c_mat=_exact_rows([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]),
        d_mat=_exact_rows([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]),
        compression=_exact_rows([[1, 0], [0, -1]]),
    )


def _gram_matrix(op_a: Operator, op_b: Operator,
                 basis: Sequence[StructuredVector]) -> ExactMatrix:
    images = [apply(op_a, op_b, v) for v in basis]
    return mat_make([[inner(images[j], basis[i]) for j in range(len(basis))]
                     for i in range(len(basis))])


@lru_cache(maxsize=1)
def build_witness_w32() -> tuple[WitnessW32, CorrelationTable]:
    """Exact three-input/two-outcome witness: reflections S1, S2, S3 on both
    sides and the orthonormal weighted diagonal vectors."""
    witness = w32_targets()
    basis = [zeta1(), zeta2(), zeta3()]
    ops = [builtin_operator("S1"), builtin_operator("S2"), builtin_operator("S3")]
    pvms = [pvm_from_involution(s) for s in ops]
    table = _assemble_exact(ExactModel(pvms, pvms, basis))
    if table_combination(table, 2, 2) != witness.m2:
        raise WitnessError("input-2 combination does not match its target")
    if table_combination(table, 3, 3) != witness.m3:
        raise WitnessError("input-3 combination does not match its target")
    marg_a = mat_sub(table.marginal_a(2, 1), table.marginal_a(1, 1))
    marg_b = mat_sub(table.marginal_b(2, 1), table.marginal_b(1, 1))
    if marg_a != witness.j or marg_b != witness.j:
        raise WitnessError("input-1 marginal difference does not match its target")
    return witness, table


@lru_cache(maxsize=1)
def build_witness_w23() -> tuple[WitnessW23, CorrelationTable]:
    """Exact two-input/three-outcome witness via the induced representation;
    the derived dimension is 4 and every defining identity is asserted."""
    witness = w23_targets()
    sigma_g, sigma_h = induced_sigma(G3), induced_sigma(H)
    z1, z2 = zeta1(), zeta2()
    xi3 = apply(sigma_h, sigma_h, z1)
    xi4 = apply(sigma_g, sigma_g, xi3)
    basis, n, coeffs = gram_schmidt([z1, z2, xi3, xi4])
    if n != 4:
        raise WitnessError(f"witness family has rank {n}, expected 4")
    if mat_make(coeffs) != mat_identity(4):
        raise WitnessError("witness family should already be orthonormal")
    a_star = _gram_matrix(sigma_g, sigma_g, basis)
    b_star = _gram_matrix(sigma_h, sigma_h, basis)
    c_mat = _gram_matrix(sigma_g, None, basis)
    d_mat = _gram_matrix(None, sigma_g, basis)
    if a_star != witness.a_star or b_star != witness.b_star:
        raise WitnessError("contraction targets do not match the construction")
    if c_mat != witness.c_mat or d_mat != witness.d_mat:
        raise WitnessError("marginal observables do not match their targets")
    col_b = [b_star[i][0] for i in range(4)]
    if sum((z.abs2() for z in col_b), ZERO) != ONE:
        raise WitnessError("first column of B is not a unit vector")
    ab = mat_mul(a_star, b_star)
    if sum((ab[i][0].abs2() for i in range(4)), ZERO) != ONE:
        raise WitnessError("first column of AB is not a unit vector")
    bab = mat_mul(b_star, ab)
    if bab[0][0] != INV_SQRT2 or bab[1][0] != INV_SQRT2:
        raise WitnessError("(BAB) column-1 entries are not 1/sqrt2")
    for mat in (c_mat, d_mat):
        comp = mat_make([row[:2] for row in mat[:2]])
        if comp != witness.compression:
            raise WitnessError("compressed marginal is not diag(1,-1)")
    pvm1 = pvm_from_involution(sigma_g, zero_extend=True)
    pvm2 = pvm_from_order3(sigma_h)
    table = _assemble_exact(ExactModel([pvm1, pvm2], [pvm1, pvm2], basis))
    return witness, table


# -- residuals ----------------------------------------------------------------


def table_combination(table: CorrelationTable, x: int, y: int):
    """P(2,2|x,y) - P(1,2|x,y) - P(2,1|x,y) + P(1,1|x,y)."""
    if table.field == "exact":
        return mat_add(mat_sub(mat_sub(table.entry(2, 2, x, y), table.entry(1, 2, x, y)),
                               table.entry(2, 1, x, y)), table.entry(1, 1, x, y))
    return (table.entry(2, 2, x, y) - table.entry(1, 2, x, y)
            - table.entry(2, 1, x, y) + table.entry(1, 1, x, y))


def table_omega_sum(table: CorrelationTable, x: int, y: int):
    """sum_{a,b} w^{a+b} P(a,b|x,y) over the three outcomes."""
    if table.field == "exact":
        acc = mat_zero(table.n)
        for a in range(1, 4):
            for b in range(1, 4):
                acc = mat_add(acc, mat_scale(table.entry(a, b, x, y), omega_power(a + b)))
        return acc
    acc = np.zeros((table.n, table.n), dtype=np.complex128)
    for a in range(1, 4):
        for b in range(1, 4):
            acc = acc + OMEGA_C ** ((a + b) % 3) * table.entry(a, b, x, y)
    return acc


def _fro2(mat, exact: bool):
    if exact:
        return frobenius2_exact(mat)
    return float(np.sum(np.abs(mat) ** 2))


def residual_components_w32(table: CorrelationTable) -> dict[str, object]:
    if table.n != 3 or table.m != 3 or table.k != 2:
        raise CorrelationError(
            f"table shape (n={table.n}, m={table.m}, k={table.k}) does not fit witness 32")
    witness = w32_targets()
    exact = table.field == "exact"
    m2 = witness.m2 if exact else mat_to_complex(witness.m2)
    m3 = witness.m3 if exact else mat_to_complex(witness.m3)
    jj = witness.j if exact else mat_to_complex(witness.j)
    sub = mat_sub if exact else (lambda a, b: a - b)
    marg_a = sub(table.marginal_a(2, 1), table.marginal_a(1, 1))
    marg_b = sub(table.marginal_b(2, 1), table.marginal_b(1, 1))
    return {
        "combination_22": _fro2(sub(table_combination(table, 2, 2), m2), exact),
        "combination_33": _fro2(sub(table_combination(table, 3, 3), m3), exact),
        "marginal_a": _fro2(sub(marg_a, jj), exact),
        "marginal_b": _fro2(sub(marg_b, jj), exact),
    }


def residual_components_w23(table: CorrelationTable) -> dict[str, object]:
    if table.n != 4 or table.m != 2 or table.k != 3:
        raise CorrelationError(
            f"table shape (n={table.n}, m={table.m}, k={table.k}) does not fit witness 23")
    witness = w23_targets()
    exact = table.field == "exact"
    a_star = witness.a_star if exact else mat_to_complex(witness.a_star)
    b_star = witness.b_star if exact else mat_to_complex(witness.b_star)
    comp_target = witness.compression if exact else mat_to_complex(witness.compression)
    sub = mat_sub if exact else (lambda a, b: a - b)

    def compress(mat):
        if exact:
            return mat_make([row[:2] for row in mat[:2]])
        return mat[:2, :2]

    marg_a = sub(table.marginal_a(2, 1), table.marginal_a(1, 1))
    marg_b = sub(table.marginal_b(2, 1), table.marginal_b(1, 1))
    third = ZERO if exact else 0.0
    for b in range(1, 4):
        for y in range(1, 3):
            term = _fro2(table.entry(3, b, 1, y), exact)
            third = third + term
    for a in range(1, 4):
        for x in range(1, 3):
            term = _fro2(table.entry(a, 3, x, 1), exact)
            third = third + term
    return {
        "combination_11": _fro2(sub(table_combination(table, 1, 1), a_star), exact),
        "omega_sum_22": _fro2(sub(table_omega_sum(table, 2, 2), b_star), exact),
        "compression_a": _fro2(sub(compress(marg_a), comp_target), exact),
        "compression_b": _fro2(sub(compress(marg_b), comp_target), exact),
        "third_output": third,
    }


def residual_w32(table: CorrelationTable):
    components = residual_components_w32(table)
    total = ZERO if table.field == "exact" else 0.0
    for value in components.values():
        total = total + value
    return total


def residual_w23(table: CorrelationTable):
    components = residual_components_w23(table)
    total = ZERO if table.field == "exact" else 0.0
    for value in components.values():
        total = total + value
    return total


def residual_for(witness: str, table: CorrelationTable):
    if witness == "32":
        return residual_w32(table)
    if witness == "23":
        return residual_w23(table)
    raise CorrelationError(f"unknown witness {witness!r}")


def residual_components_for(witness: str, table: CorrelationTable) -> dict[str, object]:
    if witness == "32":
        return residual_components_w32(table)
    if witness == "23":
        return residual_components_w23(table)
    raise CorrelationError(f"unknown witness {witness!r}")


# -- cyclic models as correlation tables ---------------------------------------


def cyclic_table(model: CyclicModel, tol: float = 1e-10) -> CorrelationTable:
    """Assemble the correlation table of a cyclic truncation model."""
    if model.kind == "plain":
        pvms = [pvm_from_involution(model.ops[name], tol=tol)
                for name in ("S1", "S2", "S3")]
        numeric = NumericModel(pvms, pvms, model.isometry,
                               model.side_dim, model.side_dim)
        return _assemble_numeric(numeric, tol)
    pvm1 = pvm_from_involution(model.ops["g"], zero_extend=True, tol=tol)
    pvm2 = pvm_from_order3(model.ops["h"], tol=tol)
    numeric = NumericModel([pvm1, pvm2], [pvm1, pvm2], model.isometry,
                           model.side_dim, model.side_dim)
    return _assemble_numeric(numeric, tol)
