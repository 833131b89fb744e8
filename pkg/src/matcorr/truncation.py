"""Cyclic finite-dimensional truncations of the exact constructions.

The line Z is replaced by Z_{2M} on the residue window -M..M-1 with
wraparound index maps, which keeps every operator exactly unitary at
finite size: the truncated models are genuine finite-dimensional
correlation models, not merely approximate operators.  Vectors are
truncated to in-window support and renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import (
    BlockOp,
    PrimitiveOp,
    StructuredVector,
    apply,
    builtin_operator,
    induced_sigma,
    zeta1,
    zeta2,
    zeta3,
)
from .words import G3, H


class TruncationError(ValueError):
    pass


def _wrap(j: int, window: int) -> int:
    return (j + window) % (2 * window) - window


def primitive_to_matrix(op: PrimitiveOp, window: int) -> np.ndarray:
    """Dense 2M x 2M matrix of the operator with its index map taken mod 2M;
    phases are evaluated at the window representative of each residue."""
    dim = 2 * window
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for r in range(-window, window):
        phase, target = op.apply_to_basis(r)
        mat[_wrap(target, window) + window, r + window] = phase.to_complex()
    return mat


def block_to_matrix(op: BlockOp, window: int) -> np.ndarray:
    """Dense 6M x 6M matrix on C3 (x) C^{2M}; index (coset c, residue r)
    maps to (c-1)*2M + r + M."""
    dim = 2 * window
    mat = np.zeros((3 * dim, 3 * dim), dtype=np.complex128)
    for c in range(3):
        target_c = op.perm[c] - 1
        block = primitive_to_matrix(op.ops[c], window)
        mat[target_c * dim:(target_c + 1) * dim, c * dim:(c + 1) * dim] = block
    return mat


def _string_window_range(aff, window, count):
    """Parameter range [lo, hi] (inclusive) where aff(t) stays in the window."""
    if aff.eps == 1:
        lo, hi = -window - aff.off, window - 1 - aff.off
    else:
        lo, hi = aff.off - window + 1, aff.off + window
    lo = max(lo, 0)
    if count is not None:
        hi = min(hi, count - 1)
    return lo, hi


def vector_to_dense(v: StructuredVector, window: int, induced: bool) -> np.ndarray:
    """Unnormalized dense tensor-space vector keeping in-window support only."""
    dim = 2 * window
    side = 3 * dim if induced else dim
    out = np.zeros(side * side, dtype=np.complex128)
    for s in v.strings:
        if not induced and (s.coset_l != 1 or s.coset_r != 1):
            raise TruncationError("plain truncation expects coset-(1,1) vectors")
        lo_l, hi_l = _string_window_range(s.aff_l, window, s.count)
        lo_r, hi_r = _string_window_range(s.aff_r, window, s.count)
        lo, hi = max(lo_l, lo_r), min(hi_l, hi_r)
        ratio = s.ratio.to_complex()
        coeff = s.coeff.to_complex() * ratio ** lo if hi >= lo else 0.0
        for t in range(lo, hi + 1):
            il = s.aff_l(t) + window
            ir = s.aff_r(t) + window
            if induced:
                il += (s.coset_l - 1) * dim
                ir += (s.coset_r - 1) * dim
            out[il * side + ir] += coeff
            coeff *= ratio
    return out


def tensor_apply(a: np.ndarray, b: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """(a (x) b) vec without forming the Kronecker product."""
    da, db = a.shape[0], b.shape[0]
    return (a @ vec.reshape(da, db) @ b.T).reshape(-1)


@dataclass
class CyclicModel:
    """Dense numeric model at window M; per-side dimension 2M (plain) or
    6M (induced)."""

    kind: str
    window: int
    side_dim: int
    ops: dict[str, np.ndarray]
    vectors: list[np.ndarray] = field(default_factory=list)
    raw_norm2: list[float] = field(default_factory=list)

    @property
    def isometry(self) -> np.ndarray:
        return np.column_stack(self.vectors)


def truncate_cyclic(window: int, model: str) -> CyclicModel:
    """Build the dense cyclic model: `plain` carries T, U, S1..S3 and the
    three weighted diagonal vectors; `induced` carries the block operators
    of g and h and the four-vector witness family."""
    if window < 2:
        raise TruncationError("window must be at least 2")
    if model == "plain":
        ops = {name: primitive_to_matrix(builtin_operator(name), window)
               for name in ("T", "U", "S1", "S2", "S3")}
        out = CyclicModel("plain", window, 2 * window, ops)
        for v in (zeta1(), zeta2(), zeta3()):
            dense = vector_to_dense(v, window, induced=False)
            raw = float(np.vdot(dense, dense).real)
            out.vectors.append(dense / np.sqrt(raw))
            out.raw_norm2.append(raw)
        return out
    if model == "induced":
        sigma_g = block_to_matrix(induced_sigma(G3), window)
        sigma_h = block_to_matrix(induced_sigma(H), window)
        out = CyclicModel("induced", window, 6 * window,
                          {"g": sigma_g, "h": sigma_h})
        for v in (zeta1(), zeta2()):
            dense = vector_to_dense(v, window, induced=True)
            raw = float(np.vdot(dense, dense).real)
            out.vectors.append(dense / np.sqrt(raw))
            out.raw_norm2.append(raw)
        xi3 = tensor_apply(sigma_h, sigma_h, out.vectors[0])
        xi4 = tensor_apply(sigma_g, sigma_g, xi3)
        out.vectors.extend([xi3, xi4])
        out.raw_norm2.extend([1.0, 1.0])
        return out
    raise TruncationError(f"unknown truncation model {model!r}")
