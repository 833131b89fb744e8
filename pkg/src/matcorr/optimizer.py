"""Deterministic defect minimization over finite-dimensional models.

A model is a set of PVMs on C^{d_A} and C^{d_B} plus an isometry; the
observables are fixed eigenvalue profiles conjugated by unitaries, so every
iterate is exactly PVM-derived.  Descent moves the unitaries through
exponentials of skew-Hermitian steps and re-orthonormalizes the isometry
(gradients come from autodiff of the same retracted step, so the
finite-difference self-check is meaningful).  Sweeps are pure functions of
(witness, dims, restarts, master seed) and run single-threaded.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .correlations import (
    NumericModel,
    NumericPVM,
    assemble_correlation,
    mat_to_complex,
    residual_for,
    w23_targets,
    w32_targets,
)
from .serialize import complex_matrix_from_json, complex_matrix_to_json
from .truncation import truncate_cyclic

OMEGA_C = complex(-0.5, 0.8660254037844386)
SEED_STRIDE = 0x9E3779B97F4A7C15
_U64 = (1 << 64) - 1

# (inputs m, outcomes k, witness matrix size n)
WITNESS_SHAPE = {"32": (3, 2, 3), "23": (2, 3, 4)}


class OptimizerError(ValueError):
    pass


def derive_seed(master_seed: int, index: int) -> int:
    """seed_i = master XOR (i * 0x9E3779B97F4A7C15) mod 2^64."""
    return (master_seed ^ (index * SEED_STRIDE & _U64)) & _U64


def _torch():
    import torch

    torch.set_num_threads(max(1, int(os.environ.get("MATCORR_THREADS", "1"))))
    return torch


def orthonormalize(z: np.ndarray) -> np.ndarray:
    """Map a raw complex matrix to an isometry by QR with the phase of the
    R-diagonal fixed; when rows < columns only the leading square block is
    orthonormalized and the remaining columns are zero (partial isometry)."""
    p, n = z.shape
    cols = min(p, n)
    q, r = np.linalg.qr(z[:, :cols])
    d = np.diagonal(r)
    absd = np.abs(d)
    phases = np.where(absd < 1e-300, 1.0, d / np.where(absd < 1e-300, 1.0, absd))
    q = q * phases.conj()
    if cols == n:
        return q
    out = np.zeros((p, n), dtype=np.complex128)
    out[:, :cols] = q
    return out


@dataclass
class ObservableParams:
    """One measurement: a unitary basis change of a fixed eigenvalue profile.

    kind "sign": eigenvalues +1 (rank many) then -1; outcome 2 is the +1
    eigenspace.  kind "omega": eigenvalues w, w^2, 1 with the given
    multiplicity profile; outcome b is the w^b eigenspace."""

    kind: str
    unitary: np.ndarray
    rank: int | None = None
    profile: tuple[int, int, int] | None = None

    def blocks(self) -> list[tuple[int, int]]:
        d = self.unitary.shape[0]
        if self.kind == "sign":
            return [(self.rank, d), (0, self.rank)]  # outcomes 1, 2
        out = []
        start = 0
        for m in self.profile:
            out.append((start, start + m))
            start += m
        return out

    def projections(self) -> list[np.ndarray]:
        q = self.unitary
        out = []
        for lo, hi in self.blocks():
            qb = q[:, lo:hi]
            out.append(qb @ qb.conj().T)
        return out

    def to_json(self) -> dict:
        return {"kind": self.kind, "unitary": complex_matrix_to_json(self.unitary),
                "rank": self.rank,
                "profile": list(self.profile) if self.profile else None}

    @staticmethod
    def from_json(obj: dict) -> "ObservableParams":
        profile = obj.get("profile")
        return ObservableParams(obj["kind"], complex_matrix_from_json(obj["unitary"]),
                                obj.get("rank"),
                                tuple(profile) if profile else None)


@dataclass
class ModelParams:
    witness: str
    d_a: int
    d_b: int
    side_a: list[ObservableParams]
    side_b: list[ObservableParams]
    isometry_raw: np.ndarray

    @property
    def n(self) -> int:
        return WITNESS_SHAPE[self.witness][2]

    def isometry(self) -> np.ndarray:
        return orthonormalize(self.isometry_raw)

    def pvms(self, side: str) -> list[NumericPVM]:
        obs = self.side_a if side == "a" else self.side_b
        dim = self.d_a if side == "a" else self.d_b
        out = []
        for ob in obs:
            projections = ob.projections()
            if self.witness == "23" and ob.kind == "sign":
                projections.append(np.zeros((dim, dim), dtype=np.complex128))
            out.append(NumericPVM(projections))
        return out

    def to_numeric_model(self) -> NumericModel:
        return NumericModel(self.pvms("a"), self.pvms("b"), self.isometry(),
                            self.d_a, self.d_b)

    def max_pvm_violation(self) -> float:
        return max(p.max_violation() for p in self.pvms("a") + self.pvms("b"))

    def to_json(self) -> dict:
        return {"witness": self.witness, "d_a": self.d_a, "d_b": self.d_b,
                "side_a": [o.to_json() for o in self.side_a],
                "side_b": [o.to_json() for o in self.side_b],
                "isometry_raw": complex_matrix_to_json(self.isometry_raw)}

    @staticmethod
    def from_json(obj: dict) -> "ModelParams":
        return ModelParams(
            obj["witness"], obj["d_a"], obj["d_b"],
            [ObservableParams.from_json(o) for o in obj["side_a"]],
            [ObservableParams.from_json(o) for o in obj["side_b"]],
            complex_matrix_from_json(obj["isometry_raw"]))


def defect(params: ModelParams, witness: str | None = None) -> float:
    """Residual of the assembled table: the optimizer's objective equals the
    table-level residual functional by construction."""
    if witness is not None and witness != params.witness:
        raise OptimizerError(
            f"params carry witness {params.witness!r}, not {witness!r}")
    table = assemble_correlation(params.to_numeric_model(), validate=False)
    return float(residual_for(params.witness, table))


# -- random and compiled starting points -------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def _random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return orthonormalize(_ginibre(rng, d, d))


def random_params(witness: str, d_a: int, d_b: int, seed: int) -> ModelParams:
    """Deterministic random model: ranks/profiles and unitaries drawn from a
    PCG64 stream seeded with `seed`."""
    if witness not in WITNESS_SHAPE:
        raise OptimizerError(f"unknown witness {witness!r}")
    m, k, n = WITNESS_SHAPE[witness]
    rng = np.random.default_rng(seed)

    def observables(dim: int) -> list[ObservableParams]:
        out = []
        if witness == "32":
            for _ in range(3):
                rank = int(rng.integers(0, dim + 1)) if dim == 1 else int(rng.integers(1, dim))
                out.append(ObservableParams("sign", _random_unitary(rng, dim), rank=rank))
        else:
            rank = int(rng.integers(0, dim + 1)) if dim == 1 else int(rng.integers(1, dim))
            out.append(ObservableParams("sign", _random_unitary(rng, dim), rank=rank))
            profile = tuple(int(v) for v in rng.multinomial(dim, [1 / 3] * 3))
            out.append(ObservableParams("omega", _random_unitary(rng, dim), profile=profile))
        return out

    side_a = observables(d_a)
    side_b = observables(d_b)
    raw = _ginibre(rng, d_a * d_b, n)
    return ModelParams(witness, d_a, d_b, side_a, side_b, raw)


def _sign_observable_from_matrix(s: np.ndarray) -> ObservableParams:
    eigvals, eigvecs = np.linalg.eigh((s + s.conj().T) / 2)
    plus = eigvecs[:, eigvals > 0]
    minus = eigvecs[:, eigvals <= 0]
    q = np.column_stack([plus, minus])
    return ObservableParams("sign", q, rank=plus.shape[1])


def _omega_observable_from_matrix(v: np.ndarray) -> ObservableParams:
    dim = v.shape[0]
    powers = [np.eye(dim, dtype=np.complex128), v, v @ v]
    columns, profile = [], []
    for b in (1, 2, 3):
        proj = sum(OMEGA_C ** ((-b * t) % 3) * powers[t] for t in range(3)) / 3
        eigvals, eigvecs = np.linalg.eigh((proj + proj.conj().T) / 2)
        block = eigvecs[:, eigvals > 0.5]
        columns.append(block)
        profile.append(block.shape[1])
    return ObservableParams("omega", np.column_stack(columns), profile=tuple(profile))


def pad_params(params: ModelParams) -> ModelParams:
    """Embed the model in one dimension more per side: new basis vectors are
    fixed points of every observable and the isometry gains zero rows, so the
    table (and hence the defect) is preserved exactly."""

    def pad_observable(ob: ObservableParams) -> ObservableParams:
        d = ob.unitary.shape[0]
        q = np.zeros((d + 1, d + 1), dtype=np.complex128)
        if ob.kind == "sign":
            r = ob.rank
            q[:d, :r] = ob.unitary[:, :r]
            q[d, r] = 1.0
            q[:d, r + 1:] = ob.unitary[:, r:]
            return ObservableParams("sign", q, rank=r + 1)
        q[:d, :d] = ob.unitary
        q[d, d] = 1.0
        m1, m2, m3 = ob.profile
        return ObservableParams("omega", q, profile=(m1, m2, m3 + 1))

    d_a, d_b, n = params.d_a, params.d_b, params.n
    w = params.isometry()
    raw = np.zeros(((d_a + 1) * (d_b + 1), n), dtype=np.complex128)
    for i in range(d_a):
        raw[i * (d_b + 1):i * (d_b + 1) + d_b, :] = w[i * d_b:(i + 1) * d_b, :]
    return ModelParams(params.witness, d_a + 1, d_b + 1,
                       [pad_observable(o) for o in params.side_a],
                       [pad_observable(o) for o in params.side_b], raw)


def params_from_truncation(witness: str, d: int) -> ModelParams | None:
    """Compile the largest cyclic truncation fitting per-side dimension d
    into model parameters, zero-padding up to d; None when no window fits."""
    if witness == "32":
        window = d // 2
        if window < 2:
            return None
        model = truncate_cyclic(window, "plain")
        obs = [_sign_observable_from_matrix(model.ops[name])
               for name in ("S1", "S2", "S3")]
        params = ModelParams(witness, model.side_dim, model.side_dim,
                             obs, [ObservableParams(o.kind, o.unitary.copy(), o.rank, o.profile)
                                   for o in obs],
                             model.isometry)
    elif witness == "23":
        window = d // 6
        if window < 2:
            return None
        model = truncate_cyclic(window, "induced")
        obs = [_sign_observable_from_matrix(model.ops["g"]),
               _omega_observable_from_matrix(model.ops["h"])]
        params = ModelParams(witness, model.side_dim, model.side_dim,
                             obs, [ObservableParams(o.kind, o.unitary.copy(), o.rank, o.profile)
                                   for o in obs],
                             model.isometry)
    else:
        raise OptimizerError(f"unknown witness {witness!r}")
    while params.d_a < d:
        params = pad_params(params)
    return params


# -- torch objective -----------------------------------------------------------


def _torch_targets(witness: str, torch):
    if witness == "32":
        w = w32_targets()
        mats = {"m2": w.m2, "m3": w.m3, "j": w.j}
    else:
        w = w23_targets()
        mats = {"a": w.a_star, "b": w.b_star, "comp": w.compression}
    return {k: torch.tensor(mat_to_complex(v)) for k, v in mats.items()}


def _sandwich(torch, w, x, y):
    return w.conj().T @ torch.kron(x, y) @ w


def _fro2_t(torch, mat):
    return torch.sum(torch.real(mat * mat.conj()))


def _torch_objective(torch, witness, obs_a, obs_b, eye_a, eye_b, w, targets):
    """Residual in observable form.  The two-outcome combination equals
    W*(S (x) S)W, the omega-weighted sum equals W*(V_A (x) V_B)W, the
    marginal differences are W*(S (x) I)W / W*(I (x) S)W, and the
    zero-extended third outcome vanishes identically, so this matches the
    table-level residual up to roundoff."""
    if witness == "32":
        total = _fro2_t(torch, _sandwich(torch, w, obs_a[1], obs_b[1]) - targets["m2"])
        total = total + _fro2_t(torch, _sandwich(torch, w, obs_a[2], obs_b[2]) - targets["m3"])
        total = total + _fro2_t(torch, _sandwich(torch, w, obs_a[0], eye_b) - targets["j"])
        total = total + _fro2_t(torch, _sandwich(torch, w, eye_a, obs_b[0]) - targets["j"])
        return total
    total = _fro2_t(torch, _sandwich(torch, w, obs_a[0], obs_b[0]) - targets["a"])
    total = total + _fro2_t(torch, _sandwich(torch, w, obs_a[1], obs_b[1]) - targets["b"])
    comp_a = _sandwich(torch, w, obs_a[0], eye_b)[:2, :2]
    comp_b = _sandwich(torch, w, eye_a, obs_b[0])[:2, :2]
    total = total + _fro2_t(torch, comp_a - targets["comp"])
    total = total + _fro2_t(torch, comp_b - targets["comp"])
    return total


def _torch_orth(torch, z):
    p, n = z.shape
    cols = min(p, n)
    q, r = torch.linalg.qr(z[:, :cols])
    d = torch.diagonal(r)
    phases = d / torch.clamp(d.abs(), min=1e-300)
    q = q * phases.conj().unsqueeze(0)
    if cols == n:
        return q
    pad = torch.zeros((p, n - cols), dtype=z.dtype)
    return torch.cat([q, pad], dim=1)


def _eigenvalue_diag(ob: ObservableParams) -> np.ndarray:
    d = ob.unitary.shape[0]
    if ob.kind == "sign":
        out = np.full(d, -1.0 + 0j)
        out[:ob.rank] = 1.0
        return out
    m1, m2, m3 = ob.profile
    return np.concatenate([np.full(m1, OMEGA_C), np.full(m2, OMEGA_C ** 2),
                           np.full(m3, 1.0 + 0j)])


class _TorchStep:
    """f(steps, y) = defect after moving every unitary by expm(skew step) and
    the isometry by re-orthonormalizing w + y; built once per iterate.
    Per-side unitaries are stacked so the exponentials run batched."""

    def __init__(self, params: ModelParams):
        torch = _torch()
        self.torch = torch
        self.params = params
        self.witness = params.witness
        self.targets = _torch_targets(params.witness, torch)
        self.units_a = torch.tensor(np.stack([ob.unitary for ob in params.side_a]))
        self.units_b = torch.tensor(np.stack([ob.unitary for ob in params.side_b]))
        self.diag_a = torch.tensor(np.stack([_eigenvalue_diag(ob) for ob in params.side_a]))
        self.diag_b = torch.tensor(np.stack([_eigenvalue_diag(ob) for ob in params.side_b]))
        self.w0 = torch.tensor(params.isometry())
        self.eye_a = torch.eye(params.d_a, dtype=torch.complex128)
        self.eye_b = torch.eye(params.d_b, dtype=torch.complex128)

    def _value(self, ua, ub, w):
        obs_a = (ua * self.diag_a.unsqueeze(1)) @ ua.conj().transpose(-1, -2)
        obs_b = (ub * self.diag_b.unsqueeze(1)) @ ub.conj().transpose(-1, -2)
        return _torch_objective(self.torch, self.witness, obs_a, obs_b,
                                self.eye_a, self.eye_b, w, self.targets)

    @staticmethod
    def _moved(torch, units, re, im):
        k = torch.complex(re, im)
        return torch.linalg.matrix_exp(k - k.conj().transpose(-1, -2)) @ units

    def value_and_grad(self):
        torch = self.torch
        a_re = torch.zeros(self.units_a.shape, dtype=torch.float64, requires_grad=True)
        a_im = torch.zeros(self.units_a.shape, dtype=torch.float64, requires_grad=True)
        b_re = torch.zeros(self.units_b.shape, dtype=torch.float64, requires_grad=True)
        b_im = torch.zeros(self.units_b.shape, dtype=torch.float64, requires_grad=True)
        y_re = torch.zeros(self.w0.shape, dtype=torch.float64, requires_grad=True)
        y_im = torch.zeros(self.w0.shape, dtype=torch.float64, requires_grad=True)
        ua = self._moved(torch, self.units_a, a_re, a_im)
        ub = self._moved(torch, self.units_b, b_re, b_im)
        w = _torch_orth(torch, self.w0 + torch.complex(y_re, y_im))
        f = self._value(ua, ub, w)
        f.backward()
        grad_a = a_re.grad.numpy() + 1j * a_im.grad.numpy()
        grad_b = b_re.grad.numpy() + 1j * b_im.grad.numpy()
        y_grad = y_re.grad.numpy() + 1j * y_im.grad.numpy()
        return float(f.detach()), Direction(list(grad_a), list(grad_b), y_grad)

    def value_at(self, direction: "Direction", step: float) -> float:
        torch = self.torch
        with torch.no_grad():
            ka = torch.tensor(step * np.stack(direction.obs_a))
            kb = torch.tensor(step * np.stack(direction.obs_b))
            ua = torch.linalg.matrix_exp(ka - ka.conj().transpose(-1, -2)) @ self.units_a
            ub = torch.linalg.matrix_exp(kb - kb.conj().transpose(-1, -2)) @ self.units_b
            w = _torch_orth(torch, self.w0 + torch.tensor(step * direction.isometry))
            return float(self._value(ua, ub, w))


@dataclass
class Direction:
    """A tangent direction: one free complex matrix per observable (mapped to
    a skew-Hermitian step) plus a Euclidean move of the isometry."""

    obs_a: list[np.ndarray]
    obs_b: list[np.ndarray]
    isometry: np.ndarray

    def scaled(self, t: float) -> "Direction":
        return Direction([t * g for g in self.obs_a], [t * g for g in self.obs_b],
                         t * self.isometry)

    def norm2(self) -> float:
        total = float(np.sum(np.abs(self.isometry) ** 2))
        for g in self.obs_a + self.obs_b:
            total += float(np.sum(np.abs(g) ** 2))
        return total

    def dot(self, other: "Direction") -> float:
        total = float(np.sum(self.isometry.conj() * other.isometry).real)
        for g, h in zip(self.obs_a + self.obs_b, other.obs_a + other.obs_b):
            total += float(np.sum(g.conj() * h).real)
        return total

    def negated(self) -> "Direction":
        return self.scaled(-1.0)


def gradient(params: ModelParams, witness: str | None = None) -> Direction:
    """Gradient of the defect with respect to the local step coordinates
    (free complex matrices for the unitaries, Euclidean for the isometry)."""
    if witness is not None and witness != params.witness:
        raise OptimizerError("witness mismatch")
    step = _TorchStep(params)
    _, grad = step.value_and_grad()
    return grad


def retract(params: ModelParams, direction: Direction, t: float) -> ModelParams:
    """Move along the direction: unitaries through exponentials of the
    skew-Hermitian parts, isometry through re-orthonormalization; every
    unitary is re-orthonormalized after the move."""
    torch = _torch()

    def move(observables, gradients):
        k = torch.tensor(t * np.stack(gradients))
        units = torch.tensor(np.stack([ob.unitary for ob in observables]))
        moved = (torch.linalg.matrix_exp(k - k.conj().transpose(-1, -2)) @ units).numpy()
        return [ObservableParams(ob.kind, orthonormalize(q), ob.rank, ob.profile)
                for ob, q in zip(observables, moved)]

    w = orthonormalize(params.isometry() + t * direction.isometry)
    return ModelParams(params.witness, params.d_a, params.d_b,
                       move(params.side_a, direction.obs_a),
                       move(params.side_b, direction.obs_b), w)


@dataclass
class Schedule:
    max_iters: int = 150
    grad_tol: float = 1e-7
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 40
    init_step: float = 1.0


@dataclass
class Trace:
    defects: list[float]
    grad_norms: list[float]
    iterations: int
    stop_reason: str
    max_pvm_violation: float


def minimize(params: ModelParams, schedule: Schedule | None = None
             ) -> tuple[ModelParams, Trace]:
    """Backtracking gradient descent with retraction; the defect trace is
    monotone nonincreasing and every accepted iterate is PVM-derived."""
    schedule = schedule or Schedule()
    current = params
    step_ctx = _TorchStep(current)
    f_current, grad = step_ctx.value_and_grad()
    defects = [f_current]
    grad_norms: list[float] = []
    violation = current.max_pvm_violation()
    reason = "iteration_cap"
    iters = 0
    eta_start = schedule.init_step
    for _ in range(schedule.max_iters):
        gnorm2 = grad.norm2()
        grad_norms.append(gnorm2 ** 0.5)
        if gnorm2 ** 0.5 < schedule.grad_tol:
            reason = "gradient_tolerance"
            break
        direction = grad.negated()
        eta = eta_start
        accepted = False
        for _ in range(schedule.max_backtracks):
            trial = step_ctx.value_at(direction, eta)
            if np.isfinite(trial) and trial <= f_current - schedule.armijo * eta * gnorm2:
                accepted = True
                break
            eta *= schedule.shrink
        if not accepted:
            reason = "line_search_exhausted"
            break
        current = retract(current, direction, eta)
        iters += 1
        violation = max(violation, current.max_pvm_violation())
        defects.append(trial)
        eta_start = min(schedule.init_step, eta / schedule.shrink)
        step_ctx = _TorchStep(current)
        f_current, grad = step_ctx.value_and_grad()
    return current, Trace(defects, grad_norms, iters, reason, violation)


# -- sweeps ---------------------------------------------------------------------


@dataclass
class RestartResult:
    index: int
    seed: int
    kind: str  # "random" | "cyclic-warm" | "chain-warm"
    iterations: int
    defect: float


@dataclass
class DefectReport:
    witness: str
    d_a: int
    d_b: int
    restarts: int
    master_seed: int
    results: list[RestartResult]
    best_defect: float
    best_index: int
    wall_time_s: float
    best_params: ModelParams | None = dataclass_field(default=None, repr=False)
    checkpoint: str | None = None

    def to_json(self) -> dict:
        return {
            "witness": self.witness, "dA": self.d_a, "dB": self.d_b,
            "restarts": self.restarts, "master_seed": self.master_seed,
            "results": [{"restart": r.index, "seed": r.seed, "kind": r.kind,
                         "iterations": r.iterations, "defect": r.defect}
                        for r in self.results],
            "best_defect": self.best_defect, "best_index": self.best_index,
            "wall_time_s": self.wall_time_s, "checkpoint": self.checkpoint,
        }


CSV_HEADER = "witness,dA,dB,restart,seed,iterations,defect"


def sweep(witness: str, dims: list[tuple[int, int]], restarts: int,
          master_seed: int, schedule: Schedule | None = None,
          include_warm: bool = True) -> tuple[list[DefectReport], str]:
    """Multi-start sweep; deterministic fold ordered by restart index with
    defect ties broken by the lower index.  Adds one restart warm-started
    from the largest fitting cyclic truncation and, when the dims chain,
    one from the previous dimension's padded best model."""
    if witness not in WITNESS_SHAPE:
        raise OptimizerError(f"unknown witness {witness!r}")
    schedule = schedule or Schedule()
    reports: list[DefectReport] = []
    lines = [CSV_HEADER]
    best_by_dims: dict[tuple[int, int], ModelParams] = {}
    for d_a, d_b in dims:
        t0 = time.perf_counter()
        runs: list[tuple[RestartResult, ModelParams]] = []
        for i in range(restarts):
            seed_i = derive_seed(master_seed, i)
            start = random_params(witness, d_a, d_b, seed_i)
            final, trace = minimize(start, schedule)
            runs.append((RestartResult(i, seed_i, "random", trace.iterations,
                                       defect(final)), final))
        extra = restarts
        if include_warm and d_a == d_b:
            warm = params_from_truncation(witness, d_a)
            if warm is not None:
                final, trace = minimize(warm, schedule)
                runs.append((RestartResult(extra, 0, "cyclic-warm",
                                           trace.iterations, defect(final)), final))
                extra += 1
        chain_key = (d_a - 1, d_b - 1)
        if include_warm and chain_key in best_by_dims:
            chained = pad_params(best_by_dims[chain_key])
            final, trace = minimize(chained, schedule)
            runs.append((RestartResult(extra, 0, "chain-warm",
                                       trace.iterations, defect(final)), final))
            extra += 1
        best_idx = min(range(len(runs)), key=lambda i: (runs[i][0].defect, i))
        best_result, best_params = runs[best_idx]
        best_by_dims[(d_a, d_b)] = best_params
        report = DefectReport(
            witness, d_a, d_b, len(runs), master_seed,
            [r for r, _ in runs], best_result.defect, best_result.index,
            time.perf_counter() - t0, best_params=best_params)
        reports.append(report)
        for r, _ in runs:
            lines.append(f"{witness},{d_a},{d_b},{r.index},{r.seed},"
                         f"{r.iterations},{r.defect!r}")
    return reports, "\n".join(lines) + "\n"


# -- gradient self-check -----------------------------------------------------


def gradient_check(witness: str, d: int, n_points: int, seed: int,
                   step: float = 1e-5) -> float:
    """Max relative error between the autodiff directional derivative and a
    central finite difference of the (numpy) defect along random retraction
    curves; the two sides are independent code paths."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_points):
        params = random_params(witness, d, d, derive_seed(seed, i))
        grad = gradient(params)
        direction = Direction(
            [_ginibre(rng, d, d) for _ in params.side_a],
            [_ginibre(rng, d, d) for _ in params.side_b],
            _ginibre(rng, d * d, params.n))
        analytic = grad.dot(direction)
        f_plus = defect(retract(params, direction, step))
        f_minus = defect(retract(params, direction, -step))
        fd = (f_plus - f_minus) / (2 * step)
        rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-6)
        worst = max(worst, rel)
    return worst
