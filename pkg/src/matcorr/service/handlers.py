"""Service-layer operations; the FastAPI app and the CLI both call these."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import CONVENTIONS, __version__
from ..correlations import (
    CertificateError,
    CorrelationError,
    CorrelationTable,
    build_witness_w23,
    build_witness_w32,
    cyclic_table,
    frobenius2_exact,
    mat_mul,
    mat_sub,
    mat_to_complex,
    residual_components_for,
    residual_w23,
    residual_w32,
    table_combination,
)
from ..engine import (
    Affine,
    GeometricString,
    StructuredVector,
    apply,
    builtin_operator,
    induced_sigma,
    inner,
    norm2,
    zeta1,
    zeta2,
)
from ..field import INV_SQRT2, ONE, ZERO as ZERO_FE, FieldElement
from ..optimizer import Schedule, sweep
from ..serialize import save_json
from ..truncation import tensor_apply, truncate_cyclic
from ..words import G3, H, HGH, ResourceLimitError, ping_pong_injectivity_check
from .schemas import (
    CertificateCheckRequest,
    CertificateCheckResponse,
    CheckResult,
    DimReport,
    EmbedCheckRequest,
    EmbedCheckResponse,
    MatrixRender,
    MetaResponse,
    OptimizeRequest,
    OptimizeResponse,
    RestartRow,
    VerifyRequest,
    VerifyResponse,
    WitnessResponse,
)


class ServiceFailure(Exception):
    """Invalid input to a service operation (maps to HTTP 400 / exit 2)."""


class ResourceFailure(Exception):
    """Operation hit a resource cap (maps to HTTP 400 / exit 1)."""


def _render_matrix(mat) -> MatrixRender:
    dense = mat_to_complex(mat)
    return MatrixRender(
        symbolic=[[str(z) for z in row] for row in mat],
        decimal=[[[float(v.real), float(v.imag)] for v in row] for row in dense],
        exact=[[z.to_json() for z in row] for row in mat],
    )


def _exact_check(name: str, value: FieldElement, target: FieldElement) -> CheckResult:
    diff = value - target
    return CheckResult(name=name, residual=abs(diff.to_complex()),
                       exact_zero=diff.is_zero(), passed=diff.is_zero())


def _envelope_check(name: str, residual: float, envelope: float,
                    detail: str | None = None) -> CheckResult:
    return CheckResult(name=name, residual=float(residual),
                       passed=bool(residual <= envelope), detail=detail)


def _spanning_family() -> list[StructuredVector]:
    out = []
    for cl in (1, 2, 3):
        for cr in (1, 2, 3):
            for j in (-2, 0, 3):
                out.append(StructuredVector((GeometricString.make(
                    cl, cr, Affine(1, j), Affine(1, -j), 1, ONE, ONE),)))
    out.append(zeta1())
    return out


def _operator_identity_residual(op) -> FieldElement:
    """Sum over a spanning family of ||op v - v||^2, exactly."""
    total = None
    for v in _spanning_family():
        term = norm2(apply(op, None, v) - v)
        total = term if total is None else total + term
    return total


def _exact_scalar_checks(pairs) -> list[CheckResult]:
    return [_exact_check(name, value, target) for name, value, target in pairs]


def _dense_inner(vec_a, vec_b) -> complex:
    return complex(np.vdot(vec_b, vec_a))


def _verify_prop15_exact() -> list[CheckResult]:
    t, u = builtin_operator("T"), builtin_operator("U")
    z1, z2 = zeta1(), zeta2()
    shifted = apply(u, u, z1)
    return _exact_scalar_checks([
        ("<(UxU)z1, z1> = 1/sqrt2", inner(shifted, z1), INV_SQRT2),
        ("<(UxU)z1, z2> = 1/sqrt2", inner(shifted, z2), INV_SQRT2),
        ("<(TxI)z1, z1> = 1", inner(apply(t, None, z1), z1), ONE),
        ("<(IxT)z1, z1> = 1", inner(apply(None, t, z1), z1), ONE),
        ("<(TxI)z2, z2> = -1", inner(apply(t, None, z2), z2), -ONE),
        ("<(IxT)z2, z2> = -1", inner(apply(None, t, z2), z2), -ONE),
    ])


def _verify_prop15_cyclic(window: int, envelope: float) -> list[CheckResult]:
    model = truncate_cyclic(window, "plain")
    t, u = model.ops["T"], model.ops["U"]
    z1, z2 = model.vectors[0], model.vectors[1]
    eye = np.eye(model.side_dim)
    shifted = tensor_apply(u, u, z1)
    targets = [
        ("<(UxU)z1, z1> = 1/sqrt2", _dense_inner(shifted, z1), 2 ** -0.5),
        ("<(UxU)z1, z2> = 1/sqrt2", _dense_inner(shifted, z2), 2 ** -0.5),
        ("<(TxI)z1, z1> = 1", _dense_inner(tensor_apply(t, eye, z1), z1), 1.0),
        ("<(IxT)z1, z1> = 1", _dense_inner(tensor_apply(eye, t, z1), z1), 1.0),
        ("<(TxI)z2, z2> = -1", _dense_inner(tensor_apply(t, eye, z2), z2), -1.0),
        ("<(IxT)z2, z2> = -1", _dense_inner(tensor_apply(eye, t, z2), z2), -1.0),
    ]
    return [_envelope_check(name, abs(value - target), envelope)
            for name, value, target in targets]


def _verify_lemma32_exact() -> list[CheckResult]:
    sg, sh, shgh = induced_sigma(G3), induced_sigma(H), induced_sigma(HGH)
    z1, z2 = zeta1(), zeta2()
    moved = apply(shgh, shgh, z1)
    checks = _exact_scalar_checks([
        ("<(s(hgh)xs(hgh))z1, z1> = 1/sqrt2", inner(moved, z1), INV_SQRT2),
        ("<(s(hgh)xs(hgh))z1, z2> = 1/sqrt2", inner(moved, z2), INV_SQRT2),
        ("<(s(g)xI)z1, z1> = 1", inner(apply(sg, None, z1), z1), ONE),
        ("<(Ixs(g))z1, z1> = 1", inner(apply(None, sg, z1), z1), ONE),
        ("<(s(g)xI)z2, z2> = -1", inner(apply(sg, None, z2), z2), -ONE),
        ("<(Ixs(g))z2, z2> = -1", inner(apply(None, sg, z2), z2), -ONE),
    ])
    for name, op in (("s(g)^2 = identity", sg.compose(sg)),
                     ("s(h)^3 = identity", sh.compose(sh).compose(sh))):
        structural = op.is_identity()
        residual = _operator_identity_residual(op)
        checks.append(CheckResult(
            name=name, residual=abs(residual.to_complex()),
            exact_zero=structural and residual.is_zero(),
            passed=structural and residual.is_zero(),
            detail="operator identity on a spanning family"))
    return checks


def _verify_lemma32_cyclic(window: int, envelope: float) -> list[CheckResult]:
    model = truncate_cyclic(window, "induced")
    g, h = model.ops["g"], model.ops["h"]
    hgh = h @ g @ h
    z1, z2 = model.vectors[0], model.vectors[1]
    eye = np.eye(model.side_dim)
    moved = tensor_apply(hgh, hgh, z1)
    targets = [
        ("<(s(hgh)xs(hgh))z1, z1> = 1/sqrt2", _dense_inner(moved, z1), 2 ** -0.5),
        ("<(s(hgh)xs(hgh))z1, z2> = 1/sqrt2", _dense_inner(moved, z2), 2 ** -0.5),
        ("<(s(g)xI)z1, z1> = 1", _dense_inner(tensor_apply(g, eye, z1), z1), 1.0),
        ("<(Ixs(g))z1, z1> = 1", _dense_inner(tensor_apply(eye, g, z1), z1), 1.0),
        ("<(s(g)xI)z2, z2> = -1", _dense_inner(tensor_apply(g, eye, z2), z2), -1.0),
        ("<(Ixs(g))z2, z2> = -1", _dense_inner(tensor_apply(eye, g, z2), z2), -1.0),
    ]
    checks = [_envelope_check(name, abs(value - target), envelope)
              for name, value, target in targets]
    checks.append(_envelope_check("s(g)^2 = identity", float(np.max(np.abs(g @ g - eye))),
                                  envelope, "exact at finite size"))
    checks.append(_envelope_check("s(h)^3 = identity", float(np.max(np.abs(h @ h @ h - eye))),
                                  envelope, "exact at finite size"))
    return checks


def frob_diff(a, b) -> FieldElement:
    return frobenius2_exact(mat_sub(a, b))


def _verify_thm21_exact() -> tuple[list[CheckResult], dict[str, MatrixRender]]:
    witness, table = build_witness_w32()
    checks = [
        _exact_check("combination(2,2) = M2 target",
                     frob_diff(table_combination(table, 2, 2), witness.m2), ZERO_FE),
        _exact_check("combination(3,3) = M3 target",
                     frob_diff(table_combination(table, 3, 3), witness.m3), ZERO_FE),
    ]
    marg_a = mat_sub(table.marginal_a(2, 1), table.marginal_a(1, 1))
    marg_b = mat_sub(table.marginal_b(2, 1), table.marginal_b(1, 1))
    checks.append(_exact_check("P_A(2|1)-P_A(1|1) = diag(1,-1,-1)",
                               frob_diff(marg_a, witness.j), ZERO_FE))
    checks.append(_exact_check("P_B(2|1)-P_B(1|1) = diag(1,-1,-1)",
                               frob_diff(marg_b, witness.j), ZERO_FE))
    total = residual_w32(table)
    checks.append(CheckResult(name="total witness residual", residual=abs(total.to_complex()),
                              exact_zero=total.is_zero(), passed=total.is_zero()))
    matrices = {"M2": _render_matrix(witness.m2), "M3": _render_matrix(witness.m3),
                "J": _render_matrix(witness.j)}
    return checks, matrices


def _verify_thm21_cyclic(window: int, envelope: float) -> list[CheckResult]:
    table = cyclic_table(truncate_cyclic(window, "plain"))
    components = residual_components_for("32", table)
    checks = [_envelope_check(f"residual component {name}", value, envelope)
              for name, value in components.items()]
    checks.append(_envelope_check("total witness residual", sum(components.values()),
                                  envelope))
    return checks


def _verify_thm33_exact() -> tuple[list[CheckResult], dict[str, MatrixRender]]:
    witness, table = build_witness_w23()
    checks = [CheckResult(name="derived dimension n = 4", residual=0.0,
                          exact_zero=True, passed=witness.n == 4,
                          detail="rank of the orthonormalized witness family")]
    components = residual_components_for("23", table)
    for name, value in components.items():
        checks.append(CheckResult(name=f"residual component {name}",
                                  residual=abs(value.to_complex()),
                                  exact_zero=value.is_zero(), passed=value.is_zero()))
    col_norm = sum((witness.b_star[i][0].abs2() for i in range(4)), ZERO_FE)
    checks.append(_exact_check("||B column 1||^2 = 1", col_norm, ONE))
    ab = mat_mul(witness.a_star, witness.b_star)
    ab_norm = sum((ab[i][0].abs2() for i in range(4)), ZERO_FE)
    checks.append(_exact_check("||(AB) column 1||^2 = 1", ab_norm, ONE))
    bab = mat_mul(witness.b_star, ab)
    checks.append(_exact_check("(BAB)_11 = 1/sqrt2", bab[0][0], INV_SQRT2))
    checks.append(_exact_check("(BAB)_21 = 1/sqrt2", bab[1][0], INV_SQRT2))
    total = residual_w23(table)
    checks.append(CheckResult(name="total witness residual", residual=abs(total.to_complex()),
                              exact_zero=total.is_zero(), passed=total.is_zero()))
    matrices = {"A": _render_matrix(witness.a_star), "B": _render_matrix(witness.b_star),
                "C": _render_matrix(witness.c_mat), "D": _render_matrix(witness.d_mat)}
    return checks, matrices


def _verify_thm33_cyclic(window: int, envelope: float) -> list[CheckResult]:
    table = cyclic_table(truncate_cyclic(window, "induced"))
    components = residual_components_for("23", table)
    checks = [_envelope_check(f"residual component {name}", value, envelope)
              for name, value in components.items()]
    checks.append(_envelope_check("total witness residual", sum(components.values()),
                                  envelope))
    return checks


def run_verify(req: VerifyRequest) -> VerifyResponse:
    matrices: dict[str, MatrixRender] = {}
    if req.backend == "exact":
        if req.target == "prop15":
            checks = _verify_prop15_exact()
        elif req.target == "lemma32":
            checks = _verify_lemma32_exact()
        elif req.target == "thm21":
            checks, matrices = _verify_thm21_exact()
        else:
            checks, matrices = _verify_thm33_exact()
        envelope = None
        window = None
    else:
        envelope = 2.0 ** (-req.window / 2 + 2)
        window = req.window
        if req.target == "prop15":
            checks = _verify_prop15_cyclic(req.window, envelope)
        elif req.target == "lemma32":
            checks = _verify_lemma32_cyclic(req.window, envelope)
        elif req.target == "thm21":
            checks = _verify_thm21_cyclic(req.window, envelope)
        else:
            checks = _verify_thm33_cyclic(req.window, envelope)
    return VerifyResponse(
        target=req.target, backend=req.backend, window=window, envelope=envelope,
        passed=all(c.passed for c in checks), checks=checks, matrices=matrices,
        conventions=list(CONVENTIONS), version=__version__)


def run_embed_check(req: EmbedCheckRequest) -> EmbedCheckResponse:
    try:
        report = ping_pong_injectivity_check(req.length, req.exponent_bound, cap=req.cap)
    except ResourceLimitError as exc:
        raise ResourceFailure(str(exc)) from exc
    return EmbedCheckResponse(
        passed=report.passed, length=req.length, exponent_bound=req.exponent_bound,
        words_checked=report.words_checked, collisions=report.collisions,
        power_lengths=list(report.power_lengths),
        lengths_strictly_increasing=report.lengths_strictly_increasing,
        version=__version__)


def run_certificate_check(req: CertificateCheckRequest) -> CertificateCheckResponse:
    try:
        table = CorrelationTable.from_json(req.table)
        components = residual_components_for(req.witness, table)
    except (CertificateError, CorrelationError) as exc:
        raise ServiceFailure(str(exc)) from exc
    violations = table.check_invariants()
    if table.field == "exact":
        exact_zero = all(v.is_zero() for v in components.values())
        float_components = {k: abs(v.to_complex()) for k, v in components.items()}
    else:
        exact_zero = None
        float_components = {k: float(v) for k, v in components.items()}
    return CertificateCheckResponse(
        witness=req.witness, table_field=table.field,
        invariant_violations=violations, components=float_components,
        total_defect=sum(float_components.values()), exact_zero=exact_zero,
        conventions=list(CONVENTIONS), version=__version__)


def run_optimize(req: OptimizeRequest,
                 checkpoint_dir: str | Path | None = None) -> OptimizeResponse:
    schedule = Schedule() if req.max_iters is None else Schedule(max_iters=req.max_iters)
    dims = [(int(a), int(b)) for a, b in req.dims]
    reports, csv = sweep(req.witness, dims, req.restarts, req.seed,
                         schedule=schedule, include_warm=req.include_warm)
    rows = []
    for report in reports:
        checkpoint = None
        if checkpoint_dir is not None and report.best_params is not None:
            path = Path(checkpoint_dir) / (
                f"model-w{req.witness}-d{report.d_a}x{report.d_b}.json")
            save_json(report.best_params.to_json(), path)
            checkpoint = str(path)
        rows.append(DimReport(
            witness=req.witness, dA=report.d_a, dB=report.d_b,
            restarts=report.restarts, master_seed=report.master_seed,
            results=[RestartRow(restart=r.index, seed=r.seed, kind=r.kind,
                                iterations=r.iterations, defect=r.defect)
                     for r in report.results],
            best_defect=report.best_defect, best_index=report.best_index,
            wall_time_s=report.wall_time_s, checkpoint=checkpoint))
    return OptimizeResponse(witness=req.witness, master_seed=req.seed,
                            reports=rows, csv=csv,
                            conventions=list(CONVENTIONS), version=__version__)


def witness_export(witness: str) -> WitnessResponse:
    if witness == "32":
        targets, table = build_witness_w32()
        rendered = {"M2": _render_matrix(targets.m2), "M3": _render_matrix(targets.m3),
                    "J": _render_matrix(targets.j)}
        n, inputs, outcomes = 3, 3, 2
    elif witness == "23":
        targets, table = build_witness_w23()
        rendered = {"A": _render_matrix(targets.a_star), "B": _render_matrix(targets.b_star),
                    "C": _render_matrix(targets.c_mat), "D": _render_matrix(targets.d_mat)}
        n, inputs, outcomes = 4, 2, 3
    else:
        raise ServiceFailure(f"unknown witness {witness!r}")
    return WitnessResponse(witness=witness, n=n, inputs=inputs, outcomes=outcomes,
                           targets=rendered, table=table.to_json(),
                           conventions=list(CONVENTIONS), version=__version__)


def meta() -> MetaResponse:
    return MetaResponse(version=__version__, conventions=list(CONVENTIONS),
                        commands=["verify", "embed-check", "certificate-check", "optimize"])
