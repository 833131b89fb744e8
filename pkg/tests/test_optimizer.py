import numpy as np
import pytest

from matcorr.correlations import cyclic_table, residual_w23, residual_w32
from matcorr.optimizer import (
    Direction,
    ModelParams,
    ObservableParams,
    OptimizerError,
    Schedule,
    defect,
    derive_seed,
    gradient,
    gradient_check,
    minimize,
    orthonormalize,
    pad_params,
    params_from_truncation,
    random_params,
    retract,
    sweep,
)
from matcorr.truncation import truncate_cyclic

FAST = Schedule(max_iters=25)


def test_derive_seed_formula():
    assert derive_seed(0, 0) == 0
    assert derive_seed(42, 0) == 42
    assert derive_seed(42, 1) == 42 ^ 0x9E3779B97F4A7C15
    assert derive_seed(7, 3) == 7 ^ (3 * 0x9E3779B97F4A7C15 & (2 ** 64 - 1))


def test_orthonormalize_isometry_and_partial():
    rng = np.random.default_rng(3)
    z = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    w = orthonormalize(z)
    assert np.allclose(w.conj().T @ w, np.eye(3), atol=1e-12)
    assert np.allclose(orthonormalize(w), w, atol=1e-12)  # fixed point
    partial = orthonormalize(rng.normal(size=(1, 4)) + 0j)
    assert abs(abs(partial[0, 0]) - 1) < 1e-12
    assert np.allclose(partial[:, 1:], 0)


def test_defect_matches_cyclic_oracle_w32():
    params = params_from_truncation("32", 16)  # window 8
    oracle = residual_w32(cyclic_table(truncate_cyclic(8, "plain")))
    assert abs(defect(params) - oracle) < 1e-12


def test_defect_matches_cyclic_oracle_w23():
    params = params_from_truncation("23", 12)  # window 2
    oracle = residual_w23(cyclic_table(truncate_cyclic(2, "induced")))
    assert abs(defect(params) - oracle) < 1e-12


def test_defect_matches_table_residual_random_points():
    for witness in ("32", "23"):
        for i in range(3):
            params = random_params(witness, 3, 2, derive_seed(11, i))
            table_defect = defect(params)
            assert table_defect >= 0
            from matcorr.optimizer import _TorchStep

            f0, _ = _TorchStep(params).value_and_grad()
            assert abs(f0 - table_defect) < 1e-12


def test_defect_nonnegative():
    for i in range(5):
        params = random_params("32", 2, 3, derive_seed(5, i))
        assert defect(params) >= 0


def test_closed_form_one_by_one():
    # all PVMs concentrated on outcome 1, W = partial isometry diag(1,0,0,0):
    # combination deviation 3, omega-sum deviation 3.5, compressions 2*5.
    side = [ObservableParams("sign", np.eye(1, dtype=np.complex128), rank=0),
            ObservableParams("omega", np.eye(1, dtype=np.complex128), profile=(1, 0, 0))]
    params = ModelParams("23", 1, 1, side,
                         [ObservableParams(o.kind, o.unitary.copy(), o.rank, o.profile)
                          for o in side],
                         np.array([[1.0, 0, 0, 0]], dtype=np.complex128))
    assert defect(params) == pytest.approx(16.5, abs=1e-12)


def test_witness_mismatch_raises():
    params = random_params("32", 2, 2, 1)
    with pytest.raises(OptimizerError):
        defect(params, witness="23")
    with pytest.raises(OptimizerError):
        random_params("99", 2, 2, 1)


def test_gradient_check_small():
    assert gradient_check("32", 2, 20, seed=123) <= 1e-5
    assert gradient_check("23", 2, 10, seed=321) <= 1e-5


def test_gradient_zero_direction():
    params = random_params("32", 2, 2, 9)
    grad = gradient(params)
    zero = Direction([np.zeros_like(g) for g in grad.obs_a],
                     [np.zeros_like(g) for g in grad.obs_b],
                     np.zeros_like(grad.isometry))
    assert grad.dot(zero) == 0.0
    assert np.allclose(retract(params, zero, 0.5).isometry(), params.isometry(),
                       atol=1e-12)


def test_gradient_near_zero_at_stationary_truncation_point():
    params = params_from_truncation("32", 4)
    final, trace = minimize(params, Schedule(max_iters=300, grad_tol=1e-7))
    assert trace.stop_reason == "gradient_tolerance"
    assert gradient(final).norm2() ** 0.5 <= 1e-6


def test_minimize_zero_iterations_returns_input():
    params = random_params("32", 2, 2, 4)
    final, trace = minimize(params, Schedule(max_iters=0))
    assert trace.iterations == 0
    assert len(trace.defects) == 1
    for before, after in zip(params.side_a, final.side_a):
        assert np.array_equal(before.unitary, after.unitary)
    assert np.array_equal(params.isometry_raw, final.isometry_raw)


def test_minimize_monotone_and_pvm_clean():
    params = random_params("23", 3, 3, derive_seed(7, 1))
    final, trace = minimize(params, Schedule(max_iters=60))
    assert all(b <= a + 1e-12 for a, b in zip(trace.defects, trace.defects[1:]))
    assert trace.defects[-1] < trace.defects[0]
    assert trace.max_pvm_violation <= 1e-10
    assert final.max_pvm_violation() <= 1e-10


def test_warm_start_reproduces_cyclic_defect():
    for witness, d, window, kind in (("32", 4, 2, "plain"), ("32", 6, 3, "plain"),
                                     ("23", 12, 2, "induced")):
        params = params_from_truncation(witness, d)
        oracle = float(residual_w32(cyclic_table(truncate_cyclic(window, kind)))
                       if witness == "32"
                       else residual_w23(cyclic_table(truncate_cyclic(window, kind))))
        start = defect(params)
        assert abs(start - oracle) < 1e-12
        final, trace = minimize(params, FAST)
        assert defect(final) <= 2 * oracle


def test_truncation_too_small_returns_none():
    assert params_from_truncation("32", 3) is None
    assert params_from_truncation("23", 6) is None


def test_pad_params_preserves_defect():
    params = random_params("23", 2, 2, 77)
    padded = pad_params(params)
    assert padded.d_a == 3 and padded.d_b == 3
    assert abs(defect(padded) - defect(params)) < 1e-12
    assert padded.max_pvm_violation() <= 1e-10


def test_random_params_deterministic():
    a = random_params("32", 3, 3, 999)
    b = random_params("32", 3, 3, 999)
    for oa, ob in zip(a.side_a + a.side_b, b.side_a + b.side_b):
        assert np.array_equal(oa.unitary, ob.unitary)
        assert oa.rank == ob.rank
    assert np.array_equal(a.isometry_raw, b.isometry_raw)


def test_params_json_round_trip():
    params = random_params("23", 2, 3, 5)
    again = ModelParams.from_json(params.to_json())
    assert abs(defect(again) - defect(params)) < 1e-14
    assert again.side_a[1].profile == params.side_a[1].profile


def test_sweep_deterministic_csv():
    _, csv1 = sweep("32", [(2, 2)], restarts=2, master_seed=11, schedule=FAST)
    _, csv2 = sweep("32", [(2, 2)], restarts=2, master_seed=11, schedule=FAST)
    assert csv1 == csv2
    header, *rows = csv1.strip().split("\n")
    assert header == "witness,dA,dB,restart,seed,iterations,defect"
    assert len(rows) == 2  # no warm start fits d=2


def test_sweep_chain_warm_dominance():
    reports, _ = sweep("32", [(4, 4), (5, 5)], restarts=1, master_seed=3,
                       schedule=Schedule(max_iters=10))
    by_dims = {(r.d_a, r.d_b): r for r in reports}
    assert by_dims[(5, 5)].best_defect <= by_dims[(4, 4)].best_defect + 1e-12
    kinds = {r.kind for r in by_dims[(5, 5)].results}
    assert "chain-warm" in kinds
    kinds4 = {r.kind for r in by_dims[(4, 4)].results}
    assert "cyclic-warm" in kinds4


def test_sweep_report_json():
    reports, csv = sweep("23", [(1, 1)], restarts=1, master_seed=42,
                         schedule=Schedule(max_iters=5))
    report = reports[0]
    obj = report.to_json()
    assert obj["witness"] == "23" and obj["dA"] == 1
    assert obj["best_defect"] == report.best_defect
    assert report.best_defect > 1  # far from the witness at 1x1
    assert str(report.best_defect) in csv or repr(report.best_defect) in csv
