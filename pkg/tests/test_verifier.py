"""Verifier tests: closed-form tables, pass/fail matrix, moduli extraction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from klshell.verifier import (
    CASES,
    MODELS,
    TABLE_EXPECTED,
    VerifierParams,
    compare_tables,
    evaluate_case,
    expected_case,
    extract_moduli,
    make_config,
    matrix_symbols,
    run_matrix,
    torsion_stress_ratio,
)


def test_config_matrices_match_stated_forms():
    R, gamma = 2.0, 0.7
    cfg = make_config("torsion", R, gamma=gamma)
    assert_allclose(cfg.a_ab, R ** 2 * np.array([[1, gamma], [gamma, gamma ** 2 + 1]]),
                    atol=1e-14)
    assert_allclose(cfg.b_ab, -R * np.array([[1, gamma], [gamma, gamma ** 2]]), atol=1e-14)
    ref, cur = cfg.states()
    assert abs(cur.J - 1.0) < 1e-14
    cfg_i = make_config("inflation", R, r=1.5 * R)
    ref, cur = cfg_i.states()
    assert abs(cur.J - 1.5) < 1e-14


def test_all_table_cells_reproduce():
    results = compare_tables(n_draws=5, seed=3)
    worst = max(r[3] for r in results)
    assert worst < 1e-10, [r for r in results if r[3] > 1e-10][:5]


def test_rigid_rotation_new_model_zero():
    p = VerifierParams(c=0.8, c12=0.2, c3=0.3, T=0.02)
    got = evaluate_case(make_config("rigid_rotation", 2.0), "new", p)
    for key in ("N", "M", "tau"):
        assert np.abs(got[key]).max() < 1e-14


def test_pure_bend_koiter_cauchy_stress():
    R, r = 2.0, 1.0
    p = VerifierParams(c=0.8, c12=0.0, c3=0.4, T=0.02)
    got = evaluate_case(make_config("pure_bend", R, r=r), "koiter", p)
    k1 = -1.0 / r
    dk1 = k1 + 1.0 / R
    assert_allclose(got["N"], p.c * dk1 * k1 * np.diag([1.0, 0.0]), atol=1e-14)


def test_torsion_new_moment_structure():
    # with c12 = 0 the twist produces no circumferential moment
    R = 2.0
    p = VerifierParams(c=0.8, c12=0.0, c3=0.4, T=0.02)
    got = evaluate_case(make_config("torsion", R, gamma=1.0), "new", p)
    assert abs(got["M"][0, 0]) < 1e-14
    assert abs(got["M"][1, 1]) > 1e-3 * p.c / R ** 3


def test_matrix_equals_expected_summary():
    matrix = run_matrix()
    for case in CASES:
        for model in MODELS:
            assert matrix[(case, model)] == TABLE_EXPECTED[case][model], \
                (case, model, matrix[(case, model)])
    text = matrix_symbols(matrix)
    assert "torsion" in text


def test_counter_bend_error_decays_quadratically():
    # spurious Cauchy stress of the curvature-difference and apH models is
    # c*kappa2^2: halving kappa2 (doubling the tube radius) quarters it
    p = VerifierParams(c=0.8, c12=0.0, c3=0.4, T=0.02)
    for model in ("koiter", "aph"):
        errs = []
        for R in (2.0, 4.0):
            got = evaluate_case(make_config("counter_bend", R), model, p)
            errs.append(np.abs(got["N"]).max())
        ratio = errs[0] / errs[1]
        assert 3.5 < ratio < 4.5, (model, ratio)  # quadratic in kappa2


def test_torsion_ratio_values():
    r100 = torsion_stress_ratio(100.0, 1.0)
    assert abs(r100 / 1e-5 - 1.0) < 0.2
    r10 = torsion_stress_ratio(10.0, 1.0)
    assert abs(r10 / r100 - 100.0) < 1e-6  # pure T^2 scaling
    # frozen closed form: (T/R)^2 / (6 sqrt(2))
    assert abs(r100 - 1e-4 / (6.0 * np.sqrt(2.0))) < 1e-18
    assert torsion_stress_ratio(100.0, 0.0) == 0.0


def test_extract_moduli_recovers_conversion():
    rng = np.random.default_rng(5)
    for _ in range(6):
        Lambda, mu, T = rng.uniform(0.1, 2.0), rng.uniform(0.2, 2.0), rng.uniform(0.05, 0.4)
        A = np.diag(rng.uniform(0.5, 3.0, 2))
        rec = extract_moduli(Lambda, mu, T, A)
        assert abs(rec["c1"] - T ** 2 / 12 * (Lambda + 2 * mu)) < 1e-12
        assert abs(rec["c2"] - T ** 2 / 12 * (Lambda + 2 * mu)) < 1e-12
        assert abs(rec["c12"] - T ** 2 / 12 * Lambda) < 1e-12
        assert abs(rec["c3"] - T ** 2 / 12 * mu) < 1e-12
        assert rec["max_diff"] < 1e-12 * rec["F_scale"]


def test_extract_moduli_lambda_zero_cross_term():
    rec = extract_moduli(0.0, 0.9, 0.1, np.diag([1.0, 2.0]))
    assert abs(rec["c12"]) < 1e-15


def test_extract_moduli_rejects_nonorthogonal():
    with pytest.raises(ValueError):
        extract_moduli(1.0, 1.0, 0.1, np.array([[1.0, 0.3], [0.3, 1.0]]))


def test_fe_patch_driven_to_inflation_matches_analytic():
    # a single-element exact cylinder octant scaled radially reproduces the
    # analytic inflation measures at its quadrature points
    from klshell.assembly import precompute_tables, _current_batch
    from klshell.splines import make_cylinder_patch

    R, scale = 2.0, 1.7
    patch = make_cylinder_patch(R, 3.0, (0, np.pi / 2), 1, 1, 2)
    tables = precompute_tables(patch)
    x = patch.control_points.reshape(-1, 3).copy()
    x[:, :2] *= scale  # radial scaling of the exact arcs
    cur = _current_batch(tables, x)
    r = scale * R
    assert np.abs(cur.lambda_i[..., 0] - scale).max() < 1e-10
    assert np.abs(cur.kappa_i[..., 0] - (-1.0 / r)).max() < 1e-10
    assert np.abs(cur.kappa_i[..., 1]).max() < 1e-10
