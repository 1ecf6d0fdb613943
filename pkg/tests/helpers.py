"""Shared test utilities: random kinematic states and tangent FD checks."""

import numpy as np

from klshell.constitutive import StressState
from klshell.kinematics import current_from_metric, reference_from_metric


def random_reference(rng, curvature=0.6):
    """Well-conditioned random reference forms with distinct principal
    curvatures (away from umbilic points)."""
    while True:
        M = rng.uniform(-1.0, 1.0, (2, 2))
        A = M.T @ M + 0.6 * np.eye(2)
        B = curvature * _random_sym(rng)
        ref = reference_from_metric(A, B)
        k1, k2 = ref.kappa0
        if abs(k1 - k2) > 0.05 and abs(abs(k1) - abs(k2)) > 0.05:
            return ref


def _random_sym(rng):
    v = rng.uniform(-1.0, 1.0, 3)
    return np.array([[v[0], v[2]], [v[2], v[1]]])


def random_state_pair(rng, strain=0.25, bend=0.5):
    """Random (reference, current) pair with positive-definite metrics."""
    ref = random_reference(rng)
    while True:
        a = ref.A_ab + strain * _random_sym(rng)
        if np.linalg.det(a) > 0.05 and a[0, 0] > 0:
            break
    b = ref.B_ab + bend * _random_sym(rng)
    cur = current_from_metric(ref, a, b)
    return ref, cur


def fd_tangent_error(evaluate, ref, a, b, rng, n_dirs=4, h=1e-6):
    """Max relative error of the packed tangents against directional central
    differences of tau and M0.

    ``evaluate(ref, cur) -> StressState``.  Strain-packed direction vectors
    carry the doubled shear component.
    """
    cur0 = current_from_metric(ref, a, b)
    s0 = evaluate(ref, cur0)
    scale_a = np.linalg.norm(a)
    scale_b = max(np.linalg.norm(b), 0.1 * np.linalg.norm(a))
    worst = 0.0
    for _ in range(n_dirs):
        da = _random_sym(rng)
        db = _random_sym(rng)
        ha, hb = h * scale_a, h * scale_b
        sp = evaluate(ref, current_from_metric(ref, a + ha * da, b + hb * db))
        sm = evaluate(ref, current_from_metric(ref, a - ha * da, b - hb * db))
        dtau_fd = (sp.tau - sm.tau) / 2.0
        dM0_fd = (sp.M0 - sm.M0) / 2.0
        eps_dot = np.array([da[0, 0] / 2, da[1, 1] / 2, da[0, 1]]) * ha
        b_dot = np.array([db[0, 0], db[1, 1], 2 * db[0, 1]]) * hb
        dtau = s0.C @ eps_dot + s0.D @ b_dot
        dM0 = s0.E @ eps_dot + s0.F @ b_dot
        ref_tau = max(np.abs(dtau_fd).max(), 1e-12 * max(np.abs(s0.tau).max(), 1.0))
        ref_M0 = max(np.abs(dM0_fd).max(), 1e-12 * max(np.abs(s0.M0).max(), 1.0))
        worst = max(worst,
                    np.abs(dtau - dtau_fd).max() / ref_tau,
                    np.abs(dM0 - dM0_fd).max() / ref_M0)
    return worst


def energy_stress_error(evaluate, ref, a, b, rng, n_dirs=4, h=1e-6):
    """Relative error of (tau, M0) against central differences of the energy."""
    cur0 = current_from_metric(ref, a, b)
    s0 = evaluate(ref, cur0)
    assert s0.W is not None
    worst = 0.0
    scale_a = np.linalg.norm(a)
    scale_b = max(np.linalg.norm(b), 0.1 * scale_a)
    for _ in range(n_dirs):
        da = _random_sym(rng)
        db = _random_sym(rng)
        ha, hb = h * scale_a, h * scale_b
        Wp = evaluate(ref, current_from_metric(ref, a + ha * da, b + hb * db)).W
        Wm = evaluate(ref, current_from_metric(ref, a - ha * da, b - hb * db)).W
        dW_fd = (Wp - Wm) / 2.0
        # dW = tau : da/2 + M0 : db  (packed contraction)
        tau_term = (s0.tau[0] * da[0, 0] + s0.tau[1] * da[1, 1]
                    + 2 * s0.tau[2] * da[0, 1]) * ha / 2.0
        M_term = (s0.M0[0] * db[0, 0] + s0.M0[1] * db[1, 1]
                  + 2 * s0.M0[2] * db[0, 1]) * hb
        dW = tau_term + M_term
        scale = max(abs(dW_fd), 1e-12 * max(abs(s0.W), 1.0))
        worst = max(worst, abs(dW - dW_fd) / scale)
    return worst


def assert_state_allclose(s1: StressState, s2: StressState, atol=1e-12, rtol=1e-10):
    np.testing.assert_allclose(s1.tau, s2.tau, atol=atol, rtol=rtol)
    np.testing.assert_allclose(s1.M0, s2.M0, atol=atol, rtol=rtol)
    np.testing.assert_allclose(s1.C, s2.C, atol=atol, rtol=rtol)
    np.testing.assert_allclose(s1.D, s2.D, atol=atol, rtol=rtol)
    np.testing.assert_allclose(s1.E, s2.E, atol=atol, rtol=rtol)
    np.testing.assert_allclose(s1.F, s2.F, atol=atol, rtol=rtol)
