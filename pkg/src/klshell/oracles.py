"""Independent reference solutions for the benchmark problems.

The plate oracle is the classical single-mode series solution of the simply
supported Kirchhoff plate under a doubly sinusoidal pressure.  The pinched
cylinder oracle is a Fourier-Ritz solution of the linearized shell equations
(linear membrane plus curvature-difference bending, the same continuum limit
the solver discretizes): displacement modes compatible with shear-diaphragm
ends diagonalize the energy, and each harmonic reduces to a 3x3 solve.
"""

from __future__ import annotations

import numpy as np


def navier_plate_center(L: float, T: float, E: float, nu: float, p0: float = 1.0) -> float:
    """Center deflection of the simply supported square plate under
    p(x, y) = p0 sin(pi x/L) sin(pi y/L)."""
    D = E * T ** 3 / (12.0 * (1.0 - nu ** 2))
    return p0 * L ** 4 / (4.0 * np.pi ** 4 * D)


def navier_plate_center_general(F_block: np.ndarray, L: float, p0: float = 1.0) -> float:
    """Center deflection for a general flat-state curvature stiffness block
    (packed 3x3, orthonormal frame).  Reduces to the classical value for the
    isotropic block."""
    s = F_block[0, 0] + F_block[1, 1] + 2.0 * F_block[0, 1] + 4.0 * F_block[2, 2]
    return p0 * L ** 4 / (np.pi ** 4 * s)


def pinched_cylinder_displacement(R: float, L: float, T: float, E: float = None,
                                  nu: float = None, F: float = 1.0, m_max: int = 199,
                                  n_max: int = 200, lam: float = None,
                                  mu: float = None) -> float:
    """Radial deflection under one of two opposite pinching point loads on a
    cylinder with shear-diaphragm ends.

    Fourier-Ritz solution of the linearized shell energy with displacement
    modes u_r = W cos(n t) sin(b p), u_t = V sin(n t) sin(b p),
    u_ax = U cos(n t) cos(b p), b = m pi R / L; loads at mid-length excite
    odd m and even n only.  The surface moduli follow from (E, nu) unless
    (lam, mu) are given directly (the incompressible shell model corresponds
    to lam = 2 mu).
    """
    if mu is None:
        mu = T * E / (2.0 * (1.0 + nu))
        lam = 2.0 * mu * nu / (1.0 - nu)
    ell = L / R
    w_total = 0.0
    R4 = R ** 4
    trace_mat = np.array([[1.0, 1.0, 0.0]]).T @ np.array([[1.0, 1.0, 0.0]])
    Qm = lam / R4 * trace_mat + 2.0 * mu / R4 * np.diag([1.0, 1.0, 2.0])
    Qb = (T ** 2 / 12.0) * (lam / R4 * trace_mat + 2.0 * mu / R4 * np.diag([1.0, 1.0, 2.0]))
    for m in range(1, m_max + 1, 2):
        beta = m * np.pi / ell
        sgn = np.sin(m * np.pi / 2.0)
        for n in range(0, n_max + 1, 2):
            # strain and curvature-change coefficients as linear maps of (U, V, W)
            Sm = np.array([
                [0.0, R * n, R],
                [-R * beta, 0.0, 0.0],
                [-R * n / 2.0, R * beta / 2.0, 0.0],
            ])
            Sb = np.array([
                [0.0, -2.0 * n, -(n ** 2 + 1.0)],
                [0.0, 0.0, -beta ** 2],
                [0.0, -beta, -beta * n],
            ])
            fac = (2.0 * np.pi if n == 0 else np.pi) * (ell / 2.0) * R ** 2
            K = fac * (Sm.T @ Qm @ Sm + Sb.T @ Qb @ Sb)
            rhs = np.array([0.0, 0.0, -2.0 * F * sgn])
            if n == 0:
                idx = [0, 2]
                sol = np.linalg.solve(K[np.ix_(idx, idx)], rhs[idx])
                W = sol[1]
            else:
                W = np.linalg.solve(K, rhs)[2]
            w_total += W * sgn
    return abs(w_total)
