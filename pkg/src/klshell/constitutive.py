"""Hyperelastic membrane and bending models for thin shells.

Each model maps a (reference, current) kinematic state pair to the
referential membrane stress tau^ab, the bending stress couple M0^ab and the
four tangent blocks

    C = d tau / d eps,   D = d tau / d b,
    E = d M0  / d eps,   F = d M0  / d b,

all packed in 3x3 matrices with the component order (11, 22, 12).  The
convention is "plain components": strain-like vectors carry the doubled
shear entry when contracted against these matrices, stress-like vectors do
not.  All evaluators are vectorized over leading batch dimensions.

Membrane models: linear (Koiter-type) and incompressible Neo-Hookean surface
models.  Bending models: the curvature-difference (Koiter) model, Canham,
Helfrich, the analytically thickness-integrated Neo-Hookean shell (apH), and
the anisotropic stretch-invariant model formulated on the initial principal
curvature directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import CurrentState, ReferenceState, sym_to_packed

MEMBRANE_MODELS = ("koiter_membrane", "neo_hooke")
BENDING_MODELS = ("koiter", "canham", "helfrich", "aph", "new")


# ---------------------------------------------------------------------------
# packed-tensor algebra
# ---------------------------------------------------------------------------

def _outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...j->...ij", x, y)


def _sym4(ainv: np.ndarray) -> np.ndarray:
    """Packed matrix of (a^ac a^bd + a^ad a^bc)/2 (symmetrized identity)."""
    a1 = ainv[..., 0, 0]
    a2 = ainv[..., 1, 1]
    a3 = ainv[..., 0, 1]
    S = np.empty(ainv.shape[:-2] + (3, 3))
    S[..., 0, 0] = a1 * a1
    S[..., 0, 1] = a3 * a3
    S[..., 0, 2] = a1 * a3
    S[..., 1, 0] = a3 * a3
    S[..., 1, 1] = a2 * a2
    S[..., 1, 2] = a2 * a3
    S[..., 2, 0] = a1 * a3
    S[..., 2, 1] = a2 * a3
    S[..., 2, 2] = 0.5 * (a1 * a2 + a3 * a3)
    return S


def _raise2(ainv: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Packed components of a^-1 t a^-1 for symmetric t."""
    return sym_to_packed(ainv @ t @ ainv)


def _d_raised_d_lower(ainv: np.ndarray, t_raised: np.ndarray) -> np.ndarray:
    """Packed derivative of (a^-1 t a^-1) w.r.t. the covariant a components
    at fixed t: K^{ab,cd} = -1/2 (a^ac t^db + a^ad t^cb + t^ac a^db + t^ad a^cb)."""
    A1 = ainv[..., 0, 0]
    A2 = ainv[..., 1, 1]
    A3 = ainv[..., 0, 1]
    B1 = t_raised[..., 0]
    B2 = t_raised[..., 1]
    B3 = t_raised[..., 2]
    K = np.empty(np.broadcast_shapes(A1.shape, B1.shape) + (3, 3))
    K[..., 0, 0] = -2.0 * A1 * B1
    K[..., 0, 1] = -2.0 * A3 * B3
    K[..., 0, 2] = -(A1 * B3 + A3 * B1)
    K[..., 1, 0] = K[..., 0, 1]
    K[..., 1, 1] = -2.0 * A2 * B2
    K[..., 1, 2] = -(A3 * B2 + A2 * B3)
    K[..., 2, 0] = K[..., 0, 2]
    K[..., 2, 1] = K[..., 1, 2]
    K[..., 2, 2] = -0.5 * (A1 * B2 + A2 * B1 + 2.0 * A3 * B3)
    return K


def _contract(t_packed: np.ndarray, s_packed: np.ndarray) -> np.ndarray:
    """Full contraction t^ab s_ab of symmetric tensors in packed storage."""
    return (t_packed[..., 0] * s_packed[..., 0]
            + t_packed[..., 1] * s_packed[..., 1]
            + 2.0 * t_packed[..., 2] * s_packed[..., 2])


# ---------------------------------------------------------------------------
# parameters and results
# ---------------------------------------------------------------------------

@dataclass
class MembraneParams:
    """Surface Lame moduli [N/m] for a membrane model."""

    model: str
    Lambda: float
    mu: float

    def __post_init__(self):
        if self.model not in MEMBRANE_MODELS:
            raise ValueError(f"unknown membrane model {self.model!r}")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.Lambda < 0:
            raise ValueError("Lambda must be non-negative")


@dataclass
class BendingParams:
    """Parameters of one bending model; only the fields of the chosen model
    are used.

    koiter:   T, Lambda, mu
    canham:   c
    helfrich: k, kbar, H0bar
    aph:      mu, T
    new:      c1, c2, c12, c3
    """

    model: str
    T: float = 0.0
    Lambda: float = 0.0
    mu: float = 0.0
    c: float = 0.0
    k: float = 0.0
    kbar: float = 0.0
    H0bar: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c12: float = 0.0
    c3: float = 0.0

    def __post_init__(self):
        if self.model not in BENDING_MODELS:
            raise ValueError(f"unknown bending model {self.model!r}")
        if self.model == "new":
            if self.c1 <= 0 or self.c2 <= 0:
                raise ValueError("c1 and c2 must be positive")
            if self.c1 * self.c2 < self.c12 ** 2:
                raise ValueError("need c1*c2 >= c12^2 for a positive quadratic form")
            if self.c3 < 0:
                raise ValueError("c3 must be non-negative")
        if self.model == "helfrich" and self.k <= 0:
            raise ValueError("Helfrich k must be positive")


@dataclass
class StressState:
    """Referential stress/moment and tangent blocks in packed (11,22,12) form."""

    tau: np.ndarray  # (..., 3)
    M0: np.ndarray   # (..., 3)
    C: np.ndarray    # (..., 3, 3)
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    W: np.ndarray | None = None  # strain energy density, None if not defined

    def __add__(self, other: "StressState") -> "StressState":
        W = None
        if self.W is not None and other.W is not None:
            W = self.W + other.W
        return StressState(self.tau + other.tau, self.M0 + other.M0,
                           self.C + other.C, self.D + other.D,
                           self.E + other.E, self.F + other.F, W)


def _zeros_like_state(batch_shape) -> StressState:
    z3 = np.zeros(batch_shape + (3,))
    z33 = np.zeros(batch_shape + (3, 3))
    return StressState(z3, z3.copy(), z33, z33.copy(), z33.copy(), z33.copy(),
                       np.zeros(batch_shape))


# ---------------------------------------------------------------------------
# membrane models
# ---------------------------------------------------------------------------

def koiter_membrane(p: MembraneParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Linear elastic surface model, quadratic in the Green-Lagrange strain."""
    lam, mu = p.Lambda, p.mu
    Ainv = ref.A_ab_inv
    Ainv_p = sym_to_packed(Ainv)
    eps_p = sym_to_packed(cur.eps_ab)
    trE = _contract(Ainv_p, eps_p)
    E_raised = _raise2(Ainv, cur.eps_ab)
    tau = lam * trE[..., None] * Ainv_p + 2.0 * mu * E_raised
    C = lam * _outer(Ainv_p, Ainv_p) + 2.0 * mu * _sym4(Ainv)
    out = _zeros_like_state(tau.shape[:-1])
    out.tau = tau
    out.C = C
    out.W = 0.5 * lam * trE ** 2 + mu * _contract(E_raised, eps_p)
    return out


def neo_hooke_membrane(p: MembraneParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Incompressible-type Neo-Hookean surface membrane."""
    lam, mu = p.Lambda, p.mu
    J2 = cur.J ** 2
    ainv_p = sym_to_packed(cur.a_ab_inv)
    Ainv_p = sym_to_packed(ref.A_ab_inv)
    tau = 0.5 * lam * (J2 - 1.0)[..., None] * ainv_p + mu * (Ainv_p - ainv_p)
    S = _sym4(cur.a_ab_inv)
    C = (lam * J2)[..., None, None] * _outer(ainv_p, ainv_p) \
        - (lam * (J2 - 1.0) - 2.0 * mu)[..., None, None] * S
    out = _zeros_like_state(tau.shape[:-1])
    out.tau = tau
    out.C = C
    I1 = _contract(Ainv_p, sym_to_packed(cur.a_ab))
    lnJ = np.log(cur.J)
    out.W = 0.25 * lam * (J2 - 1.0 - 2.0 * lnJ) + 0.5 * mu * (I1 - 2.0 - 2.0 * lnJ)
    return out


# ---------------------------------------------------------------------------
# bending models
# ---------------------------------------------------------------------------

def koiter_bending(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Bending moment linear in the curvature change b - B."""
    fac = p.T ** 2 / 12.0
    lam, mu = p.Lambda, p.mu
    Ainv = ref.A_ab_inv
    Ainv_p = sym_to_packed(Ainv)
    K_p = sym_to_packed(cur.K_ab)
    trK = _contract(Ainv_p, K_p)
    K_raised = _raise2(Ainv, cur.K_ab)
    out = _zeros_like_state(K_p.shape[:-1])
    out.M0 = fac * (lam * trK[..., None] * Ainv_p + 2.0 * mu * K_raised)
    out.F = fac * (lam * _outer(Ainv_p, Ainv_p) + 2.0 * mu * _sym4(Ainv))
    out.W = 0.5 * fac * (lam * trK ** 2 + 2.0 * mu * _contract(K_raised, K_p))
    return out


def canham(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Squared-curvature bending model, W = c J (2H^2 - kappa)."""
    c = p.c
    J, H, kap = cur.J, cur.H, cur.kappa_gauss
    ainv = cur.a_ab_inv
    ainv_p = sym_to_packed(ainv)
    b_r = _raise2(ainv, cur.b_ab)
    S = _sym4(ainv)
    Kd = _d_raised_d_lower(ainv, b_r)
    cJ = (c * J)[..., None]
    tau = cJ * ((2 * H ** 2 + kap)[..., None] * ainv_p - 4 * H[..., None] * b_r)
    M0 = cJ * b_r
    t_half = 0.5 * (2 * H ** 2 + kap)[..., None, None] * _outer(ainv_p, ainv_p) \
        - 2 * H[..., None, None] * _outer(b_r, ainv_p) \
        + _outer(ainv_p, -2 * H[..., None] * b_r - kap[..., None] * ainv_p) \
        - (2 * H ** 2 + kap)[..., None, None] * S \
        + 2 * _outer(b_r, b_r) \
        - 4 * H[..., None, None] * Kd
    C = 2 * cJ[..., None] * t_half
    D = cJ[..., None] * (_outer(ainv_p, 4 * H[..., None] * ainv_p - b_r)
                         - 2 * _outer(b_r, ainv_p)
                         - 4 * H[..., None, None] * S)
    E = np.swapaxes(D, -1, -2)
    F = cJ[..., None] * S
    return StressState(tau, M0, C, D, E, F, c * J * (2 * H ** 2 - kap))


def helfrich(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Spontaneous-curvature bending model, W = J (k (H-H0)^2 + kbar kappa)."""
    k, kbar, H0 = p.k, p.kbar, p.H0bar
    J, H, kap = cur.J, cur.H, cur.kappa_gauss
    dH = H - H0
    ainv = cur.a_ab_inv
    ainv_p = sym_to_packed(ainv)
    b_r = _raise2(ainv, cur.b_ab)
    S = _sym4(ainv)
    Kd = _d_raised_d_lower(ainv, b_r)
    Jc = J[..., None]
    tau = Jc * ((k * dH ** 2 - kbar * kap)[..., None] * ainv_p - (2 * k * dH)[..., None] * b_r)
    M0 = Jc * ((k * dH + 2 * kbar * H)[..., None] * ainv_p - kbar * b_r)
    t = (k * dH ** 2 - kbar * kap)[..., None] * ainv_p - (2 * k * dH)[..., None] * b_r
    dt = _outer(ainv_p, (-k * dH)[..., None] * b_r + (kbar * kap)[..., None] * ainv_p) \
        - (k * dH ** 2 - kbar * kap)[..., None, None] * S \
        + k * _outer(b_r, b_r) \
        - (2 * k * dH)[..., None, None] * Kd
    C = Jc[..., None] * (_outer(t, ainv_p) + 2 * dt)
    D = Jc[..., None] * (_outer(ainv_p, (k * dH - 2 * kbar * H)[..., None] * ainv_p + kbar * b_r)
                         - k * _outer(b_r, ainv_p)
                         - (2 * k * dH)[..., None, None] * S)
    E = np.swapaxes(D, -1, -2)
    F = (0.5 * J * (k + 2 * kbar))[..., None, None] * _outer(ainv_p, ainv_p) \
        - (kbar * J)[..., None, None] * S
    return StressState(tau, M0, C, D, E, F, J * (k * dH ** 2 + kbar * kap))


def aph_shell(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Analytically thickness-integrated incompressible Neo-Hookean shell.

    A complete shell model: the membrane part depends only on the current
    metric, the moment part also on the reference curvature and the local
    initial mean curvature.  The printed stress/moment pair is not exactly
    integrable (d tau/d b = 0 while d M0/d eps != 0), so the tangents here
    are the true derivatives of the model as stated.
    """
    mu, kb = p.mu, p.mu * p.T ** 2 / 6.0
    J = cur.J
    Jm2 = 1.0 / J ** 2
    ainv = cur.a_ab_inv
    ainv_p = sym_to_packed(ainv)
    Ainv_p = sym_to_packed(ref.A_ab_inv)
    b_r = _raise2(ainv, cur.b_ab)
    B_r = _raise2(ref.A_ab_inv, ref.B_ab)
    dH = cur.H - ref.H0
    S = _sym4(ainv)
    Kd = _d_raised_d_lower(ainv, b_r)
    tau = mu * (Ainv_p - Jm2[..., None] * ainv_p)
    M0 = -kb * (B_r - Jm2[..., None] * (b_r + 2 * dH[..., None] * ainv_p))
    C = (2 * mu * Jm2)[..., None, None] * (S + _outer(ainv_p, ainv_p))
    D = np.zeros_like(C)
    E = (2 * kb * Jm2)[..., None, None] * (
        -_outer(b_r + 2 * dH[..., None] * ainv_p, ainv_p)
        + Kd
        - _outer(ainv_p, b_r)
        - 2 * dH[..., None, None] * S)
    F = (kb * Jm2)[..., None, None] * (S + _outer(ainv_p, ainv_p))
    return StressState(tau, M0, C, D, E, F, None)


def _new_measures(p: BendingParams, lam, kap, kappa12, kappa0, kappa012,
                  l11, l22, l12):
    """Shared core of the stretch-invariant model given the fiber measures
    and the packed direction tensors."""
    c1, c2, c12, c3 = p.c1, p.c2, p.c12, p.c3
    lam1, lam2 = lam[..., 0], lam[..., 1]
    kap1, kap2 = kap[..., 0], kap[..., 1]
    k01, k02 = kappa0[..., 0], kappa0[..., 1]
    k1 = lam1 * kap1 - k01
    k2 = lam2 * kap2 - k02
    s = np.sqrt(lam1 * lam2)
    w = np.sqrt(lam2 / lam1)
    k12 = s * kappa12 - kappa012

    m1 = c1 * k1 + c12 * k2
    m2 = c12 * k1 + c2 * k2
    M0 = m1[..., None] * l11 + m2[..., None] * l22 + (c3 * k12)[..., None] * l12
    tau = -(m1 * kap1)[..., None] * l11 - (m2 * kap2)[..., None] * l22 \
        - (0.5 * c3 * kappa12 * k12)[..., None] * (w[..., None] * l11 + (1.0 / w)[..., None] * l22)

    F = c1 * _outer(l11, l11) + c2 * _outer(l22, l22) \
        + c12 * (_outer(l11, l22) + _outer(l22, l11)) + c3 * _outer(l12, l12)

    A11 = c1 * (k01 / lam1 - 2.0 * kap1) + c12 / lam1 * (k02 - lam2 * kap2)
    A22 = c2 * (k02 / lam2 - 2.0 * kap2) + c12 / lam2 * (k01 - lam1 * kap1)
    q = 0.5 * c3 / s * (kappa012 / s - 2.0 * kappa12)
    D = A11[..., None, None] * _outer(l11, l11) + A22[..., None, None] * _outer(l22, l22) \
        - c12 * kap1[..., None, None] * _outer(l11, l22) \
        - c12 * kap2[..., None, None] * _outer(l22, l11) \
        + q[..., None, None] * _outer(lam2[..., None] * l11 + lam1[..., None] * l22, l12)
    E = np.swapaxes(D, -1, -2)

    g1 = l11 / lam1[..., None]
    g2 = l22 / lam2[..., None]
    T1 = -m1 * kap1 - 0.5 * c3 * w * kappa12 * k12
    T2 = -m2 * kap2 - 0.5 * c3 / w * kappa12 * k12
    sym_c3 = 0.5 * c3 * kappa12 * (0.5 * k12 + 0.25 * kappa12 * s)
    dT1 = (0.5 * c1 * kap1 ** 2 * lam1 + m1 * kap1)[..., None] * g1 \
        + (0.5 * c12 * kap1 * kap2 * lam2)[..., None] * g2 \
        + (sym_c3 * w)[..., None] * (g1 + g2) \
        + (0.125 * c3 * kappa12 * k12 * w)[..., None] * (g1 - g2)
    dT2 = (0.5 * c12 * kap1 * kap2 * lam1)[..., None] * g1 \
        + (0.5 * c2 * kap2 ** 2 * lam2 + m2 * kap2)[..., None] * g2 \
        + (sym_c3 / w)[..., None] * (g1 + g2) \
        + (0.125 * c3 * kappa12 * k12 / w)[..., None] * (g2 - g1)
    C = 2.0 * (_outer(l11, dT1) + _outer(l22, dT2)) \
        - (T1 / lam1)[..., None, None] * _outer(l11, l11) \
        - (T2 / lam2)[..., None, None] * _outer(l22, l22)

    W = 0.5 * (c1 * k1 ** 2 + c2 * k2 ** 2) + c12 * k1 * k2 + 0.5 * c3 * k12 ** 2
    return StressState(tau, M0, C, D, E, F, W)


def new_bending(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Anisotropic stretch-invariant bending model.

    The bending measures are the fiber quantities lambda_i kappa_i - kappa0i
    along the initial principal curvature directions and the corresponding
    twist measure, so membrane stretch does not induce bending stress.  The
    membrane stress uses the algebraically cancelled form of the energy
    derivative, which is regular at kappa_i = 0.
    """
    L = ref.L_contra
    lam = cur.lambda_i
    L1, L2 = L[..., 0, :], L[..., 1, :]

    def packed_pair(u, v):
        return np.stack([u[..., 0] * v[..., 0],
                         u[..., 1] * v[..., 1],
                         0.5 * (u[..., 0] * v[..., 1] + u[..., 1] * v[..., 0])], axis=-1)

    l11 = packed_pair(L1, L1) / lam[..., 0, None]
    l22 = packed_pair(L2, L2) / lam[..., 1, None]
    s = np.sqrt(lam[..., 0] * lam[..., 1])
    l12 = 2.0 * packed_pair(L1, L2) / s[..., None]
    return _new_measures(p, lam, cur.kappa_i, cur.kappa12, ref.kappa0,
                         ref.kappa012, l11, l22, l12)


def new_bending_aligned(p: BendingParams, cur: CurrentState, ref: ReferenceState) -> StressState:
    """Fast path of the stretch-invariant model for aligned parametrizations.

    Valid when A_12 = 0 and the initial principal directions coincide with
    the parametric tangents; the direction tensors then have single nonzero
    entries 1/(A_ii a_ii)^(1/2) and all fiber measures reduce to metric
    component ratios.
    """
    A11 = ref.A_ab[..., 0, 0]
    A22 = ref.A_ab[..., 1, 1]
    a11 = cur.a_ab[..., 0, 0]
    a22 = cur.a_ab[..., 1, 1]
    cal1 = np.sqrt(A11 * a11)
    cal2 = np.sqrt(A22 * a22)
    lam = np.stack([np.sqrt(a11 / A11), np.sqrt(a22 / A22)], axis=-1)
    kap = np.stack([cur.b_ab[..., 0, 0] / a11, cur.b_ab[..., 1, 1] / a22], axis=-1)
    kappa12 = 2.0 * cur.b_ab[..., 0, 1] / np.sqrt(a11 * a22)
    kappa0 = np.stack([ref.B_ab[..., 0, 0] / A11, ref.B_ab[..., 1, 1] / A22], axis=-1)
    kappa012 = 2.0 * ref.B_ab[..., 0, 1] / np.sqrt(A11 * A22)
    zeros = np.zeros_like(cal1)
    l_dir1 = np.stack([1.0 / cal1, zeros, zeros], axis=-1)
    l_dir2 = np.stack([zeros, 1.0 / cal2, zeros], axis=-1)
    l12 = np.stack([zeros, zeros, 1.0 / np.sqrt(cal1 * cal2)], axis=-1)
    # same labeling rule as the general eigen path: the larger-magnitude
    # initial curvature carries label 1
    swap = np.abs(kappa0[..., 1]) > np.abs(kappa0[..., 0]) * (1.0 + 1e-9)
    rev = swap[..., None]
    lam = np.where(rev, lam[..., ::-1], lam)
    kap = np.where(rev, kap[..., ::-1], kap)
    kappa0 = np.where(rev, kappa0[..., ::-1], kappa0)
    l11 = np.where(rev, l_dir2, l_dir1)
    l22 = np.where(rev, l_dir1, l_dir2)
    return _new_measures(p, lam, kap, kappa12, kappa0, kappa012, l11, l22, l12)


_BENDING = {
    "koiter": koiter_bending,
    "canham": canham,
    "helfrich": helfrich,
    "aph": aph_shell,
    "new": new_bending,
}
_MEMBRANE = {
    "koiter_membrane": koiter_membrane,
    "neo_hooke": neo_hooke_membrane,
}


@dataclass
class MaterialSpec:
    """A membrane model plus a bending model (either may be absent)."""

    membrane: MembraneParams | None = None
    bending: BendingParams | None = None
    use_aligned_path: bool = False

    def evaluate(self, ref: ReferenceState, cur: CurrentState) -> StressState:
        batch = cur.J.shape
        total = _zeros_like_state(batch)
        if self.membrane is not None:
            total = total + _MEMBRANE[self.membrane.model](self.membrane, cur, ref)
        if self.bending is not None:
            if self.bending.model == "new" and self.use_aligned_path:
                part = new_bending_aligned(self.bending, cur, ref)
            else:
                part = _BENDING[self.bending.model](self.bending, cur, ref)
            if part.W is None:
                total.W = None
            elif total.W is not None:
                total.W = total.W + part.W
            total = StressState(total.tau + part.tau, total.M0 + part.M0,
                                total.C + part.C, total.D + part.D,
                                total.E + part.E, total.F + part.F, total.W)
        return total


# ---------------------------------------------------------------------------
# parameter conversions
# ---------------------------------------------------------------------------

def params_from_E_nu(E: float, nu: float, T: float) -> dict:
    """Full equivalent parameter sets of all models from 3D elastic constants.

    The maps make every bending model agree with the curvature-difference
    model in the small-deformation flat-plate regime.
    """
    if E <= 0:
        raise ValueError("E must be positive")
    if not -1.0 < nu < 1.0:
        raise ValueError("nu must lie in (-1, 1)")
    mu = T * E / (2.0 * (1.0 + nu))
    Lambda = 2.0 * mu * nu / (1.0 - nu)
    c_koi = E * T ** 3 / (12.0 * (1.0 - nu ** 2))
    out = {
        "mu": mu,
        "Lambda": Lambda,
        "c_koi": c_koi,
        "k": T ** 2 / 6.0 * (Lambda + 2.0 * mu),
        "kbar": -T ** 2 * mu / 6.0,
        "c1": T ** 2 / 12.0 * (Lambda + 2.0 * mu),
        "c2": T ** 2 / 12.0 * (Lambda + 2.0 * mu),
        "c12": T ** 2 / 12.0 * Lambda,
        "c3": T ** 2 / 12.0 * mu,
    }
    return out


def cauchy_membrane_stress(stress: StressState, cur: CurrentState) -> np.ndarray:
    """Physical (current-area) membrane stress N^ab = tau^ab/J + b^a_g M^gb/J.

    Returned as a full (..., 2, 2) matrix; it is not symmetric in general.
    """
    tau_m = _packed_to_full(stress.tau)
    M_m = _packed_to_full(stress.M0) / cur.J[..., None, None]
    b_mixed = cur.a_ab_inv @ cur.b_ab
    return tau_m / cur.J[..., None, None] + b_mixed @ M_m


def _packed_to_full(v: np.ndarray) -> np.ndarray:
    out = np.empty(v.shape[:-1] + (2, 2))
    out[..., 0, 0] = v[..., 0]
    out[..., 1, 1] = v[..., 1]
    out[..., 0, 1] = v[..., 2]
    out[..., 1, 0] = v[..., 2]
    return out
