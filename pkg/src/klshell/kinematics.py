"""Surface kinematics at quadrature points.

Computes first and second fundamental forms, mean/Gaussian/principal
curvatures, Christoffel symbols and the stretch/curvature measures along the
initial principal curvature directions.  All functions are vectorized over
arbitrary leading batch dimensions; a single quadrature point is simply the
unbatched case.

Symmetric 2x2 tensors are stored either as (..., 2, 2) matrices or packed in
the order (11, 22, 12); second parametric derivatives use the same packing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularGeometryError(ValueError):
    """Reference surface metric is (numerically) degenerate."""


class ElementInversionError(ValueError):
    """Deformed element has non-positive metric determinant."""

    def __init__(self, message, element_id=None):
        super().__init__(message)
        self.element_id = element_id


# ---------------------------------------------------------------------------
# small tensor helpers
# ---------------------------------------------------------------------------

def sym_to_packed(t: np.ndarray) -> np.ndarray:
    """(..., 2, 2) symmetric tensor -> (..., 3) in (11, 22, 12) order."""
    return np.stack([t[..., 0, 0], t[..., 1, 1], t[..., 0, 1]], axis=-1)


def packed_to_sym(v: np.ndarray) -> np.ndarray:
    """(..., 3) packed components -> (..., 2, 2) symmetric tensor."""
    out = np.empty(v.shape[:-1] + (2, 2), dtype=v.dtype)
    out[..., 0, 0] = v[..., 0]
    out[..., 1, 1] = v[..., 1]
    out[..., 0, 1] = v[..., 2]
    out[..., 1, 0] = v[..., 2]
    return out


def det2(t: np.ndarray) -> np.ndarray:
    return t[..., 0, 0] * t[..., 1, 1] - t[..., 0, 1] * t[..., 1, 0]


def inv2(t: np.ndarray, det: np.ndarray | None = None) -> np.ndarray:
    d = det2(t) if det is None else det
    out = np.empty_like(t)
    out[..., 0, 0] = t[..., 1, 1]
    out[..., 1, 1] = t[..., 0, 0]
    out[..., 0, 1] = -t[..., 0, 1]
    out[..., 1, 0] = -t[..., 1, 0]
    return out / d[..., None, None]


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass
class ReferenceState:
    """Reference-surface quantities at quadrature points.

    Metric-level fields are always present; the 3D frame fields (A_alpha, N,
    Gamma) are None when the state was synthesized from raw metric data.
    L_contra[..., i, :] holds the contravariant components of the i-th
    initial principal curvature direction, normalized against A_ab.
    """

    A_ab: np.ndarray            # (..., 2, 2)
    A_ab_inv: np.ndarray        # (..., 2, 2)
    B_ab: np.ndarray            # (..., 2, 2)
    B_mixed: np.ndarray         # (..., 2, 2)
    J_A: np.ndarray             # (...)
    kappa0: np.ndarray          # (..., 2)
    L_contra: np.ndarray        # (..., 2, 2)
    kappa012: np.ndarray        # (...)
    H0: np.ndarray              # (...)
    A_alpha: np.ndarray | None = None   # (..., 2, 3)
    N: np.ndarray | None = None         # (..., 3)
    Gamma: np.ndarray | None = None     # (..., 2, 3): Gamma[gamma, m]


@dataclass
class CurrentState:
    """Deformed-surface quantities at quadrature points (same batching)."""

    a_ab: np.ndarray
    a_ab_inv: np.ndarray
    b_ab: np.ndarray
    J: np.ndarray
    H: np.ndarray
    kappa_gauss: np.ndarray
    kappa_star: np.ndarray      # (..., 2): H + s, H - s
    eps_ab: np.ndarray
    K_ab: np.ndarray
    lambda_i: np.ndarray        # (..., 2)
    kappa_i: np.ndarray         # (..., 2)
    kappa12: np.ndarray         # (...)
    a_alpha: np.ndarray | None = None
    n: np.ndarray | None = None
    Gamma: np.ndarray | None = None


# ---------------------------------------------------------------------------
# principal directions of the reference surface
# ---------------------------------------------------------------------------

def _principal_reference(A_ab, A_inv, B_ab):
    """Eigenpairs of B^a_b with metric normalization and deterministic tie rules.

    Returns kappa0 (..., 2), L_contra (..., 2, 2) and kappa012 (...).
    The direction most aligned with A_1 is labeled 1; at umbilic points L_1
    is taken along A_1 and L_2 as its metric-orthogonal complement; signs are
    fixed so that L_i . A_i >= 0.
    """
    Bm = A_inv @ B_ab
    H0 = 0.5 * (Bm[..., 0, 0] + Bm[..., 1, 1])
    K0 = det2(Bm)
    disc = np.sqrt(np.maximum(H0 ** 2 - K0, 0.0))
    ka = H0 + disc
    kb = H0 - disc

    def eigvec(kappa):
        # rows of (Bm - kappa I) are orthogonal to the eigenvector
        v1 = np.stack([Bm[..., 0, 1], kappa - Bm[..., 0, 0]], axis=-1)
        v2 = np.stack([kappa - Bm[..., 1, 1], Bm[..., 1, 0]], axis=-1)
        n1 = np.linalg.norm(v1, axis=-1)
        n2 = np.linalg.norm(v2, axis=-1)
        return np.where((n1 >= n2)[..., None], v1, v2)

    va = eigvec(ka)
    vb = eigvec(kb)

    # umbilic fallback: direction of A_1 and its metric-orthogonal complement
    scale = np.maximum(np.abs(ka), np.abs(kb))
    lref = det2(A_ab) ** 0.25
    umb = np.abs(ka - kb) < 1e-9 * np.maximum(scale, 1.0 / lref)
    e1 = np.zeros_like(va)
    e1[..., 0] = 1.0
    e2 = np.stack([-A_ab[..., 0, 1], A_ab[..., 0, 0]], axis=-1)
    va = np.where(umb[..., None], e1, va)
    vb = np.where(umb[..., None], e2, vb)

    def metric_normalize(v):
        q = np.einsum("...a,...ab,...b->...", v, A_ab, v)
        return v / np.sqrt(q)[..., None]

    va = metric_normalize(va)
    vb = metric_normalize(vb)

    # Label 1 carries the larger-magnitude curvature so that the labeling
    # (and with it any anisotropic moduli) does not depend on the surface
    # parametrization or orientation; parametric alignment with A_1 breaks
    # exact-magnitude ties and the umbilic case.
    def align_score(v):
        num = np.abs(v[..., 0] * A_ab[..., 0, 0] + v[..., 1] * A_ab[..., 1, 0])
        return num / np.sqrt(A_ab[..., 0, 0])

    mag_gap = np.abs(ka) - np.abs(kb)
    tie = np.abs(mag_gap) < 1e-9 * np.maximum(scale, 1.0 / lref)
    swap = np.where(tie, align_score(vb) > align_score(va), mag_gap < 0)
    k1 = np.where(swap, kb, ka)
    k2 = np.where(swap, ka, kb)
    L1 = np.where(swap[..., None], vb, va)
    L2 = np.where(swap[..., None], va, vb)

    # sign convention L_i . A_i >= 0
    s1 = L1[..., 0] * A_ab[..., 0, 0] + L1[..., 1] * A_ab[..., 1, 0]
    s2 = L2[..., 0] * A_ab[..., 0, 1] + L2[..., 1] * A_ab[..., 1, 1]
    L1 = np.where((s1 < 0)[..., None], -L1, L1)
    L2 = np.where((s2 < 0)[..., None], -L2, L2)

    kappa0 = np.stack([k1, k2], axis=-1)
    L = np.stack([L1, L2], axis=-2)
    kappa012 = 2.0 * np.einsum("...a,...ab,...b->...", L1, B_ab, L2)
    return kappa0, L, kappa012


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def reference_from_frames(A_alpha: np.ndarray, d2X: np.ndarray, det_tol: float = 1e-14) -> ReferenceState:
    """Reference state from tangents A_alpha (..., 2, 3) and second
    derivatives d2X (..., 3, 3) packed (uu, vv, uv)."""
    A_ab = np.einsum("...ax,...bx->...ab", A_alpha, A_alpha)
    detA = det2(A_ab)
    if np.any(detA <= det_tol):
        raise SingularGeometryError("degenerate reference metric (det A <= tol)")
    A_inv = inv2(A_ab, detA)
    cross = np.cross(A_alpha[..., 0, :], A_alpha[..., 1, :])
    J_A = np.linalg.norm(cross, axis=-1)
    N = cross / J_A[..., None]
    B_packed = np.einsum("...mx,...x->...m", d2X, N)
    B_ab = packed_to_sym(B_packed)
    B_mixed = A_inv @ B_ab
    # Christoffel symbols: Gamma^g_m = X,m . A^g, with A^g = A^gd A_d
    A_dual = np.einsum("...gd,...dx->...gx", A_inv, A_alpha)
    Gamma = np.einsum("...gx,...mx->...gm", A_dual, d2X)
    kappa0, L, kappa012 = _principal_reference(A_ab, A_inv, B_ab)
    return ReferenceState(A_ab=A_ab, A_ab_inv=A_inv, B_ab=B_ab, B_mixed=B_mixed,
                          J_A=J_A, kappa0=kappa0, L_contra=L, kappa012=kappa012,
                          H0=0.5 * np.einsum("...ab,...ab->...", A_inv, B_ab),
                          A_alpha=A_alpha, N=N, Gamma=Gamma)


def reference_from_metric(A_ab: np.ndarray, B_ab: np.ndarray) -> ReferenceState:
    """Reference state from raw fundamental forms (verifier and tests)."""
    A_ab = np.asarray(A_ab, dtype=float)
    B_ab = np.asarray(B_ab, dtype=float)
    detA = det2(A_ab)
    if np.any(detA <= 0):
        raise SingularGeometryError("A_ab must be positive definite")
    A_inv = inv2(A_ab, detA)
    kappa0, L, kappa012 = _principal_reference(A_ab, A_inv, B_ab)
    return ReferenceState(A_ab=A_ab, A_ab_inv=A_inv, B_ab=B_ab,
                          B_mixed=A_inv @ B_ab, J_A=np.sqrt(detA),
                          kappa0=kappa0, L_contra=L, kappa012=kappa012,
                          H0=0.5 * np.einsum("...ab,...ab->...", A_inv, B_ab))


def current_from_metric(ref: ReferenceState, a_ab: np.ndarray, b_ab: np.ndarray,
                        element_id=None) -> CurrentState:
    """Deformed-state measures from the current fundamental forms."""
    a_ab = np.asarray(a_ab, dtype=float)
    b_ab = np.asarray(b_ab, dtype=float)
    deta = det2(a_ab)
    if np.any(deta <= 0):
        raise ElementInversionError("deformed metric not positive definite",
                                    element_id=element_id)
    a_inv = inv2(a_ab, deta)
    J = np.sqrt(deta / det2(ref.A_ab))
    H = 0.5 * np.einsum("...ab,...ab->...", a_inv, b_ab)
    kappa = det2(b_ab) / deta
    s = np.sqrt(np.maximum(H ** 2 - kappa, 0.0))
    kappa_star = np.stack([H + s, H - s], axis=-1)

    L = ref.L_contra
    lam = np.sqrt(np.einsum("...ia,...ab,...ib->...i", L, a_ab, L))
    kap = np.einsum("...ia,...ab,...ib->...i", L, b_ab, L) / lam ** 2
    k12 = 2.0 * np.einsum("...a,...ab,...b->...", L[..., 0, :], b_ab, L[..., 1, :]) \
        / (lam[..., 0] * lam[..., 1])
    return CurrentState(a_ab=a_ab, a_ab_inv=a_inv, b_ab=b_ab, J=J, H=H,
                        kappa_gauss=kappa, kappa_star=kappa_star,
                        eps_ab=0.5 * (a_ab - ref.A_ab), K_ab=b_ab - ref.B_ab,
                        lambda_i=lam, kappa_i=kap, kappa12=k12)


def current_from_frames(ref: ReferenceState, a_alpha: np.ndarray, d2x: np.ndarray,
                        element_id=None) -> CurrentState:
    """Deformed state from tangents and second derivatives (FE path)."""
    a_ab = np.einsum("...ax,...bx->...ab", a_alpha, a_alpha)
    cross = np.cross(a_alpha[..., 0, :], a_alpha[..., 1, :])
    norm = np.linalg.norm(cross, axis=-1)
    if np.any(norm <= 0):
        raise ElementInversionError("deformed tangents are parallel", element_id=element_id)
    n = cross / norm[..., None]
    b_packed = np.einsum("...mx,...x->...m", d2x, n)
    state = current_from_metric(ref, a_ab, packed_to_sym(b_packed), element_id=element_id)
    state.a_alpha = a_alpha
    state.n = n
    a_dual = np.einsum("...gd,...dx->...gx", state.a_ab_inv, a_alpha)
    state.Gamma = np.einsum("...gx,...mx->...gm", a_dual, d2x)
    return state


# ---------------------------------------------------------------------------
# FE entry points (single element basis + control values)
# ---------------------------------------------------------------------------

def reference_state(X_e: np.ndarray, basis) -> ReferenceState:
    """Reference state at one quadrature point of one element."""
    A_alpha = np.stack([basis.d1[:, 0] @ X_e, basis.d1[:, 1] @ X_e], axis=0)
    d2X = np.stack([basis.d2[:, m] @ X_e for m in range(3)], axis=0)
    return reference_from_frames(A_alpha, d2X)


def current_state(x_e: np.ndarray, basis, ref: ReferenceState) -> CurrentState:
    """Deformed state at one quadrature point of one element."""
    a_alpha = np.stack([basis.d1[:, 0] @ x_e, basis.d1[:, 1] @ x_e], axis=0)
    d2x = np.stack([basis.d2[:, m] @ x_e for m in range(3)], axis=0)
    return current_from_frames(ref, a_alpha, d2x)


# ---------------------------------------------------------------------------
# parametrization invariance helper
# ---------------------------------------------------------------------------

def invariant_summary(ref: ReferenceState, cur: CurrentState, orientation: float = 1.0) -> np.ndarray:
    """Parametrization-invariant quantities, principal pairs sorted by kappa0.

    Returns [lam, kap (sorted by the matching kappa0), kappa12^2, H,
    kappa_gauss, J] for comparison across reparametrizations of the same
    surface.  ``orientation`` = -1 accounts for a normal flip (odd curvature
    quantities change sign, even ones do not).
    """
    kappa0 = orientation * ref.kappa0
    order = np.argsort(kappa0, axis=-1)
    lam = np.take_along_axis(cur.lambda_i, order, axis=-1)
    kap = np.take_along_axis(orientation * cur.kappa_i, order, axis=-1)
    return np.concatenate([
        lam, kap,
        cur.kappa12[..., None] ** 2,
        orientation * cur.H[..., None],
        cur.kappa_gauss[..., None],
        cur.J[..., None],
    ], axis=-1)


def reparametrization_check(pair_a, pair_b) -> float:
    """Max deviation of the invariant summaries of two state pairs.

    A reparametrization may flip the surface normal, so both orientations of
    the second pair are tried.
    """
    sa = invariant_summary(*pair_a)
    devs = [np.max(np.abs(sa - invariant_summary(*pair_b, orientation=o)))
            for o in (1.0, -1.0)]
    return float(min(devs))
