"""Element force vectors, stiffness matrices and global assembly.

The discrete unknowns are the 3 displacement components of every control
point (dof = 3*point + component).  Internal forces and tangents follow the
packed-component formulation: with

    Lhat = [N,1^T a_1,  N,2^T a_2,  N,1^T a_2 + N,2^T a_1]
    Ghat = [Ns;11^T n,  Ns;22^T n,  Ns;12^T n + Ns;21^T n]

(Ns;ab the covariant second derivatives with current-configuration
Christoffel correction), the residual is the quadrature sum of
Lhat @ tau + Ghat @ M0 and the material stiffness contracts [Lhat|Ghat]
against the 6x6 block matrix [[C, D], [E, F]].  Geometric stiffness adds the
membrane term N,a^T tau N,b and the moment terms built from b : M0 and the
contravariant basis.  Everything is vectorized over all elements and
quadrature points of a patch; the hot path reduces to batched GEMMs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse

from .constitutive import MaterialSpec, _packed_to_full
from .kinematics import (
    CurrentState,
    ElementInversionError,
    ReferenceState,
    current_from_metric,
    det2,
    packed_to_sym,
    reference_from_frames,
    sym_to_packed,
)
from .splines import NurbsPatch, bernstein_ders


# ---------------------------------------------------------------------------
# quadrature tables
# ---------------------------------------------------------------------------

@dataclass
class PatchTables:
    """Precomputed per-element quadrature data of one patch."""

    patch: NurbsPatch
    conn: np.ndarray      # (n_el, n_e) control point indices
    N: np.ndarray         # (n_el, nq, n_e)
    dN: np.ndarray        # (n_el, nq, n_e, 2)
    d2N: np.ndarray       # (n_el, nq, n_e, 3)
    wq: np.ndarray        # (n_el, nq) parent weights times span jacobian
    ref: ReferenceState = None
    Xq: np.ndarray = None  # (n_el, nq, 3) reference positions
    dA: np.ndarray = None  # (n_el, nq) integration weights incl. area density
    aligned: bool = False

    @property
    def n_dof(self) -> int:
        nu, nv = self.patch.n_ctrl
        return 3 * nu * nv

    @property
    def X_flat(self) -> np.ndarray:
        return self.patch.control_points.reshape(-1, 3)


def _direction_tables(knots, degree, extraction, spans, gp, gw):
    """Per-span basis values of the B-spline factors at mapped Gauss points."""
    n_span = len(spans)
    ng = len(gp)
    vals = np.empty((n_span, ng, degree + 1, 3))
    t = 0.5 * (gp + 1.0)
    B = bernstein_ders(degree, t)  # (3, ng, p+1)
    for e, (lo, hi) in enumerate(spans):
        h = hi - lo
        C = extraction[e]
        vals[e, :, :, 0] = B[0] @ C
        vals[e, :, :, 1] = (B[1] @ C) / h
        vals[e, :, :, 2] = (B[2] @ C) / h ** 2
    return vals


def precompute_tables(patch: NurbsPatch, n_gauss: int | None = None) -> PatchTables:
    """Tensor Gauss quadrature tables; default rule is (degree+1)^2 points."""
    ng_u = n_gauss or patch.degree_u + 1
    ng_v = n_gauss or patch.degree_v + 1
    gp_u, gw_u = leggauss(ng_u)
    gp_v, gw_v = leggauss(ng_v)
    su, sv = patch.spans_u, patch.spans_v
    TU = _direction_tables(patch.knots_u, patch.degree_u, patch.extraction("u"), su, gp_u, gw_u)
    TV = _direction_tables(patch.knots_v, patch.degree_v, patch.extraction("v"), sv, gp_v, gw_v)
    n_eu, n_ev = len(su), len(sv)
    n_el = n_eu * n_ev
    pu, pv = patch.degree_u + 1, patch.degree_v + 1
    n_e = pu * pv
    nq = ng_u * ng_v

    conn = np.empty((n_el, n_e), dtype=np.int64)
    N = np.empty((n_el, nq, n_e))
    dN = np.empty((n_el, nq, n_e, 2))
    d2N = np.empty((n_el, nq, n_e, 3))
    wq = np.empty((n_el, nq))
    w2 = np.outer(gw_u, gw_v).ravel()
    weights_flat = patch.weights.reshape(-1)
    for eu in range(n_eu):
        hu = su[eu, 1] - su[eu, 0]
        for ev in range(n_ev):
            hv = sv[ev, 1] - sv[ev, 0]
            e = eu * n_ev + ev
            dofs = patch.element_dofs(eu, ev)
            conn[e] = dofs
            w = weights_flat[dofs]
            # tensor products of the direction tables, then rationalize
            Vu = TU[eu]  # (ng_u, pu, 3)
            Vv = TV[ev]
            q = 0
            for iu in range(ng_u):
                for iv in range(ng_v):
                    Nu, Nv = Vu[iu], Vv[iv]
                    P = w * np.outer(Nu[:, 0], Nv[:, 0]).ravel()
                    Pu = w * np.outer(Nu[:, 1], Nv[:, 0]).ravel()
                    Pv = w * np.outer(Nu[:, 0], Nv[:, 1]).ravel()
                    Puu = w * np.outer(Nu[:, 2], Nv[:, 0]).ravel()
                    Pvv = w * np.outer(Nu[:, 0], Nv[:, 2]).ravel()
                    Puv = w * np.outer(Nu[:, 1], Nv[:, 1]).ravel()
                    W = P.sum()
                    Wu, Wv = Pu.sum(), Pv.sum()
                    Wuu, Wvv, Wuv = Puu.sum(), Pvv.sum(), Puv.sum()
                    R = P / W
                    Ru = (Pu - R * Wu) / W
                    Rv = (Pv - R * Wv) / W
                    Ruu = (Puu - 2 * Ru * Wu - R * Wuu) / W
                    Rvv = (Pvv - 2 * Rv * Wv - R * Wvv) / W
                    Ruv = (Puv - Ru * Wv - Rv * Wu - R * Wuv) / W
                    N[e, q] = R
                    dN[e, q, :, 0] = Ru
                    dN[e, q, :, 1] = Rv
                    d2N[e, q, :, 0] = Ruu
                    d2N[e, q, :, 1] = Rvv
                    d2N[e, q, :, 2] = Ruv
                    q += 1
            wq[e] = w2 * (hu * hv / 4.0)

    tables = PatchTables(patch=patch, conn=conn, N=N, dN=dN, d2N=d2N, wq=wq)
    _bind_reference(tables)
    return tables


def _bind_reference(tables: PatchTables) -> None:
    X = tables.X_flat
    Xe = X[tables.conn]
    A_alpha = np.einsum("eqad,eax->eqdx", tables.dN, Xe)
    d2X = np.einsum("eqam,eax->eqmx", tables.d2N, Xe)
    tables.ref = reference_from_frames(A_alpha, d2X)
    tables.Xq = np.einsum("eqa,eax->eqx", tables.N, Xe)
    tables.dA = tables.wq * tables.ref.J_A
    A = tables.ref.A_ab
    off = np.abs(A[..., 0, 1]).max()
    scale = np.abs(A[..., 0, 0]).max()
    L = tables.ref.L_contra
    cross = max(np.abs(L[..., 0, 1]).max() * np.sqrt(np.abs(A[..., 1, 1]).max()),
                np.abs(L[..., 1, 0]).max() * np.sqrt(scale))
    tables.aligned = off < 1e-10 * scale and cross < 1e-8


# ---------------------------------------------------------------------------
# loads
# ---------------------------------------------------------------------------

@dataclass
class LoadSpec:
    """External loading: dead load per reference area, follower pressure per
    current area, and point loads at parametric points."""

    dead: Callable | np.ndarray | None = None
    pressure: Callable | float | None = None
    point_loads: list = field(default_factory=list)  # [(uv, vector)]

    def has_follower(self) -> bool:
        return self.pressure is not None


def _field_at(value, Xq):
    if callable(value):
        return np.asarray(value(Xq))
    return np.broadcast_to(np.asarray(value, dtype=float), Xq.shape[:-1] + np.shape(value)).copy() \
        if np.ndim(value) else np.full(Xq.shape[:-1], float(value))


# ---------------------------------------------------------------------------
# current configuration quantities
# ---------------------------------------------------------------------------

def _current_batch(tables: PatchTables, x_flat: np.ndarray) -> CurrentState:
    xe = x_flat[tables.conn]
    a_alpha = np.einsum("eqad,eax->eqdx", tables.dN, xe)
    d2x = np.einsum("eqam,eax->eqmx", tables.d2N, xe)
    a_ab = np.einsum("...ax,...bx->...ab", a_alpha, a_alpha)
    deta = det2(a_ab)
    if np.any(deta <= 0):
        bad = int(np.argwhere(np.any(deta <= 0, axis=tuple(range(1, deta.ndim))))[0][0])
        raise ElementInversionError(f"element {bad}: deformed metric not positive definite",
                                    element_id=bad)
    cross = np.cross(a_alpha[..., 0, :], a_alpha[..., 1, :])
    norm = np.linalg.norm(cross, axis=-1)
    n = cross / norm[..., None]
    b_packed = np.einsum("...mx,...x->...m", d2x, n)
    cur = current_from_metric(tables.ref, a_ab, packed_to_sym(b_packed))
    cur.a_alpha = a_alpha
    cur.n = n
    a_dual = np.einsum("...gd,...dx->...gx", cur.a_ab_inv, a_alpha)
    cur.Gamma = np.einsum("...gx,...mx->...gm", a_dual, d2x)
    return cur


def _hat_operators(tables: PatchTables, cur: CurrentState):
    """Lhat (n_el, nq, 3n, 3), Ghat (n_el, nq, 3n, 3) and helpers."""
    dN, d2N = tables.dN, tables.d2N
    n_el, nq, n_e = tables.N.shape
    a = cur.a_alpha
    # Lhat columns: (11, 22, 12+21)
    L = np.empty((n_el, nq, n_e, 3, 3))
    L[..., 0] = dN[..., 0, None] * a[..., None, 0, :]
    L[..., 1] = dN[..., 1, None] * a[..., None, 1, :]
    L[..., 2] = dN[..., 0, None] * a[..., None, 1, :] + dN[..., 1, None] * a[..., None, 0, :]
    Lhat = L.reshape(n_el, nq, 3 * n_e, 3)
    # covariant second derivatives with current Christoffel symbols
    Nsd = d2N - np.einsum("eqgm,eqag->eqam", cur.Gamma, dN)
    # strain-packed columns (11, 22, 12+21): the mixed column is doubled
    G = Nsd[..., None, :] * cur.n[..., None, :, None]
    Ghat = G.reshape(n_el, nq, 3 * n_e, 3).copy()
    Ghat[..., 2] *= 2.0
    return Lhat, Ghat, Nsd


# ---------------------------------------------------------------------------
# model: a patch + material + loads
# ---------------------------------------------------------------------------

class ShellModel:
    """Discretized shell: patch tables, material and loads.

    ``assemble`` returns the internal-minus-external residual and, on
    request, the consistent tangent as a CSR matrix.  The load factor scales
    the whole LoadSpec.
    """

    def __init__(self, patch: NurbsPatch, material: MaterialSpec,
                 loads: LoadSpec | None = None, n_gauss: int | None = None):
        self.patch = patch
        self.material = material
        self.loads = loads or LoadSpec()
        self.tables = precompute_tables(patch, n_gauss)
        if self.tables.aligned and material.bending is not None and material.bending.model == "new":
            material.use_aligned_path = True
        n_e = self.tables.conn.shape[1]
        edof = (3 * self.tables.conn[:, :, None] + np.arange(3)[None, None, :])
        self.edof = edof.reshape(-1, 3 * n_e)
        self._rows = np.repeat(self.edof, 3 * n_e, axis=1).ravel()
        self._cols = np.tile(self.edof, (1, 3 * n_e)).ravel()
        self._f_point = self._point_load_vector()

    @property
    def n_dof(self) -> int:
        return self.tables.n_dof

    # -- external loads ----------------------------------------------------

    def _point_load_vector(self) -> np.ndarray:
        f = np.zeros(self.n_dof)
        patch = self.patch
        for uv, vec in self.loads.point_loads:
            eu = min(int(np.searchsorted(patch.spans_u[:, 1], uv[0])), patch.n_elements[0] - 1)
            ev = min(int(np.searchsorted(patch.spans_v[:, 1], uv[1])), patch.n_elements[1] - 1)
            basis = patch.eval_basis((eu, ev), uv)
            for a, dof in enumerate(basis.dofs):
                f[3 * dof: 3 * dof + 3] += basis.values[a] * np.asarray(vec, dtype=float)
        return f

    def external(self, cur: CurrentState | None, lam: float = 1.0, tangent: bool = False):
        """External force vector (and follower-pressure stiffness)."""
        t = self.tables
        f = lam * self._f_point.copy()
        k_rows = None
        if self.loads.dead is not None:
            f0 = _field_at(self.loads.dead, t.Xq)
            fe = np.einsum("eq,eqa,eqx->eax", t.dA, t.N, f0).reshape(len(t.conn), -1)
            np.add.at(f, self.edof, lam * fe)
        if self.loads.pressure is not None:
            p = _field_at(self.loads.pressure, t.Xq)
            w = t.dA * cur.J * p
            fe = np.einsum("eq,eqa,eqx->eax", w, t.N, cur.n).reshape(len(t.conn), -1)
            np.add.at(f, self.edof, lam * fe)
            if tangent:
                a_dual = np.einsum("...gd,...dx->...gx", cur.a_ab_inv, cur.a_alpha)
                k1 = np.einsum("eq,eqa,eqi,eqgj,eqbg->eaibj", w, t.N, cur.n, a_dual, t.dN)
                k2 = np.einsum("eq,eqa,eqgi,eqj,eqbg->eaibj", w, t.N, a_dual, cur.n, t.dN)
                n_e = t.N.shape[2]
                k_rows = lam * (k1 - k2).reshape(len(t.conn), 3 * n_e, 3 * n_e)
        return f, k_rows

    # -- assembly ----------------------------------------------------------

    def assemble(self, u: np.ndarray, lam: float = 1.0, tangent: bool = True,
                 load_stiffness: bool = True):
        """Residual r = f_int - lam*f_ext and consistent tangent.

        ``load_stiffness`` controls whether the follower-pressure tangent is
        included; a classical linear analysis about the reference drops it.
        """
        t = self.tables
        x = t.X_flat + u.reshape(-1, 3)
        cur = _current_batch(t, x.reshape(-1, 3))
        stress = self.material.evaluate(t.ref, cur)
        Lhat, Ghat, Nsd = _hat_operators(t, cur)
        dA = t.dA

        f_el = np.einsum("eq,eqxm,eqm->ex", dA, Lhat, stress.tau) \
            + np.einsum("eq,eqxm,eqm->ex", dA, Ghat, stress.M0)
        r = np.zeros(self.n_dof)
        np.add.at(r, self.edof, f_el)
        f_ext, k_ext = self.external(cur, lam, tangent=tangent and load_stiffness)
        r -= f_ext
        if not tangent:
            return r, None

        K_el = self._tangent_elements(cur, stress, Lhat, Ghat, Nsd)
        if k_ext is not None:
            K_el -= k_ext
        K = sparse.coo_matrix((K_el.ravel(), (self._rows, self._cols)),
                              shape=(self.n_dof, self.n_dof)).tocsr()
        return r, K

    def _tangent_elements(self, cur, stress, Lhat, Ghat, Nsd) -> np.ndarray:
        t = self.tables
        n_el, nq, n_e = t.N.shape
        dA = t.dA
        Z = np.concatenate([Lhat, Ghat], axis=-1)  # (n_el, nq, 3n, 6)
        Mblk = np.empty((n_el, nq, 6, 6))
        Mblk[..., :3, :3] = stress.C
        Mblk[..., :3, 3:] = stress.D
        Mblk[..., 3:, :3] = stress.E
        Mblk[..., 3:, 3:] = stress.F
        Mblk *= dA[..., None, None]
        Wz = Z @ Mblk
        Zf = Z.transpose(0, 2, 1, 3).reshape(n_el, 3 * n_e, nq * 6)
        Wf = Wz.transpose(0, 2, 1, 3).reshape(n_el, 3 * n_e, nq * 6)
        K_el = Wf @ Zf.transpose(0, 2, 1)

        # membrane geometric stiffness: N,a^T tau^{ab} N,b (x) I3
        tau2 = _packed_to_full(stress.tau)
        dNw = np.einsum("eq,eqad,eqdg->eqag", dA, t.dN, tau2)
        Gm = np.einsum("eqag,eqbg->eab", dNw, t.dN)
        Kv = K_el.reshape(n_el, n_e, 3, n_e, 3)
        for i in range(3):
            Kv[:, :, i, :, i] += Gm

        # bending geometric stiffness
        b_packed = sym_to_packed(cur.b_ab)
        bM = (b_packed[..., 0] * stress.M0[..., 0]
              + b_packed[..., 1] * stress.M0[..., 1]
              + 2.0 * b_packed[..., 2] * stress.M0[..., 2])
        Ln = (t.dN[..., None] * cur.n[..., None, None, :]).transpose(0, 1, 3, 2, 4)
        Ln = Ln.reshape(n_el, nq, 2, 3 * n_e)  # (gamma, 3n)
        P = np.einsum("eq,eqgd,eqgx->eqdx", dA * bM, cur.a_ab_inv, Ln)
        Pf = P.transpose(0, 3, 1, 2).reshape(n_el, 3 * n_e, nq * 2)
        Lf = Ln.transpose(0, 3, 1, 2).reshape(n_el, 3 * n_e, nq * 2)
        K_el -= Pf @ Lf.transpose(0, 2, 1)

        v1 = np.einsum("eqam,m,eqm->eqa", Nsd, np.array([1.0, 1.0, 2.0]), stress.M0)
        a_dual = np.einsum("...gd,...dx->...gx", cur.a_ab_inv, cur.a_alpha)
        T1 = np.einsum("eqag,eqgj->eqaj", t.dN, a_dual)
        T1v = (T1[..., None, :] * cur.n[..., None, :, None]) * dA[..., None, None, None]
        Rf = T1v.reshape(n_el, nq, 3 * n_e, 3).transpose(0, 2, 1, 3).reshape(n_el, 3 * n_e, nq * 3)
        Cf = (v1[..., None, :, None] * np.eye(3)[None, None, :, None, :])
        Cf = Cf.reshape(n_el, nq, 3, 3 * n_e).reshape(n_el, nq * 3, 3 * n_e)
        kM2 = -Rf @ Cf
        K_el += kM2 + kM2.transpose(0, 2, 1)
        return K_el

    # -- diagnostics ---------------------------------------------------------

    def energy(self, u: np.ndarray) -> float:
        """Total strain energy (only for materials with an energy density)."""
        t = self.tables
        x = t.X_flat + u.reshape(-1, 3)
        cur = _current_batch(t, x)
        stress = self.material.evaluate(t.ref, cur)
        if stress.W is None:
            raise ValueError("material has no strain energy density")
        return float(np.sum(t.dA * stress.W))


# ---------------------------------------------------------------------------
# single-element entry points (spec surface, used by the unit tests)
# ---------------------------------------------------------------------------

def _single_element_model(patch, material, loads=None, n_gauss=None) -> ShellModel:
    return ShellModel(patch, material, loads, n_gauss)


def element_internal(model: ShellModel, u: np.ndarray, element: int) -> np.ndarray:
    """Internal force vector of one element (3*n_e entries)."""
    t = model.tables
    x = t.X_flat + u.reshape(-1, 3)
    cur = _current_batch(t, x)
    stress = model.material.evaluate(t.ref, cur)
    Lhat, Ghat, _ = _hat_operators(t, cur)
    f_el = np.einsum("eq,eqxm,eqm->ex", t.dA, Lhat, stress.tau) \
        + np.einsum("eq,eqxm,eqm->ex", t.dA, Ghat, stress.M0)
    return f_el[element]


def element_stiffness(model: ShellModel, u: np.ndarray, element: int,
                      path: str = "voigt") -> np.ndarray:
    """Element tangent; ``path`` selects the packed fast path or the direct
    fourth-order tensor contraction (the independent reference path)."""
    t = model.tables
    x = t.X_flat + u.reshape(-1, 3)
    cur = _current_batch(t, x)
    stress = model.material.evaluate(t.ref, cur)
    Lhat, Ghat, Nsd = _hat_operators(t, cur)
    if path == "voigt":
        K_el = model._tangent_elements(cur, stress, Lhat, Ghat, Nsd)
        return K_el[element]
    if path != "general":
        raise ValueError(path)
    return _general_element_tangent(model, cur, stress, Nsd, element)


def _full4(block: np.ndarray) -> np.ndarray:
    """Expand a packed 3x3 tangent block to c[a,b,g,d] with minor symmetries."""
    idx = np.array([[0, 2], [2, 1]])
    return block[..., idx[:, :, None, None], idx[None, None, :, :]]


def _general_element_tangent(model, cur, stress, Nsd, e) -> np.ndarray:
    """Direct tensor-contraction tangent of one element (reference path)."""
    t = model.tables
    nq = t.N.shape[1]
    n_e = t.N.shape[2]
    K = np.zeros((3 * n_e, 3 * n_e))
    c4 = _full4(stress.C)[e]
    d4 = _full4(stress.D)[e]
    e4 = _full4(stress.E)[e]
    f4 = _full4(stress.F)[e]
    mvoigt = np.array([[0, 2], [2, 1]])
    for q in range(nq):
        dN = t.dN[e, q]
        a = cur.a_alpha[e, q]
        n = cur.n[e, q]
        dA = t.dA[e, q]
        Ns = np.empty((n_e, 2, 2))
        for al in range(2):
            for be in range(2):
                Ns[:, al, be] = Nsd[e, q, :, mvoigt[al, be]]
        for al in range(2):
            for be in range(2):
                for ga in range(2):
                    for de in range(2):
                        blk_cc = np.einsum("A,i,j,B->AiBj", dN[:, al], a[be], a[ga], dN[:, de])
                        blk_cd = np.einsum("A,i,j,B->AiBj", dN[:, al], a[be], n, Ns[:, ga, de])
                        blk_ec = np.einsum("A,i,j,B->AiBj", Ns[:, al, be], n, a[ga], dN[:, de])
                        blk_ff = np.einsum("A,i,j,B->AiBj", Ns[:, al, be], n, n, Ns[:, ga, de])
                        K += dA * (c4[q, al, be, ga, de] * blk_cc
                                   + d4[q, al, be, ga, de] * blk_cd
                                   + e4[q, al, be, ga, de] * blk_ec
                                   + f4[q, al, be, ga, de] * blk_ff).reshape(3 * n_e, 3 * n_e)
        # geometric parts (same expressions as the fast path)
        tau2 = _packed_to_full(stress.tau[e, q])
        Gm = dA * dN @ tau2 @ dN.T
        Kv = K.reshape(n_e, 3, n_e, 3)
        for i in range(3):
            Kv[:, i, :, i] += Gm
        b_p = sym_to_packed(cur.b_ab[e, q])
        bM = b_p[0] * stress.M0[e, q, 0] + b_p[1] * stress.M0[e, q, 1] + 2 * b_p[2] * stress.M0[e, q, 2]
        Lng = np.einsum("ag,i->gai", dN, n).reshape(2, 3 * n_e)
        K -= dA * bM * np.einsum("gd,gx,dy->xy", cur.a_ab_inv[e, q], Lng, Lng)
        v1 = Nsd[e, q] @ (np.array([1.0, 1.0, 2.0]) * stress.M0[e, q])
        a_dual = cur.a_ab_inv[e, q] @ a
        km2 = -dA * np.einsum("ag,i,gj,B->aiBj", dN, n, a_dual, v1).reshape(3 * n_e, 3 * n_e)
        K += km2 + km2.T
    return K


def assemble_global(model: ShellModel, u: np.ndarray, lam: float = 1.0,
                    tangent: bool = True):
    """Residual and sparse tangent of the full model."""
    return model.assemble(u, lam=lam, tangent=tangent)


def external_loads(model: ShellModel, u: np.ndarray | None = None, lam: float = 1.0,
                   tangent: bool = False):
    """External force vector (and follower-pressure stiffness blocks)."""
    cur = None
    if model.loads.pressure is not None:
        x = model.tables.X_flat
        if u is not None:
            x = x + u.reshape(-1, 3)
        cur = _current_batch(model.tables, x)
    return model.external(cur, lam=lam, tangent=tangent)
