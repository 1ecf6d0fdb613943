"""Constrained quasi-static solution: boundary conditions, Newton iteration.

Dirichlet conditions eliminate dofs; symmetry planes combine a Dirichlet
part (the displacement component along the plane normal vanishes on the
edge) with a penalty line integral eps/2 * int (n . e_s)^2 dS that keeps the
surface normal inside the plane, with consistent residual and tangent.

Load stepping is driven by a monotone schedule of load factors; a step that
fails to converge is bisected (at most four times) before the solver gives
up and returns the partial history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.sparse.linalg import splu

from .assembly import ShellModel


class SingularSystemError(RuntimeError):
    """Factorization failed; carries free-dof diagnostics."""


class NonConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# boundary specification
# ---------------------------------------------------------------------------

def edge_point_ids(patch, edge: str) -> np.ndarray:
    """Flat control-point ids of a patch boundary edge (u0, u1, v0, v1)."""
    nu, nv = patch.n_ctrl
    grid = np.arange(nu * nv).reshape(nu, nv)
    return {"u0": grid[0, :], "u1": grid[-1, :],
            "v0": grid[:, 0], "v1": grid[:, -1]}[edge]


@dataclass
class DirichletBC:
    """Fix the given displacement components of a set of control points."""

    points: np.ndarray
    components: tuple
    value: float = 0.0


@dataclass
class SymmetryPlane:
    """Symmetry plane with unit normal along a coordinate axis."""

    edge: str
    normal: np.ndarray
    eps: float

    def axis(self) -> int:
        n = np.asarray(self.normal, dtype=float)
        axis = int(np.argmax(np.abs(n)))
        unit = np.zeros(3)
        unit[axis] = np.sign(n[axis])
        if not np.allclose(n, unit, atol=1e-12):
            raise NotImplementedError("symmetry normals must be coordinate axes")
        if self.eps <= 0:
            raise ValueError("penalty parameter must be positive")
        return axis


@dataclass
class BoundarySpec:
    dirichlet: list = field(default_factory=list)
    symmetry_planes: list = field(default_factory=list)

    def fixed_dofs(self, patch) -> np.ndarray:
        fixed = []
        for bc in self.dirichlet:
            for c in bc.components:
                fixed.extend(3 * np.asarray(bc.points, dtype=int) + c)
        for sym in self.symmetry_planes:
            axis = sym.axis()
            fixed.extend(3 * edge_point_ids(patch, sym.edge) + axis)
        return np.unique(np.asarray(fixed, dtype=int))


# ---------------------------------------------------------------------------
# symmetry penalty (normal rotation constraint along an edge)
# ---------------------------------------------------------------------------

class EdgePenalty:
    """Penalty energy eps/2 * int_edge (n . e_s)^2 dS on one patch edge.

    Quadrature-site basis data is stacked once so evaluation is a handful of
    batched tensor operations per assembly.
    """

    def __init__(self, patch, edge: str, normal, eps: float):
        self.eps = float(eps)
        self.e_s = np.zeros(3)
        axis = SymmetryPlane(edge, normal, eps).axis()
        self.e_s[axis] = 1.0
        along_u = edge in ("v0", "v1")
        n_el = patch.n_elements[0] if along_u else patch.n_elements[1]
        degree = patch.degree_u if along_u else patch.degree_v
        gp, gw = leggauss(degree + 1)
        fixed = {"u0": 0.0, "u1": patch.knots_u[-1],
                 "v0": 0.0, "v1": patch.knots_v[-1]}[edge]
        dofs, dN, wds = [], [], []
        for e in range(n_el):
            span = (patch.spans_u if along_u else patch.spans_v)[e]
            h = span[1] - span[0]
            for t, w in zip(gp, gw):
                s = span[0] + (t + 1) / 2 * h
                xi = (s, fixed) if along_u else (fixed, s)
                if along_u:
                    ev = 0 if edge == "v0" else patch.n_elements[1] - 1
                    elem = (e, ev)
                else:
                    eu = 0 if edge == "u0" else patch.n_elements[0] - 1
                    elem = (eu, e)
                basis = patch.eval_basis(elem, xi)
                X = patch.control_points.reshape(-1, 3)[basis.dofs]
                tang = basis.d1[:, 0] @ X if along_u else basis.d1[:, 1] @ X
                dofs.append(basis.dofs)
                dN.append(basis.d1)
                wds.append(w * (h / 2) * np.linalg.norm(tang))
        self.dofs = np.array(dofs)          # (S, n_e)
        self.dN = np.array(dN)              # (S, n_e, 2)
        self.w = np.array(wds)              # (S,)
        self.dofs3 = (3 * self.dofs[:, :, None] + np.arange(3)).reshape(len(self.w), -1)

    def _frames(self, x_flat: np.ndarray):
        xe = x_flat[self.dofs]                                   # (S, n_e, 3)
        a = np.einsum("sad,sax->sdx", self.dN, xe)               # (S, 2, 3)
        cross = np.cross(a[:, 0], a[:, 1])
        n = cross / np.linalg.norm(cross, axis=-1, keepdims=True)
        return a, n

    def energy(self, x_flat: np.ndarray) -> float:
        _, n = self._frames(x_flat)
        return float(0.5 * self.eps * np.sum(self.w * (n @ self.e_s) ** 2))

    def contributions(self, x_flat: np.ndarray, n_dof: int, tangent: bool = True):
        """Residual vector and (rows, cols, data) triplets of the tangent."""
        a, n = self._frames(x_flat)
        a_ab = np.einsum("sdx,sex->sde", a, a)
        a_inv = np.linalg.inv(a_ab)
        a_dual = a_inv @ a
        S, n_e = self.dofs.shape
        Ln = (self.dN[:, :, :, None] * n[:, None, None, :])      # (S, n_e, 2, 3)
        Ln = Ln.transpose(0, 2, 1, 3).reshape(S, 2, 3 * n_e)
        proj = n @ self.e_s
        ae = a_dual @ self.e_s                                   # (S, 2)
        g_vec = -np.einsum("sg,sgx->sx", ae, Ln)
        r = np.zeros(n_dof)
        np.add.at(r, self.dofs3, (self.eps * self.w * proj)[:, None] * g_vec)
        if not tangent:
            return r, None
        La = np.einsum("sag,sdi->sgdai", self.dN, a_dual).reshape(S, 2, 2, 3 * n_e)
        k = np.einsum("sx,sy->sxy", g_vec, g_vec)
        termA = np.einsum("sg,sgdx,sdy->sxy", ae, La, Ln)
        termC = -np.einsum("s,sgd,sgx,sdy->sxy", proj, a_inv, Ln, Ln)
        k = k + proj[:, None, None] * (termA + termA.transpose(0, 2, 1) + termC)
        k *= (self.eps * self.w)[:, None, None]
        rows = np.repeat(self.dofs3, 3 * n_e, axis=1).ravel()
        cols = np.tile(self.dofs3, (1, 3 * n_e)).ravel()
        return r, (rows, cols, k.ravel())


def apply_symmetry_penalty(patch, edge: str, normal, eps: float) -> EdgePenalty:
    """Penalty construction for a symmetry plane on one patch edge.

    The returned object provides ``energy``, and ``contributions`` yielding
    the consistent residual and tangent triplets; combine it with a
    Dirichlet condition on the displacement component along the normal.
    """
    return EdgePenalty(patch, edge, normal, eps)


# ---------------------------------------------------------------------------
# linear solve
# ---------------------------------------------------------------------------

def linear_solve(K: sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse solve with a residual acceptance check."""
    Kc = sparse.csc_matrix(K)
    try:
        # the tangent has symmetric structure; the AT+A ordering beats COLAMD
        lu = splu(Kc, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SingularSystemError(
            f"sparse factorization failed for {Kc.shape[0]} dofs: {exc}") from exc
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("factorization produced non-finite solution "
                                  "(structurally singular tangent)")
    tol = 1e-10 * max(np.linalg.norm(rhs), 1e-300)
    floor = None
    for _ in range(3):  # iterative refinement for ill-conditioned penalties
        res = rhs - K @ x
        if np.linalg.norm(res) <= tol:
            return x
        if floor is None:
            # backward-stable residual floor: no direct solver can do better
            # than eps * |K| * |x| when penalty terms dominate the row sums
            knorm = np.abs(K).sum(axis=1).max()
            floor = 100.0 * np.finfo(float).eps * knorm * np.linalg.norm(x)
        x = x + lu.solve(res)
    res = np.linalg.norm(K @ x - rhs)
    if res > max(tol, floor):
        raise SingularSystemError(f"linear solve residual {res:.3e} exceeds tolerance")
    return x


# ---------------------------------------------------------------------------
# Newton-Raphson with load stepping
# ---------------------------------------------------------------------------

@dataclass
class MonitorPoint:
    name: str
    uv: tuple
    component: int


@dataclass
class StepRecord:
    load_factor: float
    iterations: int
    residual_norms: list


@dataclass
class SolveReport:
    steps: list
    u: np.ndarray
    monitors: dict
    converged: bool = True


class ConstrainedSystem:
    """Model plus boundary conditions, reduced to the free dofs."""

    def __init__(self, model: ShellModel, boundary: BoundarySpec):
        self.model = model
        self.boundary = boundary
        self.fixed = boundary.fixed_dofs(model.patch)
        mask = np.ones(model.n_dof, dtype=bool)
        mask[self.fixed] = False
        self.free = np.flatnonzero(mask)
        self.penalties = [EdgePenalty(model.patch, s.edge, s.normal, s.eps)
                          for s in boundary.symmetry_planes]

    def residual_tangent(self, u, lam, tangent=True, load_stiffness=True):
        r, K = self.model.assemble(u, lam=lam, tangent=tangent,
                                   load_stiffness=load_stiffness)
        x_flat = self.model.tables.X_flat + u.reshape(-1, 3)
        trips = []
        for pen in self.penalties:
            rp, kp = pen.contributions(x_flat, self.model.n_dof, tangent=tangent)
            r += rp
            if kp is not None:
                trips.append(kp)
        if tangent and trips:
            rows = np.concatenate([t[0] for t in trips])
            cols = np.concatenate([t[1] for t in trips])
            data = np.concatenate([t[2] for t in trips])
            K = K + sparse.coo_matrix((data, (rows, cols)), shape=K.shape).tocsr()
        return r, K

    def external_norm(self, u, lam):
        cur = None
        if self.model.loads.pressure is not None:
            from .assembly import _current_batch

            x = self.model.tables.X_flat + u.reshape(-1, 3)
            cur = _current_batch(self.model.tables, x)
        f, _ = self.model.external(cur, lam=lam, tangent=False)
        return np.linalg.norm(f[self.free])

    def monitor_value(self, u, mon: MonitorPoint) -> float:
        patch = self.model.patch
        eu = min(int(np.searchsorted(patch.spans_u[:, 1], mon.uv[0])), patch.n_elements[0] - 1)
        ev = min(int(np.searchsorted(patch.spans_v[:, 1], mon.uv[1])), patch.n_elements[1] - 1)
        basis = patch.eval_basis((eu, ev), mon.uv)
        disp = basis.values @ u.reshape(-1, 3)[basis.dofs]
        return float(disp[mon.component])


def newton_solve(model: ShellModel, boundary: BoundarySpec, schedule,
                 tol: float = 1e-8, max_iter: int = 25,
                 monitors: list | None = None, max_bisect: int = 4,
                 line_search: bool = False) -> SolveReport:
    """Path-following Newton solution over a monotone load-factor schedule.

    ``line_search`` enables residual-backtracking on the Newton update; it
    is needed for problems whose initial response is much softer than the
    loaded state (the spreading benchmark), and off by default.
    """
    system = ConstrainedSystem(model, boundary)
    free = system.free
    u = np.zeros(model.n_dof)
    steps: list[StepRecord] = []
    monitors = monitors or []
    traces = {m.name: [(0.0, system.monitor_value(u, m))] for m in monitors}

    lam_prev = 0.0
    targets = list(schedule)
    i = 0
    bisections = 0  # consecutive bisections of the current increment
    while i < len(targets):
        lam = targets[i]
        ok, u_new, rec = _newton_step(system, u, lam, tol, max_iter,
                                      line_search=line_search)
        if ok:
            u = u_new
            lam_prev = lam
            steps.append(rec)
            for m in monitors:
                traces[m.name].append((lam, system.monitor_value(u, m)))
            i += 1
            bisections = 0
            continue
        if bisections >= max_bisect:
            report = SolveReport(steps=steps, u=u, monitors=traces, converged=False)
            raise NonConvergenceError(
                f"no convergence at load factor {lam} after {max_bisect} bisections",
                report=report)
        targets.insert(i, 0.5 * (lam_prev + lam))
        bisections += 1
    return SolveReport(steps=steps, u=u, monitors=traces, converged=True)


def _newton_step(system: ConstrainedSystem, u0, lam, tol, max_iter,
                 line_search: bool = False):
    free = system.free
    u = u0.copy()
    ref_force = max(system.external_norm(u, lam), 1.0)
    norms = []
    for it in range(max_iter):
        try:
            r, K = system.residual_tangent(u, lam, tangent=True)
        except Exception:
            return False, u0, None  # inverted elements etc.: retry smaller step
        rn = np.linalg.norm(r[free])
        norms.append(rn)
        if not np.isfinite(rn):
            return False, u0, None
        if rn <= tol * ref_force:
            return True, u, StepRecord(load_factor=lam, iterations=it, residual_norms=norms)
        if it > 4 and rn > 1e4 * min(norms):
            return False, u0, None  # diverging: give the step back for bisection
        try:
            du = linear_solve(K[free][:, free], -r[free])
        except SingularSystemError:
            return False, u0, None
        if not np.all(np.isfinite(du)):
            return False, u0, None
        if line_search:
            alpha = _backtrack(system, u, du, lam, rn)
            if alpha is None:
                return False, u0, None
            u[free] += alpha * du
        else:
            u[free] += du
    return False, u0, None


def _backtrack(system, u, du, lam, rn):
    """Largest halving step that reduces the free residual norm."""
    free = system.free
    alpha = 1.0
    for _ in range(12):
        trial = u.copy()
        trial[free] += alpha * du
        try:
            r, _ = system.residual_tangent(trial, lam, tangent=False)
            rt = np.linalg.norm(r[free])
        except Exception:
            rt = np.inf
        if np.isfinite(rt) and rt < (1.0 - 1e-4 * alpha) * rn:
            return alpha
        alpha *= 0.5
    return None


def linear_static(model: ShellModel, boundary: BoundarySpec,
                  monitors: list | None = None) -> SolveReport:
    """One linearized solve about the undeformed state.

    Returns the solution of K(0) du = -r(0); for initially stress-free
    materials this is the classical linear shell solution.
    """
    system = ConstrainedSystem(model, boundary)
    r, K = system.residual_tangent(np.zeros(model.n_dof), 1.0, tangent=True,
                                   load_stiffness=False)
    u = np.zeros(model.n_dof)
    u[system.free] = linear_solve(K[system.free][:, system.free], -r[system.free])
    traces = {}
    for m in monitors or []:
        traces[m.name] = [(1.0, system.monitor_value(u, m))]
    rec = StepRecord(load_factor=1.0, iterations=1, residual_norms=[np.linalg.norm(r[system.free])])
    return SolveReport(steps=[rec], u=u, monitors=traces)
