"""NURBS patch representation and basis evaluation.

A patch is a tensor-product rational spline surface given by clamped knot
vectors, a grid of 3D control points and positive weights.  Basis functions
and their first/second parametric derivatives are evaluated per element via
Bezier extraction: the B-spline basis restricted to one knot span is a linear
combination of Bernstein polynomials on that span, and the rational (NURBS)
basis follows from the quotient rule.

The module also provides generators for the two geometries used throughout
the solver: flat square plates (optionally with a skewed interior
parametrization) and circular cylinders built from exact rational quadratic
arcs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class SplineError(ValueError):
    """Invalid knot vector, degree or evaluation point."""


# ---------------------------------------------------------------------------
# knot vectors
# ---------------------------------------------------------------------------

def make_knot_vector(n_elements: int, degree: int) -> np.ndarray:
    """Clamped uniform knot vector on [0, 1] with ``n_elements`` spans.

    Interior knots have multiplicity one, so the basis is C^(degree-1)
    across element boundaries.  Degrees below 2 are rejected since the
    bending operator needs C1 continuity.
    """
    if degree < 2:
        raise SplineError(f"degree must be >= 2 for C1 continuity, got {degree}")
    if n_elements < 1:
        raise SplineError(f"n_elements must be >= 1, got {n_elements}")
    interior = np.arange(1, n_elements) / n_elements
    return np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])


def _check_clamped(knots: np.ndarray, degree: int) -> None:
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or knots.size < 2 * (degree + 1):
        raise SplineError("knot vector too short for degree")
    if np.any(np.diff(knots) < 0):
        raise SplineError("knot vector must be non-decreasing")
    if not (np.allclose(knots[: degree + 1], knots[0]) and np.allclose(knots[-degree - 1:], knots[-1])):
        raise SplineError("knot vector must be clamped (end knots repeated degree+1 times)")


def unique_spans(knots: np.ndarray, degree: int) -> np.ndarray:
    """Non-empty spans as an array of (lo, hi) pairs, one per element."""
    vals = np.asarray(knots, dtype=float)
    breaks = np.unique(vals[degree:len(vals) - degree])
    return np.column_stack([breaks[:-1], breaks[1:]])


def find_span(knots: np.ndarray, degree: int, u: float) -> int:
    """Index k with knots[k] <= u < knots[k+1] (last span closed at the right)."""
    n = len(knots) - degree - 2
    if u >= knots[n + 1]:
        return n
    if u <= knots[degree]:
        return degree
    return int(np.searchsorted(knots, u, side="right") - 1)


def bspline_basis_ders(knots: np.ndarray, degree: int, u: float, n_ders: int = 2) -> tuple[int, np.ndarray]:
    """Cox-de-Boor evaluation of the nonzero basis functions and derivatives.

    Returns the knot span index and an array of shape (n_ders+1, degree+1)
    holding values and derivatives of the degree+1 functions supported on
    the span.  Used directly as the independent oracle for the Bezier
    extraction path and for one-off evaluations.
    """
    span = find_span(knots, degree, u)
    p = degree
    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    ders = np.zeros((n_ders + 1, p + 1))
    ders[0] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, n_ders + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    r = p
    for k in range(1, n_ders + 1):
        ders[k] *= r
        r *= p - k
    return span, ders


# ---------------------------------------------------------------------------
# Bezier extraction
# ---------------------------------------------------------------------------

def _insertion_matrix(knots: np.ndarray, degree: int, u: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-knot insertion operator T with P_new = T @ P_old (Boehm)."""
    n = len(knots) - degree - 1
    k = find_span(knots, degree, u)
    T = np.zeros((n + 1, n))
    for i in range(n + 1):
        if i <= k - degree:
            T[i, i] = 1.0
        elif i >= k + 1:
            T[i, i - 1] = 1.0
        else:
            denom = knots[i + degree] - knots[i]
            alpha = (u - knots[i]) / denom if denom > 0 else 0.0
            T[i, i] = alpha
            T[i, i - 1] = 1.0 - alpha
    new_knots = np.sort(np.append(knots, u))
    return T, new_knots


def bezier_extraction(knots: np.ndarray, degree: int) -> np.ndarray:
    """Per-element extraction operators, shape (n_elements, p+1, p+1).

    Each operator C maps the element-local spline control points to the
    Bernstein control points of that span, Q = C @ P_local; its rows are
    affine combinations and sum to one.  Basis values follow from
    N_local(u) = C.T @ bernstein(t) with t the local span coordinate.
    """
    knots = np.asarray(knots, dtype=float)
    _check_clamped(knots, degree)
    p = degree
    n = len(knots) - p - 1
    M = np.eye(n)
    work = knots.copy()
    interior, counts = np.unique(knots[p + 1:n], return_counts=True)
    for u, m in zip(interior, counts):
        for _ in range(p - m):
            T, work = _insertion_matrix(work, p, u)
            M = T @ M
    spans = unique_spans(knots, p)
    ops = np.empty((len(spans), p + 1, p + 1))
    for e, (lo, _hi) in enumerate(spans):
        first = find_span(knots, p, lo) - p
        ops[e] = M[e * p: e * p + p + 1, first: first + p + 1]
    return ops


def bernstein_ders(degree: int, t: np.ndarray, n_ders: int = 2) -> np.ndarray:
    """Bernstein basis of given degree on [0, 1]: shape (n_ders+1, len(t), p+1)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = degree
    out = np.zeros((n_ders + 1, t.size, p + 1))

    def values(q: int) -> np.ndarray:
        vals = np.zeros((t.size, q + 1))
        vals[:, 0] = 1.0
        for j in range(1, q + 1):
            saved = np.zeros(t.size)
            for k in range(j):
                temp = vals[:, k].copy()
                vals[:, k] = saved + (1.0 - t) * temp
                saved = t * temp
            vals[:, j] = saved
        return vals

    out[0] = values(p)
    if n_ders >= 1 and p >= 1:
        lower = values(p - 1)
        padded = np.zeros((t.size, p + 2))
        padded[:, 1:p + 1] = lower
        out[1] = p * (padded[:, :p + 1] - padded[:, 1:p + 2])
    if n_ders >= 2 and p >= 2:
        lower2 = values(p - 2)
        padded = np.zeros((t.size, p + 3))
        padded[:, 2:p + 1] = lower2
        out[2] = p * (p - 1) * (padded[:, :p + 1] - 2 * padded[:, 1:p + 2] + padded[:, 2:p + 3])
    return out


# ---------------------------------------------------------------------------
# patch
# ---------------------------------------------------------------------------

@dataclass
class ElementBasis:
    """Rational basis of one element at one parametric point.

    values: (n_e,)   basis function values
    d1:     (n_e, 2) derivatives d/du, d/dv (global knot parameters)
    d2:     (n_e, 3) second derivatives ordered (uu, vv, uv)
    dofs:   (n_e,)   flat control-point indices (row-major over the grid)
    """

    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    dofs: np.ndarray


@dataclass
class NurbsPatch:
    """Tensor-product NURBS surface with clamped knot vectors."""

    degree_u: int
    degree_v: int
    knots_u: np.ndarray
    knots_v: np.ndarray
    control_points: np.ndarray  # (n_u, n_v, 3)
    weights: np.ndarray         # (n_u, n_v)
    _extraction: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.knots_u = np.asarray(self.knots_u, dtype=float)
        self.knots_v = np.asarray(self.knots_v, dtype=float)
        self.control_points = np.asarray(self.control_points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        _check_clamped(self.knots_u, self.degree_u)
        _check_clamped(self.knots_v, self.degree_v)
        nu = len(self.knots_u) - self.degree_u - 1
        nv = len(self.knots_v) - self.degree_v - 1
        if self.control_points.shape != (nu, nv, 3):
            raise SplineError(f"control grid must be ({nu}, {nv}, 3), got {self.control_points.shape}")
        if self.weights.shape != (nu, nv):
            raise SplineError(f"weights must be ({nu}, {nv}), got {self.weights.shape}")
        if np.any(self.weights <= 0):
            raise SplineError("weights must be strictly positive")

    # -- structure ---------------------------------------------------------

    @property
    def n_ctrl(self) -> tuple[int, int]:
        return self.control_points.shape[0], self.control_points.shape[1]

    @property
    def spans_u(self) -> np.ndarray:
        return unique_spans(self.knots_u, self.degree_u)

    @property
    def spans_v(self) -> np.ndarray:
        return unique_spans(self.knots_v, self.degree_v)

    @property
    def n_elements(self) -> tuple[int, int]:
        return len(self.spans_u), len(self.spans_v)

    def extraction(self, direction: str) -> np.ndarray:
        if direction not in self._extraction:
            if direction == "u":
                self._extraction["u"] = bezier_extraction(self.knots_u, self.degree_u)
            else:
                self._extraction["v"] = bezier_extraction(self.knots_v, self.degree_v)
        return self._extraction[direction]

    def element_dofs(self, eu: int, ev: int) -> np.ndarray:
        """Flat control-point indices of element (eu, ev), row-major in (i, j)."""
        nu, nv = self.n_ctrl
        lo_u = self.spans_u[eu, 0]
        lo_v = self.spans_v[ev, 0]
        iu0 = find_span(self.knots_u, self.degree_u, lo_u) - self.degree_u
        iv0 = find_span(self.knots_v, self.degree_v, lo_v) - self.degree_v
        iu = np.arange(iu0, iu0 + self.degree_u + 1)
        iv = np.arange(iv0, iv0 + self.degree_v + 1)
        return (iu[:, None] * nv + iv[None, :]).ravel()

    # -- evaluation --------------------------------------------------------

    def eval_basis(self, element_id: int | tuple[int, int], xi: tuple[float, float]) -> ElementBasis:
        """Rational basis, first and second derivatives at a point of one element.

        ``xi`` is given in global knot coordinates and must lie inside the
        element's span.
        """
        n_ev = self.n_elements[1]
        if isinstance(element_id, tuple):
            eu, ev = element_id
        else:
            eu, ev = divmod(int(element_id), n_ev)
        su = self.spans_u[eu]
        sv = self.spans_v[ev]
        u, v = float(xi[0]), float(xi[1])
        tol = 1e-12
        if not (su[0] - tol <= u <= su[1] + tol) or not (sv[0] - tol <= v <= sv[1] + tol):
            raise SplineError(f"xi={xi} outside element span u:{su} v:{sv}")
        hu = su[1] - su[0]
        hv = sv[1] - sv[0]
        Bu = bernstein_ders(self.degree_u, np.array([(u - su[0]) / hu]))[:, 0, :]
        Bv = bernstein_ders(self.degree_v, np.array([(v - sv[0]) / hv]))[:, 0, :]
        Cu = self.extraction("u")[eu]
        Cv = self.extraction("v")[ev]
        # chain rule from local [0,1] to knot coordinates
        Nu = np.array([Cu.T @ Bu[0], (Cu.T @ Bu[1]) / hu, (Cu.T @ Bu[2]) / hu ** 2])
        Nv = np.array([Cv.T @ Bv[0], (Cv.T @ Bv[1]) / hv, (Cv.T @ Bv[2]) / hv ** 2])
        dofs = self.element_dofs(eu, ev)
        w = self.weights.reshape(-1)[dofs]
        return _rationalize(Nu, Nv, w, dofs)

    def eval_point(self, u: float, v: float) -> np.ndarray:
        """Surface position at global parameters (u, v)."""
        eu = int(np.searchsorted(self.spans_u[:, 1], u + 0.0))
        ev = int(np.searchsorted(self.spans_v[:, 1], v + 0.0))
        eu = min(eu, len(self.spans_u) - 1)
        ev = min(ev, len(self.spans_v) - 1)
        basis = self.eval_basis((eu, ev), (u, v))
        pts = self.control_points.reshape(-1, 3)[basis.dofs]
        return basis.values @ pts

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        nu, nv = self.n_ctrl
        doc = {
            "degree_u": self.degree_u,
            "degree_v": self.degree_v,
            "knots_u": self.knots_u.tolist(),
            "knots_v": self.knots_v.tolist(),
            "shape": [nu, nv],
            "control_points": self.control_points.reshape(-1).tolist(),
            "weights": self.weights.reshape(-1).tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "NurbsPatch":
        doc = json.loads(text)
        nu, nv = doc["shape"]
        return cls(
            degree_u=doc["degree_u"],
            degree_v=doc["degree_v"],
            knots_u=np.array(doc["knots_u"]),
            knots_v=np.array(doc["knots_v"]),
            control_points=np.array(doc["control_points"]).reshape(nu, nv, 3),
            weights=np.array(doc["weights"]).reshape(nu, nv),
        )


def _rationalize(Nu: np.ndarray, Nv: np.ndarray, w: np.ndarray, dofs: np.ndarray) -> ElementBasis:
    """Tensor-product + rational quotient rule for values and two derivatives."""
    N = np.outer(Nu[0], Nv[0]).ravel()
    Nu1 = np.outer(Nu[1], Nv[0]).ravel()
    Nv1 = np.outer(Nu[0], Nv[1]).ravel()
    Nuu = np.outer(Nu[2], Nv[0]).ravel()
    Nvv = np.outer(Nu[0], Nv[2]).ravel()
    Nuv = np.outer(Nu[1], Nv[1]).ravel()

    P = w * N
    Pu, Pv = w * Nu1, w * Nv1
    Puu, Pvv, Puv = w * Nuu, w * Nvv, w * Nuv
    W = P.sum()
    Wu, Wv = Pu.sum(), Pv.sum()
    Wuu, Wvv, Wuv = Puu.sum(), Pvv.sum(), Puv.sum()

    R = P / W
    Ru = (Pu - R * Wu) / W
    Rv = (Pv - R * Wv) / W
    Ruu = (Puu - 2 * Ru * Wu - R * Wuu) / W
    Rvv = (Pvv - 2 * Rv * Wv - R * Wvv) / W
    Ruv = (Puv - Ru * Wv - Rv * Wu - R * Wuv) / W
    return ElementBasis(values=R, d1=np.column_stack([Ru, Rv]),
                        d2=np.column_stack([Ruu, Rvv, Ruv]), dofs=dofs)


# ---------------------------------------------------------------------------
# homogeneous-coordinate curve operations (for the generators)
# ---------------------------------------------------------------------------

def _insert_knots_hom(knots: np.ndarray, degree: int, ctrl_h: np.ndarray, new_knots) -> tuple[np.ndarray, np.ndarray]:
    """Insert knots into a curve given as homogeneous control points (n, k)."""
    work = np.asarray(knots, dtype=float).copy()
    P = ctrl_h.copy()
    for u in np.sort(np.asarray(new_knots, dtype=float)):
        T, work = _insertion_matrix(work, degree, u)
        P = T @ P
    return work, P


def _elevate_bezier_hom(knots: np.ndarray, degree: int, ctrl_h: np.ndarray, target: int) -> tuple[np.ndarray, np.ndarray]:
    """Degree-elevate a curve already in Bezier form (interior multiplicity = p).

    Works segment by segment with the standard Bernstein elevation; shared
    segment endpoints coincide so continuity is preserved exactly.
    """
    p = degree
    r = target - p
    if r < 0:
        raise SplineError("cannot lower degree")
    if r == 0:
        return np.asarray(knots, dtype=float), ctrl_h
    spans = unique_spans(knots, p)
    q = target
    # elevation matrix: Q_j = sum_i binom(p,i)binom(r,j-i)/binom(q,j) P_i
    E = np.zeros((q + 1, p + 1))
    for j in range(q + 1):
        for i in range(max(0, j - r), min(p, j) + 1):
            E[j, i] = math.comb(p, i) * math.comb(r, j - i) / math.comb(q, j)
    n_seg = len(spans)
    out = np.zeros((n_seg * q + 1, ctrl_h.shape[1]))
    for e in range(n_seg):
        seg = ctrl_h[e * p: e * p + p + 1]
        out[e * q: e * q + q + 1] = E @ seg
    breaks = np.concatenate([[spans[0, 0]], spans[:, 1]])
    new_knots = np.concatenate([np.full(q + 1, breaks[0]),
                                np.repeat(breaks[1:-1], q),
                                np.full(q + 1, breaks[-1])])
    return new_knots, out


def _to_bezier_form(knots: np.ndarray, degree: int, ctrl_h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raise every interior knot to multiplicity p (exact, by insertion)."""
    p = degree
    n = ctrl_h.shape[0]
    interior, counts = np.unique(np.asarray(knots)[p + 1:n], return_counts=True)
    add = []
    for u, m in zip(interior, counts):
        add.extend([u] * (p - m))
    if not add:
        return np.asarray(knots, dtype=float), ctrl_h
    return _insert_knots_hom(knots, p, ctrl_h, add)


def _uniform_refine_knots(knots: np.ndarray, degree: int, n_elements: int) -> np.ndarray:
    """Knots to insert so the curve has n_elements uniform-per-span elements."""
    spans = unique_spans(knots, degree)
    if n_elements % len(spans) != 0:
        raise SplineError(f"n_elements={n_elements} not divisible by base span count {len(spans)}")
    per = n_elements // len(spans)
    add = []
    for lo, hi in spans:
        for k in range(1, per):
            add.append(lo + (hi - lo) * k / per)
    return np.array(add)


def _tensor_patch_from_curves(knots_u, deg_u, curve_u_h, knots_v, deg_v, curve_v_h) -> NurbsPatch:
    """Patch whose homogeneous net is the tensor product of two curves.

    curve_*_h rows are (w*x, w*y, w*z, w); the surface point set is the sum
    of the two curves' position parts (a translational sweep), which is what
    both the plate and the cylinder need.
    """
    nu = curve_u_h.shape[0]
    nv = curve_v_h.shape[0]
    ctrl = np.zeros((nu, nv, 3))
    wts = np.zeros((nu, nv))
    for i in range(nu):
        wi = curve_u_h[i, 3]
        xi = curve_u_h[i, :3] / wi
        for j in range(nv):
            wj = curve_v_h[j, 3]
            xj = curve_v_h[j, :3] / wj
            ctrl[i, j] = xi + xj
            wts[i, j] = wi * wj
    return NurbsPatch(deg_u, deg_v, knots_u, knots_v, ctrl, wts)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def make_plate_patch(L: float, n: int, degree: int, skew: float = 0.0) -> NurbsPatch:
    """Flat square [0,L]^2 in the z=0 plane with n x n elements.

    With ``skew`` > 0 the interior control points are sheared in x
    proportionally to their distance from the mid line, which skews the
    parametric lines while leaving the boundary (and hence the geometry)
    unchanged.
    """
    if n < 1:
        raise SplineError("n must be >= 1")
    if not 0.0 <= skew < 1.0:
        raise SplineError("skew must lie in [0, 1)")
    knots = make_knot_vector(n, degree)
    n_cp = len(knots) - degree - 1
    # Greville abscissae reproduce linear functions exactly
    grev = np.array([knots[i + 1: i + degree + 1].mean() for i in range(n_cp)])
    x = L * grev
    ctrl = np.zeros((n_cp, n_cp, 3))
    ctrl[:, :, 0] = x[:, None]
    ctrl[:, :, 1] = x[None, :]
    if skew > 0.0:
        # shear bounded by half an element width so the map cannot fold
        interior = np.s_[1:-1, 1:-1]
        amp = 0.5 * skew * L / n
        ctrl[interior + (0,)] += amp * (2.0 * ctrl[interior + (1,)] / L - 1.0)
    return NurbsPatch(degree, degree, knots, knots.copy(), ctrl, np.ones((n_cp, n_cp)))


def make_cylinder_patch(R: float, L: float, theta_range: tuple[float, float],
                        n_circ: int, n_axial: int, degree: int,
                        axis: str = "z") -> NurbsPatch:
    """Circular cylinder segment, exact up to rational quadratic arcs.

    The circumferential direction (u) covers ``theta_range`` with 90-degree
    rational arcs (mid-point weight cos of half the arc angle), then the
    patch is degree-elevated on its Bezier segments and refined by knot
    insertion to n_circ x n_axial elements.  The cylinder axis is along the
    given coordinate axis; for axis "z" the surface is
    (R cos(theta), R sin(theta), t), t in [0, L].
    """
    if R <= 0 or L <= 0:
        raise SplineError("R and L must be positive")
    t0, t1 = float(theta_range[0]), float(theta_range[1])
    sweep = t1 - t0
    if not 0.0 < sweep <= 2.0 * np.pi + 1e-12:
        raise SplineError("theta range must span (0, 2*pi]")
    if degree < 2:
        raise SplineError("degree must be >= 2")
    n_arcs = max(1, int(np.ceil(sweep / (np.pi / 2.0) - 1e-12)))
    d = sweep / n_arcs
    w_mid = np.cos(d / 2.0)
    # Quadratic rational arc: the mid control point sits on the tangent
    # intersection at radius R/w_mid with weight w_mid, so its homogeneous
    # numerator is simply R * e(t_mid).
    knots = [0.0, 0.0, 0.0]
    arc_h = np.zeros((2 * n_arcs + 1, 4))
    for a in range(n_arcs):
        ta = t0 + a * d
        tm = ta + d / 2.0
        tb = ta + d
        arc_h[2 * a] = [R * np.cos(ta), R * np.sin(ta), 0.0, 1.0]
        arc_h[2 * a + 1] = [R * np.cos(tm), R * np.sin(tm), 0.0, w_mid]
        arc_h[2 * a + 2] = [R * np.cos(tb), R * np.sin(tb), 0.0, 1.0]
        if a < n_arcs - 1:
            knots.extend([(a + 1) / n_arcs] * 2)
    knots.extend([1.0, 1.0, 1.0])
    knots_u = np.array(knots)

    # axial line, degree 1
    line_h = np.array([[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, L, 1.0]])
    knots_v = np.array([0.0, 0.0, 1.0, 1.0])

    # elevate both directions to the requested degree (both are in Bezier form)
    knots_u, arc_h = _elevate_bezier_hom(knots_u, 2, arc_h, degree)
    knots_v, line_h = _elevate_bezier_hom(knots_v, 1, line_h, degree)
    # refine
    knots_u, arc_h = _insert_knots_hom(knots_u, degree, arc_h, _uniform_refine_knots(knots_u, degree, n_circ))
    knots_v, line_h = _insert_knots_hom(knots_v, degree, line_h, _uniform_refine_knots(knots_v, degree, n_axial))

    patch = _tensor_patch_from_curves(knots_u, degree, arc_h, knots_v, degree, line_h)
    perm = {"z": (0, 1, 2), "y": (0, 2, 1), "x": (2, 0, 1)}
    if axis not in perm:
        raise SplineError(f"unknown axis {axis!r}")
    if axis != "z":
        patch.control_points = np.ascontiguousarray(patch.control_points[:, :, perm[axis]])
    return patch
