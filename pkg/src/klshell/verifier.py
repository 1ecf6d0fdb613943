"""Closed-form verification engine for the elementary bending test cases.

Five analytic configurations of a tube (rigid rotation, counter bending,
inflation, pure bending, torsion) are evaluated without any finite elements:
the exact fundamental forms feed the constitutive models directly, and the
resulting stress components are compared against transcribed closed forms.
A pass/fail matrix classifies every (model, case) pair, distinguishing
exact satisfaction, errors that vanish in the small-deformation or
thin-shell limits, and persistent failures.

Conventions used for the comparison quantities (matching the closed forms):
mixed components are built with the current metric, M^a_b = M0^ag a_gb and
tau^a_b = tau^ag a_gb; the physical membrane stress is lowered on its first
index, N^a_b = N^ga a_gb.  The torsion case reports contravariant M0 and tau
instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constitutive import (
    BendingParams,
    MembraneParams,
    _packed_to_full,
    aph_shell,
    canham,
    cauchy_membrane_stress,
    helfrich,
    koiter_bending,
    neo_hooke_membrane,
    new_bending,
)
from .kinematics import current_from_metric, reference_from_metric

CASES = ("stress_free", "rigid_rotation", "counter_bend", "inflation",
         "pure_bend", "torsion")
MODELS = ("koiter", "canham", "helfrich", "aph", "new")

# classification symbols: pass both / pass M only / pass N only / fail
PASS, PART_M, PART_N, FAIL = "pass", "pass_M", "pass_N", "fail"

TABLE_EXPECTED = {
    "stress_free": {"koiter": PASS, "canham": FAIL, "helfrich": FAIL, "aph": PASS, "new": PASS},
    "rigid_rotation": {m: PASS for m in MODELS},
    "counter_bend": {"koiter": PART_M, "canham": FAIL, "helfrich": FAIL, "aph": PART_M, "new": PASS},
    "inflation": {"koiter": PART_N, "canham": FAIL, "helfrich": FAIL, "aph": PART_N, "new": PASS},
    "pure_bend": {"koiter": FAIL, "canham": FAIL, "helfrich": FAIL, "aph": FAIL, "new": PASS},
    "torsion": {"koiter": PASS, "canham": FAIL, "helfrich": FAIL, "aph": FAIL, "new": PASS},
}


@dataclass
class VerifierParams:
    """Common-parameter convention of the analytic comparisons: all models
    share the bending scale c (Lambda = 0, mu T^2/6 = c); the anisotropic
    model additionally carries c12 and c3."""

    c: float
    c12: float
    c3: float
    T: float

    @property
    def mu(self) -> float:
        return 6.0 * self.c / self.T ** 2


@dataclass
class AnalyticConfig:
    """Exact tube configuration: reference and current fundamental forms."""

    tag: str
    R: float
    A_ab: np.ndarray
    B_ab: np.ndarray
    a_ab: np.ndarray
    b_ab: np.ndarray

    def states(self):
        ref = reference_from_metric(self.A_ab, self.B_ab)
        return ref, current_from_metric(ref, self.a_ab, self.b_ab)


def make_config(tag: str, R: float, r: float | None = None,
                gamma: float | None = None, rho: float | None = None) -> AnalyticConfig:
    """Closed-form configurations of the half tube (full tube for torsion)."""
    A = R ** 2 * np.eye(2)
    B = -R * np.diag([1.0, 0.0])
    if tag in ("stress_free", "rigid_rotation"):
        a, b = A.copy(), B.copy()
    elif tag == "counter_bend":
        rho = R if rho is None else rho
        a = A.copy()
        b = np.diag([0.0, -R ** 2 / rho])
    elif tag == "inflation":
        a = np.diag([r ** 2, R ** 2])
        b = np.diag([-r, 0.0])
    elif tag == "pure_bend":
        a = A.copy()
        b = np.diag([-R ** 2 / r, 0.0])
    elif tag == "torsion":
        a = R ** 2 * np.array([[1.0, gamma], [gamma, gamma ** 2 + 1.0]])
        b = -R * np.array([[1.0, gamma], [gamma, gamma ** 2]])
    else:
        raise ValueError(tag)
    return AnalyticConfig(tag, R, A, B, a, b)


def bending_stress(tag: str, p: VerifierParams, ref, cur, R: float):
    if tag == "koiter":
        return koiter_bending(BendingParams("koiter", T=p.T, Lambda=0.0, mu=p.mu), cur, ref)
    if tag == "canham":
        return canham(BendingParams("canham", c=p.c), cur, ref)
    if tag == "helfrich":
        return helfrich(BendingParams("helfrich", k=2 * p.c, kbar=-p.c,
                                      H0bar=-1.0 / (2.0 * R)), cur, ref)
    if tag == "aph":
        return aph_shell(BendingParams("aph", mu=p.mu, T=p.T), cur, ref)
    if tag == "new":
        return new_bending(BendingParams("new", c1=p.c, c2=p.c, c12=p.c12, c3=p.c3), cur, ref)
    raise ValueError(tag)


def evaluate_case(config: AnalyticConfig, model: str, p: VerifierParams) -> dict:
    """Computed comparison quantities of one (configuration, model) pair."""
    ref, cur = config.states()
    s = bending_stress(model, p, ref, cur, config.R)
    N_full = cauchy_membrane_stress(s, cur)
    N_mixed = N_full.T @ cur.a_ab
    tau_full = _packed_to_full(s.tau)
    M_full = _packed_to_full(s.M0)
    if config.tag == "torsion":
        return {"N": N_mixed, "M": M_full, "tau": tau_full}
    return {"N": N_mixed, "M": M_full @ cur.a_ab, "tau": tau_full @ cur.a_ab}


# ---------------------------------------------------------------------------
# transcribed closed forms
# ---------------------------------------------------------------------------

def expected_case(config: AnalyticConfig, model: str, p: VerifierParams) -> dict:
    """Closed-form entries for the configuration at its drawn parameters."""
    c, c12, c3, mu = p.c, p.c12, p.c3, p.mu
    R = config.R
    z = np.zeros((2, 2))
    tag = config.tag
    if tag in ("stress_free", "rigid_rotation"):
        k1 = -1.0 / R
        table = {
            "koiter": (z, z, z),
            "canham": (0.5 * c * k1 ** 2 * np.diag([-1.0, 1.0]),
                       c * k1 * np.diag([1.0, 0.0]),
                       0.5 * c * k1 ** 2 * np.diag([-3.0, 1.0])),
            "helfrich": (z, c * k1 * np.diag([0.0, -1.0]), z),
            "aph": (z, z, z),
            "new": (z, z, z),
        }
    elif tag == "counter_bend":
        k2 = config.b_ab[1, 1] / R ** 2
        table = {
            "koiter": (c * k2 ** 2 * np.diag([0.0, 1.0]),
                       c * k2 * np.diag([-1.0, 1.0]), z),
            "canham": (0.5 * c * k2 ** 2 * np.diag([1.0, -1.0]),
                       c * k2 * np.diag([0.0, 1.0]),
                       0.5 * c * k2 ** 2 * np.diag([1.0, -3.0])),
            "helfrich": (z, c * k2 * np.diag([-1.0, 0.0]), z),
            "aph": (c * k2 ** 2 * np.diag([0.0, 1.0]),
                    c * k2 * np.diag([-1.0, 1.0]), z),
            "new": (z, (c - c12) * k2 * np.diag([-1.0, 1.0]),
                    (c12 - c) * k2 ** 2 * np.diag([0.0, 1.0])),
        }
    elif tag in ("inflation", "pure_bend"):
        k1 = config.b_ab[0, 0] / config.a_ab[0, 0]
        k01 = -1.0 / R
        dk1 = k1 - k01
        if tag == "inflation":
            J = k01 / k1
            e = (k01 + k1) * (k01 ** 2 + k1 ** 2)
            d = 2.0 * k1 ** 4 + k01 * e
            table = {
                # sign differs from the printed table; rederived and checked
                # against the neighbouring entries of the same table
                "koiter": (-c * dk1 * k01 ** 2 / k1 * np.diag([1.0, 0.0]),
                           c * dk1 * k01 ** 3 / k1 ** 3 * np.diag([-1.0, 0.0]), z),
                "canham": (0.5 * c * k1 ** 2 * np.diag([-1.0, 1.0]),
                           c * J * k1 * np.diag([1.0, 0.0]),
                           0.5 * c * J * k1 ** 2 * np.diag([-3.0, 1.0])),
                "helfrich": (-0.5 * c * dk1 * np.diag([k01 + k1, -dk1]),
                             J * c * np.diag([dk1, -k01]),
                             -0.5 * J * c * dk1 * np.diag([k01 + 3.0 * k1, -dk1])),
                "aph": (-dk1 / (k01 ** 3 * k1)
                        * np.diag([mu * e - c * d * k1, mu * k1 ** 2 * (k01 + k1)]),
                        c * dk1 / k01 ** 2 * np.diag([d / k1 ** 2, k1 ** 2]),
                        -mu * dk1 / k01 ** 2 * np.diag([e / k1 ** 2, k01 + k1])),
                "new": (z, z, z),
            }
        else:
            table = {
                "koiter": (c * dk1 * k1 * np.diag([1.0, 0.0]),
                           c * dk1 * np.diag([1.0, 0.0]), z),
                "canham": (0.5 * c * k1 ** 2 * np.diag([-1.0, 1.0]),
                           c * k1 * np.diag([1.0, 0.0]),
                           0.5 * c * k1 ** 2 * np.diag([-3.0, 1.0])),
                "helfrich": (-0.5 * c * dk1 * np.diag([k01 + k1, -dk1]),
                             c * np.diag([dk1, -k01]),
                             -0.5 * c * dk1 * np.diag([3.0 * k1 + k01, -dk1])),
                "aph": (2.0 * c * k1 * dk1 * np.diag([1.0, 0.0]),
                        c * dk1 * np.diag([2.0, 1.0]), z),
                "new": (z, dk1 * np.diag([c, c12]),
                        -c * dk1 * k1 * np.diag([1.0, 0.0])),
            }
    elif tag == "torsion":
        gamma = config.a_ab[0, 1] / R ** 2
        k1 = -1.0 / R
        l2 = np.sqrt(1.0 + gamma ** 2)
        g = gamma
        table = {
            "koiter": (c * k1 ** 2 * g * np.array([[g, g ** 2], [l2 ** 2, l2 ** 2 * g]]),
                       c * k1 ** 3 * np.array([[0.0, g], [g, g ** 2]]), z),
            # tau is symmetric; the printed (2,1) sign is a typo
            "canham": (0.5 * c * k1 ** 2 * np.array([[-1.0, -2.0 * g], [0.0, 1.0]]),
                       c * k1 ** 3 * np.diag([1.0, 0.0]),
                       0.5 * c * k1 ** 4 * np.array([[g ** 2 - 3.0, -g], [-g, 1.0]])),
            "helfrich": (z, c * k1 ** 3 * np.array([[-g ** 2, g], [g, -1.0]]), z),
            "aph": (mu * np.array([[0.0, g], [g, g ** 2]]), z,
                    mu * k1 ** 2 * np.array([[-g ** 2, g], [g, 0.0]])),
            "new": (g * k1 ** 2 / l2 ** 4
                    * np.array([[0.0, 0.0], [c * g ** 2 + 2 * c3 * l2, 0.0]]),
                    g * k1 ** 3 / l2 * np.array([[c12 * g, 2 * c3], [2 * c3, c * g / l2]]),
                    -(g ** 2 * k1 ** 4 / l2)
                    * np.array([[c12 + 2 * c3, 0.0],
                                [0.0, c * g ** 2 / l2 ** 3 + 2 * c3 / l2 ** 2]])),
        }
    else:
        raise ValueError(tag)
    N, M, tau = table[model]
    return {"N": N, "M": M, "tau": tau}


def compare_tables(R=2.0, n_draws=5, seed=0, slenderness=100.0):
    """Verify every computed cell against its closed form at random draws.

    Returns a list of (case, model, quantity, error) with the maximum
    relative (nonzero entries) or scaled absolute (zero entries) error.
    """
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(n_draws):
        p = VerifierParams(c=rng.uniform(0.2, 2.0), c12=rng.uniform(0.0, 0.4),
                           c3=rng.uniform(0.05, 0.8), T=R / slenderness)
        draws = {
            "stress_free": {}, "rigid_rotation": {},
            "counter_bend": {},
            "inflation": {"r": R * rng.uniform(1.2, 3.0)},
            "pure_bend": {"r": R * rng.uniform(1.2, 3.0)},
            "torsion": {"gamma": rng.uniform(0.3, 2.0)},
        }
        for case, kw in draws.items():
            config = make_config(case, R=R, **kw)
            for model in MODELS:
                got = evaluate_case(config, model, p)
                want = expected_case(config, model, p)
                scale = max(max(np.abs(v).max() for v in want.values()),
                            p.c * (1.0 / R) ** 2)
                for key in ("N", "M", "tau"):
                    diff = np.abs(got[key] - want[key])
                    mask = np.abs(want[key]) > 1e-14 * scale
                    err = 0.0
                    if mask.any():
                        err = (diff[mask] / np.abs(want[key][mask])).max()
                    if (~mask).any():
                        err = max(err, diff[~mask].max() / (1e-2 * scale) * 1e-10)
                    results.append((case, model, key, float(err)))
    return results


# ---------------------------------------------------------------------------
# pass/fail matrix
# ---------------------------------------------------------------------------

def _bending_induced(config, model, p):
    """Stress quantities caused by the bending part alone.

    For the complete apH shell model the membrane part is subtracted by
    taking the thickness to zero; the pure bending models vanish entirely in
    that limit so the subtraction is the identity for them.
    """
    got = evaluate_case(config, model, p)
    if model == "aph":
        base = evaluate_case(config, model, _aph_membrane_only(p))
        return {k: got[k] - base[k] for k in got}
    return got


def _aph_membrane_only(p: VerifierParams) -> VerifierParams:
    # same membrane modulus, vanishing bending scale: T -> 0 at fixed mu
    T = 1e-8 * p.T
    return VerifierParams(c=p.mu * T ** 2 / 6.0, c12=0.0, c3=0.0, T=T)


def run_matrix(R=2.0, slenderness=100.0, seed=1) -> dict:
    """Classify every (case, model) cell like the summary of the analytic
    study: pass, partial pass (M or N correct), or fail.

    Exactness is judged at 1e-10 of the case's stress scales; non-exact
    errors are declared 'vanishing' when halving the deformation measure (or
    comparing against the membrane stress scale in the membrane-active
    cases) shrinks them, and 'persistent' otherwise.
    """
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 1.5)
    p = VerifierParams(c=c, c12=0.0, c3=c / 2.0, T=R / slenderness)
    tol = 1e-10
    out = {}
    for model in MODELS:
        out[("stress_free", model)] = _classify_zero_case(
            make_config("stress_free", R), model, p, tol)
        out[("rigid_rotation", model)] = _classify_rigid(R, model, p, tol)
        out[("counter_bend", model)] = _classify_counter_bend(R, model, p, tol)
        out[("inflation", model)] = _classify_inflation(R, model, p, tol)
        out[("pure_bend", model)] = _classify_pure_bend(R, model, p, tol)
        out[("torsion", model)] = _classify_torsion(R, model, p, tol)
    return out


def _classify_zero_case(config, model, p, tol):
    got = _bending_induced(config, model, p)
    sM = p.c / config.R
    sN = p.c / config.R ** 2
    ok = np.abs(got["M"]).max() <= tol * sM and np.abs(got["N"]).max() <= tol * sN
    return PASS if ok else FAIL


def _classify_rigid(R, model, p, tol):
    rot = evaluate_case(make_config("rigid_rotation", R), model, p)
    idn = evaluate_case(make_config("stress_free", R), model, p)
    sM = p.c / R
    sN = p.c / R ** 2
    ok = np.abs(rot["M"] - idn["M"]).max() <= tol * sM \
        and np.abs(rot["N"] - idn["N"]).max() <= tol * sN
    return PASS if ok else FAIL


def _antisymmetric_pair_error(M, weights=(1.0, 1.0)):
    """Deviation from the counter-bending structure M^1_1/w1 = -M^2_2/w2."""
    return abs(M[0, 0] / weights[0] + M[1, 1] / weights[1]) + abs(M[0, 1]) + abs(M[1, 0])


def _classify_counter_bend(R, model, p, tol):
    got = _bending_induced(make_config("counter_bend", R), model, p)
    k2 = 1.0 / R
    sM = p.c * k2
    m_exact = _antisymmetric_pair_error(got["M"]) <= tol * sM \
        and abs(got["M"][0, 0]) > tol * sM
    n_err = np.abs(got["N"]).max()
    if n_err <= tol * p.c * k2 ** 2:
        n_status = 2
    else:
        # relative error against the primary bending response, probed deep in
        # the mild-bend regime: vanishing => acceptable at small deformation
        rels = []
        for rho in (16.0 * R, 32.0 * R):
            g = _bending_induced(make_config("counter_bend", R, rho=rho), model, p)
            resp = p.c * (1.0 / R + 1.0 / rho) / R
            rels.append(np.abs(g["N"]).max() / resp)
        n_status = 1 if rels[1] <= 0.6 * rels[0] else 0
    if m_exact and n_status == 2:
        return PASS
    if m_exact and n_status == 1:
        return PART_M
    return FAIL


def _classify_inflation(R, model, p, tol):
    r1, r2 = 1.5 * R, 1.25 * R
    g1 = _bending_induced(make_config("inflation", R, r=r1), model, p)
    g2 = _bending_induced(make_config("inflation", R, r=r2), model, p)
    dk = lambda r: abs(1.0 / R - 1.0 / r)
    m1 = np.abs(g1["M"]).max()
    m2 = np.abs(g2["M"]).max()
    if m1 <= tol * p.c * dk(r1):
        m_status = 2
    else:
        m_status = 1 if m2 <= 0.6 * m1 else 0
    # membrane-relative check for N
    mem_scale = p.mu * (r1 / R - 1.0)
    n_ok = np.abs(g1["N"]).max() <= 1e-3 * mem_scale
    if m_status == 2 and n_ok:
        return PASS
    if m_status == 1 and n_ok:
        return PART_N
    return FAIL


def _classify_pure_bend(R, model, p, tol):
    r = 1.4 * R
    got = _bending_induced(make_config("pure_bend", R, r=r), model, p)
    dk1 = -1.0 / r + 1.0 / R
    expected_M = dk1 * np.diag([p.c, p.c12])
    m_exact = np.abs(got["M"] - expected_M).max() <= tol * p.c * abs(dk1)
    n_exact = np.abs(got["N"]).max() <= tol * p.c * dk1 / R
    if m_exact and n_exact:
        return PASS
    if m_exact:
        # distinguish a vanishing N error from one proportional to the load
        rels = []
        for rr in (1.4 * R, 1.2 * R):
            g = _bending_induced(make_config("pure_bend", R, r=rr), model, p)
            rels.append(np.abs(g["N"]).max() / (p.c * abs(1.0 / R - 1.0 / rr) / R))
        if rels[1] <= 0.6 * rels[0]:
            return PART_M
    return FAIL


def _classify_torsion(R, model, p, tol):
    gamma = 1.0
    got = _bending_induced(make_config("torsion", R, gamma=gamma), model, p)
    sM = p.c / R ** 3
    m_ok = abs(got["M"][0, 0]) <= tol * sM and abs(got["M"][1, 1]) > tol * sM
    mem = p.mu / R ** 2 * max(gamma, gamma ** 2)
    n_ok = np.abs(got["N"]).max() <= 1e-3 * mem
    return PASS if (m_ok and n_ok) else FAIL


def matrix_symbols(matrix: dict) -> str:
    """Human-readable pass/fail table."""
    sym = {PASS: " ok ", PART_M: "[ok]", PART_N: "{ok}", FAIL: "  x "}
    rows = ["case              " + "".join(f"{m:>10s}" for m in MODELS)]
    for case in CASES:
        cells = "".join(f"{sym[matrix[(case, m)]]:>10s}" for m in MODELS)
        rows.append(f"{case:18s}{cells}")
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# torsion stress comparison and moduli extraction
# ---------------------------------------------------------------------------

def torsion_stress_ratio(R_over_T: float, gamma: float) -> float:
    """Max bending-induced membrane stress of the stretch-invariant model
    over the Neo-Hookean membrane stress in the twisted-tube state."""
    R = 1.0
    T = R / R_over_T
    mu = 1.0
    c = mu * T ** 2 / 6.0
    config = make_config("torsion", R, gamma=gamma)
    ref, cur = config.states()
    if gamma == 0.0:
        s_new = new_bending(BendingParams("new", c1=c, c2=c, c12=0.0, c3=c / 2.0), cur, ref)
        return 0.0 if np.abs(s_new.tau).max() == 0.0 else np.inf
    s_new = new_bending(BendingParams("new", c1=c, c2=c, c12=0.0, c3=c / 2.0), cur, ref)
    s_mem = neo_hooke_membrane(MembraneParams("neo_hooke", 0.0, mu), cur, ref)
    return float(np.abs(s_new.tau).max() / np.abs(s_mem.tau).max())


def extract_moduli(Lambda: float, mu: float, T: float, A_ab: np.ndarray) -> dict:
    """Recover the stretch-invariant bending moduli from the flat-state
    curvature stiffness of the curvature-difference model.

    Requires an orthogonal parametrization (A_12 = 0).  Returns the
    recovered (c1, c2, c12, c3) together with the componentwise difference
    of the two packed stiffness blocks when the recovered moduli are used.
    """
    A_ab = np.asarray(A_ab, dtype=float)
    if abs(A_ab[0, 1]) > 1e-12 * max(A_ab[0, 0], A_ab[1, 1]):
        raise ValueError("moduli extraction requires an orthogonal parametrization")
    ref = reference_from_metric(A_ab, np.zeros((2, 2)))
    cur = current_from_metric(ref, A_ab.copy(), np.zeros((2, 2)))
    F_koi = koiter_bending(BendingParams("koiter", T=T, Lambda=Lambda, mu=mu), cur, ref).F
    A11, A22 = A_ab[0, 0], A_ab[1, 1]
    rec = {
        "c1": F_koi[0, 0] * A11 ** 2,
        "c2": F_koi[1, 1] * A22 ** 2,
        "c12": F_koi[0, 1] * A11 * A22,
        "c3": F_koi[2, 2] * A11 * A22,
    }
    F_new = new_bending(BendingParams("new", c1=rec["c1"], c2=rec["c2"],
                                      c12=rec["c12"], c3=rec["c3"]), cur, ref).F
    rec["max_diff"] = float(np.abs(F_new - F_koi).max())
    rec["F_scale"] = float(np.abs(F_koi).max())
    return rec
