"""Assembly tests: residuals, tangents, external loads, global scatter."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from klshell.assembly import (
    LoadSpec,
    ShellModel,
    assemble_global,
    element_internal,
    element_stiffness,
)
from klshell.constitutive import BendingParams, MaterialSpec, MembraneParams
from klshell.splines import make_cylinder_patch, make_plate_patch


def stress_free_material(tag="new"):
    mem = MembraneParams("koiter_membrane", 0.6, 1.1)
    bend = {
        "koiter": BendingParams("koiter", T=0.1, Lambda=0.6, mu=1.1),
        "aph": BendingParams("aph", mu=1.1, T=0.1),
        "new": BendingParams("new", c1=0.01, c2=0.01, c12=0.003, c3=0.004),
        "canham": BendingParams("canham", c=0.01),
        "helfrich": BendingParams("helfrich", k=0.02, kbar=-0.01, H0bar=-0.25),
    }[tag]
    if tag == "aph":
        return MaterialSpec(membrane=None, bending=bend)
    return MaterialSpec(membrane=mem, bending=bend)


def octant_model(tag="new", n=2, degree=2, R=2.0):
    patch = make_cylinder_patch(R, 3.0, (0, np.pi / 2), n, n, degree)
    return ShellModel(patch, stress_free_material(tag))


# ---------------------------------------------------------------------------
# internal force
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("tag", ["koiter", "aph", "new"])
def test_identity_motion_zero_residual(tag):
    model = octant_model(tag)
    r, _ = model.assemble(np.zeros(model.n_dof), tangent=False)
    assert np.abs(r).max() < 1e-12


@pytest.mark.parametrize("tag", ["koiter", "aph", "new"])
def test_rigid_rotation_zero_residual(tag):
    model = octant_model(tag)
    X = model.tables.X_flat
    rng = np.random.default_rng(4)
    scale = None
    for seed in range(5):
        Q = Rotation.random(rng=np.random.default_rng(seed)).as_matrix()
        c = rng.standard_normal(3)
        u = (X @ Q.T + c - X).ravel()
        r, _ = model.assemble(u, tangent=False)
        if scale is None:
            canham_model = octant_model("canham")
            rc, _ = canham_model.assemble(u, tangent=False)
            scale = np.abs(rc).max()
        assert np.abs(r).max() < 1e-10 * max(scale, 1.0)


def test_canham_helfrich_rigid_rotation_nonzero():
    rng = np.random.default_rng(6)
    Q = Rotation.random(rng=rng).as_matrix()
    for tag in ("canham", "helfrich"):
        model = octant_model(tag)
        X = model.tables.X_flat
        u = (X @ Q.T - X).ravel()
        r, _ = model.assemble(u, tangent=False)
        assert np.abs(r).max() > 1e-6


def test_internal_force_is_energy_gradient():
    model = octant_model("new")
    rng = np.random.default_rng(9)
    u = 0.05 * rng.standard_normal(model.n_dof)
    r, _ = model.assemble(u, tangent=False)
    for _ in range(4):
        du = rng.standard_normal(model.n_dof)
        du /= np.linalg.norm(du)
        h = 1e-6
        dE = (model.energy(u + h * du) - model.energy(u - h * du)) / (2 * h)
        pred = r @ du
        assert abs(pred - dE) < 1e-6 * max(abs(dE), 1.0)


# ---------------------------------------------------------------------------
# tangent consistency
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("tag", ["koiter", "canham", "helfrich", "aph", "new"])
def test_global_tangent_matches_fd(tag):
    model = octant_model(tag, n=2, degree=2)
    rng = np.random.default_rng(12)
    u = 0.03 * rng.standard_normal(model.n_dof)
    r0, K = model.assemble(u)
    for _ in range(3):
        du = rng.standard_normal(model.n_dof)
        du /= np.linalg.norm(du)
        h = 1e-6
        rp, _ = model.assemble(u + h * du, tangent=False)
        rm, _ = model.assemble(u - h * du, tangent=False)
        fd = (rp - rm) / (2 * h)
        pred = K @ du
        scale = max(np.abs(fd).max(), 1e-8)
        assert np.abs(pred - fd).max() < 1e-5 * scale, tag


def test_pressure_follower_tangent_matches_fd():
    patch = make_plate_patch(2.0, 2, 2)
    material = stress_free_material("koiter")
    model = ShellModel(patch, material, LoadSpec(pressure=0.4))
    rng = np.random.default_rng(3)
    u = 0.1 * rng.standard_normal(model.n_dof)
    _, K = model.assemble(u, lam=1.0)
    for _ in range(3):
        du = rng.standard_normal(model.n_dof)
        du /= np.linalg.norm(du)
        h = 1e-6
        rp, _ = model.assemble(u + h * du, lam=1.0, tangent=False)
        rm, _ = model.assemble(u - h * du, lam=1.0, tangent=False)
        fd = (rp - rm) / (2 * h)
        assert np.abs(K @ du - fd).max() < 1e-5 * max(np.abs(fd).max(), 1e-8)


def test_hyperelastic_element_stiffness_symmetric():
    model = octant_model("new")
    rng = np.random.default_rng(5)
    u = 0.04 * rng.standard_normal(model.n_dof)
    k = element_stiffness(model, u, 1)
    # material part is symmetric for E = D^T; geometric part always is
    assert np.abs(k - k.T).max() < 1e-10 * np.abs(k).max()


def test_fast_path_equals_general_contraction():
    for tag in ("koiter", "canham", "helfrich", "aph", "new"):
        model = octant_model(tag, n=1, degree=2)
        rng = np.random.default_rng(7)
        u = 0.05 * rng.standard_normal(model.n_dof)
        k_fast = element_stiffness(model, u, 0, path="voigt")
        k_gen = element_stiffness(model, u, 0, path="general")
        assert np.abs(k_fast - k_gen).max() < 1e-12 * max(np.abs(k_gen).max(), 1.0), tag


# ---------------------------------------------------------------------------
# external loads
# ---------------------------------------------------------------------------

def test_pressure_resultant_on_flat_plate():
    L, p = 2.0, 0.7
    patch = make_plate_patch(L, 3, 2)
    model = ShellModel(patch, stress_free_material("koiter"), LoadSpec(pressure=p))
    f, _ = model.external(_cur(model), lam=1.0)
    total = f.reshape(-1, 3).sum(axis=0)
    assert_allclose(total, [0.0, 0.0, p * L * L], atol=1e-12 * p * L * L + 1e-14)


def _cur(model, u=None):
    from klshell.assembly import _current_batch

    x = model.tables.X_flat
    if u is not None:
        x = x + u.reshape(-1, 3)
    return _current_batch(model.tables, x)


def test_sinusoidal_pressure_resultant():
    L = 12.0
    patch = make_plate_patch(L, 4, 3)

    def p(X):
        return np.sin(np.pi * X[..., 0] / L) * np.sin(np.pi * X[..., 1] / L)

    model = ShellModel(patch, stress_free_material("koiter"), LoadSpec(pressure=p))
    f, _ = model.external(_cur(model), lam=1.0)
    total = f.reshape(-1, 3)[:, 2].sum()
    assert abs(total - (2 * L / np.pi) ** 2) < 1e-6 * (2 * L / np.pi) ** 2


def test_dead_load_and_point_load():
    patch = make_plate_patch(1.0, 2, 2)
    loads = LoadSpec(dead=np.array([0.0, 0.0, 2.0]),
                     point_loads=[((0.0, 0.0), np.array([1.0, 0.0, 0.0]))])
    model = ShellModel(patch, stress_free_material("koiter"), loads)
    f, _ = model.external(None, lam=1.0)
    total = f.reshape(-1, 3).sum(axis=0)
    assert_allclose(total, [1.0, 0.0, 2.0], atol=1e-12)
    # corner point load lands entirely on the corner control point
    assert_allclose(f[0], 1.0)


# ---------------------------------------------------------------------------
# global assembly
# ---------------------------------------------------------------------------

def test_zero_everything():
    model = octant_model("new")
    r, K = assemble_global(model, np.zeros(model.n_dof))
    assert np.abs(r).max() < 1e-12


def test_single_element_patch_matches_element():
    model = octant_model("new", n=1, degree=2)
    rng = np.random.default_rng(10)
    u = 0.05 * rng.standard_normal(model.n_dof)
    r, _ = model.assemble(u, tangent=False)
    f_el = element_internal(model, u, 0)
    r_manual = np.zeros(model.n_dof)
    np.add.at(r_manual, model.edof[0], f_el)
    assert_allclose(r, r_manual, atol=1e-14)


def test_two_element_additivity():
    patch = make_plate_patch(2.0, 2, 2)
    # 2x2 elements: take the sum over elements manually
    model = ShellModel(patch, stress_free_material("new"))
    rng = np.random.default_rng(11)
    u = 0.02 * rng.standard_normal(model.n_dof)
    r, _ = model.assemble(u, tangent=False)
    r_manual = np.zeros(model.n_dof)
    for e in range(len(model.tables.conn)):
        np.add.at(r_manual, model.edof[e], element_internal(model, u, e))
    assert_allclose(r, r_manual, atol=1e-13)


def test_rigid_body_null_space():
    model = octant_model("new", n=2, degree=2)
    _, K = model.assemble(np.zeros(model.n_dof))
    Kn = np.sqrt((K.data ** 2).sum())
    X = model.tables.X_flat
    vecs = []
    for i in range(3):
        v = np.zeros((len(X), 3))
        v[:, i] = 1.0
        vecs.append(v.ravel())
    for i in range(3):
        omega = np.zeros(3)
        omega[i] = 1.0
        vecs.append(np.cross(omega, X).ravel())
    for v in vecs:
        assert np.linalg.norm(K @ v) < 1e-8 * Kn * np.linalg.norm(v)


def test_assembly_deterministic():
    model = octant_model("new")
    rng = np.random.default_rng(14)
    u = 0.03 * rng.standard_normal(model.n_dof)
    r1, K1 = model.assemble(u)
    r2, K2 = model.assemble(u)
    assert np.array_equal(r1, r2)
    assert np.array_equal(K1.toarray(), K2.toarray())


def test_element_inversion_reports_element():
    from klshell.kinematics import ElementInversionError

    model = octant_model("new", n=2)
    u = np.zeros(model.n_dof)
    # collapse the first element's control points onto a line
    dofs = model.tables.conn[0]
    X = model.tables.X_flat.copy()
    u = u.reshape(-1, 3)
    u[dofs] = -X[dofs] + X[dofs][0]
    with pytest.raises(ElementInversionError) as exc:
        model.assemble(u.ravel(), tangent=False)
    assert exc.value.element_id is not None
