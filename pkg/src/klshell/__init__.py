"""Isogeometric Kirchhoff-Love shell solver with interchangeable
hyperelastic bending models."""

__version__ = "0.1.0"

from .splines import NurbsPatch, make_cylinder_patch, make_knot_vector, make_plate_patch
from .kinematics import (
    CurrentState,
    ReferenceState,
    current_from_metric,
    current_state,
    reference_from_metric,
    reference_state,
)
from .constitutive import (
    BendingParams,
    MaterialSpec,
    MembraneParams,
    StressState,
    params_from_E_nu,
)
from .assembly import LoadSpec, ShellModel
from .solver import (
    BoundarySpec,
    DirichletBC,
    MonitorPoint,
    SolveReport,
    SymmetryPlane,
    linear_solve,
    linear_static,
    newton_solve,
)

__all__ = [
    "BendingParams", "BoundarySpec", "CurrentState", "DirichletBC", "LoadSpec",
    "MaterialSpec", "MembraneParams", "MonitorPoint", "NurbsPatch",
    "ReferenceState", "ShellModel", "SolveReport", "StressState", "SymmetryPlane",
    "current_from_metric", "current_state", "linear_solve", "linear_static",
    "make_cylinder_patch", "make_knot_vector", "make_plate_patch", "newton_solve",
    "params_from_E_nu", "reference_from_metric", "reference_state",
]
