"""Galerkin P1 finite elements for bending of Cosserat (micropolar) elastic plates."""

from .assembly import BcSpec, BlockSystem, assemble, assemble_load, assemble_matrix
from .fields import FIELD_NAMES, manufactured_fields
from .material import MaterialError, MaterialParams, StiffnessCoefficients, derive_coefficients
from .mesh import TriMesh, generate_plate_with_hole, generate_rectangle, refine_uniform
from .mesh_io import parse_msh, read_mesh, write_mesh, write_msh
from .operator import LoadSpec, build_operator_table, rhs
from .postproc import (ErrorReport, convergence_study, error_norms, reconstruct_displacements,
                       resultants, stress_concentration)
from .solver import NonConvergence, SingularSystem, SolverError, solve, solve_linear
from .splitting import FieldSolution, optimal_eta, solve_fixed_eta, solve_with_splitting

__version__ = "0.1.0"

__all__ = [
    "BcSpec", "BlockSystem", "ErrorReport", "FIELD_NAMES", "FieldSolution", "LoadSpec",
    "MaterialError", "MaterialParams", "NonConvergence", "SingularSystem", "SolverError",
    "StiffnessCoefficients", "TriMesh", "assemble", "assemble_load", "assemble_matrix",
    "build_operator_table", "convergence_study", "derive_coefficients", "error_norms",
    "generate_plate_with_hole", "generate_rectangle", "manufactured_fields", "optimal_eta",
    "parse_msh", "read_mesh", "reconstruct_displacements", "refine_uniform", "resultants",
    "rhs", "solve", "solve_fixed_eta", "solve_linear", "solve_with_splitting",
    "stress_concentration", "write_mesh", "write_msh",
]
