"""Space-time Galerkin boundary elements for dynamic frictional contact in 2D elastodynamics."""
from __future__ import annotations

from .errors import (AssemblyError, ConfigError, ElastoBemError, GeometryError, NonConvergenceError,
                     ScenarioError, SingularPointError, SolverError)
from .kernels import MaterialParams
from .mesh import BoundaryMesh, Part, build_circle_mesh, build_polygon_mesh, build_square_mesh
from .timebasis import TimeGrid

__version__ = "0.1.0"

__all__ = ["AssemblyError", "BoundaryMesh", "ConfigError", "ElastoBemError", "GeometryError",
           "MaterialParams", "NonConvergenceError", "Part", "ScenarioError", "SingularPointError",
           "SolverError", "TimeGrid", "build_circle_mesh", "build_polygon_mesh", "build_square_mesh"]
