"""Discontinuous Galerkin solvers for Hamilton-Jacobi equations."""

from .basis import ReferenceBasis, make_basis
from .cases import CASES, get_case, simulate
from .field import DGField, evaluate, project, trace
from .hamiltonian import catalog, directional
from .solver1d import SchemeParams

__all__ = ["CASES", "DGField", "ReferenceBasis", "SchemeParams", "catalog", "directional",
           "evaluate", "get_case", "make_basis", "project", "simulate", "trace"]
__version__ = "0.1.0"
