"""Lower bounds for quadratic integer programs by barrier coordinate ascent
on the dual of their semidefinite relaxation."""

from ._kernels import BACKEND
from .instance import GeneratorConfig, QipInstance, generate_instance, objective_value, read_instance, write_instance
from .model import Coord, build_augmented_q
from .solver import DualPoint, SolverConfig, SolveResult, solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Coord",
    "DualPoint",
    "GeneratorConfig",
    "QipInstance",
    "SolveResult",
    "SolverConfig",
    "build_augmented_q",
    "generate_instance",
    "objective_value",
    "read_instance",
    "solve",
    "write_instance",
]
