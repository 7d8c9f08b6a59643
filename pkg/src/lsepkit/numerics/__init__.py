"""Self-contained numerical kernels: linear algebra on small complex systems,
adaptive embedded Runge-Kutta integration, and a principal-value
Kramers-Kronig transform."""

from .linalg import SingularMatrix, NotConverged, DefectiveMatrix, solve_linear, eig
from .ode import (
    OdeMethod,
    StepStats,
    Trajectory,
    StepUnderflow,
    MaxStepsExceeded,
    integrate,
)
from .kk import GridTooCoarse, kramers_kronig_real

__all__ = [
    "SingularMatrix",
    "NotConverged",
    "DefectiveMatrix",
    "solve_linear",
    "eig",
    "OdeMethod",
    "StepStats",
    "Trajectory",
    "StepUnderflow",
    "MaxStepsExceeded",
    "integrate",
    "GridTooCoarse",
    "kramers_kronig_real",
]
