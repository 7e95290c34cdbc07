"""Time-varying MPC walking pattern generation for a biped on a jerk-driven LIPM."""
from .model import (
    GRAVITY,
    AxisState,
    DiscreteModel,
    ModelDomainError,
    PendulumParams,
    dcm_of_state,
    discretize,
    natural_frequency,
    zmp_of_state,
)
from .prediction import HorizonDims, build_lti, build_tv
from .qp import QpProblem, QpSolution, QpStatus, solve

__version__ = "0.1.0"
