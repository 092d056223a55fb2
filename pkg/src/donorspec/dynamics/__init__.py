from .antihole import antihole_spectrum
from .lambda_system import (
    LambdaParams,
    cpt_spectrum,
    cpt_steady_state,
    liouvillian,
    propagate,
    steady_state_density,
)
from .relaxation import RelaxationModel, recovery_curve, spin_flip_rate, t1

__all__ = [
    "LambdaParams",
    "RelaxationModel",
    "antihole_spectrum",
    "cpt_spectrum",
    "cpt_steady_state",
    "liouvillian",
    "propagate",
    "recovery_curve",
    "spin_flip_rate",
    "steady_state_density",
    "t1",
]
