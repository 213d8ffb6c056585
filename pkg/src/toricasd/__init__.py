"""Toric anti-self-dual Einstein metrics from odd holomorphic seeds."""
from .series import ParitySeries, solve_phi2, ode_residual, validate_seed
from .contour import GEvaluator, eval_G_jet
from .coords import JoycePoint, joyce_to_twistor, twistor_to_joyce

__all__ = [
    "ParitySeries",
    "solve_phi2",
    "ode_residual",
    "validate_seed",
    "GEvaluator",
    "eval_G_jet",
    "JoycePoint",
    "joyce_to_twistor",
    "twistor_to_joyce",
]
__version__ = "0.1.0"
