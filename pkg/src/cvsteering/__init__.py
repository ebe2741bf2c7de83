"""EPR steering and Bell-CHSH tests for two-mode continuous-variable states.

States are represented exactly as polynomial-times-Gaussian Wigner functions
over the quadratures ``(X, P_X, Y, P_Y)``.
"""

from .bell import BellReport, BellSettings, bell_optimize, bell_sum, wigner_transform
from .errors import (
    DegenerateStateError,
    IntegrabilityError,
    MarginalNegativityError,
    SteeringError,
)
from .polygauss import MultiPoly, PolyGauss, QuadForm, integrate, marginalize, moment
from .reid import ReidReport, reid_test
from .states import LG, TMSV, Noon, PhotonSubtracted, parse_state
from .steering import EntropicReport, default_pairing, entropic_test

__version__ = "0.1.0"

__all__ = [
    "BellReport",
    "BellSettings",
    "DegenerateStateError",
    "EntropicReport",
    "IntegrabilityError",
    "LG",
    "MarginalNegativityError",
    "MultiPoly",
    "Noon",
    "PhotonSubtracted",
    "PolyGauss",
    "QuadForm",
    "ReidReport",
    "SteeringError",
    "TMSV",
    "bell_optimize",
    "bell_sum",
    "default_pairing",
    "entropic_test",
    "integrate",
    "marginalize",
    "moment",
    "parse_state",
    "reid_test",
    "wigner_transform",
]
