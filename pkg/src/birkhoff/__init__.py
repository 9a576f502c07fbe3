"""Symbolic-numeric Birkhoff normal forms and action functions."""
__version__ = "0.1.0"

from .actions import (ActionConfig, ClosedCurve, CoordinateMap, MomentumMap, action_function,
                      compute_action, linear_circle_flow, normalized_circle_orbit, period_integral,
                      project_to_fiber, regularity_diagnostic)
from .coeffs import GaussQ
from .errors import BirkhoffError
from .kernels import BACKEND
from .normalizer import (check_normal_form, convergence_report, homological_split, normalize,
                         to_canonical_coordinates, transform_function)
from .quadratic import eigen_symplectic_basis, jordan_chevalley, quadratic_data
from .resonance import FrequencyModel, dual_basis, resonance_basis, resonance_lattice
from .series import FORWARD, INVERSE, TruncatedSeries, lie_transform, poisson_bracket, to_string
from .sysfile import SystemSpec, emit_system, parse_system
