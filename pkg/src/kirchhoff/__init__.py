"""Compactness thresholds and numerical solutions for critical Kirchhoff problems on the unit ball."""

from .errors import *  # noqa: F401,F403
from .nonlinearity import PowerNonlinearity
from .nonlocal_term import (ConditionReport, HValues, NonlocalTerm, Regime, RegimeTag, Status,
                            check_conditions, classify_regime, evaluate, make_power_sum,
                            model_term)
from .functional import (PSdiagnostic, ProblemSpec, energy, energy_and_gradient, gradient,
                         ps_diagnostic, residual_norm)
from .mesh import Field, RadialGrid, bubble, bubble_asymptotics, build_radial_grid
from .solver import (RayProfile, SolverResult, minimize, mountain_pass, ray_profile,
                     two_solutions)
from .spectra import (EigenResult, ball_dirichlet_eigenvalues, linear_lambda1,
                      nonlinear_lambda1)
from .sobolev import critical_exponent, sobolev_constant
from .threshold import (AdmissibleSet, ThresholdReport, admissible_set, closed_form_oracle,
                        compactness_threshold, threshold_report, threshold_root)

__version__ = "0.1.0"
