"""Smoothed-gradient iterative regularization for linear ill-posed problems."""

from .baselines import cgls, landweber, tikhonov_identity
from .descent import line_search, project_nonneg, run_descent
from .functional import Constraint, Mode, Objective
from .gradients import BoundaryCondition, GradientKind, Variant, h1_gradient, pr_conjugate
from .operators import (
    DenseOperator, Grid, LinearOperator, make_gaussian_blur, make_tomography, make_volterra,
)
from .problems import (
    ProblemInstance, add_noise, make_deblur_problem, make_numdiff_problem, make_tomo_problem,
)
from .report import RunReport, StoppingRule, StopReason
from .smoothing import neg_lap_inv, smooth_data, u_prime_of

__version__ = "0.1.0"
