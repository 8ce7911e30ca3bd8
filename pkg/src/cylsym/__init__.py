"""cylsym: a numerical laboratory for the symmetry vs. symmetry-breaking
question of extremals of a weighted interpolation inequality, worked on the
equivalent cylinder formulation.

The package computes every closed-form object of the problem (parameter
chart conversions, the explicit radial extremal and its optimal constant,
the instability curve, the linearized spectrum) and complements them with a
discretized minimizer of the cylinder quotient, from which the numerical
symmetry-breaking boundary Lambda*(p) is traced and compared against the
spectral threshold.
"""

from .boundary import (
    BoundaryCurve,
    BoundaryOptions,
    BoundaryPoint,
    default_bracket,
    detect_breaking,
    lambda_star_estimate,
    mu1_numeric,
    mu1_sign_change_bracket,
    mu1_threshold,
    scan,
)
from .errors import BracketError, ConvergenceError, DomainError, NoBoundStateError
from .grid import Field, Grid, OneDGrid, SphereFactor, load_field, save_field
from .params import (
    CknParams,
    CylParams,
    ckn_from_cyl,
    critical_a,
    critical_p,
    cyl_from_ckn,
    fs_b,
    fs_lambda,
    kelvin_dual,
)
from .radial import (
    RadialConstants,
    RadialProfile,
    c_p_gamma,
    c_p_normalized,
    c_p_quadrature,
    inv_c_star_closed_form,
    kappa_star,
    lp_mass_1d_closed_form,
    lp_mass_1d_quadrature,
    lp_mass_cyl_closed_form,
    radial_constants,
    sphere_area,
    u_star,
    w_star,
)
from .solver import (
    MinimizeOptions,
    MinimizeReport,
    angular_deviation,
    el_residual,
    energy,
    gaussian_mode_evaluator,
    minimize,
    mode_field,
    perturbed_radial_init,
    radial_evaluator,
    sample_radial,
    scaling_check,
)
from .spectral import (
    EigenResult,
    ModeProblem,
    mu1_closed_form,
    poschl_teller_ground,
    proposition_regime_ok,
    psi1,
    q_form,
)

__version__ = "0.1.0"
