"""Spectral-Galerkin laboratory for a damped wave equation with a logarithmic
power source on an interval.

The package discretizes
``u_tt - mu(t) d/dx(A(x) u_x) + |u_t|^p u_t = |u|^(q-2) u log|u|``
with Dirichlet ends in the sine eigenbasis, computes the variational
constants that split initial data into a stable and an unstable set, runs an
adaptive structure-aware integrator, and checks the predicted outcome
(decay rates, finite-time blow-up, unconditional global existence) against
the computed trajectory.
"""

from .dynamics import (
    BlowupReport,
    IntegratorConfig,
    Trajectory,
    detect_blowup,
    galerkin_rhs,
    integrate,
)
from .errors import (
    ConfigurationError,
    InapplicableError,
    NonFiniteFunctionalError,
    WavewellError,
)
from .field import (
    CoefficientField,
    DomainGrid,
    ModalState,
    assemble_stiffness,
    bilinear_a,
    gradient_norm_sq,
    make_coefficient_field,
)
from .functionals import (
    EnergyRecord,
    Exponents,
    StateScalars,
    blowup_F,
    nehari_I,
    potential_J,
    state_scalars,
    total_E,
)
from .lab import (
    AuditCheck,
    AuditReport,
    Classification,
    DecayFit,
    audit,
    classify,
    fit_decay,
    verify_thm52_hypothesis,
)
from .varconst import (
    WellGeometry,
    blowup_time_bound,
    compute_well_geometry,
    d_estimate,
    epsilon_prime,
    mountain_pass_lambda,
    poincare_b7,
    theta_bound,
    well_depth_m,
    xi1_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "AuditCheck",
    "AuditReport",
    "BlowupReport",
    "Classification",
    "CoefficientField",
    "ConfigurationError",
    "DecayFit",
    "DomainGrid",
    "EnergyRecord",
    "Exponents",
    "InapplicableError",
    "IntegratorConfig",
    "ModalState",
    "NonFiniteFunctionalError",
    "StateScalars",
    "Trajectory",
    "WavewellError",
    "WellGeometry",
    "assemble_stiffness",
    "audit",
    "bilinear_a",
    "blowup_F",
    "blowup_time_bound",
    "classify",
    "compute_well_geometry",
    "d_estimate",
    "detect_blowup",
    "epsilon_prime",
    "fit_decay",
    "galerkin_rhs",
    "gradient_norm_sq",
    "integrate",
    "make_coefficient_field",
    "mountain_pass_lambda",
    "nehari_I",
    "poincare_b7",
    "potential_J",
    "state_scalars",
    "theta_bound",
    "total_E",
    "verify_thm52_hypothesis",
    "well_depth_m",
    "xi1_estimate",
    "__version__",
]
