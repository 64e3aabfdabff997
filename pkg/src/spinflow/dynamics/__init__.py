"""Equations of motion, time stepping, initial conditions and picture maps."""

from .initial import (IC_KINDS, domain_wall_state, make_initial_state, random_smooth_state,
                      rotation_field, single_mode_state, smooth_profile, uniform_state)
from .integrate import (IntegrationError, Projections, apply_projections, integrate, max_field_norm,
                        nearest_orthogonal, richardson_ratio, step_rk4, suggest_dt)
from .rhs import (PRINTED_DEVIATIONS, rhs, rhs_antisymmetric, rhs_biaxial, rhs_landau_lifshitz,
                  rhs_matrix_degenerate, rhs_matrix_normal, rhs_nematic, rhs_so4, rhs_so5, rhs_so6,
                  rhs_su2xsu2, rhs_su3_components, rhs_uniaxial)
from .state import SimState, check_orthogonal, orthogonality_error

__all__ = [
    "IC_KINDS", "IntegrationError", "PRINTED_DEVIATIONS", "Projections", "SimState", "apply_projections",
    "check_orthogonal", "domain_wall_state", "integrate", "make_initial_state", "max_field_norm",
    "nearest_orthogonal", "orthogonality_error", "random_smooth_state", "rhs", "rhs_antisymmetric",
    "rhs_biaxial", "richardson_ratio", "rhs_landau_lifshitz", "rhs_matrix_degenerate", "rhs_matrix_normal", "rhs_nematic",
    "rhs_so4", "rhs_so5", "rhs_so6", "rhs_su2xsu2", "rhs_su3_components", "rhs_uniaxial",
    "rotation_field", "single_mode_state", "smooth_profile", "step_rk4", "suggest_dt", "uniform_state",
]
