"""Collar extensions and Penrose-type mass lower bounds from boundary data."""

from .adm import AsymptoticMetricSpec, adm_mass, flat_metric_spec, isotropic_schwarzschild_spec
from .assembly import (
    CornerManifold,
    PiecewiseLinearMass,
    RotSymExterior,
    SmoothRampMass,
    boundary_data_of_exterior,
    glue,
    make_generated_exterior,
    make_schwarzschild_exterior,
    manifold_adm_mass,
    mollify_corner,
)
from .boundary import (
    AxisymS2Data,
    HomogeneousData,
    TabulatedData,
    check_cmc_condition,
    check_laplacian_condition,
    laplace_beltrami,
    schwarzschild_sphere_data,
    theta,
)
from .bounds import (
    bound_multi,
    bound_thm_delta,
    bound_thm_main,
    end_to_end_check,
    hawking_check,
    penrose_bound_minimal,
)
from .collar import (
    CollarExtension,
    build_collar,
    mean_curvature_slice,
    minimal_end_area,
    scalar_curvature_closed_form,
    verify_proposition,
)
from .errors import (
    CollarForgeError,
    ConvergenceError,
    CornerConditionError,
    InadmissibleDataError,
    InequalityViolation,
    MalformedInputError,
)
from .geometry import quasilocal_mass, unit_sphere_area
from .profile import proper_length, solve_profile

__version__ = "0.1.0"
