"""conewright: numerical estimation of tangent cones and nonsmooth
subdifferentials for expression-defined functions, with certifying searches
for generalized mean-value points."""

from . import errors
from .cones import (
    ConeEstimate,
    DirectionSet,
    ScaleSchedule,
    btc_hyperplane_membership,
    distance_realization_check,
    estimate_btc_cone,
    estimate_peano_cone,
    normal_cone_member,
)
from .expr import (
    Box,
    Disk,
    arity,
    differentiate,
    evaluate,
    evaluate_batch,
    gradient,
    lipschitz_estimate,
    parse,
    to_source,
)
from .geometry import LinearFunctional, ProjectiveSlope, SlopeSet, angle, project, slope_union
from .kernels import active_backend, set_backend
from .mvt import (
    MeanValueCertificate,
    check_boundary_affine,
    lagrange_search,
    lebourg_certify,
    noncompact_counterexample_report,
    normal_lagrange_search,
    rolle_search,
)
from .subdiff import (
    ConvexSetApprox,
    SubdiffEstimate1D,
    btc_subdifferential_1d,
    clarke_directional,
    clarke_subdifferential,
    compare_clarke_btc,
    frechet_member,
    limiting_subdifferential,
)

__version__ = "0.1.0"
