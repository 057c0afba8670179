"""Double normals of convex bodies.

Exact enumeration on polytopes, critical-point search on smooth support
bodies, explicit ladder/graft constructions, and length-spectrum /
packing-dimension analysis.
"""

__version__ = "0.1.0"

from .geometry import (
    BinormalError,
    Chord,
    AffineSubspace,
    Hyperplane,
    InputError,
    IsolatedNormal,
    NormalFamily,
    NormalInventory,
    ParameterError,
    PreconditionError,
    VerificationError,
    chord_distance,
    chord_length,
    hausdorff_distance,
    nonoriented_chord_distance,
    sphere_net,
    subspace_nearest_pair,
)
from .polytope import (
    Polytope,
    build_hull,
    enumerate_double_normals,
    is_standard,
    random_standard_polytope,
    support_check,
)
from .smooth import (
    SupportBody,
    ball,
    chord_length_gradient,
    curvature_probe,
    ellipsoid,
    find_double_normals,
    hessian_check_d1,
    perturbed_ball,
    polyline_body,
    width,
)
from .constructions import (
    acute_check_d2,
    arc_ladder_d1,
    cone_sharpen,
    rectangle_graft,
    scan_acute_threshold,
    sphere_ladder_d2,
    spherical_cap_graft,
)
from .analysis import (
    box_dimension_estimate,
    classify_maximizing,
    curvature_bound_check,
    default_delta_ladder,
    diametral_map_d1,
    holder_verify,
    max_packing_exact,
    packing_count,
    spectrum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
