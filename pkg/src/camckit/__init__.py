"""camckit: anisotropic surface energies, Cahn-Hoffman frontiers, Wulff shapes,
CAMC classification of piecewise-smooth curves and surfaces of revolution, and
the self-similar shrinking solutions of anisotropic mean curvature flow."""

from .errors import (CamcError, ConvexityDiagnosticError, DimensionMismatchError,
                     ExtinctionError, MeshError, ResourceCapError, ToleranceError,
                     ValidationError)
from .integrand import (Direction, Integrand, SphereOperatorA, ConvexityReport,
                        convexity_report, evaluate, extension_gradient,
                        homogeneous_extension, operator_A)
from .frontier import (Crossing, Frontier, FrontierSample, SingularSet, WulffArcs,
                       WulffShape, frontier_points, sample_frontier, self_intersections,
                       singular_set, wulff_arcs, wulff_dual_hausdorff, wulff_halfspace)
from .curves import (ArcSpec, CamcClass, CamcVerdict, ClosedCurve, HexicLandmarks,
                     anisotropic_curvature_along, builtin_catalogue, classify,
                     energy_of_curve, enumerate_closed_camc, hexic_landmarks, stitch)
from .surfaces import (SurfaceMesh, SurfaceVerdict, anisotropic_shape_operator,
                       classify_surface, energy_of_surface, mesh_frontier_surface,
                       profile_of, rotational_lift)
from .flow import (FlowFamily, FlowSnapshot, PolylineShape, dissipation_check,
                   energy_scale_law_gap, family_at, flow_residual)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
