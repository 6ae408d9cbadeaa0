"""Desk-scale computational toolkit for metric fractal geometry.

Builds dyadic cube systems on doubling metric samples, brackets covering
numbers, estimates box-counting dimension, certifies the compact-Holder
property of sampled maps, and checks closed-form dimension-distortion bounds
on concrete spaces and maps.
"""

from .bounds import (BoundInputs, DistortionReport, MajorMinorTrace, ch_bound,
                     classify_major_minor, compute_k_r, qs_bounds,
                     run_distortion_experiment, sobolev_bound)
from .cubes import (Cube, CubeParams, DyadicSystem, build_net, build_system,
                    cubes_intersecting, verify_system)
from .dimension import (CoverReport, DimensionEstimate, c_prime, cube_counts,
                        covering_number_bounds, dimension_from_covers,
                        dimension_from_cubes, estimate_dim_box, sandwich_check,
                        scale_schedule)
from .errors import (ConstructionError, CoverInfeasibleError, FractalLabError,
                     InvalidInputError, OutOfRangeError, ParseError,
                     ResolutionExhaustedError)
from .generators import (GeneratorSpec, generate, load_point_cloud, make_map,
                         parse_space_token, save_report, save_space,
                         snowflake_space)
from .holder import (HolderCertificate, QSModulusReport, SampledMap,
                     SeparatedCover, build_separated_cover,
                     certify_compactly_holder, default_radius_schedule,
                     diam_ratio_coefficient, estimate_quasisymmetry_modulus,
                     holder_coefficient, p_sum)
from .spaces import (AhlforsReport, Ball, DoublingEstimate, HomogeneityReport,
                     SpaceSample, ball_points, check_ahlfors_regularity,
                     check_homogeneity, estimate_doubling_constant)

__version__ = "0.1.0"
