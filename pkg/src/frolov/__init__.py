"""Randomized Frolov lattice cubature with a convergence-study harness."""

from .analysis import (RateFit, RatePrediction, dual_lattice_sum, fit_rate,
                       fourier_norm_outside_cross, fourier_tail_bound, predict_exponent,
                       relative_difference, rmse_with_se, shift_mse_oracle, tail_constant)
from .corpus import (FourierProfile, SincPowerFactor, SmoothnessSpec, bspline_tensor,
                     bump_tensor, box_indicator, get_integrand, hat_tensor, poly_nobc)
from .cubature import (EstimateResult, Integrand, baseline_mc, q_deterministic,
                       randomized_frolov)
from .errors import (AdmissibilityError, ConstructionError, EnumerationLimitError,
                     FrolovError, TruncationError)
from .generator import (FrolovMatrix, ScaledGenerator, admissibility_margin,
                        build_generator, critical_determinant_bound, scale)
from .harness import StudyConfig, StudyRecord, pool_raw, report, run_study
from .lattice import (Domain, NodeSet, Randomization, box_domain, count_dual_in_box,
                      draw_randomization, enumerate_nodes, general_domain,
                      randomization_for, unit_cube)
from .streams import derive_stream
from .transform import psi, psi_prime, randomized_frolov_cube, transform_T

__version__ = "0.1.0"
