"""squarec: multi-scale shape complexity with squares as the zero-complexity reference."""

from .grid import (BinaryShape, NoiseSpec, ParseError, PlanSpec, ShapeError,
                   append_cube, append_rect, appendage_family, covers, cube_family,
                   load_shape, make_cube, make_disk, make_frame_plan, make_rect,
                   make_square, parse_plan, same_occupancy, save_shape, standard_plan,
                   translate_union)
from .transform import (LevelSet, ScalarField, chebyshev_dt, field_to_csv, level_sets,
                        load_field, nearest_level, normalize_dt, save_field)
from .solver import (SolveReport, SolverConfig, SolverError, estimate_rho, residual,
                     solve_explicit, solve_field, solve_system)
from .complexity import (ComplexityProfile, Indicator, complexity_profile, indicator,
                         indicators_to_csv, predict_cutoff, profile_to_csv,
                         uniformity_entropy, uniformity_std)
from .ordering import (LinearOrder, PartialOrder, emit_hasse, modified_kendall_tau,
                       order_at_scale, order_by_indicator, order_to_csv, partial_order)
from .noisegen import (Rng, add_noise, boundary_cells, derive_subseed,
                       make_noisy_dataset, morphological_closing, norm_rand)

__version__ = "0.1.0"
