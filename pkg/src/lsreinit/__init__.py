"""Level-set evolution with reinitialisation: the alternating evolve/correct
scheme, its homogenised theta-equation, exact oracles and geometric checks."""

from .cell import PeriodicProfile, cell_corrector, cell_lambda, freeze_h12, two_phase_profile
from .errors import (ConfigError, DataError, EmptyInterfaceError, NumericalBlowup, RangeError,
                     ResolutionError, UsageError)
from .evolve import (relax_corrector, rescale_compare, solve_averaged, solve_base,
                     solve_iterative, solve_theta)
from .geometry import (ContinuityVerdict, ExtinctionParams, InterfaceSet, classify_continuity,
                       cone_check, detect_extinction, discrete_lipschitz, extract_interface,
                       gradient_deviation, hausdorff, nearest_points, signed_distance_field)
from .grid import Field, Grid, Trajectory, linf_distance, make_grid, one_sided_gradients, sample
from .model import (CorrectorSpec, H1Spec, Schedule, averaged_h, beta, combined_h12, eval_h1,
                    h_value)
from .oracles import (barrier_bounds, example_bounded_speed_w, example_two_bumps, hopf_lax_w,
                      lipschitz_bound)
from .scheme import (CflPolicy, cfl_dt, godunov_magnitude, rhs_advection, rhs_corrector, step)

__version__ = "0.1.0"
