"""Robust Kalman filtering and smoothing for propagating and non-propagating
outliers.

The package provides: classical Kalman filtering/smoothing with full support
for singular covariances and rank-deficient observation matrices; two
robustified variants (a clipped-correction filter for exogenous,
non-propagating outliers and a tracking filter for endogenous, propagating
ones); their extended (linearized) versions for nonlinear models;
Monte-Carlo calibration of the clipping height; outlier-contamination
simulators; and a reproducible Monte-Carlo benchmark harness.
"""

__version__ = "0.1.0"

from .bench import (Scenario, StudyReport, default_contamination,
                    export_report, load_report, run_study)
from .calibration import (CalibrationTable, calibrate_efficiency,
                          calibrate_radius, solve_efficiency_b, solve_radius_b)
from .contamination import (BatchTrajectories, BlockSignal, CauchyDist,
                            ContaminationSpec, GaussianDist,
                            MultivariateCauchy, PointMass, block_signal,
                            draw_contaminated_normal, simulate_contaminated,
                            simulate_replications)
from .errors import ConfigError, InvalidModelError
from .filters import (CLASSICAL, FilterResult, FilterState, FilterVariant,
                      GainSchedule, classical, correct_classical,
                      correct_rls_ao, correct_rls_io, gain_schedule,
                      initial_state, predict, rls_ao, rls_io, run_filter)
from .linalg import (GenInvBundle, SemiNorm, gen_inverse_bundle, huber_clip,
                     observable_seminorm, pseudo_inverse, semi_norm_sq,
                     symmetric_sqrt)
from .models import (JacobianReport, LinearSSM, NonlinearSSM, Trajectory,
                     jacobian_check, simulate_ideal)
from .presets import PRESET_NAMES, build_preset, synthetic_vehicle_channels
from .smoothers import SmootherResult, smooth

__all__ = [name for name in dir() if not name.startswith("_")]
