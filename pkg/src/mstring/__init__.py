"""Wave equations on a periodically moving interval: circle-map rotation
numbers, explicit conjugacies, domain flattening, characteristic solvers,
observability diagnostics, and exact boundary control."""

from .boundary import (Boundary, ConstantBoundary, QuasiPeriodicBoundary,
                       TwoSlopeBoundary)
from .circle_map import (GenericMap, LiftedCircleMap, TranslationMap,
                         TwoSlopeMap, build_map, rotation_bounds_qp,
                         rotation_closed_form, rotation_estimate)
from .conjugacy import (Conjugacy, IdentityConjugacy, LogConjugacy, b_bounds,
                        build_conjugacy, conjugation_residual,
                        derivative_bounds, eval_b)
from .control import (ControlPlan, StripControl, closed_form_control_time,
                      hum_control, strip_mode_data, synthesize_moving_control,
                      verify_control)
from .energy import (ObservationReport, decay_fit, dissipation_identity_check,
                     energy_u, energy_u_fd, energy_V, equivalence_constants,
                     initial_norm, lyapunov_E1, observability_constant,
                     observation_integral, strip_energy_of_moving)
from .errors import MstringError
from .solver import (CharacteristicField, InitialData, StripField,
                     radial_lift, radial_reduce, strip_solve,
                     transformed_damping)
from .transform import (StripPoint, boundary_tau, conformal_factor, phi,
                        phi_inv, time_of_boundary_tau)

__version__ = "0.1.0"
