"""Guaranteed flowpipe enclosures for linear transient FEM problems.

Builds set-valued enclosures of every trajectory of semi-discretized heat
and structural dynamics problems under interval initial conditions and
inputs, alongside classical integrators (Backward Euler, Newmark, Bathe)
for accuracy comparisons.
"""

from .analysis import (
    EnvelopeMetrics,
    PeriodEstimate,
    analytic_clamped_bar,
    analytic_heat_rod,
    analytic_oscillator,
    chord_flowpipe,
    envelope_metrics_from_bounds,
    envelopes_from_samples,
    estimate_amplitude_decay,
    estimate_period,
    trajectory_amplitude_decay,
    trajectory_amplitudes,
    vertex_sampler,
)
from .discretize import DiscretizedProblem, discretize, first_step_enclosure
from .errors import (
    ConfigError,
    DimensionError,
    EmptySetError,
    InconsistentFlowpipeError,
    InsufficientDataError,
    NumericError,
    QueryError,
    ReachfemError,
    SingularMatrixError,
)
from .integrators import Trajectory, backward_euler, bathe, newmark
from .matfun import e_plus, expm, p_series
from .model import (
    InputTerm,
    LinearSystem,
    SecondOrderSystem,
    assemble_bar_1d,
    assemble_heat_1d,
    constant_input,
    dynamics_first_order,
    exponential_input,
    heat_first_order,
    heat_gradient_directions,
    homogenize,
    initial_box,
    load_system,
    save_system,
    sinusoid_input,
)
from .propagate import (
    Flowpipe,
    ReachSet,
    SupportRecord,
    flowpipe_bounds,
    propagate_box,
    propagate_support,
    propagate_zonotope,
)
from .sets import (
    Hyperrectangle,
    Interval,
    Zonotope,
    box_approximation,
    cartesian_product,
    convex_hull,
    intersect,
    linear_map,
    minkowski_sum,
    support,
    support_batch,
    symmetric_interval_hull,
)

__version__ = "0.1.0"
