"""Joint transmit-power / feedback-bit allocation for delay-constrained
limited-feedback MU-MIMO, with a Monte Carlo link and queue simulator."""

from .allocator import (
    AllocationProblem,
    AllocationResult,
    CostModel,
    InfeasibleError,
    ResourceBounds,
    allocate_exhaustive,
    allocate_interference_limited,
    allocate_noise_limited,
    allocate_rounded,
    power_for_feedback,
    solve_relaxed,
)
from .amc import (
    ModulationMode,
    ModulationTable,
    build_thresholds,
    default_table,
    packet_error_rate,
    select_mode,
    serve_rate,
)
from .simulator import (
    LinkConfig,
    QueueSimConfig,
    QueueStats,
    empirical_sinr,
    ks_statistic,
    quantize,
    simulate_queue,
    zfbf_beams,
)
from .sinr import (
    SinrModelParams,
    average_violation,
    cdf_interference_limited,
    cdf_limited_feedback,
    cdf_noise_limited,
)
from .traffic import (
    QosExponentResult,
    TrafficSpec,
    effective_bandwidth,
    min_serve_rate,
    min_serve_rate_approx,
    qos_exponent,
    violation_probability,
)

__version__ = "0.1.0"
