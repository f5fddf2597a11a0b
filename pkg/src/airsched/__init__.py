"""airsched: ground-delay scheduling for capacity-limited airspace sectors.

Builds the exact binary program, solves its semidefinite relaxation with an
in-repo interior-point method for a certified lower bound, and recovers
near-optimal integral schedules by Gaussian randomized rounding.
"""

from .exact import EnumerationBudgetError, ExactResult, MilpData, build_milp, enumerate_optimal
from .model import (
    EvaluationResult,
    Instance,
    InstanceFormatError,
    Route,
    Schedule,
    evaluate_schedule,
    expanded_occupancy,
    generate_instance,
    read_instance,
    write_instance,
)
from .relax import (
    QcqpProblem,
    SdpProblem,
    bidual,
    build_qcqp,
    build_sdp,
    dual_function_value,
    lagrangian_dual,
    qcqp_multipliers,
)
from .rounding import (
    GaussianSampler,
    RoundingReport,
    histogram_csv,
    make_sampler,
    project_sample,
    randomize,
)
from .runner import RunRecord, RunResult, perturb_weights, run_bench, run_solve
from .solver import SdpSolution, SolverOptions, extract, solve

__version__ = "0.1.0"
