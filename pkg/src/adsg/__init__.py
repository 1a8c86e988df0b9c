"""Accelerated doubly stochastic gradient solvers for sparse composite ERM."""

from .baselines import run_katyusha, run_mrbcd, run_svrg
from .core import (
    SolverConfig,
    SolverResult,
    lemma1_weights,
    run_adsg_efficient,
    run_adsg_reference,
    run_adsg_stable,
    snapshot_draw,
    stochastic_block_gradient,
)
from .data import (
    BlockPartition,
    Dataset,
    ParseError,
    format_libsvm,
    load_libsvm,
    make_partition,
    parse_libsvm,
    row_block_dot,
    sparsity,
)
from .losses import LossFamily, loss_value_grad, smooth_gap_bound
from .problems import (
    ErmProblem,
    ProblemConstants,
    Regularizer,
    estimate_constants,
    full_gradient,
    full_objective,
    prox_block,
)
from .reductions import adapt_reg, adapt_smooth, hood_wrap_adsg, joint_adapt, make_adsg_hood
from .rng import RngStreams
from .schedules import epoch_schedule, schedule_general_convex, schedule_strongly_convex
from .synth import (
    SyntheticSpec,
    gen_synthetic,
    reference_solve,
    reference_solve_nonsmooth,
    ridge_solution,
)
from .trace import DivergenceError, TraceRecord, write_trace_csv

__all__ = [name for name in dir() if not name.startswith("_")]
