"""Randomized primal-dual methods for block-separable bilinear saddle problems."""

__version__ = "0.1.0"

from .linops import BlockLinearOperator, DimensionMismatch, SpectralNormNotConverged, spectral_norm
from .problems import (ENTROPY, EUCLIDEAN, DistanceGenerating, FeasibleSet, NoClosedFormProx,
                       SaddleInstance, SeparableFunction, build_counterexample_lcp,
                       build_matrix_game, build_regularized_loss_toy, instance_from_json,
                       instance_to_json, prox, solve_block_game_lp)
from .quality import (GapReport, gap_Q0, gap_report, distance_D, perturbation_vector,
                      perturbed_gap_at, sup_gap_g0)
from .rng import SplitMix64, draw_block
from .schedules import (Schedule, ScheduleReport, bound_general, bound_smooth, bound_unbounded,
                        general_bounded_schedule, smooth_schedule, unbounded_schedule, validate)
from .solver import RegimeMismatch, RunTrace, SolverState, TraceOptions, rpd_step, run, run_bregman

__all__ = [name for name in dir() if not name.startswith("_")]
