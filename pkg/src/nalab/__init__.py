"""Runtime-analysis lab for the (1+1) neuroevolution algorithm on the unit circle."""
from .arcs import Arc, ArcSet, normalize
from .evolution import RunConfig, RunRecord, Termination, exhaustive_best, is_success, run
from .fitness import FitnessEvaluator, fitness, is_local_optimum, monte_carlo_fitness
from .harness import StatsRow, SweepSpec, emit_table, estimate_drift, sweep
from .mutation import MutationOperator, harmonic, mutate, unit
from .network import BiasMode, Genotype, NetworkTopology, OutputMode, decode, predict_region
from .problems import cube_corners_dataset, make_custom_union_of_arcs, make_problem

__version__ = "0.1.0"

__all__ = [
    "Arc", "ArcSet", "normalize",
    "RunConfig", "RunRecord", "Termination", "exhaustive_best", "is_success", "run",
    "FitnessEvaluator", "fitness", "is_local_optimum", "monte_carlo_fitness",
    "StatsRow", "SweepSpec", "emit_table", "estimate_drift", "sweep",
    "MutationOperator", "harmonic", "mutate", "unit",
    "BiasMode", "Genotype", "NetworkTopology", "OutputMode", "decode", "predict_region",
    "cube_corners_dataset", "make_custom_union_of_arcs", "make_problem",
]
