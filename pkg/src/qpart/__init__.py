"""Graph bipartitioning through QUBO sampling.

Two pipelines share a tabu-search QUBO sampler: a direct cut-plus-balance
QUBO, and a constrained model compiled with a tuned penalty multiplier.
"""
from .decompose import DecompConfig, extract_subqubo, solve_large
from .formulations import (
    ConstrainedProblem,
    InfeasibleDecodeError,
    LinearConstraint,
    QuadraticObjective,
    build_bipartition_qubo,
    build_constrained_problem,
    compile_penalty,
    decode_onehot_partition,
    decode_partition,
    encode_onehot_partition,
    is_feasible,
    objective_value,
)
from .graph import (
    ChacoFormatError,
    Graph,
    Partition,
    WeightedFormatError,
    complement,
    cut_size,
    imbalance_percent,
    parse_chaco,
    read_chaco,
    write_chaco,
)
from .harness import BenchConfig, RunReport, diversity_by_cut, emit_report, run_benchmark
from .lagrange import (
    LagrangeConfig,
    LagrangeResult,
    NoFeasibleSolution,
    find_multiplier_and_sample,
    repair_balance,
    separation_check,
)
from .qubo import Qubo, SquaredTerm, brute_force, read_qubo, write_qubo
from .samples import Sample, SampleSet, dedup_insert
from .tabu import TabuConfig, sample_qubo

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "ChacoFormatError",
    "ConstrainedProblem",
    "DecompConfig",
    "Graph",
    "InfeasibleDecodeError",
    "LagrangeConfig",
    "LagrangeResult",
    "LinearConstraint",
    "NoFeasibleSolution",
    "Partition",
    "QuadraticObjective",
    "Qubo",
    "RunReport",
    "Sample",
    "SampleSet",
    "SquaredTerm",
    "TabuConfig",
    "WeightedFormatError",
    "brute_force",
    "build_bipartition_qubo",
    "build_constrained_problem",
    "compile_penalty",
    "complement",
    "cut_size",
    "decode_onehot_partition",
    "decode_partition",
    "dedup_insert",
    "diversity_by_cut",
    "emit_report",
    "encode_onehot_partition",
    "extract_subqubo",
    "find_multiplier_and_sample",
    "imbalance_percent",
    "is_feasible",
    "objective_value",
    "parse_chaco",
    "read_chaco",
    "read_qubo",
    "repair_balance",
    "run_benchmark",
    "sample_qubo",
    "separation_check",
    "solve_large",
    "write_chaco",
    "write_qubo",
]
