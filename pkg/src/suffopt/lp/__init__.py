from .instance import (
    LpBuilder,
    LpInstance,
    LpSolution,
    SolveStatus,
    dual_objective,
    verify_solution,
)
from .simplex import IterationLimitError, SolverOptions, solve
from .build import build_lp, extract_results, ScenarioResult
from .io import (
    parse_lp_text,
    parse_mps,
    read_lp_file,
    solution_to_csv,
    write_lp_file,
    write_lp_text,
    write_mps,
)

__all__ = [
    "LpBuilder",
    "LpInstance",
    "LpSolution",
    "SolveStatus",
    "SolverOptions",
    "IterationLimitError",
    "ScenarioResult",
    "build_lp",
    "dual_objective",
    "extract_results",
    "parse_lp_text",
    "parse_mps",
    "read_lp_file",
    "solution_to_csv",
    "solve",
    "verify_solution",
    "write_lp_file",
    "write_lp_text",
    "write_mps",
]
