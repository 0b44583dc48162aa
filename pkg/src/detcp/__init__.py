"""Deterministic parallel depth-first search for small integer constraint models."""

from .fzn import ParseError, parse, parse_file, parse_text, serialize
from .model import (
    Constraint,
    Mode,
    Model,
    ModelError,
    Objective,
    Sense,
    SolutionRecord,
    VariableDecl,
    brute_force_solve,
    validate_model,
)
from .parallel import EngineConfig, ParallelResult, Strategy, solve_par
from .search import CPProblem, SearchResult, compare_paths, solve_seq
from .synthetic import Shape, SyntheticSpec, gen_synthetic

__all__ = [
    "CPProblem",
    "Constraint",
    "EngineConfig",
    "Mode",
    "Model",
    "ModelError",
    "Objective",
    "ParallelResult",
    "ParseError",
    "SearchResult",
    "Sense",
    "Shape",
    "SolutionRecord",
    "Strategy",
    "SyntheticSpec",
    "VariableDecl",
    "brute_force_solve",
    "compare_paths",
    "gen_synthetic",
    "parse",
    "parse_file",
    "parse_text",
    "serialize",
    "solve_par",
    "solve_seq",
    "validate_model",
]
