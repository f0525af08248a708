"""Vertex approximate gradient solver for degenerate nonlinear parabolic equations."""

from ._vagflow import (
    Mesh,
    ParseError,
    SolverError,
    ValidationError,
    analytical_solution,
    bench,
    bench_config,
    bench_tests,
    convergence_rates,
    entropy_decay_fit,
    generate_mesh,
    model_functions,
    normalize_config,
    parse_mesh,
    read_mesh,
    run,
)

__all__ = [
    "Mesh",
    "ParseError",
    "SolverError",
    "ValidationError",
    "analytical_solution",
    "bench",
    "bench_config",
    "bench_tests",
    "convergence_rates",
    "entropy_decay_fit",
    "generate_mesh",
    "model_functions",
    "normalize_config",
    "parse_mesh",
    "read_mesh",
    "run",
]
