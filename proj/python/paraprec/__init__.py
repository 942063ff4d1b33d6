"""Parameter-dependent preconditioners by interpolation of sampled inverses."""

from ._core import (
    Benchmark,
    Preconditioner,
    Sketch,
    assemble_adr,
    concentration_columns,
    eim,
    greedy_frob,
    make_preconditioner,
    make_sketch,
    min_sketch_columns,
    run_config,
    synthetic_multiparam,
)

__all__ = [
    "Benchmark",
    "Preconditioner",
    "Sketch",
    "assemble_adr",
    "concentration_columns",
    "eim",
    "greedy_frob",
    "make_preconditioner",
    "make_sketch",
    "min_sketch_columns",
    "run_config",
    "synthetic_multiparam",
]
