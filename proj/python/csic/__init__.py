"""Compressive spectral image clustering."""

from ._csic import (
    CodingPattern,
    IoError,
    PipelineError,
    ValidationError,
    build_affinity,
    evaluate,
    gp_pattern,
    mean_filter_3d,
    random_pattern,
    run_pipeline,
    sense,
    set_serial,
    solve_srssc,
    spectral_cluster,
    synth_cube,
)

__all__ = [
    "CodingPattern",
    "IoError",
    "PipelineError",
    "ValidationError",
    "build_affinity",
    "evaluate",
    "gp_pattern",
    "mean_filter_3d",
    "random_pattern",
    "run_pipeline",
    "sense",
    "set_serial",
    "solve_srssc",
    "spectral_cluster",
    "synth_cube",
]

__version__ = "0.1.0"
