"""E-optimal approximate designs on finite spaces, with support-point screening."""

from .elfving import elfving_prune, elfving_removable
from .estimators import ElfvingScreener, EOptimalDesign, EOptimalScreener
from .linalg import SpectralData, quad_form, sym_eigen, trace_product
from .lp import LinearProgram, LPSolution, LPStalled, feasible, solve
from .model import (
    Design,
    DesignError,
    DesignPoint,
    DesignSpace,
    ModelConfig,
    dedup,
    generate_grid,
    info_matrix,
)
from .pipeline import PipelineConfig, PipelineReport, run
from .prune import PruneReport, compute_h, g_value, minimize_g, minimize_h_lp, prune
from .solver import OptimalityCertificate, SolverConfig, certify, solve_eoptimal

__version__ = "0.1.0"

__all__ = [
    "Design",
    "DesignError",
    "DesignPoint",
    "DesignSpace",
    "ElfvingScreener",
    "EOptimalDesign",
    "EOptimalScreener",
    "LinearProgram",
    "LPSolution",
    "LPStalled",
    "ModelConfig",
    "OptimalityCertificate",
    "PipelineConfig",
    "PipelineReport",
    "PruneReport",
    "SolverConfig",
    "SpectralData",
    "certify",
    "compute_h",
    "dedup",
    "elfving_prune",
    "elfving_removable",
    "feasible",
    "g_value",
    "generate_grid",
    "info_matrix",
    "minimize_g",
    "minimize_h_lp",
    "prune",
    "quad_form",
    "run",
    "solve",
    "solve_eoptimal",
    "sym_eigen",
    "trace_product",
]
