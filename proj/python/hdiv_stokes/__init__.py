"""Divergence-free P1c + RT0 - P0 Stokes solver."""

from ._core import (
    DofMap,
    ManufacturedCase,
    Mesh,
    MeshError,
    QuadratureRule,
    Solution,
    SolveError,
    assemble,
    build_dofmap,
    convergence_study,
    divergence_check,
    errors,
    vortex_case,
    fortin,
    generate_structured,
    mesh_from_arrays,
    project_p0,
    quadrature,
    read_mesh,
    robustness_test,
    solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
