"""Brittle-fracture simulation by Riemannian shape-gradient descent."""

from _fracshape import (
    GeometryError,
    Mesh,
    ParseError,
    SolveError,
    energies,
    generate_mesh,
    read_mesh,
    remesh,
    run_simulation,
    solve_state,
    split,
    write_mesh,
)

__all__ = [
    "GeometryError",
    "Mesh",
    "ParseError",
    "SolveError",
    "energies",
    "generate_mesh",
    "read_mesh",
    "remesh",
    "run_simulation",
    "solve_state",
    "split",
    "write_mesh",
]
