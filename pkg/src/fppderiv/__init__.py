"""Exact first-passage percolation engine on finite lattice boxes."""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    Environment,
    Lattice,
    LatticeSpec,
    build_lattice,
    load_environment,
    save_environment,
)
