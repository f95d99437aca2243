"""Shared instances: small boxes whose full environment space is enumerable."""

import pytest

from fppderiv.lattice import Environment, LatticeSpec, build_lattice

# Unit square from (0,0) to (1,0): the 4-edge workhorse.
SQUARE_SPEC = LatticeSpec(
    dim=2, radius=1, reduced_box=((0, 1), (0, 1)), source=(0, 0), sink=(1, 0)
)
# Same square, opposite corners: two symmetric length-2 routes.
DIAG_SPEC = LatticeSpec(
    dim=2, radius=1, reduced_box=((0, 1), (0, 1)), source=(0, 0), sink=(1, 1)
)
# 10-edge strip: the default envelope instance.
STRIP_SPEC = LatticeSpec(
    dim=2, radius=1, reduced_box=((0, 3), (0, 1)), source=(0, 0), sink=(3, 1)
)
# 12-edge cube in dimension 3.
CUBE_SPEC = LatticeSpec(
    dim=3, radius=1, reduced_box=((0, 1),) * 3, source=(0, 0, 0), sink=(1, 1, 1)
)
# Degenerate one-edge graph for closed-form variance checks.
EDGE1_SPEC = LatticeSpec(
    dim=2, radius=1, reduced_box=((0, 1), (0, 0)), source=(0, 0), sink=(1, 0)
)


@pytest.fixture(scope="session")
def square():
    return build_lattice(SQUARE_SPEC)


@pytest.fixture(scope="session")
def diag():
    return build_lattice(DIAG_SPEC)


@pytest.fixture(scope="session")
def strip():
    return build_lattice(STRIP_SPEC)


@pytest.fixture(scope="session")
def cube():
    return build_lattice(CUBE_SPEC)


@pytest.fixture(scope="session")
def edge1():
    return build_lattice(EDGE1_SPEC)


@pytest.fixture()
def all_a():
    return Environment.all_a


def all_environments(graph):
    for mask in range(1 << graph.n_edges):
        yield Environment(graph.n_edges, mask)
