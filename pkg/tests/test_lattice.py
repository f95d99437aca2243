"""Graph construction, edge indexing, and environment serialization."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_environments
from fppderiv.errors import InvalidInputError
from fppderiv.lattice import (
    Environment,
    LatticeSpec,
    build_lattice,
    canonical_json,
    environment_from_dict,
    environment_to_dict,
    load_environment,
    normalize_weights,
    save_environment,
)


def brute_force_edge_count(spec: LatticeSpec) -> int:
    """Independent oracle: count nearest-neighbour pairs by direct enumeration."""
    box = spec.box
    vertices = [()]
    for lo, hi in box:
        vertices = [v + (c,) for v in vertices for c in range(lo, hi + 1)]
    vset = set(vertices)
    count = 0
    for v in vertices:
        for axis in range(spec.dim):
            w = v[:axis] + (v[axis] + 1,) + v[axis + 1 :]
            if w in vset:
                count += 1
    return count


def test_default_box_edge_count():
    # d=2, n=1 box [-2,2]^2: 2 * (4*5) = 40 edges
    spec = LatticeSpec(dim=2, radius=1)
    graph = build_lattice(spec)
    assert graph.n_edges == 40
    assert graph.n_edges == brute_force_edge_count(spec)


def test_reduced_boxes_edge_counts(square, cube):
    assert square.n_edges == 4
    assert cube.n_edges == 12
    assert brute_force_edge_count(square.spec) == 4
    assert brute_force_edge_count(cube.spec) == 12


def test_encode_decode_round_trip():
    graph = build_lattice(LatticeSpec(dim=2, radius=1))
    for eid in range(graph.n_edges):
        vertex, axis = graph.decode_edge(eid)
        assert graph.encode_edge(vertex, axis) == eid


def test_edge_indices_are_dense(square, strip, cube):
    for graph in (square, strip, cube):
        ids = {
            graph.encode_edge(graph.decode_edge(e)[0], graph.decode_edge(e)[1])
            for e in range(graph.n_edges)
        }
        assert ids == set(range(graph.n_edges))


def test_edge_order_is_lexicographic(strip):
    keys = [
        (strip.decode_edge(e)[0], strip.decode_edge(e)[1]) for e in range(strip.n_edges)
    ]
    assert keys == sorted(keys)


def test_encode_rejects_bad_edges(square):
    with pytest.raises(InvalidInputError):
        square.encode_edge((0, 0), 2)
    with pytest.raises(InvalidInputError):
        square.encode_edge((1, 0), 0)
    with pytest.raises(InvalidInputError):
        square.encode_edge((5, 0), 0)
    with pytest.raises(InvalidInputError):
        square.decode_edge(square.n_edges)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dim": 1},
        {"radius": 0},
        {"a": 2, "b": 2},
        {"a": 0, "b": 1},
        {"source": (0, 0), "sink": (0, 0)},
        {"sink": (99, 0)},
        {"reduced_box": ((0, 1),)},
        {"reduced_box": ((1, 0), (0, 1))},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(InvalidInputError):
        LatticeSpec(**kwargs)


def test_spec_defaults():
    spec = LatticeSpec(dim=3, radius=2)
    assert spec.source == (0, 0, 0)
    assert spec.sink == (2, 0, 0)
    assert spec.box == (((-4, 4),) * 3)


def test_normalize_weights():
    assert normalize_weights(1, 2) == (1, 2)
    assert normalize_weights("1/2", "3/4") == (2, 3)
    assert normalize_weights(0.5, 2.5) == (1, 5)
    with pytest.raises(InvalidInputError):
        normalize_weights(3, 2)


@given(
    st.integers(1, 3),
    st.integers(1, 3),
    st.integers(2, 3),
)
@settings(max_examples=25, deadline=None)
def test_index_bijection_property(w, h, dim):
    box = ((0, w), (0, h)) + ((0, 1),) * (dim - 2)
    spec = LatticeSpec(
        dim=dim, radius=1, reduced_box=box, source=(0,) * dim, sink=(w,) + (0,) * (dim - 1)
    )
    graph = build_lattice(spec)
    seen = set()
    for vidx in range(graph.n_vertices):
        v = graph.index_vertex(vidx)
        assert graph.vertex_index(v) == vidx
        for axis in range(dim):
            if v[axis] < graph.hi[axis]:
                seen.add(graph.encode_edge(v, axis))
    assert seen == set(range(graph.n_edges))
    assert graph.n_edges == brute_force_edge_count(spec)


def test_all_a_all_b_serialization_round_trip(square, tmp_path):
    for env in (Environment.all_a(square), Environment.all_b(square)):
        path = tmp_path / "env.json"
        save_environment(square, env, path)
        graph2, env2 = load_environment(path)
        assert env2.mask == env.mask
        assert graph2.n_edges == square.n_edges


def test_canonical_files_are_byte_stable(strip, tmp_path):
    env = Environment(strip.n_edges, 0b1010001)
    path = tmp_path / "env.json"
    save_environment(strip, env, path)
    first = path.read_bytes()
    graph2, env2 = load_environment(path)
    save_environment(graph2, env2, path)
    assert path.read_bytes() == first


def test_default_a_empty_exceptions_is_all_a(square):
    d = square.spec.to_dict()
    d.update({"default": "a", "exceptions": []})
    _, env = environment_from_dict(d)
    assert env.mask == 0


def test_environment_dict_round_trip_every_mask(square):
    for env in all_environments(square):
        _, back = environment_from_dict(environment_to_dict(square, env))
        assert back.mask == env.mask


def test_environment_validation_errors(square):
    base = square.spec.to_dict()
    with pytest.raises(InvalidInputError):
        environment_from_dict({**base, "default": "a", "exceptions": [{"base": [7, 7], "axis": 0}]})
    with pytest.raises(InvalidInputError):
        environment_from_dict(
            {
                **base,
                "default": "a",
                "exceptions": [{"base": [0, 0], "axis": 0}, {"base": [0, 0], "axis": 0}],
            }
        )
    with pytest.raises(InvalidInputError):
        environment_from_dict({**base, "exceptions": []})


def test_load_environment_bad_file(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(InvalidInputError):
        load_environment(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_environment(bad)


def test_canonical_json_shape(square):
    env = Environment.all_b(square)
    text = canonical_json(environment_to_dict(square, env))
    data = json.loads(text)
    assert data["default"] == "b"
    assert data["exceptions"] == []
    assert text.endswith("\n")
