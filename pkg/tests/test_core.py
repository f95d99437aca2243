"""Passage times, geodesic structure, pin operators, and edge classes."""

import itertools

import pytest

from conftest import all_environments
from fppderiv.core import (
    classify_edge,
    detect_direction_switch,
    first_derivative,
    geodesic_dag,
    passage_time,
    sigma,
    sigma_vector,
)
from fppderiv.errors import InvalidInputError
from fppderiv.lattice import Environment


def test_passage_time_examples(square):
    env = Environment.all_a(square)
    assert passage_time(square, env) == 1
    direct = square.encode_edge((0, 0), 0)
    # two candidate routes once the direct edge costs b: min(2, 3*1)
    assert passage_time(square, env.set_value(direct, "b")) == 2
    assert passage_time(square, Environment.all_b(square)) == 2


def test_geodesic_dag_invariants(strip):
    for mask in (0, 0b1011001, (1 << strip.n_edges) - 1):
        env = Environment(strip.n_edges, mask)
        dag = geodesic_dag(strip, env)
        assert dag.dsrc[strip.source_index] == 0
        assert dag.dsnk[strip.sink_index] == 0
        assert dag.f == dag.dsrc[strip.sink_index] == dag.dsnk[strip.source_index]
        assert dag.f == passage_time(strip, env)


def test_diagonal_square_has_four_geodesic_edges(diag):
    # both monotone length-2 routes are geodesics under equal weights
    dag = geodesic_dag(diag, Environment.all_a(diag))
    assert len(dag.on_geodesic_edges()) == 4
    assert all(dag.orientation(e) == 1 for e in range(diag.n_edges))


def test_orientation_never_ambiguous(square):
    # positive weights: an edge cannot be usable in both directions
    for env in all_environments(square):
        dag = geodesic_dag(square, env)
        for e in range(square.n_edges):
            assert dag.orientation(e) in (-1, 0, 1)


def test_sigma_projection_and_commutation(square):
    env = Environment(square.n_edges, 0b0110)
    for i in range(square.n_edges):
        for alpha, beta in itertools.product("ab", repeat=2):
            assert sigma(sigma(env, i, beta), i, alpha) == sigma(env, i, alpha)
        for j in range(square.n_edges):
            if i == j:
                continue
            for alpha, beta in itertools.product("ab", repeat=2):
                assert sigma(sigma(env, j, beta), i, alpha) == sigma(
                    sigma(env, i, alpha), j, beta
                )
    assert sigma(Environment.all_a(square), 2, "a") == Environment.all_a(square)


def test_sigma_does_not_mutate(square):
    env = Environment.all_a(square)
    sigma(env, 0, "b")
    assert env.mask == 0


def test_sigma_vector(square):
    env = Environment(square.n_edges, 0b1001)
    assert sigma_vector(env, (), ()) == env
    assert sigma_vector(env, (2,), "b") == sigma(env, 2, "b")
    forward = sigma_vector(env, (0, 1, 3), "abb")
    shuffled = sigma_vector(env, (3, 0, 1), "bab")
    assert forward == shuffled
    with pytest.raises(InvalidInputError):
        sigma_vector(env, (0, 1), "a")
    with pytest.raises(InvalidInputError):
        sigma_vector(env, (1, 1), "ab")
    with pytest.raises(InvalidInputError):
        sigma(env, 99, "a")
    with pytest.raises(InvalidInputError):
        sigma(env, 0, "c")


def test_first_derivative_examples(square):
    env = Environment.all_a(square)
    direct = square.encode_edge((0, 0), 0)
    top = square.encode_edge((0, 1), 0)
    assert first_derivative(square, env, direct) == 1
    # the top edge misses the unique geodesic entirely
    assert first_derivative(square, env, top) == 0


def test_first_derivative_ignores_own_coordinate(square):
    # the derivative reads only pinned configurations
    for env in all_environments(square):
        for e in range(square.n_edges):
            d = first_derivative(square, env, e)
            assert first_derivative(square, sigma(env, e, "a"), e) == d
            assert first_derivative(square, sigma(env, e, "b"), e) == d


def test_monotonicity_exhaustive(square):
    for env in all_environments(square):
        f = passage_time(square, env)
        for e in range(square.n_edges):
            assert passage_time(square, sigma(env, e, "b")) >= f or env.value(e) == "b"
            assert passage_time(square, sigma(env, e, "b")) >= passage_time(
                square, sigma(env, e, "a")
            )


def test_classification_examples(square):
    env = Environment.all_a(square)
    direct = square.encode_edge((0, 0), 0)
    flags = classify_edge(square, env, direct)
    # detour costs 3a > a, and pinning to b lifts f from 1 to min(2, 3)
    assert flags.essential and flags.semi_essential
    assert flags.influential and flags.very_influential
    top = square.encode_edge((0, 1), 0)
    top_flags = classify_edge(square, env, top)
    assert not top_flags.semi_essential
    assert not top_flags.influential


def test_strip_all_a_has_no_essential_edge(strip):
    # several monotone geodesics exist, so no single edge carries all of them
    env = Environment.all_a(strip)
    for e in range(strip.n_edges):
        flags = classify_edge(strip, env, e)
        assert flags.semi_essential
        assert not flags.essential


def test_classification_set_identities_exhaustive(square):
    """Events linked by pinning: influential iff the a-pinned state is
    essential; very influential iff the b-pinned state is semi-essential;
    plus the four inclusions among the event families."""
    n = square.n_edges
    for e in range(n):
        for env in all_environments(square):
            flags = classify_edge(square, env, e)
            pinned_a = classify_edge(square, sigma(env, e, "a"), e)
            pinned_b = classify_edge(square, sigma(env, e, "b"), e)
            assert flags.influential == pinned_a.essential
            assert flags.very_influential == pinned_b.semi_essential
            assert not flags.essential or flags.semi_essential
            assert not flags.very_influential or flags.influential
            assert not flags.essential or flags.influential
            assert not flags.very_influential or flags.semi_essential


def test_pinned_value_identity_exhaustive(square):
    # f agrees with its pinned version wherever the coordinate already matches
    for env in all_environments(square):
        f = passage_time(square, env)
        for e in range(square.n_edges):
            alpha = env.value(e)
            assert passage_time(square, sigma(env, e, alpha)) == f


def test_no_switch_when_single_edge_flips(square):
    """Geodesic flow through an edge cannot reverse when one other edge flips."""
    for env in all_environments(square):
        for x in range(square.n_edges):
            dag_a = geodesic_dag(square, sigma(env, x, "a"))
            dag_b = geodesic_dag(square, sigma(env, x, "b"))
            for k in range(square.n_edges):
                oa, ob = dag_a.orientation(k), dag_b.orientation(k)
                if oa != 0 and ob != 0:
                    assert oa == ob


def test_direction_switch_trivial_cases(strip):
    env = Environment.all_a(strip)
    assert not detect_direction_switch(strip, env, 0, 1, 2)
    with pytest.raises(InvalidInputError):
        detect_direction_switch(strip, env, 0, 0, 1)
    off_geodesic = Environment.all_b(strip)
    assert not detect_direction_switch(strip, off_geodesic, 3, 5, 7)


@pytest.mark.parametrize("a,b", [(2, 5), (3, 4)])
def test_classification_laws_hold_for_other_weight_pairs(a, b):
    """The event identities carry no hidden dependence on (1, 2)."""
    from fppderiv.lattice import LatticeSpec, build_lattice

    graph = build_lattice(
        LatticeSpec(
            dim=2, radius=1, a=a, b=b, reduced_box=((0, 1), (0, 1)), source=(0, 0), sink=(1, 0)
        )
    )
    gap = b - a
    for env in all_environments(graph):
        for e in range(graph.n_edges):
            flags = classify_edge(graph, env, e)
            pinned_a = classify_edge(graph, sigma(env, e, "a"), e)
            pinned_b = classify_edge(graph, sigma(env, e, "b"), e)
            assert flags.influential == pinned_a.essential
            assert flags.very_influential == pinned_b.semi_essential
            d = first_derivative(graph, env, e)
            assert 0 <= d <= gap
            fa = passage_time(graph, sigma(env, e, "a"))
            fb = passage_time(graph, sigma(env, e, "b"))
            if not pinned_a.essential:
                assert fb == fa
            if pinned_b.semi_essential:
                assert fb == fa + gap


def test_direction_switch_exists_with_large_gap():
    """With b >= 3a the strip admits genuine switches (found by scan)."""
    from conftest import STRIP_SPEC
    from fppderiv.lattice import LatticeSpec, build_lattice

    spec = LatticeSpec(
        dim=2,
        radius=1,
        a=1,
        b=4,
        reduced_box=STRIP_SPEC.reduced_box,
        source=STRIP_SPEC.source,
        sink=STRIP_SPEC.sink,
    )
    graph = build_lattice(spec)
    found = False
    for k, l, m in itertools.permutations(range(graph.n_edges), 3):
        if detect_direction_switch(graph, Environment(graph.n_edges, 1 << 5), k, l, m):
            found = True
            break
    assert found
