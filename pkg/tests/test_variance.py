"""Variance decomposition, norm sums, and Monte Carlo estimation."""

import itertools
import math

import pytest

from fppderiv.core import passage_time
from fppderiv.errors import InvalidInputError, SizeCapError
from fppderiv.lattice import Environment
from fppderiv.variance import (
    decomposition,
    derivative_expectations,
    exact_moments,
    monte_carlo_variance,
    talagrand_terms,
)


def test_single_edge_bernoulli_variance(edge1):
    gap = edge1.spec.gap
    for p in (0.2, 0.5, 0.8):
        _mean, var = exact_moments(edge1, p)
        assert var == pytest.approx(p * (1 - p) * gap * gap, rel=1e-12)
        report = decomposition(edge1, p)
        assert len(report.rows) == 1
        assert report.rows[0].term_sum == pytest.approx(var, rel=1e-12)
        assert abs(report.residual) <= 1e-12


def test_diag_square_mean_matches_hand_enumeration(diag):
    """Independent oracle: min of the two analytic route costs over all
    16 configurations, no shortest-path code involved."""
    p = 0.5
    e_right = diag.encode_edge((0, 0), 0)
    e_right_up = diag.encode_edge((1, 0), 1)
    e_up = diag.encode_edge((0, 0), 1)
    e_up_right = diag.encode_edge((0, 1), 0)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=4):
        w = {e: 2 if bit else 1 for e, bit in zip((e_right, e_right_up, e_up, e_up_right), bits)}
        f = min(w[e_right] + w[e_right_up], w[e_up] + w[e_up_right])
        total += f * (0.5**4)
    mean, _var = exact_moments(diag, p)
    assert mean == pytest.approx(total, rel=1e-12)
    assert mean == pytest.approx(42 / 16, rel=1e-12)


def test_mean_degenerates_to_all_a(square):
    mean, var = exact_moments(square, 1 - 1e-9)
    assert mean == pytest.approx(passage_time(square, Environment.all_a(square)), abs=1e-6)
    assert var == pytest.approx(0.0, abs=1e-6)


def test_decomposition_residual_small(square, cube):
    for graph in (square, cube):
        for p in (0.2, 0.5, 0.8):
            report = decomposition(graph, p)
            assert report.relative_residual <= 1e-9


def test_partial_sums_monotone_and_truncation_underestimates(cube):
    p = 0.3
    full = decomposition(cube, p)
    partial = decomposition(cube, p, max_size=1)
    assert partial.total <= full.total + 1e-12
    previous = 0.0
    for row in full.rows:
        assert row.term_sum >= -1e-15
        assert row.cumulative >= previous - 1e-15
        previous = row.cumulative
    assert full.rows[-1].residual == pytest.approx(0.0, abs=1e-9)


def test_decomposition_caps_and_validation(square):
    from fppderiv.lattice import LatticeSpec, build_lattice

    big = build_lattice(LatticeSpec(dim=2, radius=1))
    with pytest.raises(SizeCapError):
        decomposition(big, 0.5)
    with pytest.raises(InvalidInputError):
        decomposition(square, 0.0)
    with pytest.raises(InvalidInputError):
        decomposition(square, 0.5, max_size=0)


def test_expectation_tree_matches_direct_average(square):
    """Cross-check the shared sweep against plain weighted averages of
    per-subset signed sums."""
    from fppderiv.derivative import build_hypercube, derivative_from_table

    p = 0.4
    q = 1 - p
    table = build_hypercube(square, Environment.all_a(square), range(square.n_edges))
    tree = derivative_expectations(table.values, square.n_edges, p)
    n = square.n_edges
    for mmask in range(1 << n):
        subset = tuple(t for t in range(n) if mmask >> t & 1)
        total = 0.0
        for omega in range(1 << n):
            if any(omega >> t & 1 for t in subset):
                continue
            prob = 1.0
            for t in range(n):
                if t not in subset:
                    prob *= q if omega >> t & 1 else p
            if subset:
                d = derivative_from_table(table, subset, omega).raw
            else:
                d = table.values[omega]
            total += prob * d
        assert tree[mmask] == pytest.approx(total, rel=1e-9, abs=1e-12)


def test_talagrand_first_sum_equals_variance_at_order_beyond_edges(square, cube):
    for graph in (square, cube):
        p = 0.5
        _mean, var = exact_moments(graph, p)
        first, second = talagrand_terms(graph, p, graph.n_edges + 1)
        assert second == 0.0
        assert first == pytest.approx(var, rel=1e-9)


def test_talagrand_second_sum_matches_direct_oracle(diag):
    """Recompute the order-k norm sum by brute enumeration of every
    environment through the signed-sum derivative route."""
    p, k = 0.3, 2
    q = 1 - p
    n = diag.n_edges
    from fppderiv.derivative import derivative_leibniz

    expected_terms = []
    for subset in itertools.combinations(range(n), k):
        values = {}
        for omega in range(1 << n):
            values[omega] = derivative_leibniz(
                diag, Environment(n, omega), subset
            ).raw
        l1 = sum(
            (p ** (n - bin(o).count("1"))) * (q ** bin(o).count("1")) * abs(v)
            for o, v in values.items()
        )
        l2_sq = sum(
            (p ** (n - bin(o).count("1"))) * (q ** bin(o).count("1")) * v * v
            for o, v in values.items()
        )
        if l1 == 0:
            continue
        ratio = math.sqrt(l2_sq) / l1
        expected_terms.append(l2_sq / (1 + math.log(ratio) ** k))
    _first, second = talagrand_terms(diag, p, k)
    assert expected_terms  # the diagonal square has interacting pairs
    assert second == pytest.approx(sum(expected_terms), rel=1e-9)


def test_identically_zero_derivatives_contribute_nothing(square):
    # on this instance the direct edge's derivative is constant, so all
    # order-2 derivatives vanish identically and the norm sum is empty
    _first, second = talagrand_terms(square, 0.4, 2)
    assert second == 0.0


def test_norm_ratio_at_least_one(cube):
    # L2 >= L1 on a probability space, so every log term is nonnegative
    p, k = 0.5, 2
    first, second = talagrand_terms(cube, p, k)
    assert first >= 0.0
    assert second >= 0.0


def test_monte_carlo_deterministic_and_close(cube):
    est1 = monte_carlo_variance(cube, 0.5, 10**5, seed=31)
    est2 = monte_carlo_variance(cube, 0.5, 10**5, seed=31)
    assert est1 == est2
    estimate, stderr = est1
    _mean, var = exact_moments(cube, 0.5)
    assert abs(estimate - var) <= 4 * stderr
    assert stderr > 0.0


def test_monte_carlo_near_degenerate_p(square):
    estimate, _stderr = monte_carlo_variance(square, 0.999999, 2000, seed=8)
    assert estimate == pytest.approx(0.0, abs=1e-3)


def test_monte_carlo_validation(square):
    with pytest.raises(InvalidInputError):
        monte_carlo_variance(square, 0.5, 1, seed=0)
    with pytest.raises(InvalidInputError):
        monte_carlo_variance(square, 1.5, 100, seed=0)
