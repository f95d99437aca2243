"""Empirical evaluation of the best upper/lower bounds per derivative order.

Exhaustive sweeps give the exact optimum of the normalized derivative
over one finite instance; randomized hill-climbing gives one-sided
bounds on larger instances; the analytic lane family gives witnesses
with known closed-form values.  Every reported value is checked against
the proved envelopes (and, for orders up to four, against the proved
optima) -- a breach aborts the run, because it would falsify a theorem.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import detect_direction_switch
from .derivative import (
    HypercubeTable,
    build_hypercube,
    derivative_leibniz,
    expand_reduced_index,
    signed_subset_diff,
)
from .errors import InvalidInputError, TheoremViolationError, SizeCapError
from .lanes import LaneSpec, lane_derivative_closed_form
from .lattice import Environment, Lattice, environment_to_dict

EXHAUSTIVE_EDGE_CAP = 20
EXHAUSTIVE_ORDER_CAP = 6

# Proved optima for orders 1..4 (in units of b - a); a scanned value
# outside these intervals is a build-failing event.
TABLE_UPPER = {1: Fraction(1), 2: Fraction(1), 3: Fraction(1), 4: Fraction(2)}
TABLE_LOWER = {1: Fraction(0), 2: Fraction(-1), 3: Fraction(-1), 4: Fraction(-2)}

CONJECTURE_NOTE = "conjectural evidence: optima beyond order 4 are open"


def envelope_bounds(k: int) -> tuple[Fraction, Fraction]:
    """Proved almost-sure interval for the normalized order-k derivative."""
    if k == 1:
        return Fraction(0), Fraction(1)
    if k in TABLE_UPPER:
        return TABLE_LOWER[k], TABLE_UPPER[k]
    cap = Fraction(2 ** (k - 2))
    return -cap, cap


def check_envelope(k: int, value: Fraction, context: str) -> None:
    lo, hi = envelope_bounds(k)
    if not lo <= value <= hi:
        raise TheoremViolationError(
            f"{context}: normalized order-{k} derivative {value} escapes the "
            f"proved interval [{lo}, {hi}]"
        )


@dataclass(frozen=True)
class ExtremeReport:
    """Per-order record of the extreme normalized derivatives found."""

    k: int
    mode: str
    instance: dict
    max_normalized: Fraction
    min_normalized: Fraction
    max_witness: dict
    min_witness: dict
    scanned: int
    notes: tuple[str, ...] = ()


def _lattice_witness(graph: Lattice, mask: int, subset) -> dict:
    env = Environment(graph.n_edges, mask)
    edges = []
    for eid in subset:
        vertex, axis = graph.decode_edge(eid)
        edges.append({"base": list(vertex), "axis": axis})
    return {"environment": environment_to_dict(graph, env), "S": edges}


def _notes_for(k: int) -> tuple[str, ...]:
    return (CONJECTURE_NOTE,) if k > 4 else ()


def _audit_k3_minima(
    graph: Lattice, table: HypercubeTable, minima: list[tuple[int, tuple[int, ...]]]
) -> None:
    """Direction-switch audit: a switch at a witness forces b >= 3a and
    a derivative of at least 3a - b."""
    a, b = graph.spec.a, graph.spec.b
    for mask, subset in minima:
        env = Environment(graph.n_edges, mask)
        for pivot in range(3):
            k_edge = subset[pivot]
            l_edge, m_edge = (e for i, e in enumerate(subset) if i != pivot)
            if detect_direction_switch(graph, env, k_edge, l_edge, m_edge):
                if b < 3 * a:
                    raise TheoremViolationError(
                        f"direction switch found with b={b} < 3a={3 * a} at "
                        f"mask {mask:#x}, S={subset}"
                    )
                raw = derivative_from_positions(table, subset, mask)
                if raw < 3 * a - b:
                    raise TheoremViolationError(
                        f"switch witness has derivative {raw} < 3a-b = {3 * a - b} "
                        f"at mask {mask:#x}, S={subset}"
                    )


def derivative_from_positions(
    table: HypercubeTable, positions: tuple[int, ...], full_index: int
) -> int:
    """Raw derivative at one table entry; positions index table bits."""
    smask = 0
    for p in positions:
        smask |= 1 << p
    base = full_index & ~smask
    k = len(positions)
    total = 0
    sub = 0
    while True:
        f = table.values[base | sub]
        total += -f if (k - sub.bit_count()) & 1 else f
        if sub == smask:
            break
        sub = (sub - smask) & smask
    return total


def exhaustive_extremes(
    graph: Lattice,
    k: int,
    workers: int = 1,
    table: HypercubeTable | None = None,
) -> ExtremeReport:
    """Exact optimum over all environments and all order-k subsets.

    Builds the full f-table once (or reuses a provided full-edge-set
    table), then differences it along every subset.  Ties are broken
    toward the lexicographically smallest (environment mask, subset)
    pair so witnesses are reproducible.
    """
    n = graph.n_edges
    if n > EXHAUSTIVE_EDGE_CAP:
        raise SizeCapError(
            f"exhaustive scan caps |W| at {EXHAUSTIVE_EDGE_CAP}, got {n}"
        )
    if not 1 <= k <= min(n, EXHAUSTIVE_ORDER_CAP):
        raise SizeCapError(
            f"exhaustive scan needs 1 <= k <= min(|W|, {EXHAUSTIVE_ORDER_CAP}), got {k}"
        )
    if table is not None:
        if table.edges != tuple(range(n)):
            raise InvalidInputError("a reused table must cover the whole edge set")
    else:
        table = build_hypercube(graph, Environment.all_a(graph), range(n), workers=workers)
    values = table.values
    best_max: tuple[int, int, tuple[int, ...]] | None = None
    best_min: tuple[int, int, tuple[int, ...]] | None = None
    scanned = 0
    for subset in combinations(range(n), k):
        diffs = signed_subset_diff(values, subset)
        scanned += len(diffs)
        hi = max(diffs)
        lo = min(diffs)
        if best_max is None or hi > best_max[0]:
            mask = expand_reduced_index(diffs.index(hi), subset, n)
            best_max = (hi, mask, subset)
        elif hi == best_max[0]:
            mask = expand_reduced_index(diffs.index(hi), subset, n)
            if (mask, subset) < best_max[1:]:
                best_max = (hi, mask, subset)
        if best_min is None or lo < best_min[0]:
            mask = expand_reduced_index(diffs.index(lo), subset, n)
            best_min = (lo, mask, subset)
        elif lo == best_min[0]:
            mask = expand_reduced_index(diffs.index(lo), subset, n)
            if (mask, subset) < best_min[1:]:
                best_min = (lo, mask, subset)
    gap = graph.spec.gap
    max_norm = Fraction(best_max[0], gap)
    min_norm = Fraction(best_min[0], gap)
    check_envelope(k, max_norm, "exhaustive scan")
    check_envelope(k, min_norm, "exhaustive scan")
    if k == 3 and best_min[0] < 0:
        minima: list[tuple[int, tuple[int, ...]]] = []
        for subset in combinations(range(n), k):
            diffs = signed_subset_diff(values, subset)
            for idx, v in enumerate(diffs):
                if v == best_min[0]:
                    minima.append((expand_reduced_index(idx, subset, n), subset))
        _audit_k3_minima(graph, table, minima)
    elif k == 3:
        _audit_k3_minima(graph, table, [(best_min[1], best_min[2])])
    return ExtremeReport(
        k=k,
        mode="exhaustive",
        instance=graph.spec.to_dict(),
        max_normalized=max_norm,
        min_normalized=min_norm,
        max_witness=_lattice_witness(graph, best_max[1], best_max[2]),
        min_witness=_lattice_witness(graph, best_min[1], best_min[2]),
        scanned=scanned,
        notes=_notes_for(k),
    )


def _climb(
    graph: Lattice,
    k: int,
    budget: int,
    rng: random.Random,
    maximize: bool,
    start: tuple[int, tuple[int, ...]] | None,
    patience: int = 50,
) -> tuple[int, int, tuple[int, ...], int]:
    """Hill-climb over (environment mask, subset); strict improvements only."""
    n = graph.n_edges
    gap = graph.spec.gap

    def evaluate(mask: int, subset: tuple[int, ...]) -> int:
        value = derivative_leibniz(graph, Environment(n, mask), subset).raw
        check_envelope(k, Fraction(value, gap), "randomized search")
        return value

    def random_state() -> tuple[int, tuple[int, ...]]:
        mask = rng.getrandbits(n)
        subset = tuple(sorted(rng.sample(range(n), k)))
        return mask, subset

    evals = 0
    best: tuple[int, int, tuple[int, ...]] | None = None
    state = start if start is not None else random_state()
    current = evaluate(*state)
    evals += 1
    stale = 0
    while evals < budget:
        if stale >= patience:
            state = random_state()
            current = evaluate(*state)
            evals += 1
            stale = 0
            if evals >= budget:
                break
        mask, subset = state
        if rng.random() < 0.5:
            cand = (mask ^ (1 << rng.randrange(n)), subset)
        else:
            outside = [e for e in range(n) if e not in subset]
            if not outside:
                cand = (mask ^ (1 << rng.randrange(n)), subset)
            else:
                drop = rng.randrange(k)
                add = rng.choice(outside)
                cand = (mask, tuple(sorted(subset[:drop] + subset[drop + 1 :] + (add,))))
        value = evaluate(*cand)
        evals += 1
        improved = value > current if maximize else value < current
        if improved:
            state, current = cand, value
            stale = 0
        else:
            stale += 1
        if best is None or (current > best[0] if maximize else current < best[0]):
            best = (current, *state)
    if best is None or (current > best[0] if maximize else current < best[0]):
        best = (current, *state)
    return (*best, evals)


def randomized_search(
    graph: Lattice,
    k: int,
    budget: int,
    seed: int,
    start_env: Environment | None = None,
    start_subset=None,
) -> ExtremeReport:
    """Seeded hill-climbing with restarts; one run per objective direction.

    Results are lower bounds on the true maximum and upper bounds on the
    true minimum for this instance.  When a starting state is supplied
    (e.g. an embedded lane witness) the first restart begins there.
    """
    if budget <= 0:
        raise InvalidInputError(f"budget must be positive, got {budget}")
    n = graph.n_edges
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= |W| = {n}, got {k}")
    start = None
    if start_env is not None or start_subset is not None:
        if start_env is None or start_subset is None:
            raise InvalidInputError("a starting state needs both environment and subset")
        subset = tuple(sorted(start_subset))
        if len(subset) != k:
            raise InvalidInputError(f"starting subset has size {len(subset)}, need {k}")
        start = (start_env.mask, subset)
    per_direction = max(1, budget // 2)
    hi, hi_mask, hi_subset, hi_evals = _climb(
        graph, k, per_direction, random.Random(2 * seed), True, start
    )
    lo, lo_mask, lo_subset, lo_evals = _climb(
        graph, k, per_direction, random.Random(2 * seed + 1), False, start
    )
    gap = graph.spec.gap
    return ExtremeReport(
        k=k,
        mode="randomized",
        instance=graph.spec.to_dict(),
        max_normalized=Fraction(hi, gap),
        min_normalized=Fraction(lo, gap),
        max_witness=_lattice_witness(graph, hi_mask, hi_subset),
        min_witness=_lattice_witness(graph, lo_mask, lo_subset),
        scanned=hi_evals + lo_evals,
        notes=_notes_for(k),
    )


def lanes_family_scan(k: int, max_beta: int = 4) -> ExtremeReport:
    """Extreme closed-form lane values over all splits of order k with
    planted-block sizes up to max_beta."""
    if k < 2:
        raise InvalidInputError(f"the lane family needs order >= 2, got {k}")
    if max_beta < 0:
        raise InvalidInputError(f"max_beta must be nonnegative, got {max_beta}")
    best_max: tuple[int, tuple[int, int, int, int]] | None = None
    best_min: tuple[int, tuple[int, int, int, int]] | None = None
    scanned = 0
    for m1 in range(k + 1):
        m2 = k - m1
        for beta1 in range(max_beta + 1):
            for beta2 in range(max_beta + 1):
                value = lane_derivative_closed_form(LaneSpec(m1, m2, beta1, beta2))
                scanned += 1
                key = (m1, m2, beta1, beta2)
                if best_max is None or value > best_max[0]:
                    best_max = (value, key)
                if best_min is None or value < best_min[0]:
                    best_min = (value, key)
    max_norm, min_norm = Fraction(best_max[0]), Fraction(best_min[0])
    check_envelope(k, max_norm, "lane family scan")
    check_envelope(k, min_norm, "lane family scan")

    def witness(entry) -> dict:
        value, (m1, m2, beta1, beta2) = entry
        return {"m1": m1, "m2": m2, "beta1": beta1, "beta2": beta2, "D_normalized": value}

    return ExtremeReport(
        k=k,
        mode="lanes-family",
        instance={"model": "analytic-lanes", "max_beta": max_beta},
        max_normalized=max_norm,
        min_normalized=min_norm,
        max_witness=witness(best_max),
        min_witness=witness(best_min),
        scanned=scanned,
        notes=_notes_for(k),
    )


def check_fibonacci_recursion(report_k: ExtremeReport, report_k1: ExtremeReport) -> bool:
    """Consecutive-order containment: the next maximum is at most
    max - min, and the next minimum at least min - max."""
    if report_k1.k != report_k.k + 1:
        raise InvalidInputError(
            f"reports must cover consecutive orders, got {report_k.k} and {report_k1.k}"
        )
    if report_k.instance != report_k1.instance:
        raise InvalidInputError("reports come from different instances")
    spread = report_k.max_normalized - report_k.min_normalized
    return (
        report_k1.max_normalized <= spread and report_k1.min_normalized >= -spread
    )
