"""Environment derivatives of arbitrary order.

Three mutually checking routes: the signed inclusion-exclusion sum over
the 2^|S| pinnings, the peel-one-edge recursion, and lookups against a
precomputed table of f over a full assignment hypercube.  All values are
exact integers; normalized values are exact rationals in units of b - a.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .core import passage_time
from .errors import InvalidInputError, SizeCapError
from .lattice import Environment, Lattice, LatticeSpec, build_lattice

# 2^|S| evaluations per query; beyond this the tool must refuse rather
# than silently hang.
SUBSET_CAP = 20


@dataclass(frozen=True)
class DerivativeValue:
    raw: int
    gap: int

    @property
    def normalized(self) -> Fraction:
        return Fraction(self.raw, self.gap)


def validate_edge_subset(graph: Lattice, edges) -> tuple[int, ...]:
    """Sorted duplicate-free edge ids; duplicates are rejected at the
    type level (a repeated coordinate differentiates to zero anyway)."""
    subset = tuple(edges)
    if not subset:
        raise InvalidInputError("edge subset must be non-empty")
    for eid in subset:
        graph.check_edge(eid)
    out = tuple(sorted(subset))
    if len(set(out)) != len(out):
        raise InvalidInputError(f"edge subset contains duplicates: {subset}")
    return out


def _check_cap(k: int, cap: int) -> None:
    if k > cap:
        raise SizeCapError(f"subset of size {k} exceeds the cap of {cap}")


def derivative_leibniz(
    graph: Lattice, env: Environment, subset, cap: int = SUBSET_CAP
) -> DerivativeValue:
    """Signed sum of f over all 2^|S| pinnings of S (sign counts a's)."""
    subset = validate_edge_subset(graph, subset)
    k = len(subset)
    _check_cap(k, cap)
    cleared = env.mask
    for eid in subset:
        cleared &= ~(1 << eid)
    bits = [1 << eid for eid in subset]
    total = 0
    for m in range(1 << k):
        emask = cleared
        for t in range(k):
            if m >> t & 1:
                emask |= bits[t]
        f = passage_time(graph, Environment(graph.n_edges, emask))
        total += -f if (k - m.bit_count()) & 1 else f
    return DerivativeValue(total, graph.spec.gap)


def derivative_recursive(
    graph: Lattice,
    env: Environment,
    subset,
    cap: int = SUBSET_CAP,
    peel: str = "max",
) -> DerivativeValue:
    """Recursion peeling one edge per level; agrees with the signed sum.

    ``peel`` selects the deterministic choice ("max" or "min" index);
    mixed partials commute, so the value does not depend on it.
    """
    subset = validate_edge_subset(graph, subset)
    _check_cap(len(subset), cap)
    if peel not in ("max", "min"):
        raise InvalidInputError(f"peel must be 'max' or 'min', got {peel!r}")
    n = graph.n_edges

    def rec(mask: int, rest: tuple[int, ...]) -> int:
        if not rest:
            return passage_time(graph, Environment(n, mask))
        j = rest[-1] if peel == "max" else rest[0]
        remaining = rest[:-1] if peel == "max" else rest[1:]
        bit = 1 << j
        return rec(mask | bit, remaining) - rec(mask & ~bit, remaining)

    return DerivativeValue(rec(env.mask, subset), graph.spec.gap)


@dataclass(frozen=True)
class HypercubeTable:
    """f over every assignment to a variable edge set V.

    ``values[m]`` is the passage time with edge ``edges[t]`` pinned to b
    when bit t of m is set (and to a otherwise), all other edges frozen
    at the base environment.
    """

    edges: tuple[int, ...]
    base_mask: int
    values: tuple[int, ...]
    gap: int

    @property
    def positions(self) -> dict[int, int]:
        return {eid: t for t, eid in enumerate(self.edges)}


def _hypercube_chunk(
    spec: LatticeSpec, cleared: int, bits: list[int], start: int, stop: int
) -> list[int]:
    graph = build_lattice(spec)
    n = graph.n_edges
    out = []
    for m in range(start, stop):
        emask = cleared
        t = 0
        mm = m
        while mm:
            if mm & 1:
                emask |= bits[t]
            mm >>= 1
            t += 1
        out.append(passage_time(graph, Environment(n, emask)))
    return out


def build_hypercube(
    graph: Lattice,
    env: Environment,
    edges,
    cap: int = SUBSET_CAP,
    workers: int = 1,
) -> HypercubeTable:
    """Evaluate f on all 2^|V| pinnings of V (|V| = 0 is allowed).

    With ``workers`` > 1 the mask range is split into ordered chunks
    across a process pool; results are concatenated in chunk order, so
    the table is identical to the serial one.
    """
    subset = tuple(sorted(edges))
    for eid in subset:
        graph.check_edge(eid)
    if len(set(subset)) != len(subset):
        raise InvalidInputError("variable edge set contains duplicates")
    if len(subset) > cap:
        raise SizeCapError(f"variable set of size {len(subset)} exceeds the cap of {cap}")
    cleared = env.mask
    for eid in subset:
        cleared &= ~(1 << eid)
    bits = [1 << eid for eid in subset]
    n_entries = 1 << len(subset)
    if workers > 1 and n_entries >= 4096:
        chunk = max(1024, n_entries // (workers * 4))
        ranges = [(s, min(s + chunk, n_entries)) for s in range(0, n_entries, chunk)]
        values: list[int] = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_hypercube_chunk, graph.spec, cleared, bits, s, e)
                for s, e in ranges
            ]
            for fut in futures:
                values.extend(fut.result())
    else:
        values = _hypercube_chunk(graph.spec, cleared, bits, 0, n_entries)
    return HypercubeTable(subset, cleared, tuple(values), graph.spec.gap)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("FPP_WORKERS", "1")))
    except ValueError:
        return 1


def derivative_from_table(
    table: HypercubeTable, subset, base_index: int = 0
) -> DerivativeValue:
    """Signed sum over the 2^|S| table entries agreeing with the base
    index off S.  Bits of the base index on S are ignored."""
    positions = table.positions
    try:
        pos = tuple(sorted(positions[eid] for eid in subset))
    except KeyError as exc:
        raise InvalidInputError(
            f"edge {exc.args[0]} is not in the table's variable set"
        ) from None
    if not pos:
        raise InvalidInputError("edge subset must be non-empty")
    if len(set(pos)) != len(pos):
        raise InvalidInputError("edge subset contains duplicates")
    if not 0 <= base_index < len(table.values):
        raise InvalidInputError("base index outside the table")
    smask = 0
    for p in pos:
        smask |= 1 << p
    base = base_index & ~smask
    k = len(pos)
    values = table.values
    total = 0
    sub = 0
    while True:
        f = values[base | sub]
        total += -f if (k - sub.bit_count()) & 1 else f
        if sub == smask:
            break
        sub = (sub - smask) & smask
    return DerivativeValue(total, table.gap)


def signed_subset_diff(values, positions) -> list[int]:
    """Difference a full table along the given bit positions.

    Returns the 2^(n-k) derivative values indexed by the remaining
    positions packed in ascending order; exact integer arithmetic.
    """
    vals = list(values)
    for p in sorted(positions, reverse=True):
        step = 1 << p
        nxt: list[int] = []
        extend = nxt.extend
        for lo in range(0, len(vals), step << 1):
            extend(
                h - x for h, x in zip(vals[lo + step : lo + 2 * step], vals[lo : lo + step])
            )
        vals = nxt
    return vals


def expand_reduced_index(reduced: int, removed, n_bits: int) -> int:
    """Inverse of the index compaction done by signed_subset_diff."""
    removed_set = set(removed)
    out = 0
    t = 0
    for pos in range(n_bits):
        if pos in removed_set:
            continue
        if reduced >> t & 1:
            out |= 1 << pos
        t += 1
    return out
