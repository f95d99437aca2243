"""Passage times, the geodesic DAG, single-edge pinning, and edge classes.

Everything here is a pure function of (graph, environment); callers may
fan out over disjoint environments without coordination.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import InvalidInputError
from .lattice import Environment, Lattice

# Forbidden edges are priced at +infinity instead of being removed, so
# the adjacency stays immutable and shareable.
FORBIDDEN_WEIGHT = 1 << 60


def shortest_distances(
    graph: Lattice,
    env: Environment,
    start: int,
    forbidden_edge: int | None = None,
    target: int | None = None,
) -> list[int]:
    """Label-setting shortest path sweep from a vertex index.

    Weights are the positive integers {a, b}, so a binary heap with lazy
    deletion is exact.  Stops early once ``target`` is settled.
    """
    a, b = graph.spec.a, graph.spec.b
    mask = env.mask
    dist = [FORBIDDEN_WEIGHT] * graph.n_vertices
    dist[start] = 0
    heap = [(0, start)]
    adj = graph.adj
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == target:
            break
        for v, eid in adj[u]:
            if eid == forbidden_edge:
                continue
            nd = d + (b if mask >> eid & 1 else a)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def passage_time(
    graph: Lattice, env: Environment, forbidden_edge: int | None = None
) -> int:
    """Minimal passage time from source to sink under ``env``.

    With ``forbidden_edge`` set, returns the best time avoiding that
    edge (>= FORBIDDEN_WEIGHT exactly when avoiding it disconnects the
    endpoints, e.g. on a single-edge debug graph).
    """
    if env.n_edges != graph.n_edges:
        raise InvalidInputError("environment does not match the graph's edge set")
    dist = shortest_distances(
        graph, env, graph.source_index, forbidden_edge, graph.sink_index
    )
    return dist[graph.sink_index]


@dataclass(frozen=True)
class GeodesicDag:
    """Distances from source and to sink; answers orientation queries in O(1).

    Edge j = (J1, J2) lies on some geodesic traversed J1 -> J2 exactly
    when dsrc(J1) + w(j) + dsnk(J2) equals the passage time.  With
    positive weights at most one orientation can be feasible.
    """

    graph: Lattice
    env: Environment
    f: int
    dsrc: tuple[int, ...]
    dsnk: tuple[int, ...]

    def orientation(self, eid: int) -> int:
        """+1 for base->far, -1 for far->base, 0 if on no geodesic."""
        g = self.graph
        g.check_edge(eid)
        j1, j2 = g.edge_endpoints(eid)
        w = self.env.weight(eid, g.spec.a, g.spec.b)
        if self.dsrc[j1] + w + self.dsnk[j2] == self.f:
            return 1
        if self.dsrc[j2] + w + self.dsnk[j1] == self.f:
            return -1
        return 0

    def on_geodesic(self, eid: int) -> bool:
        return self.orientation(eid) != 0

    def on_geodesic_edges(self) -> list[int]:
        return [e for e in range(self.graph.n_edges) if self.orientation(e) != 0]


def geodesic_dag(graph: Lattice, env: Environment) -> GeodesicDag:
    dsrc = shortest_distances(graph, env, graph.source_index)
    dsnk = shortest_distances(graph, env, graph.sink_index)
    return GeodesicDag(graph, env, dsrc[graph.sink_index], tuple(dsrc), tuple(dsnk))


def sigma(env: Environment, eid: int, delta: str) -> Environment:
    """Pin one coordinate of the environment to a or b; input untouched."""
    if not 0 <= eid < env.n_edges:
        raise InvalidInputError(f"edge id {eid} out of range [0, {env.n_edges})")
    return env.set_value(eid, delta)


def sigma_vector(
    env: Environment, edges: list[int] | tuple[int, ...], values
) -> Environment:
    """Compose single-edge pins; edges must be distinct so order is moot."""
    edges = list(edges)
    values = list(values)
    if len(edges) != len(values):
        raise InvalidInputError("edges and values must have equal length")
    if len(set(edges)) != len(edges):
        raise InvalidInputError("duplicate edges in a pin vector are ambiguous")
    out = env
    for eid, delta in zip(edges, values):
        out = sigma(out, eid, delta)
    return out


def first_derivative(graph: Lattice, env: Environment, eid: int) -> int:
    """f after pinning the edge to b, minus f after pinning it to a."""
    graph.check_edge(eid)
    return passage_time(graph, sigma(env, eid, "b")) - passage_time(
        graph, sigma(env, eid, "a")
    )


@dataclass(frozen=True)
class EdgeClassification:
    essential: bool
    semi_essential: bool
    influential: bool
    very_influential: bool


def classify_edge(graph: Lattice, env: Environment, eid: int) -> EdgeClassification:
    """Flags for one edge on one environment.

    essential: every geodesic uses the edge (the best path avoiding it
    is strictly slower); semi-essential: some geodesic uses it;
    influential: pinning it from a to b changes f; very influential:
    the change is the full gap b - a.
    """
    graph.check_edge(eid)
    dag = geodesic_dag(graph, env)
    semi = dag.orientation(eid) != 0
    essential = passage_time(graph, env, forbidden_edge=eid) > dag.f
    d = first_derivative(graph, env, eid)
    return EdgeClassification(essential, semi, d != 0, d == graph.spec.gap)


def detect_direction_switch(
    graph: Lattice, env: Environment, k: int, l: int, m: int
) -> bool:
    """True when edge k reverses its geodesic orientation between the
    two environments that pin (k, l, m) to (a, a, b) and (a, b, a)."""
    for eid in (k, l, m):
        graph.check_edge(eid)
    if len({k, l, m}) != 3:
        raise InvalidInputError("direction switching needs three distinct edges")
    o1 = geodesic_dag(graph, sigma_vector(env, (k, l, m), "aab")).orientation(k)
    o2 = geodesic_dag(graph, sigma_vector(env, (k, l, m), "aba")).orientation(k)
    return o1 != 0 and o2 != 0 and o1 != o2
