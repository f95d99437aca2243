"""Finite box lattices, canonical edge indexing, and two-valued environments.

The graph is the nearest-neighbour integer lattice restricted to an
axis-aligned box.  The production shape is the cube [-2n, 2n]^d; a
"reduced box" debug mode admits arbitrary boxes (including degenerate
axes) so that exhaustive enumeration over all 2^|W| environments stays
feasible.  Reduced-box mode is an extension of the model and is flagged
as such in every report that mentions it.

Edges carry one of two positive integer passage times a < b.  An
environment is stored as an integer bitmask over the canonical edge
order (lexicographic by base vertex, then axis); bit = 1 means the edge
carries b.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import InvalidInputError

Vertex = tuple[int, ...]


def _as_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    return value


def normalize_weights(a, b) -> tuple[int, int]:
    """Scale a rational weight pair to coprime positive integers.

    All quantities in the model are integer combinations of a and b, so
    integer weights keep every downstream computation exact.
    """
    fa, fb = Fraction(a), Fraction(b)
    if not 0 < fa < fb:
        raise InvalidInputError(f"weights must satisfy 0 < a < b, got a={a}, b={b}")
    scale = math.lcm(fa.denominator, fb.denominator)
    ia, ib = int(fa * scale), int(fb * scale)
    g = math.gcd(ia, ib)
    return ia // g, ib // g


@dataclass(frozen=True)
class LatticeSpec:
    """Parameters defining the box graph and its edge index space.

    ``radius`` is the n of the default box [-2n, 2n]^dim.  When
    ``reduced_box`` is given it overrides the default box; ``radius`` is
    kept for the record.  Defaults: source = origin, sink = radius * e1.
    """

    dim: int = 2
    radius: int = 1
    a: int = 1
    b: int = 2
    source: Vertex | None = None
    sink: Vertex | None = None
    reduced_box: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        _as_int("dim", self.dim)
        _as_int("radius", self.radius)
        _as_int("a", self.a)
        _as_int("b", self.b)
        if self.dim < 2:
            raise InvalidInputError(f"dim must be >= 2, got {self.dim}")
        if self.radius < 1:
            raise InvalidInputError(f"radius must be >= 1, got {self.radius}")
        if self.a <= 0 or self.a >= self.b:
            raise InvalidInputError(
                f"passage times must satisfy 0 < a < b, got a={self.a}, b={self.b}"
            )
        if self.reduced_box is not None:
            box = tuple(tuple(_as_int("box bound", c) for c in r) for r in self.reduced_box)
            if len(box) != self.dim or any(len(r) != 2 for r in box):
                raise InvalidInputError("reduced_box needs one [lo, hi] pair per axis")
            if any(lo > hi for lo, hi in box):
                raise InvalidInputError("reduced_box ranges must satisfy lo <= hi")
            object.__setattr__(self, "reduced_box", box)
        source = self.source if self.source is not None else (0,) * self.dim
        sink = self.sink
        if sink is None:
            sink = (self.radius,) + (0,) * (self.dim - 1)
        source = tuple(_as_int("source coordinate", c) for c in source)
        sink = tuple(_as_int("sink coordinate", c) for c in sink)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "sink", sink)
        box = self.box
        for name, v in (("source", source), ("sink", sink)):
            if len(v) != self.dim:
                raise InvalidInputError(f"{name} must have {self.dim} coordinates")
            if not all(lo <= c <= hi for c, (lo, hi) in zip(v, box)):
                raise InvalidInputError(f"{name} {v} lies outside the box {box}")
        if source == sink:
            raise InvalidInputError("source and sink must differ")

    @property
    def box(self) -> tuple[tuple[int, int], ...]:
        if self.reduced_box is not None:
            return self.reduced_box
        r = 2 * self.radius
        return tuple((-r, r) for _ in range(self.dim))

    @property
    def gap(self) -> int:
        return self.b - self.a

    def to_dict(self) -> dict:
        d = {"dim": self.dim, "radius": self.radius}
        if self.reduced_box is not None:
            d["reduced_box"] = [list(r) for r in self.reduced_box]
        d.update(
            {
                "a": self.a,
                "b": self.b,
                "source": list(self.source),
                "sink": list(self.sink),
            }
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        try:
            dim = d["dim"]
            radius = d["radius"]
            a = d["a"]
            b = d["b"]
        except KeyError as exc:
            raise InvalidInputError(f"missing required field {exc.args[0]!r}") from None
        reduced = d.get("reduced_box")
        return cls(
            dim=dim,
            radius=radius,
            a=a,
            b=b,
            source=tuple(d["source"]) if d.get("source") is not None else None,
            sink=tuple(d["sink"]) if d.get("sink") is not None else None,
            reduced_box=tuple(tuple(r) for r in reduced) if reduced is not None else None,
        )


class Lattice:
    """Immutable box graph with dense canonical edge indices.

    The structure is shareable across workers; environments are value
    types carried separately.
    """

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        box = spec.box
        self.lo = tuple(r[0] for r in box)
        self.hi = tuple(r[1] for r in box)
        sizes = tuple(h - l + 1 for l, h in zip(self.lo, self.hi))
        self.sizes = sizes
        strides = [1] * spec.dim
        for i in range(spec.dim - 2, -1, -1):
            strides[i] = strides[i + 1] * sizes[i + 1]
        self.strides = tuple(strides)
        self.n_vertices = strides[0] * sizes[0]

        dim = spec.dim
        edge_of = [-1] * (self.n_vertices * dim)
        edge_base: list[int] = []
        edge_axis: list[int] = []
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for vidx in range(self.n_vertices):
            v = self.index_vertex(vidx)
            for axis in range(dim):
                if v[axis] >= self.hi[axis]:
                    continue
                eid = len(edge_base)
                edge_of[vidx * dim + axis] = eid
                edge_base.append(vidx)
                edge_axis.append(axis)
                widx = vidx + strides[axis]
                adj[vidx].append((widx, eid))
                adj[widx].append((vidx, eid))
        self._edge_of = edge_of
        self.edge_base = edge_base
        self.edge_axis = edge_axis
        self.adj = adj
        self.n_edges = len(edge_base)
        self.source_index = self.vertex_index(spec.source)
        self.sink_index = self.vertex_index(spec.sink)

    def vertex_index(self, v: Vertex) -> int:
        if len(v) != self.spec.dim or not all(
            lo <= c <= hi for c, lo, hi in zip(v, self.lo, self.hi)
        ):
            raise InvalidInputError(f"vertex {tuple(v)} lies outside the box")
        return sum((c - lo) * s for c, lo, s in zip(v, self.lo, self.strides))

    def index_vertex(self, idx: int) -> Vertex:
        out = []
        for size, stride in zip(self.sizes, self.strides):
            out.append(idx // stride % size)
        return tuple(c + lo for c, lo in zip(out, self.lo))

    def encode_edge(self, vertex: Vertex, axis: int) -> int:
        """Dense id of the edge from ``vertex`` one step along ``axis``."""
        if not 0 <= axis < self.spec.dim:
            raise InvalidInputError(f"axis {axis} out of range for dim {self.spec.dim}")
        vidx = self.vertex_index(vertex)
        if vertex[axis] >= self.hi[axis]:
            raise InvalidInputError(
                f"edge ({tuple(vertex)}, axis {axis}) leaves the box"
            )
        return self._edge_of[vidx * self.spec.dim + axis]

    def decode_edge(self, eid: int) -> tuple[Vertex, int]:
        self.check_edge(eid)
        return self.index_vertex(self.edge_base[eid]), self.edge_axis[eid]

    def check_edge(self, eid: int) -> None:
        if isinstance(eid, bool) or not isinstance(eid, int) or not 0 <= eid < self.n_edges:
            raise InvalidInputError(f"edge id {eid!r} out of range [0, {self.n_edges})")

    def edge_endpoints(self, eid: int) -> tuple[int, int]:
        """Vertex indices (base, far) of an edge; far = base + e_axis."""
        base = self.edge_base[eid]
        return base, base + self.strides[self.edge_axis[eid]]


def build_lattice(spec: LatticeSpec) -> Lattice:
    return Lattice(spec)


@dataclass(frozen=True)
class Environment:
    """One assignment of {a, b} to every edge, as a bitmask (1 means b)."""

    n_edges: int
    mask: int = 0

    def __post_init__(self):
        if not 0 <= self.mask < (1 << self.n_edges):
            raise InvalidInputError("environment bitmask does not fit the edge set")

    @classmethod
    def all_a(cls, graph: Lattice) -> "Environment":
        return cls(graph.n_edges, 0)

    @classmethod
    def all_b(cls, graph: Lattice) -> "Environment":
        return cls(graph.n_edges, (1 << graph.n_edges) - 1)

    def value(self, eid: int) -> str:
        return "b" if self.mask >> eid & 1 else "a"

    def weight(self, eid: int, a: int, b: int) -> int:
        return b if self.mask >> eid & 1 else a

    def set_value(self, eid: int, delta: str) -> "Environment":
        if delta == "a":
            return Environment(self.n_edges, self.mask & ~(1 << eid))
        if delta == "b":
            return Environment(self.n_edges, self.mask | 1 << eid)
        raise InvalidInputError(f"edge value must be 'a' or 'b', got {delta!r}")

    def b_edges(self) -> list[int]:
        return [e for e in range(self.n_edges) if self.mask >> e & 1]


def environment_to_dict(graph: Lattice, env: Environment) -> dict:
    """Canonical serializable form: minority edges listed as exceptions.

    The default is chosen to minimise the exception list (ties go to
    "a"), which makes save(load(x)) byte-stable for canonical files.
    """
    if env.n_edges != graph.n_edges:
        raise InvalidInputError("environment does not match the graph's edge set")
    ones = env.mask.bit_count()
    default = "b" if ones > graph.n_edges - ones else "a"
    exceptions = []
    for eid in range(graph.n_edges):
        if env.value(eid) != default:
            vertex, axis = graph.decode_edge(eid)
            exceptions.append({"base": list(vertex), "axis": axis})
    d = graph.spec.to_dict()
    d["default"] = default
    d["exceptions"] = exceptions
    return d


def environment_from_dict(d: dict) -> tuple[Lattice, Environment]:
    spec = LatticeSpec.from_dict(d)
    graph = build_lattice(spec)
    if "default" not in d:
        raise InvalidInputError("environment file is missing the 'default' field")
    default = d["default"]
    if default not in ("a", "b"):
        raise InvalidInputError(f"default must be 'a' or 'b', got {default!r}")
    mask = (1 << graph.n_edges) - 1 if default == "b" else 0
    seen: set[int] = set()
    for exc in d.get("exceptions", []):
        try:
            vertex, axis = tuple(exc["base"]), exc["axis"]
        except (KeyError, TypeError):
            raise InvalidInputError(f"malformed exception entry {exc!r}") from None
        eid = graph.encode_edge(vertex, axis)
        if eid in seen:
            raise InvalidInputError(f"duplicate exception for edge {exc!r}")
        seen.add(eid)
        mask = mask | 1 << eid if default == "a" else mask & ~(1 << eid)
    return graph, Environment(graph.n_edges, mask)


def canonical_json(d: dict) -> str:
    return json.dumps(d, indent=2) + "\n"


def save_environment(graph: Lattice, env: Environment, path: str | Path) -> None:
    Path(path).write_text(canonical_json(environment_to_dict(graph, env)))


def load_environment(path: str | Path) -> tuple[Lattice, Environment]:
    try:
        d = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"no such environment file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON in {path}: {exc}") from None
    return environment_from_dict(d)
