"""The extremal two-lane family.

Two equal-length source-sink paths whose straight middle sections are
far apart; each section carries a block of derivative edges (counts m1,
m2) and a block of planted b-edges (counts beta1, beta2).  Every edge
off the two paths is priced b, so for any assignment to the derivative
edges the passage time is the minimum of two affine lane costs:

    L*a + (b-a) * min(i1 + beta1, i2 + beta2)

where i1, i2 count the derivative edges currently set to b.  The order
m1+m2 derivative of this environment has an exact closed form, checked
here against a brute-force signed-min sum and against a real lattice
embedding whose 2^(m1+m2) assignments are verified one by one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .combinatorics import binom
from .core import passage_time
from .errors import InvalidInputError, SizeCapError, VerificationError
from .lattice import Environment, Lattice, LatticeSpec, build_lattice

BRUTE_FORCE_CAP = 24
EMBED_CAP = 10


@dataclass(frozen=True)
class LaneSpec:
    """(m1, m2; beta1, beta2) plus the per-path edge count L."""

    m1: int
    m2: int
    beta1: int
    beta2: int
    lane_length: int | None = None

    def __post_init__(self):
        for name in ("m1", "m2", "beta1", "beta2"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidInputError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.m1 + self.m2 < 2:
            raise InvalidInputError("the lane family needs m1 + m2 >= 2")
        if self.lane_length is not None and self.lane_length < self.min_length:
            raise InvalidInputError(
                f"lane_length {self.lane_length} cannot hold the edge groups "
                f"(need >= {self.min_length})"
            )

    @property
    def min_length(self) -> int:
        return max(self.m1 + self.beta1, self.m2 + self.beta2)

    @property
    def order(self) -> int:
        return self.m1 + self.m2

    @property
    def length(self) -> int:
        return self.lane_length if self.lane_length is not None else self.min_length


def lane_passage_time(spec: LaneSpec, i1: int, i2: int, a: int = 1, b: int = 2) -> int:
    """Analytic two-lane minimum for i1, i2 derivative edges set to b."""
    if not (0 <= i1 <= spec.m1 and 0 <= i2 <= spec.m2):
        raise InvalidInputError(
            f"need 0 <= i1 <= m1 and 0 <= i2 <= m2, got i1={i1}, i2={i2}"
        )
    if not 0 < a < b:
        raise InvalidInputError(f"weights must satisfy 0 < a < b, got a={a}, b={b}")
    return spec.length * a + (b - a) * min(i1 + spec.beta1, i2 + spec.beta2)


def lane_derivative_bruteforce(spec: LaneSpec) -> int:
    """Signed-min sum over all (i1, i2), in units of b - a."""
    if spec.order > BRUTE_FORCE_CAP:
        raise SizeCapError(f"m1 + m2 = {spec.order} exceeds the cap of {BRUTE_FORCE_CAP}")
    total = 0
    for i1 in range(spec.m1 + 1):
        c1 = binom(spec.m1, i1)
        for i2 in range(spec.m2 + 1):
            term = c1 * binom(spec.m2, i2) * min(i1 + spec.beta1, i2 + spec.beta2)
            if (spec.m1 - i1 + spec.m2 - i2) & 1:
                total -= term
            else:
                total += term
    return total


def lane_derivative_closed_form(spec: LaneSpec) -> int:
    """Closed form, in units of b - a; zero when one planted block
    dominates the other lane's whole derivative budget."""
    if spec.beta1 - spec.beta2 >= spec.m2 or spec.beta2 - spec.beta1 >= spec.m1:
        return 0
    value = binom(spec.order - 2, spec.m1 + spec.beta1 - spec.beta2 - 1)
    sign = -1 if (spec.order + spec.beta1 + spec.beta2) & 1 else 1
    return sign * value


def extremal_tuples(m: int) -> tuple[LaneSpec, LaneSpec]:
    """The (upper, lower) attainment tuples for order m >= 2."""
    if m < 2:
        raise InvalidInputError(f"attainment tuples need order >= 2, got {m}")
    if m & 1:
        upper = LaneSpec((m - 1) // 2, (m + 1) // 2, 1, 0)
        lower = LaneSpec((m + 1) // 2, (m - 1) // 2, 0, 0)
    else:
        upper = LaneSpec(m // 2, m // 2, 0, 0)
        lower = LaneSpec(m // 2 - 1, m // 2 + 1, 1, 0)
    return upper, lower


@dataclass(frozen=True)
class EmbeddedLanes:
    """A verified lattice realization of a lane configuration."""

    lane_spec: LaneSpec
    lattice_spec: LatticeSpec
    graph: Lattice
    env: Environment
    s_edges: tuple[int, ...]
    lane_length: int
    dim: int = 2


def _default_span(spec: LaneSpec, a: int, b: int, h: int) -> int:
    # Long enough that the straight b-priced path between the lanes can
    # never undercut the worst lane cost; verification still decides.
    shortcut_guard = -(-2 * h * a // (b - a)) + min(
        spec.m1 + spec.beta1, spec.m2 + spec.beta2
    )
    return max(3 * (spec.m1 + spec.beta1), 3 * (spec.m2 + spec.beta2), shortcut_guard, 3) + 1


def embed_lanes(
    spec: LaneSpec,
    a: int = 1,
    b: int = 2,
    separation: int = 2,
    span: int | None = None,
) -> EmbeddedLanes:
    """Realize the lane environment on a 2d reduced box and verify it.

    The two paths run along y = +-separation joined by vertical risers at
    both ends; special edges sit on the horizontal runs with 2-edge gaps.
    The construction is accepted only if for every assignment to the
    derivative edges the lattice passage time equals the analytic lane
    minimum, which substitutes for the qualitative far-apart conditions.

    The closed form is stated for dimension >= 3; the embedding is 2d
    (value checks are dimension-free once verification passes) and every
    report downstream carries the dimension.
    """
    if spec.order > EMBED_CAP:
        raise SizeCapError(f"embedding caps m1 + m2 at {EMBED_CAP}, got {spec.order}")
    if not 0 < a < b:
        raise InvalidInputError(f"weights must satisfy 0 < a < b, got a={a}, b={b}")
    h = separation
    if h < 1:
        raise InvalidInputError(f"lane separation must be >= 1, got {h}")
    x_span = span if span is not None else _default_span(spec, a, b, h)
    slots_needed = max(spec.m1 + spec.beta1, spec.m2 + spec.beta2)
    if slots_needed and x_span < 3 * slots_needed:
        raise InvalidInputError(
            f"span {x_span} cannot hold {slots_needed} gapped special edges"
        )
    lattice_spec = LatticeSpec(
        dim=2,
        radius=1,
        a=a,
        b=b,
        source=(0, 0),
        sink=(x_span, 0),
        reduced_box=((0, x_span), (-h, h)),
    )
    graph = build_lattice(lattice_spec)
    lane_length = x_span + 2 * h

    def lane_edges(y: int) -> list[int]:
        risers_left = [graph.encode_edge((0, t if y > 0 else -t - 1), 1) for t in range(h)]
        run = [graph.encode_edge((i, y), 0) for i in range(x_span)]
        risers_right = [
            graph.encode_edge((x_span, t if y > 0 else -t - 1), 1) for t in range(h)
        ]
        return risers_left + run + risers_right

    path1 = lane_edges(h)
    path2 = lane_edges(-h)

    def specials(y: int, m: int, beta: int) -> tuple[list[int], list[int]]:
        slots = [graph.encode_edge((1 + 3 * t, y), 0) for t in range(m + beta)]
        return slots[:m], slots[m:]

    c1, b1 = specials(h, spec.m1, spec.beta1)
    c2, b2 = specials(-h, spec.m2, spec.beta2)

    mask = (1 << graph.n_edges) - 1
    for eid in path1 + path2:
        mask &= ~(1 << eid)
    for eid in b1 + b2:
        mask |= 1 << eid
    env = Environment(graph.n_edges, mask)
    s_edges = tuple(sorted(c1 + c2))

    used_spec = LaneSpec(spec.m1, spec.m2, spec.beta1, spec.beta2, lane_length)
    m = spec.order
    for assignment in range(1 << m):
        emask = mask
        i1 = i2 = 0
        for t, eid in enumerate(c1 + c2):
            if assignment >> t & 1:
                emask |= 1 << eid
                if t < spec.m1:
                    i1 += 1
                else:
                    i2 += 1
        got = passage_time(graph, Environment(graph.n_edges, emask))
        expected = lane_passage_time(used_spec, i1, i2, a, b)
        if got != expected:
            raise VerificationError(
                "embedding violates the two-lane model: assignment "
                f"{assignment:0{m}b} gives passage time {got}, lane model says "
                f"{expected}; a path off the two lanes is too cheap"
            )
    return EmbeddedLanes(used_spec, lattice_spec, graph, env, s_edges, lane_length)
