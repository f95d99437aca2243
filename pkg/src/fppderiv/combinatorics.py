"""Exact integer identities used as independent oracles by the lane
family and its tests.  Arbitrary-precision throughout."""

from __future__ import annotations

from functools import lru_cache
from math import comb

from .errors import InvalidInputError, TheoremViolationError


def binom(n: int, k: int) -> int:
    """Binomial coefficient with the empty-set convention (0 out of range)."""
    if k < 0 or k > n:
        return 0
    return comb(n, k)


@lru_cache(maxsize=512)
def _pascal_row(n: int) -> tuple[int, ...]:
    row = [1]
    for k in range(1, n + 1):
        row.append(row[-1] * (n - k + 1) // k)
    return tuple(row)


def alternating_tail_sum(a_lo: int, b_top: int) -> int:
    """Sum of (-1)^k C(B, k) for k = A..B, cross-checked against its
    closed form (0 when A = 0, else (-1)^A C(B-1, A-1))."""
    if not 0 <= a_lo <= b_top:
        raise InvalidInputError(f"need 0 <= A <= B, got A={a_lo}, B={b_top}")
    row = _pascal_row(b_top)
    direct = sum(-row[k] if k & 1 else row[k] for k in range(a_lo, b_top + 1))
    closed = alternating_tail_sum_closed_form(a_lo, b_top)
    if direct != closed:
        raise TheoremViolationError(
            f"alternating tail sum mismatch at A={a_lo}, B={b_top}: "
            f"direct={direct}, closed={closed}"
        )
    return direct


def alternating_tail_sum_closed_form(a_lo: int, b_top: int) -> int:
    if not 0 <= a_lo <= b_top:
        raise InvalidInputError(f"need 0 <= A <= B, got A={a_lo}, B={b_top}")
    if a_lo == 0:
        # (1-1)^B, which is 1 (not 0) in the degenerate corner B = 0.
        return 1 if b_top == 0 else 0
    value = binom(b_top - 1, a_lo - 1)
    return -value if a_lo & 1 else value


def vandermonde(k: int, n: int, a_shift: int) -> int:
    """Two-way committee count: sum of C(k, i) C(n, n+A-i) over the
    feasible i equals C(n+k, n+A); both sides computed and compared."""
    if k < 0 or n < 0:
        raise InvalidInputError(f"need n, k >= 0, got n={n}, k={k}")
    if not 0 <= n + a_shift <= n + k:
        raise InvalidInputError(f"need 0 <= n+A <= n+k, got n={n}, k={k}, A={a_shift}")
    lo = max(0, a_shift)
    hi = min(k, n + a_shift)
    rowk = _pascal_row(k)
    rown = _pascal_row(n)
    direct = sum(rowk[i] * rown[n + a_shift - i] for i in range(lo, hi + 1))
    closed = binom(n + k, n + a_shift)
    if direct != closed:
        raise TheoremViolationError(
            f"committee identity mismatch at k={k}, n={n}, A={a_shift}: "
            f"direct={direct}, closed={closed}"
        )
    return direct


def check_identities(max_b: int = 64, max_nk: int = 64) -> dict[str, int]:
    """Full-grid scan of both identities; raises on any mismatch."""
    alternating = 0
    for b_top in range(max_b + 1):
        for a_lo in range(b_top + 1):
            alternating_tail_sum(a_lo, b_top)
            alternating += 1
    committees = 0
    for total in range(max_nk + 1):
        for n in range(total + 1):
            k = total - n
            for target in range(total + 1):
                vandermonde(k, n, target - n)
                committees += 1
    return {"alternating_checked": alternating, "vandermonde_checked": committees}
