"""Parameter algebra for the two coordinate charts on the inequality's
parameter plane.

A point of the weighted-inequality family is described either by
``(N, a, b)`` (weights ``|x|^(-2a)`` on the gradient side and ``|x|^(-bp)``
on the norm side) or, after the log-radial change of variables, by cylinder
coordinates ``(N, Lambda, p)`` with

    Lambda = (N - 2 - 2a)^2 / 4,      p = 2N / (N - 2 + 2(b - a)).

Both charts, the inversion duality a -> N-2-a that leaves the optimal
constant invariant, and the explicit instability curve (in both charts) are
implemented here as exact closed-form arithmetic.  Everything in this module
is pure and cheap; the only error source is float rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import DomainError

#: Absolute tolerance for parameter comparisons.  All formulas here are
#: closed-form, so only rounding error occurs.
PARAM_ATOL = 1e-12

REGION_INTERIOR = "interior"
REGION_HARDY_EDGE = "hardy_edge"
REGION_SOBOLEV_EDGE = "sobolev_edge"
REGION_INVALID = "invalid"

EDGE_HARDY = "hardy"
EDGE_SOBOLEV = "sobolev"


def critical_a(N: int) -> float:
    """The critical weight parameter a_c = (N-2)/2 where the gradient weight
    degenerates."""
    return 0.5 * (N - 2)


def critical_p(N: int) -> float:
    """Upper endpoint of the admissible exponent range: 2N/(N-2) for N >= 3,
    +inf for N = 2."""
    if N == 2:
        return math.inf
    return 2.0 * N / (N - 2)


def _check_dimension(N: int) -> None:
    if not isinstance(N, int) or N < 2:
        raise DomainError(f"dimension N must be an integer >= 2, got {N!r}")


@dataclass(frozen=True)
class CknParams:
    """A point (N, a, b) of the weighted-inequality parameter plane.

    Points with a = a_c are rejected outright (the cylinder chart does not
    parametrize them invertibly).  Any other (a, b) may be constructed; the
    ``region`` property classifies it as interior, on one of the two edges,
    or invalid, and the conversion operations reject non-admissible points.
    """

    N: int
    a: float
    b: float

    def __post_init__(self) -> None:
        _check_dimension(self.N)
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("a and b must be finite")
        if abs(self.a - critical_a(self.N)) <= PARAM_ATOL:
            raise DomainError(
                f"a = {self.a} coincides with the critical value "
                f"a_c = {critical_a(self.N)} (N = {self.N})"
            )

    @property
    def a_c(self) -> float:
        return critical_a(self.N)

    @property
    def region(self) -> str:
        """Classification of (a, b) within the admissible strip a <= b <= a+1."""
        if abs(self.b - (self.a + 1.0)) <= PARAM_ATOL:
            return REGION_HARDY_EDGE
        if abs(self.b - self.a) <= PARAM_ATOL:
            # The b = a edge is admissible for N >= 3 only.
            return REGION_SOBOLEV_EDGE if self.N >= 3 else REGION_INVALID
        if self.a < self.b < self.a + 1.0:
            return REGION_INTERIOR
        return REGION_INVALID

    @property
    def is_admissible(self) -> bool:
        return self.region != REGION_INVALID


@dataclass(frozen=True)
class CylParams:
    """Cylinder coordinates (N, Lambda, p) of a parameter-plane point.

    ``edge`` tags the two closed endpoints of the exponent range: ``"hardy"``
    for p = 2 (image of b = a+1) and ``"sobolev"`` for p = 2N/(N-2) with
    N >= 3 (image of b = a).  Edge points are representable so that chart
    conversions round-trip, but solver-facing operations require the open
    range and reject them.
    """

    N: int
    lam: float
    p: float
    edge: str | None = field(default=None)

    def __post_init__(self) -> None:
        _check_dimension(self.N)
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise DomainError(f"Lambda must be positive, got {self.lam!r}")
        if not math.isfinite(self.p):
            raise DomainError(f"p must be finite, got {self.p!r}")
        p_max = critical_p(self.N)
        if self.p < 2.0 - PARAM_ATOL:
            raise DomainError(f"p = {self.p} below the admissible range [2, {p_max}]")
        if self.N >= 3 and self.p > p_max + PARAM_ATOL:
            raise DomainError(f"p = {self.p} above the critical exponent {p_max}")
        # Auto-tag the edges; an explicitly supplied tag must agree.
        tag = None
        if abs(self.p - 2.0) <= PARAM_ATOL:
            tag = EDGE_HARDY
        elif self.N >= 3 and abs(self.p - p_max) <= PARAM_ATOL:
            tag = EDGE_SOBOLEV
        if self.edge is None:
            object.__setattr__(self, "edge", tag)
        elif self.edge != tag:
            raise DomainError(
                f"edge tag {self.edge!r} inconsistent with p = {self.p} (expected {tag!r})"
            )

    @property
    def sqrt_lam(self) -> float:
        return math.sqrt(self.lam)

    @property
    def in_open_range(self) -> bool:
        """True when 2 < p < 2N/(N-2) strictly (2 < p < inf for N = 2)."""
        return self.edge is None

    def require_open_range(self, who: str = "this operation") -> None:
        if not self.in_open_range:
            raise DomainError(
                f"{who} requires the open exponent range 2 < p < {critical_p(self.N)}; "
                f"got p = {self.p} ({self.edge} edge)"
            )


def cyl_from_ckn(q: CknParams, auto_dualize: bool = False) -> CylParams:
    """Convert (N, a, b) to cylinder coordinates (N, Lambda, p).

    Requires a < a_c; callers holding a > a_c must either dualize first or
    pass ``auto_dualize=True`` to have the inversion duality applied
    automatically (both charts describe the same optimal constant).
    """
    if not q.is_admissible:
        raise DomainError(
            f"(a, b) = ({q.a}, {q.b}) lies outside the admissible strip "
            f"a <= b <= a+1 (N = {q.N})"
        )
    if q.a > q.a_c:
        if not auto_dualize:
            raise DomainError(
                f"a = {q.a} > a_c = {q.a_c}: apply kelvin_dual first "
                "(or pass auto_dualize=True)"
            )
        q = kelvin_dual(q)
    lam = 0.25 * (q.N - 2.0 - 2.0 * q.a) ** 2
    p = 2.0 * q.N / (q.N - 2.0 + 2.0 * (q.b - q.a))
    return CylParams(q.N, lam, p)


def ckn_from_cyl(c: CylParams) -> CknParams:
    """Convert cylinder coordinates back to the (a, b) chart.

    The output always lies on the a < a_c branch and satisfies the linear
    relation b = a + 1 + N(1/p - 1/2) exactly (up to rounding).
    """
    s = c.sqrt_lam
    a = 0.5 * (c.N - 2.0) - s
    b = c.N / c.p - s
    return CknParams(c.N, a, b)


def kelvin_dual(q: CknParams) -> CknParams:
    """Inversion duality (a, b) -> (N-2-a, b+N-2-2a).

    An involution; both points carry the same optimal constant and the same
    Lambda, so it folds the a > a_c half-plane onto the canonical a < a_c
    chart.
    """
    return CknParams(q.N, q.N - 2.0 - q.a, q.b + q.N - 2.0 - 2.0 * q.a)


def fs_b(N: int, a: float) -> float:
    """Explicit instability curve b^FS(a) in the (a, b) chart.

    Below this curve (b < b^FS(a), a < 0) the radial extremal is a saddle
    point of the associated quotient and extremals are non-radial.  The
    curve is classically stated for a < 0; evaluation at 0 <= a < a_c is
    permitted but flagged with a RuntimeWarning since no claim is attached
    to it there.
    """
    _check_dimension(N)
    if a >= critical_a(N) - PARAM_ATOL:
        raise DomainError(f"fs_b requires a < a_c = {critical_a(N)}, got a = {a}")
    if a >= 0.0:
        warnings.warn(
            f"fs_b evaluated at a = {a} >= 0, outside the curve's stated "
            "domain a < 0",
            RuntimeWarning,
            stacklevel=2,
        )
    m = N - 2.0 - 2.0 * a
    return N * m / (2.0 * math.sqrt(m * m + 4.0 * (N - 1.0))) - 0.5 * m


def fs_lambda(N: int, p: float) -> float:
    """Instability threshold in cylinder coordinates: 4(N-1)/(p^2-4).

    Strictly decreasing in p, diverging as p -> 2+.  For Lambda above this
    value the radial profile is linearly unstable.
    """
    _check_dimension(N)
    if p <= 2.0:
        raise DomainError(f"fs_lambda requires p > 2, got p = {p}")
    return 4.0 * (N - 1.0) / (p * p - 4.0)
